#pragma once

#include <map>
#include <vector>

#include "flowcat/exact_linalg.hpp"
#include "flowcat/report.hpp"

namespace flowcat::linalg {

// Bounded complex of free abelian groups.  Degree d has rank ranks[d - lo];
// boundary[d] maps degree d to degree d-1 (rows = rank(d-1), cols = rank(d)).
// Boundaries that are absent are zero.
struct ChainComplex {
  int lo = 0;
  std::vector<long> ranks;
  std::map<int, IntMatrix> boundary;

  int hi() const { return lo + static_cast<int>(ranks.size()) - 1; }
  bool empty() const { return ranks.empty(); }

  long rank(int d) const {
    if (d < lo || d > hi()) return 0;
    return ranks[static_cast<std::size_t>(d - lo)];
  }

  IntMatrix boundary_or_zero(int d) const {
    auto it = boundary.find(d);
    if (it != boundary.end()) return it->second;
    return IntMatrix(static_cast<std::size_t>(rank(d - 1)),
                     static_cast<std::size_t>(rank(d)));
  }

  // Shape consistency plus d∘d = 0, one check per consecutive degree pair.
  Report d_squared_check() const;

  HomologyGroup homology_at_degree(int d) const;

  // Homology in every degree lo..hi (empty complex gives an empty vector).
  std::vector<HomologyGroup> homology() const;
};

}  // namespace flowcat::linalg
