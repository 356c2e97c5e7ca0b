#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "flowcat/chain_complex.hpp"
#include "flowcat/report.hpp"

namespace flowcat {

struct FlowObject {
  std::string id;
  int index = 0;
  std::string label;
};

// Signed points of a zero-dimensional moduli space between objects whose
// indices differ by one.  Point keys are positions in `signs`; the order is
// canonical (fixed by the producer) and part of the data.
struct ModuliZero {
  std::string from, to;
  std::vector<int> signs;  // each +1 or -1

  long signed_count() const {
    long n = 0;
    for (int s : signs) n += s;
    return n;
  }
};

// A break of a one-dimensional flow family through an intermediate object:
// point p of M(from, mid) followed by point q of M(mid, to).
struct BrokenFlow {
  std::string mid;
  int p = 0, q = 0;

  bool operator==(const BrokenFlow& o) const {
    return mid == o.mid && p == o.p && q == o.q;
  }
  bool operator<(const BrokenFlow& o) const {
    if (mid != o.mid) return mid < o.mid;
    if (p != o.p) return p < o.p;
    return q < o.q;
  }
};

struct Interval {
  BrokenFlow end0, end1;
};
struct Circle {};
using ModuliComponent = std::variant<Interval, Circle>;

// Compactified one-dimensional moduli between objects with index gap two,
// given component by component.
struct ModuliOne {
  std::string from, to;
  std::vector<ModuliComponent> components;
};

struct FlowCategory {
  std::vector<FlowObject> objects;
  std::vector<ModuliZero> moduli0;
  std::vector<ModuliOne> moduli1;
  bool has_moduli1 = false;  // distinguishes "not supplied" from "all empty"
  bool mod2 = false;         // ignore signs, count points mod 2

  const FlowObject* find(const std::string& id) const;
  int index_of(const std::string& id) const;  // UnknownObject if missing
  const ModuliZero* moduli0_for(const std::string& a, const std::string& b) const;
  const ModuliOne* moduli1_for(const std::string& a, const std::string& b) const;

  // n_{a,b}: signed point count, or the mod-2 count when mod2 is set.
  // Absent tables count as zero.
  long coefficient(const std::string& a, const std::string& b) const;

  // Ids with the given index, sorted; this ordering fixes matrix rows/columns
  // and cell order everywhere downstream.
  std::vector<std::string> objects_at(int index) const;

  bool empty() const { return objects.empty(); }
  int min_index() const;  // UnknownObject when empty
  int max_index() const;
};

Report validate(const FlowCategory& f);

// Rows indexed by objects of index m-1, columns by objects of index m,
// both sorted by id; entry = coefficient.
linalg::IntMatrix boundary_matrix(const FlowCategory& f, int m);

// For every index-gap-2 pair: the numeric check sum_c n(a,c) n(c,b) = 0, and
// when one-dimensional data is present, interval ends must carry opposite
// product signs and exhaust each broken flow exactly once.
Report d_squared_report(const FlowCategory& f);

// DSquaredNonzero unless the numeric part of d_squared_report passes.
linalg::ChainComplex morse_complex(const FlowCategory& f);

struct GradedHomology {
  int lo = 0;
  std::vector<linalg::HomologyGroup> groups;  // degree lo upward

  const linalg::HomologyGroup* at(int degree) const {
    int i = degree - lo;
    if (i < 0 || i >= static_cast<int>(groups.size())) return nullptr;
    return &groups[static_cast<std::size_t>(i)];
  }
};

// In mod-2 mode the groups carry F_2 dimensions in free_rank and no torsion.
GradedHomology homology(const FlowCategory& f);

// Full subcategory on objects between a and b in the reachability order
// derived from nonempty moduli tables.
FlowCategory interval_subcategory(const FlowCategory& f, const std::string& a,
                                  const std::string& b);

}  // namespace flowcat
