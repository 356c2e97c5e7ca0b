#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flowcat/flow_category.hpp"

namespace flowcat::cw {

// Cell bookkeeping for the filtered realization of a flow category: one cell
// per object at dimension index + (L - q), attaching degrees from the signed
// point counts.
struct CWData {
  struct Cell {
    std::string id;
    int dim = 0;
  };
  std::vector<Cell> cells;  // ordered by (index, id)
  std::map<std::pair<std::string, std::string>, long> attaching_degrees;
  int L = 0;  // suspension shift
  int q = 0;  // minimum index of the source category

  int shift() const { return L - q; }
};

struct FiltrationLevel {
  int level = 0;          // the index value
  std::vector<std::string> cells;
  long sphere_count = 0;  // spheres in the subquotient wedge
  int sphere_dim = 0;     // common dimension level + (L - q)
};

// ShiftTooSmall when L < max index - min index.  Default L is the smallest
// admissible value.
CWData realize(const FlowCategory& f, int L);
CWData realize(const FlowCategory& f);

// The induced complex, supported in degrees [L, L + p - q]; equals the
// category's complex shifted up by L - q.
linalg::ChainComplex cellular_complex(const CWData& c);

std::vector<FiltrationLevel> subquotient_report(const FlowCategory& f, int L);
std::vector<FiltrationLevel> subquotient_report(const FlowCategory& f);

// Chain-level shadow of the null-homotopy coherence: consecutive boundary
// maps compose to zero, with the offending pair located on failure.
Report homotopy_chain_check(const FlowCategory& f);

// Exports.
std::string to_text(const CWData& c);
std::string to_dot(const CWData& c);

}  // namespace flowcat::cw
