#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "flowcat/field.hpp"
#include "flowcat/flow_category.hpp"

namespace flowcat::spectral {

// Graded coefficient ranks h_q(pt) over a chosen field, finitely supported.
struct CoefficientTheory {
  std::string name;
  linalg::FieldSpec field = linalg::FieldSpec::rationals();
  std::map<int, long> ranks;  // q -> rank, only nonzero entries

  // Single copy of the field in degree zero.
  bool ordinary() const {
    return ranks.size() == 1 && ranks.count(0) == 1 && ranks.at(0) == 1;
  }
  bool single_row() const { return ranks.size() == 1 && ranks.count(0) == 1; }

  static CoefficientTheory ordinary_over(linalg::FieldSpec f) {
    return {"ordinary", f, {{0, 1}}};
  }
};

using Bidegree = std::pair<int, int>;  // (p, q)

// One page: entry ranks plus the differentials of bidegree (-r, r-1), keyed by
// their source entry.  Zero-rank entries are omitted from `ranks`.
template <class F>
struct SpectralPage {
  int r = 1;
  std::map<Bidegree, long> ranks;
  std::map<Bidegree, linalg::FMat<F>> d;

  long rank_at(int p, int q) const {
    auto it = ranks.find({p, q});
    return it == ranks.end() ? 0 : it->second;
  }
};

// E1 of the index filtration: rank at (p,q) = #objects of index p+shift times
// h_q, with d1 = boundary (x) identity reduced over the field.
template <class F>
SpectralPage<F> build_E1(const F& k, const FlowCategory& f, const CoefficientTheory& h,
                         int index_shift = 0);

// Homology of (page, next_d).  The supplied differentials must have bidegree
// (-r, r-1) and shapes matching the page ranks (BidegreeMismatch) and square
// to zero (NotADifferential).  The overload without next_d uses page.d.
template <class F>
SpectralPage<F> turn_page(const F& k, const SpectralPage<F>& page,
                          const std::map<Bidegree, linalg::FMat<F>>& next_d);
template <class F>
SpectralPage<F> turn_page(const F& k, const SpectralPage<F>& page);

// A based complex over the field with a filtration level per basis element.
template <class F>
struct FilteredComplex {
  int lo = 0;
  std::vector<long> ranks;                    // per degree lo..hi
  std::map<int, linalg::FMat<F>> boundary;    // degree d -> matrix into d-1
  std::map<int, std::vector<int>> levels;     // degree d -> level per basis element

  int hi() const { return lo + static_cast<int>(ranks.size()) - 1; }
  long rank(int d) const {
    return (d < lo || d > hi()) ? 0 : ranks[static_cast<std::size_t>(d - lo)];
  }
  linalg::FMat<F> boundary_or_zero(int d) const {
    auto it = boundary.find(d);
    if (it != boundary.end()) return it->second;
    return linalg::FMat<F>(static_cast<std::size_t>(rank(d - 1)),
                           static_cast<std::size_t>(rank(d)));
  }
  int level_of(int d, std::size_t i) const {
    auto it = levels.find(d);
    return it == levels.end() ? 0 : it->second[i];
  }
};

template <class F>
struct FilteredResult {
  std::vector<SpectralPage<F>> pages;  // E_1, E_2, ...
  SpectralPage<F> e_infinity;
  std::map<int, long> total_homology;  // degree -> rank over the field
  bool converged = false;              // sum of E_inf ranks matches per degree
};

// Pages until stabilization, with honest induced differentials on each page.
// NotFiltered when the boundary raises filtration, DSquaredNonzero when the
// complex is not a complex.
template <class F>
FilteredResult<F> run_filtered(const F& k, const FilteredComplex<F>& fc);

// For coefficients concentrated in q = 0: checks E2 = E_infinity (structural)
// and that the E2 row reproduces the field homology of the category's complex
// computed by direct rank-nullity.
Report collapse_check(const FlowCategory& f, const CoefficientTheory& h);

// Field-dispatched convenience for the CLI: rank tables of E1 and E2.
struct PageTable {
  int r = 1;
  std::map<Bidegree, long> ranks;
};
std::vector<PageTable> page_tables(const FlowCategory& f, const CoefficientTheory& h);

std::string table_text(const PageTable& t);

}  // namespace flowcat::spectral
