#pragma once

// Shared fixtures and independent oracles for the test suites.  Everything
// here recomputes expected values by routes independent of the library code
// under test: minor-gcd arithmetic for normal forms, direct subspace ranks
// for filtrations, and hand-built categories for the classical surfaces.

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <vector>

#include "flowcat/exact_linalg.hpp"
#include "flowcat/field.hpp"
#include "flowcat/flow_category.hpp"
#include "flowcat/spectral.hpp"

namespace fixtures {

using flowcat::Circle;
using flowcat::FlowCategory;
using flowcat::Interval;
using flowcat::ModuliOne;
using flowcat::ModuliZero;
using flowcat::linalg::Int;
using flowcat::linalg::IntMatrix;

// ------------------------------------------------------------ categories

// Height-function circle: two objects, two opposite arcs.
inline FlowCategory circle_category() {
  FlowCategory f;
  f.objects = {{"max", 1, ""}, {"min", 0, ""}};
  f.moduli0 = {{"max", "min", {1, -1}}};
  return f;
}

// Round sphere: no adjacent indices; the compactified top family is a circle.
inline FlowCategory sphere_category() {
  FlowCategory f;
  f.objects = {{"max", 2, ""}, {"min", 0, ""}};
  f.has_moduli1 = true;
  f.moduli1 = {{"max", "min", {Circle{}}}};
  return f;
}

// Standing torus: two opposite-sign flows for every adjacent pair, four
// one-dimensional families whose ends exhaust the broken flows.
inline FlowCategory torus_category() {
  FlowCategory f;
  f.objects = {{"top", 2, ""}, {"s1", 1, ""}, {"s2", 1, ""}, {"bot", 0, ""}};
  f.moduli0 = {{"top", "s1", {1, -1}},
               {"top", "s2", {1, -1}},
               {"s1", "bot", {1, -1}},
               {"s2", "bot", {1, -1}}};
  f.has_moduli1 = true;
  ModuliOne families{"top", "bot", {}};
  families.components = {
      Interval{{"s1", 0, 0}, {"s1", 0, 1}},
      Interval{{"s1", 1, 0}, {"s1", 1, 1}},
      Interval{{"s2", 0, 0}, {"s2", 0, 1}},
      Interval{{"s2", 1, 0}, {"s2", 1, 1}},
  };
  f.moduli1 = {families};
  return f;
}

// ------------------------------------------------- random valid categories

// Random three-layer category with d^2 = 0 by construction and consistent
// one-dimensional data: boundary matrices are drawn so that D1 * D2 = 0
// exactly, point lists realize the counts with optional canceling pairs, and
// interval ends pair every broken flow once with opposite product signs.
inline FlowCategory random_valid_category(std::mt19937& rng) {
  std::uniform_int_distribution<int> layer_size(1, 3);
  std::uniform_int_distribution<int> small(-2, 2);
  std::uniform_int_distribution<int> extra_pairs(0, 1);

  const int n2 = layer_size(rng), n1 = layer_size(rng), n0 = layer_size(rng);

  IntMatrix d1(static_cast<std::size_t>(n0), static_cast<std::size_t>(n1));
  for (std::size_t i = 0; i < d1.rows(); ++i)
    for (std::size_t j = 0; j < d1.cols(); ++j) d1.at(i, j) = small(rng);

  IntMatrix ker = flowcat::linalg::kernel_basis(d1);
  IntMatrix d2(static_cast<std::size_t>(n1), static_cast<std::size_t>(n2));
  for (std::size_t j = 0; j < d2.cols(); ++j)
    for (std::size_t k = 0; k < ker.cols(); ++k) {
      Int c = small(rng);
      for (std::size_t i = 0; i < d2.rows(); ++i) d2.at(i, j) += c * ker.at(i, k);
    }

  FlowCategory f;
  for (int i = 0; i < n2; ++i) f.objects.push_back({"a" + std::to_string(i), 2, ""});
  for (int i = 0; i < n1; ++i) f.objects.push_back({"b" + std::to_string(i), 1, ""});
  for (int i = 0; i < n0; ++i) f.objects.push_back({"c" + std::to_string(i), 0, ""});

  auto realize_points = [&](const Int& count) {
    std::vector<int> signs;
    long n = count.get_si();
    for (long k = 0; k < std::abs(n); ++k) signs.push_back(n > 0 ? 1 : -1);
    for (int k = extra_pairs(rng); k > 0; --k) {
      signs.push_back(1);
      signs.push_back(-1);
    }
    std::shuffle(signs.begin(), signs.end(), rng);
    return signs;
  };

  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n1; ++i) {
      auto signs = realize_points(d2.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      if (!signs.empty())
        f.moduli0.push_back({"a" + std::to_string(j), "b" + std::to_string(i), signs});
    }
  for (int j = 0; j < n1; ++j)
    for (int i = 0; i < n0; ++i) {
      auto signs = realize_points(d1.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j)));
      if (!signs.empty())
        f.moduli0.push_back({"b" + std::to_string(j), "c" + std::to_string(i), signs});
    }

  // Pair the broken flows of every gap-2 pair into intervals.
  f.has_moduli1 = true;
  for (int j = 0; j < n2; ++j)
    for (int i = 0; i < n0; ++i) {
      std::string a = "a" + std::to_string(j), b = "c" + std::to_string(i);
      std::vector<flowcat::BrokenFlow> plus, minus;
      for (int m = 0; m < n1; ++m) {
        std::string c = "b" + std::to_string(m);
        const ModuliZero* left = f.moduli0_for(a, c);
        const ModuliZero* right = f.moduli0_for(c, b);
        if (!left || !right) continue;
        for (int p = 0; p < static_cast<int>(left->signs.size()); ++p)
          for (int q = 0; q < static_cast<int>(right->signs.size()); ++q) {
            int s = left->signs[static_cast<std::size_t>(p)] *
                    right->signs[static_cast<std::size_t>(q)];
            (s > 0 ? plus : minus).push_back({c, p, q});
          }
      }
      std::shuffle(plus.begin(), plus.end(), rng);
      std::shuffle(minus.begin(), minus.end(), rng);
      ModuliOne m1{a, b, {}};
      for (std::size_t k = 0; k < plus.size(); ++k)
        m1.components.emplace_back(Interval{plus[k], minus[k]});
      for (int k = extra_pairs(rng); k > 0; --k) m1.components.emplace_back(Circle{});
      f.moduli1.push_back(std::move(m1));
    }
  return f;
}

// Mutations that a consistency checker must catch.  A sign flip is a genuine
// corruption only when some interval pairs an end through the flipped point
// with an end avoiding it (flipping both ends of an interval at once is just
// a different orientation choice and stays consistent).
inline bool flip_one_sign(FlowCategory& f, std::mt19937& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t t = 0; t < f.moduli0.size(); ++t) {
    const auto& m0 = f.moduli0[t];
    for (std::size_t p = 0; p < m0.signs.size(); ++p) {
      auto references = [&](const flowcat::ModuliOne& m1, const flowcat::BrokenFlow& e) {
        if (m1.from == m0.from && e.mid == m0.to && e.p == static_cast<int>(p)) return true;
        if (e.mid == m0.from && m1.to == m0.to && e.q == static_cast<int>(p)) return true;
        return false;
      };
      bool lopsided = false;
      for (const auto& m1 : f.moduli1)
        for (const auto& comp : m1.components)
          if (const Interval* iv = std::get_if<Interval>(&comp))
            if (references(m1, iv->end0) != references(m1, iv->end1)) lopsided = true;
      if (lopsided) candidates.push_back({t, p});
    }
  }
  if (candidates.empty()) return false;
  auto [t, p] = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  f.moduli0[t].signs[p] = -f.moduli0[t].signs[p];
  return true;
}

inline bool drop_one_component(FlowCategory& f, std::mt19937& rng) {
  std::vector<std::pair<std::size_t, std::size_t>> candidates;
  for (std::size_t t = 0; t < f.moduli1.size(); ++t)
    for (std::size_t c = 0; c < f.moduli1[t].components.size(); ++c)
      if (std::holds_alternative<Interval>(f.moduli1[t].components[c]))
        candidates.push_back({t, c});
  if (candidates.empty()) return false;
  auto [t, c] = candidates[std::uniform_int_distribution<std::size_t>(0, candidates.size() - 1)(rng)];
  f.moduli1[t].components.erase(f.moduli1[t].components.begin() + static_cast<long>(c));
  return true;
}

// ----------------------------------------------------------- SNF oracles

// gcd of all k x k minors (0 when k exceeds the rank).
inline Int minor_gcd(const IntMatrix& m, std::size_t k) {
  std::vector<std::size_t> rows(k), cols(k);
  Int g = 0;

  std::vector<std::size_t> rsel, csel;
  std::function<void(std::size_t, std::size_t)> pick_cols = [&](std::size_t start, std::size_t left) {
    if (left == 0) {
      IntMatrix sub(k, k);
      for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) sub.at(i, j) = m.at(rsel[i], csel[j]);
      Int d = flowcat::linalg::determinant(sub);
      g = gcd(g, d);
      return;
    }
    for (std::size_t c = start; c + left <= m.cols(); ++c) {
      csel.push_back(c);
      pick_cols(c + 1, left - 1);
      csel.pop_back();
    }
  };
  std::function<void(std::size_t, std::size_t)> pick_rows = [&](std::size_t start, std::size_t left) {
    if (left == 0) {
      pick_cols(0, k);
      return;
    }
    for (std::size_t r = start; r + left <= m.rows(); ++r) {
      rsel.push_back(r);
      pick_rows(r + 1, left - 1);
      rsel.pop_back();
    }
  };
  if (k == 0) return 1;
  if (k > m.rows() || k > m.cols()) return 0;
  pick_rows(0, k);
  return abs(g);
}

// Diagonal of the normal form from determinantal divisors: d_k = g_k / g_{k-1}.
inline std::vector<Int> snf_diagonal_by_minors(const IntMatrix& m) {
  std::vector<Int> diag;
  Int prev = 1;
  for (std::size_t k = 1; k <= std::min(m.rows(), m.cols()); ++k) {
    Int g = minor_gcd(m, k);
    if (g == 0) break;
    diag.push_back(g / prev);
    prev = g;
  }
  return diag;
}

inline IntMatrix random_matrix(std::mt19937& rng, std::size_t max_dim = 5, int amp = 3) {
  std::uniform_int_distribution<std::size_t> dim(0, max_dim);
  std::uniform_int_distribution<int> entry(-amp, amp);
  IntMatrix m(dim(rng), dim(rng));
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) m.at(i, j) = entry(rng);
  return m;
}

// ------------------------------------------------- filtration oracle (F_p)

// Associated graded of total homology over a prime field, computed directly
// from coordinate-subspace ranks: gr_p H_n = [dim(Z_n cap F_p) - dim(B_n cap
// F_p)] - [same at p-1].
struct GradedDims {
  std::map<std::pair<int, int>, long> dims;  // (p, n - p) -> dimension
};

template <class F>
GradedDims associated_graded_oracle(const F& k, const flowcat::spectral::FilteredComplex<F>& fc) {
  using flowcat::linalg::FMat;
  GradedDims out;

  int lmin = 0, lmax = 0;
  bool any = false;
  for (int n = fc.lo; n <= fc.hi(); ++n)
    for (long i = 0; i < fc.rank(n); ++i) {
      int lv = fc.level_of(n, static_cast<std::size_t>(i));
      lmin = any ? std::min(lmin, lv) : lv;
      lmax = any ? std::max(lmax, lv) : lv;
      any = true;
    }
  if (!any) return out;

  auto cycle_cap = [&](int n, int p) {  // dim(ker d_n cap F_p)
    std::vector<std::size_t> in_fp;
    for (long i = 0; i < fc.rank(n); ++i)
      if (fc.level_of(n, static_cast<std::size_t>(i)) <= p)
        in_fp.push_back(static_cast<std::size_t>(i));
    auto d = fc.boundary_or_zero(n);
    FMat<F> sub(d.rows, in_fp.size());
    for (std::size_t i = 0; i < d.rows; ++i)
      for (std::size_t j = 0; j < in_fp.size(); ++j) sub.at(i, j) = d.at(i, in_fp[j]);
    return static_cast<long>(in_fp.size()) - flowcat::linalg::rank(k, sub);
  };
  auto boundary_cap = [&](int n, int p) {  // dim(im d_{n+1} cap F_p)
    auto d = fc.boundary_or_zero(n + 1);
    long r = flowcat::linalg::rank(k, d);
    std::vector<std::size_t> in_fp;
    for (long i = 0; i < fc.rank(n); ++i)
      if (fc.level_of(n, static_cast<std::size_t>(i)) <= p)
        in_fp.push_back(static_cast<std::size_t>(i));
    // dim(V cap W) = dim V + dim W - dim(V + W) with W a coordinate subspace.
    FMat<F> joint(static_cast<std::size_t>(fc.rank(n)), d.cols + in_fp.size());
    for (std::size_t i = 0; i < joint.rows; ++i)
      for (std::size_t j = 0; j < d.cols; ++j) joint.at(i, j) = d.at(i, j);
    for (std::size_t j = 0; j < in_fp.size(); ++j)
      joint.at(in_fp[j], d.cols + j) = k.from_long(1);
    long joint_rank = flowcat::linalg::rank(k, joint);
    return r + static_cast<long>(in_fp.size()) - joint_rank;
  };

  for (int n = fc.lo; n <= fc.hi(); ++n)
    for (int p = lmin; p <= lmax; ++p) {
      long now = cycle_cap(n, p) - boundary_cap(n, p);
      long below = (p == lmin) ? 0 : cycle_cap(n, p - 1) - boundary_cap(n, p - 1);
      long d = now - below;
      if (d != 0) out.dims[{p, n - p}] = d;
    }
  return out;
}

// Random bounded filtered complex over a field, d^2 = 0 by construction.
template <class F>
flowcat::spectral::FilteredComplex<F> random_filtered_complex(const F& k, std::mt19937& rng,
                                                              long max_total_dim = 8) {
  using flowcat::spectral::FilteredComplex;
  std::uniform_int_distribution<int> degs(2, 4);
  std::uniform_int_distribution<int> level_d(0, 3);
  std::uniform_int_distribution<long> coeff(0, 1);

  FilteredComplex<F> fc;
  fc.lo = 0;
  int n_degrees = degs(rng);
  long total = 0;
  for (int d = 0; d < n_degrees; ++d) {
    long r = std::uniform_int_distribution<long>(0, std::max<long>(0, max_total_dim - total))(rng);
    fc.ranks.push_back(r);
    total += r;
  }

  // d_{lo+1} free, then columns of each next map drawn from the kernel below.
  for (int d = fc.lo + 1; d <= fc.hi(); ++d) {
    flowcat::linalg::FMat<F> m(static_cast<std::size_t>(fc.rank(d - 1)),
                               static_cast<std::size_t>(fc.rank(d)));
    if (d == fc.lo + 1) {
      for (auto& v : m.a) v = k.from_long(coeff(rng));
    } else {
      auto ker = flowcat::linalg::kernel(k, fc.boundary[d - 1]);
      for (std::size_t j = 0; j < m.cols; ++j)
        for (std::size_t t = 0; t < ker.cols; ++t) {
          if (coeff(rng) == 0) continue;
          for (std::size_t i = 0; i < m.rows; ++i)
            m.at(i, j) = k.add(m.at(i, j), ker.at(i, t));
        }
    }
    fc.boundary[d] = std::move(m);
  }

  // Levels: random, repaired upward so the boundary never raises filtration.
  for (int d = fc.lo; d <= fc.hi(); ++d) {
    std::vector<int> lv(static_cast<std::size_t>(fc.rank(d)));
    for (auto& v : lv) v = level_d(rng);
    fc.levels[d] = lv;
  }
  for (int d = fc.lo + 1; d <= fc.hi(); ++d) {
    const auto& m = fc.boundary[d];
    for (std::size_t j = 0; j < m.cols; ++j)
      for (std::size_t i = 0; i < m.rows; ++i)
        if (!k.is_zero(m.at(i, j)))
          fc.levels[d][j] = std::max(fc.levels[d][j], fc.levels[d - 1][i]);
  }
  return fc;
}

}  // namespace fixtures
