#include "flowcat/spectral.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "flowcat/errors.hpp"

namespace flowcat::spectral {

namespace {

// A (x) I_m over the field.
template <class F>
linalg::FMat<F> kron_identity(const F& k, const linalg::FMat<F>& a, long m) {
  linalg::FMat<F> out(a.rows * static_cast<std::size_t>(m),
                      a.cols * static_cast<std::size_t>(m));
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) {
      if (k.is_zero(a.at(i, j))) continue;
      for (long s = 0; s < m; ++s)
        out.at(i * static_cast<std::size_t>(m) + static_cast<std::size_t>(s),
               j * static_cast<std::size_t>(m) + static_cast<std::size_t>(s)) = a.at(i, j);
    }
  return out;
}

}  // namespace

template <class F>
SpectralPage<F> build_E1(const F& k, const FlowCategory& f, const CoefficientTheory& h,
                         int index_shift) {
  if (!validate(f).ok()) throw InvalidCategory("build_E1 on invalid category");
  SpectralPage<F> page;
  page.r = 1;
  if (f.empty()) return page;

  const int lo = f.min_index(), hi = f.max_index();
  for (int m = lo; m <= hi; ++m) {
    long count = static_cast<long>(f.objects_at(m).size());
    if (count == 0) continue;
    for (const auto& [q, hr] : h.ranks)
      if (hr > 0) page.ranks[{m + index_shift, q}] = count * hr;
  }
  for (int m = lo + 1; m <= hi; ++m) {
    auto bm = linalg::to_field(k, boundary_matrix(f, m));
    for (const auto& [q, hr] : h.ranks) {
      if (hr <= 0) continue;
      Bidegree src{m + index_shift, q};
      if (!page.ranks.count(src)) continue;
      page.d[src] = kron_identity(k, bm, hr);
    }
  }
  return page;
}

template <class F>
SpectralPage<F> turn_page(const F& k, const SpectralPage<F>& page,
                          const std::map<Bidegree, linalg::FMat<F>>& next_d) {
  // Shape and bidegree discipline first.
  for (const auto& [src, m] : next_d) {
    Bidegree dst{src.first - page.r, src.second + page.r - 1};
    if (m.cols != static_cast<std::size_t>(page.rank_at(src.first, src.second)) ||
        m.rows != static_cast<std::size_t>(page.rank_at(dst.first, dst.second))) {
      std::ostringstream os;
      os << "d at (" << src.first << "," << src.second << ") is " << m.rows << "x" << m.cols
         << ", expected " << page.rank_at(dst.first, dst.second) << "x"
         << page.rank_at(src.first, src.second);
      throw BidegreeMismatch(os.str());
    }
  }
  auto d_at = [&](int p, int q) -> const linalg::FMat<F>* {
    auto it = next_d.find({p, q});
    return it == next_d.end() ? nullptr : &it->second;
  };
  for (const auto& [src, m] : next_d) {
    const auto* prev = d_at(src.first + page.r, src.second - page.r + 1);
    if (prev && !linalg::is_zero(k, linalg::fmul(k, m, *prev)))
      throw NotADifferential("d o d != 0 into (" + std::to_string(src.first) + "," +
                             std::to_string(src.second) + ")");
  }

  SpectralPage<F> next;
  next.r = page.r + 1;
  for (const auto& [key, rk] : page.ranks) {
    const auto [p, q] = key;
    long dim_ker = rk;
    if (const auto* out = d_at(p, q)) dim_ker = rk - linalg::rank(k, *out);
    long im_in = 0;
    if (const auto* in = d_at(p + page.r, q - page.r + 1)) im_in = linalg::rank(k, *in);
    long e = dim_ker - im_in;
    if (e > 0) next.ranks[key] = e;
  }
  return next;
}

template <class F>
SpectralPage<F> turn_page(const F& k, const SpectralPage<F>& page) {
  return turn_page(k, page, page.d);
}

namespace {

// Span of the columns of `gens` intersected bookkeeping for the filtration
// machinery: all subspaces live inside one chain group of dimension n.
template <class F>
struct Sub {
  linalg::FMat<F> gens;  // n x g, not necessarily independent
};

template <class F>
linalg::FMat<F> hcat(const linalg::FMat<F>& a, const linalg::FMat<F>& b) {
  if (a.cols == 0) return b;
  if (b.cols == 0) return a;
  linalg::FMat<F> c(a.rows, a.cols + b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < a.cols; ++j) c.at(i, j) = a.at(i, j);
    for (std::size_t j = 0; j < b.cols; ++j) c.at(i, a.cols + j) = b.at(i, j);
  }
  return c;
}

// Z_r^{p,q} = { x in F_p C_n : dx in F_{p-r} C_{n-1} }, as a generator matrix.
template <class F>
linalg::FMat<F> cycle_space(const F& k, const FilteredComplex<F>& fc, int p, int n, int r) {
  const long dim_n = fc.rank(n);
  std::vector<std::size_t> in_fp;
  for (std::size_t i = 0; i < static_cast<std::size_t>(dim_n); ++i)
    if (fc.level_of(n, i) <= p) in_fp.push_back(i);

  auto d = fc.boundary_or_zero(n);
  std::vector<std::size_t> high_rows;
  for (std::size_t i = 0; i < d.rows; ++i)
    if (fc.level_of(n - 1, i) > p - r) high_rows.push_back(i);

  // Kernel of (projection past F_{p-r}) o d restricted to F_p columns.
  linalg::FMat<F> a(high_rows.size(), in_fp.size());
  for (std::size_t i = 0; i < high_rows.size(); ++i)
    for (std::size_t j = 0; j < in_fp.size(); ++j)
      a.at(i, j) = d.at(high_rows[i], in_fp[j]);
  auto ker = linalg::kernel(k, a);

  linalg::FMat<F> out(static_cast<std::size_t>(dim_n), ker.cols);
  for (std::size_t j = 0; j < ker.cols; ++j)
    for (std::size_t i = 0; i < in_fp.size(); ++i) out.at(in_fp[i], j) = ker.at(i, j);
  return out;
}

template <class F>
long dim_span(const F& k, const linalg::FMat<F>& gens) {
  return linalg::rank(k, gens);
}

// Greedily pick columns of `cand` that grow the span of `base`; returns the
// chosen columns (representatives of cand modulo base).
template <class F>
linalg::FMat<F> extend_basis(const F& k, const linalg::FMat<F>& base,
                             const linalg::FMat<F>& cand) {
  linalg::FMat<F> acc = base;
  long r = dim_span(k, acc);
  linalg::FMat<F> reps(cand.rows, 0);
  for (std::size_t j = 0; j < cand.cols; ++j) {
    linalg::FMat<F> col(cand.rows, 1);
    for (std::size_t i = 0; i < cand.rows; ++i) col.at(i, 0) = cand.at(i, j);
    auto trial = hcat(acc, col);
    long r2 = dim_span(k, trial);
    if (r2 > r) {
      acc = trial;
      r = r2;
      reps = hcat(reps, col);
    }
  }
  return reps;
}

}  // namespace

template <class F>
FilteredResult<F> run_filtered(const F& k, const FilteredComplex<F>& fc) {
  // Complex discipline.
  for (int n = fc.lo; n <= fc.hi(); ++n) {
    auto d = fc.boundary_or_zero(n);
    for (std::size_t j = 0; j < d.cols; ++j)
      for (std::size_t i = 0; i < d.rows; ++i)
        if (!k.is_zero(d.at(i, j)) && fc.level_of(n - 1, i) > fc.level_of(n, static_cast<std::size_t>(j)))
          throw NotFiltered("boundary raises filtration in degree " + std::to_string(n));
    if (!linalg::is_zero(k, linalg::fmul(k, fc.boundary_or_zero(n), fc.boundary_or_zero(n + 1))))
      throw DSquaredNonzero("degree " + std::to_string(n + 1));
  }

  FilteredResult<F> out;

  int lmin = 0, lmax = 0;
  bool any = false;
  for (int n = fc.lo; n <= fc.hi(); ++n)
    for (long i = 0; i < fc.rank(n); ++i) {
      int lv = fc.level_of(n, static_cast<std::size_t>(i));
      lmin = any ? std::min(lmin, lv) : lv;
      lmax = any ? std::max(lmax, lv) : lv;
      any = true;
    }
  if (!any) {
    out.converged = true;
    out.e_infinity.r = 1;
    return out;
  }
  const int span = lmax - lmin;

  for (int r = 1; r <= span + 2; ++r) {
    SpectralPage<F> page;
    page.r = r;

    struct Entry {
      linalg::FMat<F> reps;  // representative vectors in C_n
      linalg::FMat<F> full;  // denominator gens then reps (solve target)
      long denom_cols = 0;  // column offset of the representatives in `full`
    };
    std::map<Bidegree, Entry> entries;

    for (int n = fc.lo; n <= fc.hi(); ++n) {
      for (int p = lmin; p <= lmax; ++p) {
        int q = n - p;
        auto z = cycle_space(k, fc, p, n, r);
        // Denominator: Z_{r-1}^{p-1,q+1} + d Z_{r-1}^{p+r-1, q-r+2}.
        auto z_below = cycle_space(k, fc, p - 1, n, r - 1);
        auto z_src = cycle_space(k, fc, p + r - 1, n + 1, r - 1);
        auto dz = linalg::fmul(k, fc.boundary_or_zero(n + 1), z_src);
        auto denom = hcat(z_below, dz);

        long dz_dim = dim_span(k, z);
        long de_dim = dim_span(k, denom);
        long e = dz_dim - de_dim;
        if (e < 0) throw Error("spectral internal: denominator not inside cycles");
        if (e == 0) continue;

        Entry ent;
        ent.denom_cols = static_cast<long>(denom.cols);
        ent.reps = extend_basis(k, denom, z);
        ent.full = hcat(denom, ent.reps);
        page.ranks[{p, q}] = e;
        entries[{p, q}] = std::move(ent);
      }
    }

    // Induced differentials between nonzero entries.
    for (auto& [src, ent] : entries) {
      const auto [p, q] = src;
      Bidegree dst{p - r, q + r - 1};
      auto tgt = entries.find(dst);
      long e_src = page.ranks[src];
      long e_dst = tgt == entries.end() ? 0 : page.ranks[dst];
      linalg::FMat<F> dmat(static_cast<std::size_t>(e_dst), static_cast<std::size_t>(e_src));
      if (e_dst > 0) {
        const int n = p + q;
        auto d = fc.boundary_or_zero(n);
        for (std::size_t j = 0; j < ent.reps.cols; ++j) {
          std::vector<typename F::Elem> v(static_cast<std::size_t>(fc.rank(n - 1)));
          for (std::size_t i = 0; i < d.rows; ++i) {
            typename F::Elem acc = k.from_long(0);
            for (std::size_t t = 0; t < d.cols; ++t)
              if (!k.is_zero(d.at(i, t))) acc = k.add(acc, k.mul(d.at(i, t), ent.reps.at(t, j)));
            v[i] = acc;
          }
          std::vector<typename F::Elem> x;
          if (!linalg::solve(k, tgt->second.full, v, x))
            throw Error("spectral internal: boundary of a cycle missed the target entry");
          for (long i = 0; i < e_dst; ++i)
            dmat.at(static_cast<std::size_t>(i), j) =
                x[static_cast<std::size_t>(tgt->second.denom_cols + i)];
        }
      }
      if (e_src > 0) page.d[src] = std::move(dmat);
    }

    out.pages.push_back(std::move(page));
  }

  out.e_infinity = out.pages.back();
  out.e_infinity.d.clear();

  for (int n = fc.lo; n <= fc.hi(); ++n) {
    auto dn = fc.boundary_or_zero(n);
    auto dn1 = fc.boundary_or_zero(n + 1);
    long hn = fc.rank(n) - linalg::rank(k, dn) - linalg::rank(k, dn1);
    if (hn != 0) out.total_homology[n] = hn;
  }

  out.converged = true;
  std::map<int, long> einf_totals;
  for (const auto& [key, rk] : out.e_infinity.ranks) einf_totals[key.first + key.second] += rk;
  std::set<int> degrees;
  for (const auto& [n, v] : einf_totals) degrees.insert(n);
  for (const auto& [n, v] : out.total_homology) degrees.insert(n);
  for (int n : degrees) {
    long a = einf_totals.count(n) ? einf_totals[n] : 0;
    long b = out.total_homology.count(n) ? out.total_homology[n] : 0;
    if (a != b) out.converged = false;
  }
  return out;
}

namespace {

template <class F>
Report collapse_check_impl(const F& k, const FlowCategory& f, const CoefficientTheory& h) {
  Report r;
  if (!h.single_row()) {
    r.add("coefficients/single_row", false, "support not concentrated in q = 0");
    return r;
  }
  auto e1 = build_E1(k, f, h);
  auto e2 = turn_page(k, e1);

  // Bidegree reasons: with one occupied row, every d_r (r >= 2) leaves it.
  bool off_row = false;
  for (const auto& [key, rk] : e2.ranks)
    if (key.second != 0 && rk != 0) off_row = true;
  r.add("e2/single_row", !off_row);
  r.add("e2/equals_e_infinity", !off_row, off_row ? "entries off the q=0 row" : "");

  if (f.empty()) {
    r.add("e2/matches_field_homology", e2.ranks.empty());
    return r;
  }

  // Independent route: field homology of the complex by rank-nullity.
  linalg::ChainComplex cx = morse_complex(f);
  bool all_match = true;
  std::string detail;
  for (int m = cx.lo; m <= cx.hi(); ++m) {
    long hm = cx.rank(m) - linalg::rank(k, linalg::to_field(k, cx.boundary_or_zero(m))) -
              linalg::rank(k, linalg::to_field(k, cx.boundary_or_zero(m + 1)));
    long e2m = e2.rank_at(m, 0);
    // With a single row of rank c, the E2 entry is c times the homology rank.
    long expect = hm * h.ranks.at(0);
    if (e2m != expect) {
      all_match = false;
      detail += "degree " + std::to_string(m) + ": E2 = " + std::to_string(e2m) +
                ", field homology gives " + std::to_string(expect) + "; ";
    }
  }
  r.add("e2/matches_field_homology", all_match, detail);
  return r;
}

}  // namespace

Report collapse_check(const FlowCategory& f, const CoefficientTheory& h) {
  switch (h.field.kind) {
    case linalg::FieldSpec::Kind::Rationals: {
      linalg::RationalField k;
      return collapse_check_impl(k, f, h);
    }
    case linalg::FieldSpec::Kind::Prime: {
      linalg::PrimeField k{h.field.p};
      return collapse_check_impl(k, f, h);
    }
    default:
      throw Error("collapse_check needs field coefficients");
  }
}

namespace {

template <class F>
std::vector<PageTable> page_tables_impl(const F& k, const FlowCategory& f,
                                        const CoefficientTheory& h) {
  auto e1 = build_E1(k, f, h);
  auto e2 = turn_page(k, e1);
  PageTable t1{1, e1.ranks}, t2{2, e2.ranks};
  return {t1, t2};
}

}  // namespace

std::vector<PageTable> page_tables(const FlowCategory& f, const CoefficientTheory& h) {
  switch (h.field.kind) {
    case linalg::FieldSpec::Kind::Rationals: {
      linalg::RationalField k;
      return page_tables_impl(k, f, h);
    }
    case linalg::FieldSpec::Kind::Prime: {
      linalg::PrimeField k{h.field.p};
      return page_tables_impl(k, f, h);
    }
    default:
      throw Error("page_tables needs field coefficients");
  }
}

std::string table_text(const PageTable& t) {
  std::ostringstream os;
  os << "E" << t.r << ":\n";
  if (t.ranks.empty()) {
    os << "  (empty)\n";
    return os.str();
  }
  int pmin = t.ranks.begin()->first.first, pmax = pmin;
  int qmin = t.ranks.begin()->first.second, qmax = qmin;
  for (const auto& [key, rk] : t.ranks) {
    pmin = std::min(pmin, key.first);
    pmax = std::max(pmax, key.first);
    qmin = std::min(qmin, key.second);
    qmax = std::max(qmax, key.second);
  }
  os << "  q\\p";
  for (int p = pmin; p <= pmax; ++p) os << '\t' << p;
  os << '\n';
  for (int q = qmax; q >= qmin; --q) {
    os << "  " << q;
    for (int p = pmin; p <= pmax; ++p) {
      auto it = t.ranks.find({p, q});
      os << '\t' << (it == t.ranks.end() ? 0 : it->second);
    }
    os << '\n';
  }
  return os.str();
}

// Explicit instantiations for the two supported fields.
template SpectralPage<linalg::RationalField> build_E1(const linalg::RationalField&,
                                                      const FlowCategory&,
                                                      const CoefficientTheory&, int);
template SpectralPage<linalg::PrimeField> build_E1(const linalg::PrimeField&,
                                                   const FlowCategory&,
                                                   const CoefficientTheory&, int);
template SpectralPage<linalg::RationalField> turn_page(
    const linalg::RationalField&, const SpectralPage<linalg::RationalField>&,
    const std::map<Bidegree, linalg::FMat<linalg::RationalField>>&);
template SpectralPage<linalg::PrimeField> turn_page(
    const linalg::PrimeField&, const SpectralPage<linalg::PrimeField>&,
    const std::map<Bidegree, linalg::FMat<linalg::PrimeField>>&);
template SpectralPage<linalg::RationalField> turn_page(const linalg::RationalField&,
                                                       const SpectralPage<linalg::RationalField>&);
template SpectralPage<linalg::PrimeField> turn_page(const linalg::PrimeField&,
                                                    const SpectralPage<linalg::PrimeField>&);
template FilteredResult<linalg::RationalField> run_filtered(
    const linalg::RationalField&, const FilteredComplex<linalg::RationalField>&);
template FilteredResult<linalg::PrimeField> run_filtered(
    const linalg::PrimeField&, const FilteredComplex<linalg::PrimeField>&);

}  // namespace flowcat::spectral
