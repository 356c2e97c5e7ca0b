#include "flowcat/comparison.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "flowcat/errors.hpp"

namespace flowcat::comparison {

const MixedModuliZero* ComparisonData::mixed0_for(const std::string& a,
                                                  const std::string& b) const {
  for (const auto& m : mixed0)
    if (m.source == a && m.target == b) return &m;
  return nullptr;
}

linalg::IntMatrix GradedMatrices::at_or_empty(int m, const FlowCategory& source,
                                              const FlowCategory& target) const {
  int i = m - lo;
  if (i >= 0 && i < static_cast<int>(mats.size())) return mats[static_cast<std::size_t>(i)];
  return linalg::IntMatrix(target.objects_at(m).size(), source.objects_at(m).size());
}

namespace {

std::pair<int, int> degree_range(const ComparisonData& d) {
  int lo = 0, hi = -1;
  bool any = false;
  auto feed = [&](const FlowCategory& f) {
    if (f.empty()) return;
    lo = any ? std::min(lo, f.min_index()) : f.min_index();
    hi = any ? std::max(hi, f.max_index()) : f.max_index();
    any = true;
  };
  feed(d.source);
  feed(d.target);
  return {lo, hi};
}

}  // namespace

GradedMatrices build_psi(const ComparisonData& d) {
  if (!validate(d.source).ok()) throw InvalidCategory("comparison source invalid");
  if (!validate(d.target).ok()) throw InvalidCategory("comparison target invalid");
  for (const auto& m : d.mixed0) {
    int ia = d.source.index_of(m.source);
    int ib = d.target.index_of(m.target);
    if (ia != ib)
      throw IndexMismatch("mixed point table " + m.source + " -> " + m.target +
                          " pairs indices " + std::to_string(ia) + " and " + std::to_string(ib));
  }

  GradedMatrices psi;
  auto [lo, hi] = degree_range(d);
  psi.lo = lo;
  for (int m = lo; m <= hi; ++m) {
    auto srcs = d.source.objects_at(m);
    auto tgts = d.target.objects_at(m);
    linalg::IntMatrix mat(tgts.size(), srcs.size());
    for (std::size_t j = 0; j < srcs.size(); ++j)
      for (std::size_t i = 0; i < tgts.size(); ++i) {
        const MixedModuliZero* mm = d.mixed0_for(srcs[j], tgts[i]);
        if (mm) mat.at(i, j) = mm->signed_count();
      }
    psi.mats.push_back(std::move(mat));
  }
  return psi;
}

Report verify_chain_map(const ComparisonData& d, const GradedMatrices& psi) {
  Report r;
  auto [lo, hi] = degree_range(d);
  for (int m = lo + 1; m <= hi; ++m) {
    auto lhs = linalg::mul(psi.at_or_empty(m - 1, d.source, d.target),
                           boundary_matrix(d.source, m));
    auto rhs = linalg::mul(boundary_matrix(d.target, m),
                           psi.at_or_empty(m, d.source, d.target));
    std::string detail;
    bool ok = lhs == rhs;
    if (!ok) {
      auto srcs = d.source.objects_at(m);
      auto tgts = d.target.objects_at(m - 1);
      for (std::size_t i = 0; i < lhs.rows(); ++i)
        for (std::size_t j = 0; j < lhs.cols(); ++j)
          if (lhs.at(i, j) != rhs.at(i, j))
            detail += "(m=" + std::to_string(m) + ", " + srcs[j] + " -> " + tgts[i] + ": " +
                      lhs.at(i, j).get_str() + " vs " + rhs.at(i, j).get_str() + ") ";
    }
    r.add("chain_map/degree_" + std::to_string(m), ok, detail);
  }
  if (lo > hi) r.add("chain_map/vacuous", true);

  if (!d.has_mixed1) return r;

  // One-dimensional mixed families: ends must exhaust both break types with
  // opposite product signs across each interval.
  for (const auto& m1 : d.mixed1) {
    int ia = d.source.index_of(m1.source);
    int ib = d.target.index_of(m1.target);
    std::string pair = m1.source + "->" + m1.target;
    if (ia - ib != 1) {
      r.add("mixed1/placement/" + pair, false, "index gap != 1");
      continue;
    }

    std::map<MixedEnd, int> expected_sign;
    for (const auto& ap : d.source.objects) {
      if (ap.index != ia - 1) continue;
      const ModuliZero* flow = d.source.moduli0_for(m1.source, ap.id);
      const MixedModuliZero* mx = d.mixed0_for(ap.id, m1.target);
      if (!flow || !mx) continue;
      for (int p = 0; p < static_cast<int>(flow->signs.size()); ++p)
        for (int t = 0; t < static_cast<int>(mx->signs.size()); ++t)
          expected_sign[{MixedEnd::Kind::SourceBreak, ap.id, p, t}] =
              flow->signs[static_cast<std::size_t>(p)] * mx->signs[static_cast<std::size_t>(t)];
    }
    for (const auto& bp : d.target.objects) {
      if (bp.index != ia) continue;
      const MixedModuliZero* mx = d.mixed0_for(m1.source, bp.id);
      const ModuliZero* flow = d.target.moduli0_for(bp.id, m1.target);
      if (!flow || !mx) continue;
      for (int t = 0; t < static_cast<int>(mx->signs.size()); ++t)
        for (int q = 0; q < static_cast<int>(flow->signs.size()); ++q)
          expected_sign[{MixedEnd::Kind::TargetBreak, bp.id, q, t}] =
              mx->signs[static_cast<std::size_t>(t)] * flow->signs[static_cast<std::size_t>(q)];
    }

    std::map<MixedEnd, int> seen;
    std::string opp_bad;
    for (const auto& comp : m1.components) {
      const MixedInterval* iv = std::get_if<MixedInterval>(&comp);
      if (!iv) continue;
      seen[iv->end0]++;
      seen[iv->end1]++;
      int s0 = expected_sign.count(iv->end0) ? expected_sign[iv->end0] : 0;
      int s1 = expected_sign.count(iv->end1) ? expected_sign[iv->end1] : 0;
      if (s0 == 0 || s1 == 0 || s0 + s1 != 0) opp_bad += "interval with non-opposite ends ";
    }
    std::string match_bad;
    for (const auto& [end, sign] : expected_sign) {
      int mult = seen.count(end) ? seen[end] : 0;
      if (mult != 1)
        match_bad += std::string(end.kind == MixedEnd::Kind::SourceBreak ? "src[" : "tgt[") +
                     end.mid + "," + std::to_string(end.flow_pt) + "," +
                     std::to_string(end.mixed_pt) + "] x" + std::to_string(mult) + " ";
      seen.erase(end);
    }
    for (const auto& [end, mult] : seen) match_bad += "[" + end.mid + "] spurious ";

    r.add("mixed1/opposite_signs/" + pair, opp_bad.empty(), opp_bad);
    r.add("mixed1/endpoint_match/" + pair, match_bad.empty(), match_bad);
  }
  return r;
}

namespace {

bool numeric_chain_map_ok(const Report& r) {
  for (const auto& c : r.checks)
    if (!c.passed && c.name.rfind("chain_map/", 0) == 0) return false;
  return true;
}

}  // namespace

Report quasi_iso_check(const ComparisonData& d, const GradedMatrices& psi) {
  Report chain = verify_chain_map(d, psi);
  if (!numeric_chain_map_ok(chain))
    throw NotAChainMap("quasi_iso_check requires the chain-map identity");

  Report r;
  auto [lo, hi] = degree_range(d);

  // Route 1: homology of the mapping cone.  (x, y) in src_{m-1} + tgt_m maps
  // to (-d x, Psi x + d y); acyclic exactly when Psi is a quasi-isomorphism.
  linalg::ChainComplex cone;
  cone.lo = lo;
  for (int m = lo; m <= hi + 1; ++m) {
    long rk = static_cast<long>(d.source.objects_at(m - 1).size() +
                                d.target.objects_at(m).size());
    cone.ranks.push_back(rk);
  }
  for (int m = lo + 1; m <= hi + 1; ++m) {
    std::size_t src_m1 = d.source.objects_at(m - 1).size();
    std::size_t src_m2 = d.source.objects_at(m - 2).size();
    std::size_t tgt_m = d.target.objects_at(m).size();
    std::size_t tgt_m1 = d.target.objects_at(m - 1).size();
    linalg::IntMatrix mat(src_m2 + tgt_m1, src_m1 + tgt_m);
    auto dsrc = boundary_matrix(d.source, m - 1);
    auto dtgt = boundary_matrix(d.target, m);
    auto psim1 = psi.at_or_empty(m - 1, d.source, d.target);
    for (std::size_t i = 0; i < src_m2; ++i)
      for (std::size_t j = 0; j < src_m1; ++j) mat.at(i, j) = -dsrc.at(i, j);
    for (std::size_t i = 0; i < tgt_m1; ++i) {
      for (std::size_t j = 0; j < src_m1; ++j) mat.at(src_m2 + i, j) = psim1.at(i, j);
      for (std::size_t j = 0; j < tgt_m; ++j) mat.at(src_m2 + i, src_m1 + j) = dtgt.at(i, j);
    }
    cone.boundary[m] = std::move(mat);
  }
  bool cone_acyclic = true;
  std::string cone_detail;
  for (int m = lo; m <= hi + 1; ++m) {
    auto h = cone.homology_at_degree(m);
    if (!h.trivial()) {
      cone_acyclic = false;
      cone_detail += "H_" + std::to_string(m) + "(cone) = " + h.to_string() + " ";
    }
  }
  r.add("quasi_iso/cone_acyclic", cone_acyclic, cone_detail);

  // Route 2: the induced map on homology, degree by degree.
  bool induced_ok = true;
  std::string ind_detail;
  for (int m = lo; m <= hi; ++m) {
    auto ksrc = linalg::kernel_basis(boundary_matrix(d.source, m));
    auto ktgt = linalg::kernel_basis(boundary_matrix(d.target, m));
    auto r1 = linalg::solve(ksrc, boundary_matrix(d.source, m + 1));
    auto r2 = linalg::solve(ktgt, boundary_matrix(d.target, m + 1));
    auto psim = psi.at_or_empty(m, d.source, d.target);
    auto x = linalg::solve(ktgt, linalg::mul(psim, ksrc));

    auto h_src = linalg::cokernel(r1);
    auto h_tgt = linalg::cokernel(r2);
    bool same_invariants = h_src == h_tgt;
    bool surjective = linalg::cokernel(linalg::hconcat(x, r2)).trivial();
    if (!(same_invariants && surjective)) {
      induced_ok = false;
      ind_detail += "degree " + std::to_string(m) + ": H_src = " + h_src.to_string() +
                    ", H_tgt = " + h_tgt.to_string() +
                    (surjective ? "" : " (induced map not surjective)") + "; ";
    }
  }
  r.add("quasi_iso/induced_iso", induced_ok, ind_detail);
  r.add("quasi_iso/routes_agree", cone_acyclic == induced_ok);
  return r;
}

}  // namespace flowcat::comparison
