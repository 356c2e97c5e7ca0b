#include "flowcat/realize.hpp"

#include <algorithm>
#include <sstream>

#include "flowcat/errors.hpp"

namespace flowcat::cw {

CWData realize(const FlowCategory& f, int L) {
  if (!validate(f).ok()) throw InvalidCategory("realize on invalid category");
  CWData out;
  out.L = L;
  if (f.empty()) {
    out.q = 0;
    return out;
  }
  const int p = f.max_index(), q = f.min_index();
  if (L < p - q)
    throw ShiftTooSmall("L = " + std::to_string(L) + " < " + std::to_string(p - q));
  out.q = q;

  for (int m = q; m <= p; ++m)
    for (const auto& id : f.objects_at(m))
      out.cells.push_back({id, m + (L - q)});

  for (const auto& alpha : f.objects)
    for (const auto& beta : f.objects) {
      if (alpha.index - beta.index != 1) continue;
      long n = f.coefficient(alpha.id, beta.id);
      if (f.moduli0_for(alpha.id, beta.id))
        out.attaching_degrees[{alpha.id, beta.id}] = n;
    }
  return out;
}

CWData realize(const FlowCategory& f) {
  if (f.empty()) return realize(f, 0);
  return realize(f, f.max_index() - f.min_index());
}

linalg::ChainComplex cellular_complex(const CWData& c) {
  linalg::ChainComplex cx;
  if (c.cells.empty()) return cx;

  int lo = c.cells.front().dim, hi = c.cells.front().dim;
  for (const auto& cell : c.cells) {
    lo = std::min(lo, cell.dim);
    hi = std::max(hi, cell.dim);
  }
  cx.lo = lo;
  cx.ranks.assign(static_cast<std::size_t>(hi - lo + 1), 0);

  std::map<int, std::vector<std::string>> by_dim;
  for (const auto& cell : c.cells) by_dim[cell.dim].push_back(cell.id);
  for (auto& [d, ids] : by_dim) {
    std::sort(ids.begin(), ids.end());
    cx.ranks[static_cast<std::size_t>(d - lo)] = static_cast<long>(ids.size());
  }

  for (int d = lo + 1; d <= hi; ++d) {
    const auto& cols = by_dim[d];
    const auto& rows = by_dim[d - 1];
    linalg::IntMatrix m(rows.size(), cols.size());
    for (std::size_t j = 0; j < cols.size(); ++j)
      for (std::size_t i = 0; i < rows.size(); ++i) {
        auto it = c.attaching_degrees.find({cols[j], rows[i]});
        if (it != c.attaching_degrees.end()) m.at(i, j) = it->second;
      }
    cx.boundary[d] = m;
  }
  return cx;
}

std::vector<FiltrationLevel> subquotient_report(const FlowCategory& f, int L) {
  if (f.empty()) return {};
  const int p = f.max_index(), q = f.min_index();
  if (L < p - q)
    throw ShiftTooSmall("L = " + std::to_string(L) + " < " + std::to_string(p - q));
  std::vector<FiltrationLevel> out;
  for (int m = q; m <= p; ++m) {
    auto ids = f.objects_at(m);
    if (ids.empty()) continue;
    FiltrationLevel lv;
    lv.level = m;
    lv.cells = ids;
    lv.sphere_count = static_cast<long>(ids.size());
    lv.sphere_dim = m + (L - q);
    out.push_back(lv);
  }
  return out;
}

std::vector<FiltrationLevel> subquotient_report(const FlowCategory& f) {
  if (f.empty()) return {};
  return subquotient_report(f, f.max_index() - f.min_index());
}

Report homotopy_chain_check(const FlowCategory& f) {
  Report r;
  Report v = validate(f);
  if (!v.ok()) {
    r.absorb(v, "validate");
    return r;
  }
  if (f.empty()) {
    r.add("d2/vacuous", true);
    return r;
  }
  const int p = f.max_index(), q = f.min_index();
  for (int m = q + 1; m < p; ++m) {
    linalg::IntMatrix prod = linalg::mul(boundary_matrix(f, m), boundary_matrix(f, m + 1));
    std::string detail;
    if (!prod.is_zero()) {
      auto rows = f.objects_at(m - 1);
      auto cols = f.objects_at(m + 1);
      for (std::size_t i = 0; i < prod.rows(); ++i)
        for (std::size_t j = 0; j < prod.cols(); ++j)
          if (prod.at(i, j) != 0)
            detail += "(" + cols[j] + " -> " + rows[i] + ") = " + prod.at(i, j).get_str() + " ";
    }
    r.add("d2/degree_" + std::to_string(m + 1), prod.is_zero(), detail);
  }
  if (r.checks.empty()) r.add("d2/vacuous", true);
  return r;
}

std::string to_text(const CWData& c) {
  std::ostringstream os;
  os << "cells " << c.cells.size() << " shift L=" << c.L << " q=" << c.q << "\n";
  for (const auto& cell : c.cells) os << "cell " << cell.id << " dim " << cell.dim << "\n";
  for (const auto& [pair, deg] : c.attaching_degrees)
    os << "degree " << pair.first << " -> " << pair.second << " : " << deg << "\n";
  return os.str();
}

std::string to_dot(const CWData& c) {
  std::ostringstream os;
  os << "digraph cw {\n";
  for (const auto& cell : c.cells)
    os << "  \"" << cell.id << "\" [label=\"" << cell.id << " (" << cell.dim << ")\"];\n";
  for (const auto& [pair, deg] : c.attaching_degrees)
    if (deg != 0)
      os << "  \"" << pair.first << "\" -> \"" << pair.second << "\" [label=\"" << deg
         << "\"];\n";
  os << "}\n";
  return os.str();
}

}  // namespace flowcat::cw
