#include "flowcat/flow_category.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "flowcat/errors.hpp"
#include "flowcat/field.hpp"

namespace flowcat {

const FlowObject* FlowCategory::find(const std::string& id) const {
  for (const auto& o : objects)
    if (o.id == id) return &o;
  return nullptr;
}

int FlowCategory::index_of(const std::string& id) const {
  const FlowObject* o = find(id);
  if (!o) throw UnknownObject(id);
  return o->index;
}

const ModuliZero* FlowCategory::moduli0_for(const std::string& a, const std::string& b) const {
  for (const auto& m : moduli0)
    if (m.from == a && m.to == b) return &m;
  return nullptr;
}

const ModuliOne* FlowCategory::moduli1_for(const std::string& a, const std::string& b) const {
  for (const auto& m : moduli1)
    if (m.from == a && m.to == b) return &m;
  return nullptr;
}

long FlowCategory::coefficient(const std::string& a, const std::string& b) const {
  const ModuliZero* m = moduli0_for(a, b);
  if (!m) return 0;
  if (mod2) return static_cast<long>(m->signs.size() % 2);
  return m->signed_count();
}

std::vector<std::string> FlowCategory::objects_at(int index) const {
  std::vector<std::string> ids;
  for (const auto& o : objects)
    if (o.index == index) ids.push_back(o.id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

int FlowCategory::min_index() const {
  if (objects.empty()) throw UnknownObject("min_index of empty category");
  int m = objects.front().index;
  for (const auto& o : objects) m = std::min(m, o.index);
  return m;
}

int FlowCategory::max_index() const {
  if (objects.empty()) throw UnknownObject("max_index of empty category");
  int m = objects.front().index;
  for (const auto& o : objects) m = std::max(m, o.index);
  return m;
}

Report validate(const FlowCategory& f) {
  Report r;

  std::set<std::string> ids;
  std::string dup;
  for (const auto& o : f.objects)
    if (!ids.insert(o.id).second) dup += o.id + " ";
  r.add("objects/unique_ids", dup.empty(), dup);

  std::string bad0;
  std::set<std::pair<std::string, std::string>> seen0;
  for (const auto& m : f.moduli0) {
    if (!ids.count(m.from) || !ids.count(m.to)) {
      bad0 += m.from + "->" + m.to + " (unknown object) ";
      continue;
    }
    if (!seen0.insert({m.from, m.to}).second) bad0 += m.from + "->" + m.to + " (duplicate) ";
    if (f.find(m.from)->index - f.find(m.to)->index != 1)
      bad0 += m.from + "->" + m.to + " (gap != 1) ";
    for (int s : m.signs)
      if (s != 1 && s != -1) bad0 += m.from + "->" + m.to + " (sign not +-1) ";
  }
  r.add("moduli0/placement", bad0.empty(), bad0);

  std::string bad1;
  std::set<std::pair<std::string, std::string>> seen1;
  for (const auto& m : f.moduli1) {
    if (!ids.count(m.from) || !ids.count(m.to)) {
      bad1 += m.from + "->" + m.to + " (unknown object) ";
      continue;
    }
    if (!seen1.insert({m.from, m.to}).second) bad1 += m.from + "->" + m.to + " (duplicate) ";
    if (f.find(m.from)->index - f.find(m.to)->index != 2)
      bad1 += m.from + "->" + m.to + " (gap != 2) ";
  }
  r.add("moduli1/placement", bad1.empty(), bad1);

  // Every interval end must reference an existing intermediate object and
  // existing point keys on both sides of the break.
  std::string badref;
  for (const auto& m : f.moduli1) {
    auto check_end = [&](const BrokenFlow& e) {
      const FlowObject* mid = f.find(e.mid);
      if (!mid) {
        badref += m.from + "->" + m.to + " via " + e.mid + " (unknown mid) ";
        return;
      }
      const ModuliZero* left = f.moduli0_for(m.from, e.mid);
      const ModuliZero* right = f.moduli0_for(e.mid, m.to);
      if (!left || e.p < 0 || e.p >= static_cast<int>(left->signs.size()))
        badref += m.from + "->" + m.to + " via " + e.mid + " (bad p) ";
      if (!right || e.q < 0 || e.q >= static_cast<int>(right->signs.size()))
        badref += m.from + "->" + m.to + " via " + e.mid + " (bad q) ";
    };
    for (const auto& c : m.components)
      if (const Interval* iv = std::get_if<Interval>(&c)) {
        check_end(iv->end0);
        check_end(iv->end1);
      }
  }
  r.add("moduli1/end_references", badref.empty(), badref);

  // Finite type holds for any finite object set; record it for the caller.
  r.add("finite_type", true);
  return r;
}

linalg::IntMatrix boundary_matrix(const FlowCategory& f, int m) {
  auto cols = f.objects_at(m);
  auto rows = f.objects_at(m - 1);
  linalg::IntMatrix out(rows.size(), cols.size());
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      out.at(i, j) = f.coefficient(cols[j], rows[i]);
  return out;
}

Report d_squared_report(const FlowCategory& f) {
  Report r;
  Report v = validate(f);
  if (!v.ok()) {
    r.absorb(v, "validate");
    return r;
  }

  for (const auto& a : f.objects) {
    for (const auto& b : f.objects) {
      if (a.index - b.index != 2) continue;

      long sum = 0;
      std::vector<BrokenFlow> broken;            // every break, exactly once
      std::map<BrokenFlow, int> product_sign;    // sign(p) * sign(q)
      for (const auto& c : f.objects) {
        if (c.index != a.index - 1) continue;
        const ModuliZero* left = f.moduli0_for(a.id, c.id);
        const ModuliZero* right = f.moduli0_for(c.id, b.id);
        if (!left || !right) continue;
        for (int p = 0; p < static_cast<int>(left->signs.size()); ++p)
          for (int q = 0; q < static_cast<int>(right->signs.size()); ++q) {
            BrokenFlow bf{c.id, p, q};
            broken.push_back(bf);
            product_sign[bf] = left->signs[static_cast<std::size_t>(p)] *
                               right->signs[static_cast<std::size_t>(q)];
            sum += f.mod2 ? 1 : product_sign[bf];
          }
      }
      bool numeric_ok = f.mod2 ? (sum % 2 == 0) : (sum == 0);
      {
        std::ostringstream os;
        os << a.id << "->" << b.id;
        std::ostringstream detail;
        if (!numeric_ok) detail << "sum = " << sum;
        r.add("numeric/" + os.str(), numeric_ok, detail.str());
      }

      const ModuliOne* m1 = f.moduli1_for(a.id, b.id);
      if (!m1) continue;

      std::map<BrokenFlow, int> seen;  // end multiplicities
      std::string opp_bad;
      for (const auto& comp : m1->components) {
        const Interval* iv = std::get_if<Interval>(&comp);
        if (!iv) continue;
        seen[iv->end0]++;
        seen[iv->end1]++;
        if (!f.mod2) {
          int s0 = product_sign.count(iv->end0) ? product_sign[iv->end0] : 0;
          int s1 = product_sign.count(iv->end1) ? product_sign[iv->end1] : 0;
          if (s0 == 0 || s1 == 0 || s0 + s1 != 0) {
            std::ostringstream os;
            os << "[" << iv->end0.mid << "," << iv->end0.p << "," << iv->end0.q << "]-["
               << iv->end1.mid << "," << iv->end1.p << "," << iv->end1.q << "] ";
            opp_bad += os.str();
          }
        }
      }
      std::string match_bad;
      for (const auto& bf : broken) {
        auto it = seen.find(bf);
        int mult = it == seen.end() ? 0 : it->second;
        if (mult != 1) {
          std::ostringstream os;
          os << "[" << bf.mid << "," << bf.p << "," << bf.q << "] x" << mult << " ";
          match_bad += os.str();
        }
        if (it != seen.end()) seen.erase(it);
      }
      for (const auto& [bf, mult] : seen) {
        std::ostringstream os;
        os << "[" << bf.mid << "," << bf.p << "," << bf.q << "] spurious ";
        match_bad += os.str();
      }

      std::string pair = a.id + "->" + b.id;
      if (!f.mod2) r.add("opposite_signs/" + pair, opp_bad.empty(), opp_bad);
      r.add("endpoint_match/" + pair, match_bad.empty(), match_bad);
    }
  }
  return r;
}

linalg::ChainComplex morse_complex(const FlowCategory& f) {
  Report d2 = d_squared_report(f);
  for (const auto& c : d2.checks)
    if (!c.passed && c.name.rfind("numeric/", 0) == 0)
      throw DSquaredNonzero(c.name + " " + c.detail);
  if (!validate(f).ok()) throw InvalidCategory("validate failed");

  linalg::ChainComplex cx;
  if (f.empty()) return cx;
  cx.lo = f.min_index();
  int hi = f.max_index();
  for (int d = cx.lo; d <= hi; ++d)
    cx.ranks.push_back(static_cast<long>(f.objects_at(d).size()));
  for (int d = cx.lo + 1; d <= hi; ++d) cx.boundary[d] = boundary_matrix(f, d);
  return cx;
}

GradedHomology homology(const FlowCategory& f) {
  GradedHomology gh;
  if (f.empty()) return gh;
  linalg::ChainComplex cx = morse_complex(f);
  gh.lo = cx.lo;
  if (!f.mod2) {
    gh.groups = cx.homology();
    return gh;
  }
  // mod-2 mode: dimensions over F_2.
  linalg::PrimeField f2{2};
  for (int d = cx.lo; d <= cx.hi(); ++d) {
    auto dn = linalg::to_field(f2, cx.boundary_or_zero(d));
    auto dn1 = linalg::to_field(f2, cx.boundary_or_zero(d + 1));
    long dim = cx.rank(d) - linalg::rank(f2, dn) - linalg::rank(f2, dn1);
    gh.groups.push_back({dim, {}});
  }
  return gh;
}

FlowCategory interval_subcategory(const FlowCategory& f, const std::string& a,
                                  const std::string& b) {
  f.index_of(a);  // throws UnknownObject
  f.index_of(b);

  // Reachability through nonempty moduli tables (either dimension).
  std::map<std::string, std::set<std::string>> succ;
  for (const auto& m : f.moduli0)
    if (!m.signs.empty()) succ[m.from].insert(m.to);
  for (const auto& m : f.moduli1)
    if (!m.components.empty()) succ[m.from].insert(m.to);

  auto reachable = [&](const std::string& from) {
    std::set<std::string> seen{from};
    std::vector<std::string> stack{from};
    while (!stack.empty()) {
      std::string cur = stack.back();
      stack.pop_back();
      for (const auto& nxt : succ[cur])
        if (seen.insert(nxt).second) stack.push_back(nxt);
    }
    return seen;
  };

  std::set<std::string> below_a = reachable(a);
  std::set<std::string> keep;
  for (const auto& id : below_a) {
    auto down = reachable(id);
    if (down.count(b)) keep.insert(id);
  }

  FlowCategory out;
  out.mod2 = f.mod2;
  out.has_moduli1 = f.has_moduli1;
  for (const auto& o : f.objects)
    if (keep.count(o.id)) out.objects.push_back(o);
  for (const auto& m : f.moduli0)
    if (keep.count(m.from) && keep.count(m.to)) out.moduli0.push_back(m);
  for (const auto& m : f.moduli1)
    if (keep.count(m.from) && keep.count(m.to)) out.moduli1.push_back(m);
  return out;
}

}  // namespace flowcat
