#include "flowcat/corners.hpp"

#include <algorithm>
#include <sstream>

#include "flowcat/errors.hpp"

namespace flowcat::corners {

CornerComplex::CornerComplex(int k) : k_(k), faces_(static_cast<std::size_t>(k)) {
  if (k < 0) throw InvalidComplex("negative corner depth");
}

void CornerComplex::add_stratum(const std::string& label, int codim, bool connected) {
  if (by_label_.count(label)) throw InvalidComplex("duplicate stratum label " + label);
  if (codim < 0) throw InvalidComplex("negative codim for " + label);
  by_label_[label] = strata_.size();
  strata_.push_back({label, codim, connected});
  closure_of_.emplace_back();
  finalized_ = false;
}

std::size_t CornerComplex::idx(const std::string& label) const {
  auto it = by_label_.find(label);
  if (it == by_label_.end()) throw InvalidComplex("unknown stratum " + label);
  return it->second;
}

void CornerComplex::add_incidence(const std::string& deep, const std::string& shallow) {
  closure_of_[idx(shallow)].insert(idx(deep));
  finalized_ = false;
}

void CornerComplex::set_face(int j, const std::vector<std::string>& members) {
  if (j < 1 || j > k_) throw InvalidComplex("face index out of range");
  for (const auto& m : members) idx(m);
  faces_[static_cast<std::size_t>(j - 1)] = members;
}

void CornerComplex::finalize() {
  // closure_of_[s] = all strata lying in the closure of s, reflexively.
  for (std::size_t s = 0; s < strata_.size(); ++s) closure_of_[s].insert(s);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t s = 0; s < strata_.size(); ++s) {
      std::set<std::size_t> next = closure_of_[s];
      for (std::size_t t : closure_of_[s])
        next.insert(closure_of_[t].begin(), closure_of_[t].end());
      if (next.size() != closure_of_[s].size()) {
        closure_of_[s] = std::move(next);
        changed = true;
      }
    }
  }
  finalized_ = true;
}

const Stratum& CornerComplex::stratum(const std::string& label) const {
  return strata_[idx(label)];
}

bool CornerComplex::has_stratum(const std::string& label) const {
  return by_label_.count(label) != 0;
}

const std::vector<std::string>& CornerComplex::face(int j) const {
  if (j < 1 || j > k_) throw InvalidComplex("face index out of range");
  return faces_[static_cast<std::size_t>(j - 1)];
}

bool CornerComplex::in_closure(const std::string& deep, const std::string& shallow) const {
  if (!finalized_) throw InvalidComplex("complex not finalized");
  return closure_of_[idx(shallow)].count(idx(deep)) != 0;
}

std::vector<std::string> CornerComplex::face_closure(int j) const {
  std::set<std::string> out;
  for (const auto& m : face(j))
    for (std::size_t s : closure_of_[idx(m)]) out.insert(strata_[s].label);
  return {out.begin(), out.end()};
}

Report validate(const CornerComplex& c) {
  Report r;

  // Incidence must strictly increase codimension.
  std::string mono_bad;
  for (const auto& s : c.strata())
    for (const auto& t : c.strata()) {
      if (s.label == t.label) continue;
      if (c.in_closure(s.label, t.label) && s.codim <= t.codim)
        mono_bad += s.label + " in closure of " + t.label + " ";
    }
  r.add("incidence/codim_monotone", mono_bad.empty(), mono_bad);

  // Face lists hold codim-1 strata only.
  std::string fm_bad;
  for (int j = 1; j <= c.k(); ++j)
    for (const auto& m : c.face(j))
      if (c.stratum(m).codim != 1) fm_bad += m + " in F" + std::to_string(j) + " ";
  r.add("faces/members_codim1", fm_bad.empty(), fm_bad);

  // Connected-face membership: a codim-q stratum must lie in the closures of
  // exactly q distinct listed codim-1 strata, all of them connected.
  std::set<std::string> listed;
  for (int j = 1; j <= c.k(); ++j)
    for (const auto& m : c.face(j)) listed.insert(m);

  std::string count_bad;
  for (const auto& s : c.strata()) {
    int n = 0;
    bool disconnected_witness = false;
    for (const auto& f : listed)
      if (c.in_closure(s.label, f)) {
        ++n;
        if (!c.stratum(f).connected) disconnected_witness = true;
      }
    if (n != s.codim || disconnected_witness) {
      std::ostringstream os;
      os << s.label << " lies in " << n << " != " << s.codim << " faces";
      if (disconnected_witness) os << " (disconnected face)";
      count_bad += os.str() + "; ";
    }
  }
  r.add("faces/membership_count", count_bad.empty(), count_bad);

  // The faces cover the whole boundary.
  std::set<std::string> covered;
  for (int j = 1; j <= c.k(); ++j)
    for (const auto& s : c.face_closure(j)) covered.insert(s);
  std::string cover_bad;
  for (const auto& s : c.strata())
    if (s.codim >= 1 && !covered.count(s.label)) cover_bad += s.label + " ";
  r.add("faces/boundary_cover", cover_bad.empty(), cover_bad);

  // Pairwise intersections are faces of both: no shared codim-1 strata.
  std::string inter_bad;
  for (int i = 1; i <= c.k(); ++i) {
    auto ci = c.face_closure(i);
    std::set<std::string> si(ci.begin(), ci.end());
    for (int j = i + 1; j <= c.k(); ++j)
      for (const auto& s : c.face_closure(j))
        if (si.count(s) && c.stratum(s).codim < 2)
          inter_bad += s + " in F" + std::to_string(i) + " and F" + std::to_string(j) + " ";
  }
  r.add("faces/pairwise_intersection", inter_bad.empty(), inter_bad);

  // Every boundary stratum is a limit of interior points.
  std::string reach_bad;
  for (const auto& s : c.strata()) {
    if (s.codim == 0) continue;
    bool hit = false;
    for (const auto& t : c.strata())
      if (t.codim == 0 && c.in_closure(s.label, t.label)) {
        hit = true;
        break;
      }
    if (!hit) reach_bad += s.label + " ";
  }
  r.add("incidence/interior_closure", reach_bad.empty(), reach_bad);

  return r;
}

KDiagram two_k_diagram(const CornerComplex& c) {
  if (!validate(c).ok()) throw InvalidComplex("two_k_diagram on invalid complex");
  KDiagram d;
  d.k = c.k();
  const unsigned long full = (c.k() >= 64) ? ~0ul : ((1ul << c.k()) - 1);

  std::vector<std::string> all;
  for (const auto& s : c.strata()) all.push_back(s.label);
  std::sort(all.begin(), all.end());

  for (unsigned long a = 0; a <= full; ++a) {
    if (a == full) {
      d.sets[a] = all;
      break;
    }
    std::set<std::string> cur(all.begin(), all.end());
    for (int j = 1; j <= c.k(); ++j) {
      if (a & (1ul << (j - 1))) continue;  // face j not intersected
      auto fc = c.face_closure(j);
      std::set<std::string> fs(fc.begin(), fc.end());
      std::set<std::string> next;
      for (const auto& s : cur)
        if (fs.count(s)) next.insert(s);
      cur = std::move(next);
    }
    d.sets[a] = {cur.begin(), cur.end()};
  }
  return d;
}

CornerComplex product(const CornerComplex& a, const CornerComplex& b) {
  if (!validate(a).ok() || !validate(b).ok())
    throw InvalidComplex("product of invalid complex");

  auto pair_label = [](const std::string& x, const std::string& y) {
    return "(" + x + ")x(" + y + ")";
  };

  CornerComplex out(a.k() + b.k());
  for (const auto& sa : a.strata())
    for (const auto& sb : b.strata())
      out.add_stratum(pair_label(sa.label, sb.label), sa.codim + sb.codim,
                      sa.connected && sb.connected);

  for (const auto& sa : a.strata())
    for (const auto& ta : a.strata())
      for (const auto& sb : b.strata())
        for (const auto& tb : b.strata()) {
          if (sa.label == ta.label && sb.label == tb.label) continue;
          if (a.in_closure(sa.label, ta.label) && b.in_closure(sb.label, tb.label))
            out.add_incidence(pair_label(sa.label, sb.label), pair_label(ta.label, tb.label));
        }

  for (int j = 1; j <= a.k(); ++j) {
    std::vector<std::string> members;
    for (const auto& m : a.face(j))
      for (const auto& sb : b.strata())
        if (sb.codim == 0) members.push_back(pair_label(m, sb.label));
    out.set_face(j, members);
  }
  for (int j = 1; j <= b.k(); ++j) {
    std::vector<std::string> members;
    for (const auto& m : b.face(j))
      for (const auto& sa : a.strata())
        if (sa.codim == 0) members.push_back(pair_label(sa.label, m));
    out.set_face(a.k() + j, members);
  }

  out.finalize();
  return out;
}

CornerComplex rplus_model(int k) {
  CornerComplex c(k);
  const unsigned long full = (1ul << k);
  auto name = [](unsigned long mask) {
    std::string s = "z";
    for (int j = 0; j < 30; ++j)
      if (mask & (1ul << j)) s += std::to_string(j + 1);
    return s;
  };
  for (unsigned long m = 0; m < full; ++m)
    c.add_stratum(name(m), __builtin_popcountl(m));
  for (unsigned long m = 0; m < full; ++m)
    for (unsigned long t = 0; t < full; ++t)
      if (t != m && (t & m) == t) c.add_incidence(name(m), name(t));
  for (int j = 1; j <= k; ++j) c.set_face(j, {name(1ul << (j - 1))});
  c.finalize();
  return c;
}

CornerComplex interval_model() {
  CornerComplex c(1);
  c.add_stratum("int", 0);
  c.add_stratum("e0", 1);
  c.add_stratum("e1", 1);
  c.add_incidence("e0", "int");
  c.add_incidence("e1", "int");
  c.set_face(1, {"e0", "e1"});
  c.finalize();
  return c;
}

CornerComplex point_model() {
  CornerComplex c(0);
  c.add_stratum("pt", 0);
  c.finalize();
  return c;
}

namespace {

// A stratum of a compactified moduli space: an index-decreasing chain of
// intermediate objects plus one component choice per factor.  Factors with
// index gap one contribute point keys, gap two contribute component indices
// of the one-dimensional data, deeper gaps are opaque single components.
struct ChainStratum {
  std::vector<std::string> objs;  // c_0 = a, ..., c_{j+1} = b
  std::vector<int> comp;          // one entry per factor

  std::string label() const {
    std::string s = objs.front();
    for (std::size_t i = 0; i + 1 < objs.size(); ++i)
      s += "|" + std::to_string(comp[i]) + "|" + objs[i + 1];
    return s;
  }
};

int factor_gap(const FlowCategory& f, const std::string& x, const std::string& y) {
  return f.index_of(x) - f.index_of(y);
}

// Number of components of the factor M(x, y); -1 when the data is missing.
int factor_components(const FlowCategory& f, const std::string& x, const std::string& y) {
  int gap = factor_gap(f, x, y);
  if (gap == 1) {
    const ModuliZero* m = f.moduli0_for(x, y);
    return m ? static_cast<int>(m->signs.size()) : 0;
  }
  if (gap == 2) {
    const ModuliOne* m = f.moduli1_for(x, y);
    return m ? static_cast<int>(m->components.size()) : -1;
  }
  return 1;  // opaque
}

}  // namespace

CornerComplex moduli_corner(const FlowCategory& f, const std::string& a,
                            const std::string& b) {
  const int gap = f.index_of(a) - f.index_of(b);
  const int k = gap - 1;
  if (k < 0) throw PreconditionViolation("moduli_corner needs mu(a) > mu(b)");

  // Enumerate chains a > c_1 > ... > c_j > b strictly decreasing in index.
  std::vector<std::vector<std::string>> chains;
  std::vector<std::vector<std::string>> frontier{{a}};
  while (!frontier.empty()) {
    std::vector<std::vector<std::string>> next;
    for (auto& ch : frontier) {
      const int top = f.index_of(ch.back());
      {
        auto full = ch;
        full.push_back(b);
        if (top > f.index_of(b)) chains.push_back(full);
      }
      for (const auto& o : f.objects)
        if (o.index < top && o.index > f.index_of(b)) {
          auto ext = ch;
          ext.push_back(o.id);
          next.push_back(ext);
        }
    }
    frontier = std::move(next);
  }

  // Materialize strata: every combination of factor components, skipping
  // chains with an empty factor.  Missing gap-2 data is an error only when
  // all other factors are nonempty (the chain would otherwise contribute).
  std::vector<ChainStratum> strata;
  for (const auto& ch : chains) {
    std::vector<int> counts;
    bool empty_factor = false, missing = false;
    for (std::size_t i = 0; i + 1 < ch.size(); ++i) {
      int n = factor_components(f, ch[i], ch[i + 1]);
      if (n == 0) empty_factor = true;
      if (n < 0) missing = true;
      counts.push_back(n);
    }
    if (empty_factor) continue;
    if (missing)
      throw MissingModuliData("one-dimensional data absent for a factor of chain through " +
                              ch[1 < ch.size() - 1 ? 1 : 0]);
    std::vector<int> comp(counts.size(), 0);
    while (true) {
      strata.push_back({ch, comp});
      std::size_t i = 0;
      for (; i < comp.size(); ++i) {
        if (++comp[i] < counts[i]) break;
        comp[i] = 0;
      }
      if (i == comp.size()) break;
    }
  }

  CornerComplex out(k);
  for (const auto& s : strata)
    out.add_stratum(s.label(), static_cast<int>(s.objs.size()) - 2);

  // One-step incidence: deleting one break. The two factors around the break
  // merge; the merged component must contain the broken pair in its closure.
  for (const auto& s : strata) {
    if (s.objs.size() <= 2) continue;
    for (std::size_t t = 1; t + 1 < s.objs.size(); ++t) {
      ChainStratum up;
      up.objs = s.objs;
      up.objs.erase(up.objs.begin() + static_cast<long>(t));
      const std::string& x = s.objs[t - 1];
      const std::string& mid = s.objs[t];
      const std::string& y = s.objs[t + 1];
      const int merged_gap = factor_gap(f, x, y);

      std::vector<int> merged_choices;
      if (merged_gap == 2) {
        // Only if both sides were points; find the interval with this end.
        const ModuliOne* m1 = f.moduli1_for(x, y);
        if (!m1) throw MissingModuliData(x + "->" + y);
        BrokenFlow bf{mid, s.comp[t - 1], s.comp[t]};
        for (int ci = 0; ci < static_cast<int>(m1->components.size()); ++ci)
          if (const Interval* iv = std::get_if<Interval>(&m1->components[static_cast<std::size_t>(ci)]))
            if (iv->end0 == bf || iv->end1 == bf) merged_choices.push_back(ci);
      } else {
        merged_choices.push_back(0);  // opaque factor absorbs any break
      }

      for (int mc : merged_choices) {
        up.comp.clear();
        for (std::size_t i = 0; i + 1 < s.objs.size(); ++i) {
          if (i == t - 1) {
            up.comp.push_back(mc);
          } else if (i == t) {
            continue;
          } else {
            up.comp.push_back(s.comp[i]);
          }
        }
        if (out.has_stratum(up.label())) out.add_incidence(s.label(), up.label());
      }
    }
  }

  // Face j: breaks at index mu(a) - j.
  for (int j = 1; j <= k; ++j) {
    std::vector<std::string> members;
    for (const auto& s : strata)
      if (s.objs.size() == 3 && f.index_of(s.objs[1]) == f.index_of(a) - j)
        members.push_back(s.label());
    out.set_face(j, members);
  }

  out.finalize();
  return out;
}

}  // namespace flowcat::corners
