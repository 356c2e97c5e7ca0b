#pragma once

#include <string>
#include <variant>
#include <vector>

#include "flowcat/flow_category.hpp"

namespace flowcat::comparison {

// Signed points of a zero-dimensional mixed moduli space between a source
// object and a target object of equal index.
struct MixedModuliZero {
  std::string source, target;
  std::vector<int> signs;

  long signed_count() const {
    long n = 0;
    for (int s : signs) n += s;
    return n;
  }
};

// An end of a one-dimensional mixed family breaks in one of two ways:
// through the source category (a flow of M_src(a, mid) then a mixed point
// of (mid, beta)), or through the target (a mixed point of (a, mid) then a
// flow of M_tgt(mid, beta)).
struct MixedEnd {
  enum class Kind { SourceBreak, TargetBreak };
  Kind kind = Kind::SourceBreak;
  std::string mid;
  int flow_pt = 0;   // point key in the flow moduli involved
  int mixed_pt = 0;  // point key in the mixed moduli involved

  bool operator==(const MixedEnd& o) const {
    return kind == o.kind && mid == o.mid && flow_pt == o.flow_pt && mixed_pt == o.mixed_pt;
  }
  bool operator<(const MixedEnd& o) const {
    if (kind != o.kind) return kind < o.kind;
    if (mid != o.mid) return mid < o.mid;
    if (flow_pt != o.flow_pt) return flow_pt < o.flow_pt;
    return mixed_pt < o.mixed_pt;
  }
};

struct MixedInterval {
  MixedEnd end0, end1;
};
struct MixedCircle {};
using MixedComponent = std::variant<MixedInterval, MixedCircle>;

struct MixedModuliOne {
  std::string source, target;  // index difference one
  std::vector<MixedComponent> components;
};

struct ComparisonData {
  FlowCategory source, target;
  std::vector<MixedModuliZero> mixed0;
  std::vector<MixedModuliOne> mixed1;
  bool has_mixed1 = false;

  const MixedModuliZero* mixed0_for(const std::string& a, const std::string& b) const;
};

// Psi_m per degree: rows = target objects of index m, columns = source
// objects, entries = signed mixed counts.  IndexMismatch when mixed data
// pairs objects of unequal index.
struct GradedMatrices {
  int lo = 0;
  std::vector<linalg::IntMatrix> mats;

  linalg::IntMatrix at_or_empty(int m, const FlowCategory& source,
                                const FlowCategory& target) const;
};

GradedMatrices build_psi(const ComparisonData& d);

// Chain-map identity Psi d = d Psi degree by degree; with one-dimensional
// mixed data present, also end/break matching with opposite product signs.
Report verify_chain_map(const ComparisonData& d, const GradedMatrices& psi);

// Quasi-isomorphism certificate, two independent routes: acyclicity of the
// mapping cone, and the induced map on homology being an isomorphism in every
// degree.  NotAChainMap if the chain-map identity fails.
Report quasi_iso_check(const ComparisonData& d, const GradedMatrices& psi);

}  // namespace flowcat::comparison
