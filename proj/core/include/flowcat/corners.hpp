#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "flowcat/flow_category.hpp"
#include "flowcat/report.hpp"

namespace flowcat::corners {

// One stratum of a combinatorial corner structure.  Strata are labels with a
// codimension and a producer-supplied connectivity tag; no geometry is stored.
struct Stratum {
  std::string label;
  int codim = 0;
  bool connected = true;
};

// The combinatorial shadow of a manifold with corners carrying an ordered
// k-tuple of faces: a finite stratification poset plus the face lists.
// Build with add_stratum / add_incidence / set_face, then finalize().
class CornerComplex {
 public:
  explicit CornerComplex(int k = 0);

  void add_stratum(const std::string& label, int codim, bool connected = true);
  // `deep` lies in the closure of `shallow`.
  void add_incidence(const std::string& deep, const std::string& shallow);
  // j is 1-based; members should be codim-1 strata (validate checks).
  void set_face(int j, const std::vector<std::string>& members);
  void finalize();  // reflexive-transitive closure of the incidences

  int k() const { return k_; }
  std::size_t size() const { return strata_.size(); }
  const std::vector<Stratum>& strata() const { return strata_; }
  const Stratum& stratum(const std::string& label) const;
  bool has_stratum(const std::string& label) const;
  const std::vector<std::string>& face(int j) const;  // 1-based, raw members

  // Whether `deep` is in the closure of `shallow` (reflexive).
  bool in_closure(const std::string& deep, const std::string& shallow) const;

  // All strata in the closure of face j, sorted.
  std::vector<std::string> face_closure(int j) const;

 private:
  int k_;
  bool finalized_ = false;
  std::vector<Stratum> strata_;
  std::map<std::string, std::size_t> by_label_;
  std::vector<std::vector<std::string>> faces_;
  std::vector<std::set<std::size_t>> closure_of_;  // closure_of_[s]: strata whose closure contains... see cpp

  std::size_t idx(const std::string& label) const;
};

// Axiom-by-axiom validation; failures are report entries naming offenders.
Report validate(const CornerComplex& c);

// Cubical diagram of an admissible complex: objects are bit vectors a in 2^k
// (bit j-1 set means face j is NOT intersected), values are stratum sets.
struct KDiagram {
  int k = 0;
  std::map<unsigned long, std::vector<std::string>> sets;

  const std::vector<std::string>& at(unsigned long a) const { return sets.at(a); }
};

KDiagram two_k_diagram(const CornerComplex& c);  // InvalidComplex if invalid

CornerComplex product(const CornerComplex& a, const CornerComplex& b);

// Reference models.
CornerComplex rplus_model(int k);     // the nonnegative orthant
CornerComplex interval_model();       // [0,1] with both endpoints in F_1
CornerComplex point_model();          // a single closed point, k = 0

// Corner structure of the compactified moduli between a and b, assembled from
// the category's zero- and one-dimensional data.  Codim-j strata are broken
// flows through j intermediate objects; face j collects breaks at index
// mu(a) - j.  MissingModuliData when a needed one-dimensional table is absent.
CornerComplex moduli_corner(const FlowCategory& f, const std::string& a,
                            const std::string& b);

}  // namespace flowcat::corners
