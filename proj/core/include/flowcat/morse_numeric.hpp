#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flowcat/comparison.hpp"
#include "flowcat/flow_category.hpp"

namespace flowcat::morse {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct NumericConfig {
  double tol_crit = 1e-10;     // |grad f| at an accepted critical point
  double tol_nondeg = 1e-6;    // smallest |Hessian eigenvalue| allowed
  double delta_arrive = 1e-6;  // arrival distance to a critical point
  double tol_merge = 1e-6;     // duplicate critical point merge distance
  int bisect_depth = 60;
  double shoot_radius = 1e-2;  // offset along unstable directions
  double rk_tol = 1e-10;
  double max_step = 0.25;
  double class_radius = 0.05;  // basin-side signatures are read at this distance
  long max_steps = 400000;
  int jobs = 1;
  unsigned seed = 0;  // recorded in outputs; the pipeline itself is deterministic
};

// A surface with a scalar function: either an implicit surface {g = 0} in R^3
// with the induced metric, or a flat torus chart (R/2pi Z)^k.  Derivatives are
// supplied in closed form by the builders below; fd_* helpers can fill them
// from values alone.
struct SurfaceSpec {
  enum class Kind { Implicit3D, FlatTorus };
  Kind kind = Kind::FlatTorus;
  int dim = 1;  // ambient dimension (3) or chart dimension (k)
  std::string name;

  std::function<double(const Vec&)> g;  // implicit constraint, unused for tori
  std::function<Vec(const Vec&)> grad_g;
  std::function<Mat(const Vec&)> hess_g;

  std::function<double(const Vec&)> f;
  std::function<Vec(const Vec&)> grad_f;
  std::function<Mat(const Vec&)> hess_f;

  std::function<bool(const Vec&)> in_domain;  // optional chart/sector restriction

  std::vector<Vec> seeds;  // deterministic Newton starting points
};

// Central finite differences for specs given by values only.
std::function<Vec(const Vec&)> fd_gradient(std::function<double(const Vec&)> f, double h = 1e-6);
std::function<Mat(const Vec&)> fd_hessian(std::function<double(const Vec&)> f, double h = 1e-4);

// Built-in examples.
SurfaceSpec circle_surface();
SurfaceSpec sphere_surface();
// Standing torus (tube axis horizontal) with a linear height function; the
// height direction is normalized internally.
SurfaceSpec torus_surface(const Vec& height_dir, double R = 2.0, double r = 1.0);
SurfaceSpec upright_torus_surface();  // height near-vertical, symmetry broken
SurfaceSpec tilted_torus_surface();
// Discretized loop energy on k marked points in winding sector n, with a
// symmetry-breaking perturbation eps; PerturbationTooSmall when eps <= 0.
SurfaceSpec broken_geodesic_loopspace(int k, int n, double eps);

struct CriticalPointRec {
  std::string id;
  std::string label;
  Vec x;
  double value = 0;
  int index = 0;
  Vec eigenvalues;   // restricted Hessian spectrum, ascending
  Mat eigenvectors;  // matching unit eigenvectors as columns (ambient coords)

  Mat unstable_frame() const {  // columns spanning the descending directions
    return eigenvectors.leftCols(index);
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec> points;
  std::vector<double> values;
  std::string arrival;  // critical point id, empty when none
  double arrival_dist = 0;
  bool monotone = true;  // f strictly decreasing along the samples
};

struct MorseSystem {
  SurfaceSpec surface;
  NumericConfig cfg;
  std::vector<CriticalPointRec> crits;

  const CriticalPointRec* find(const std::string& id) const;
  const CriticalPointRec& get(const std::string& id) const;  // UnknownObject
};

std::vector<CriticalPointRec> find_critical_points(const SurfaceSpec& s,
                                                   const NumericConfig& cfg);
MorseSystem analyze(SurfaceSpec s, NumericConfig cfg = {});

// Negative gradient flow from x0 until arrival within delta_arrive of a
// critical point; MaxStepsExceeded / LeftChartDomain on failure.
Trajectory integrate_flow(const MorseSystem& sys, const Vec& x0);

// Signed connecting orbits for an index gap of one (PreconditionViolation
// otherwise).  Point order is canonical and deterministic.
ModuliZero connecting_orbits(const MorseSystem& sys, const std::string& a,
                             const std::string& b);

// One-dimensional families for an index gap of two, as intervals between
// consecutive breaks plus closed circles.
ModuliOne gap2_moduli(const MorseSystem& sys, const std::string& a, const std::string& b);

// The full category: objects, all gap-1 moduli, gap-2 families where the
// source has a one-dimensional unstable sphere.
struct OrbitRecord {
  std::string from, to;
  int point = 0;
  Trajectory trajectory;
};
struct GeneratedCategory {
  FlowCategory category;
  std::vector<OrbitRecord> orbits;
};
GeneratedCategory generate_category(const MorseSystem& sys);
FlowCategory build_flow_category(const MorseSystem& sys);

// Mixed signed counts between two functions on the same surface, by flowing
// the source system's unstable sets under the target system's flow.
comparison::ComparisonData continuation_data(const MorseSystem& src, const MorseSystem& tgt);

std::string trajectory_tsv(const Trajectory& t);

}  // namespace flowcat::morse
