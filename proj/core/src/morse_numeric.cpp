#include "flowcat/morse_numeric.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <sstream>
#include <thread>

#include "flowcat/errors.hpp"

namespace flowcat::morse {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void parallel_for(int jobs, int n, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  int width = std::min(jobs, n);
  pool.reserve(static_cast<std::size_t>(width));
  for (int j = 0; j < width; ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Chart-aware geometry over a SurfaceSpec.
struct Geom {
  const SurfaceSpec& s;
  const NumericConfig& cfg;

  bool torus() const { return s.kind == SurfaceSpec::Kind::FlatTorus; }

  Vec canonical(Vec x) const {
    if (torus())
      for (int i = 0; i < x.size(); ++i) x[i] -= kTwoPi * std::floor(x[i] / kTwoPi);
    return x;
  }

  Vec displacement(const Vec& from, const Vec& to) const {
    Vec d = to - from;
    if (torus())
      for (int i = 0; i < d.size(); ++i) d[i] = std::remainder(d[i], kTwoPi);
    return d;
  }

  double distance(const Vec& a, const Vec& b) const { return displacement(a, b).norm(); }

  Vec retract(Vec x) const {
    if (torus()) return canonical(std::move(x));
    for (int it = 0; it < 60; ++it) {
      double gv = s.g(x);
      if (std::abs(gv) < 1e-12) return x;
      Vec gg = s.grad_g(x);
      double n2 = gg.squaredNorm();
      if (n2 < 1e-16) break;
      x -= (gv / n2) * gg;
    }
    throw LeftChartDomain("retraction to the surface failed");
  }

  Vec tangent_project(const Vec& x, Vec v) const {
    if (torus()) return v;
    Vec n = s.grad_g(x).normalized();
    return v - n.dot(v) * n;
  }

  // Negative gradient of the restricted function.
  Vec field(const Vec& x) const { return -tangent_project(x, s.grad_f(x)); }

  Vec field_dir_deriv(const Vec& x, const Vec& v, int direction) const {
    const double h = 1e-6;
    Vec xp = retract(x + h * v);
    Vec xm = retract(x - h * v);
    Vec d = (field(xp) - field(xm)) / (2.0 * h);
    return tangent_project(x, direction * d);
  }

  bool in_domain(const Vec& x) const { return s.in_domain ? s.in_domain(x) : true; }

  // Riemannian gradient norm of the restriction.
  double grad_norm(const Vec& x) const { return tangent_project(x, s.grad_f(x)).norm(); }
};

// Sign-preserving thin orthonormalization (positive diagonal R).
Mat orthonormalize(const Mat& v) {
  if (v.cols() == 0) return v;
  Eigen::HouseholderQR<Mat> qr(v);
  Mat q = qr.householderQ() * Mat::Identity(v.rows(), v.cols());
  Mat r = q.transpose() * v;
  for (int i = 0; i < v.cols(); ++i)
    if (r(i, i) < 0) q.col(i) = -q.col(i);
  return q;
}

struct FlowResult {
  Trajectory traj;
  Mat frame;            // transported frame at the end point (columns)
  int arrival = -1;     // index into sys.crits, -1 if none
  Vec end;              // final position
  Vec end_field;        // flow field at the final position
  std::map<int, Vec> entry;  // displacement at first entry into each crit's ball
};

// Cash-Karp 4(5) with tangential projection each accepted step; the frame is
// carried along by the linearized flow and re-orthonormalized.  When
// stop_near is set, integration also ends on entering that ball, with
// arrival left unset.
FlowResult integrate_impl(const MorseSystem& sys, Vec x0, Mat v0, int direction,
                          const Vec* stop_near = nullptr, double stop_radius = 0) {
  const Geom geo{sys.surface, sys.cfg};
  const NumericConfig& cfg = sys.cfg;

  static const double a21 = 1.0 / 5;
  static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static const double a41 = 3.0 / 10, a42 = -9.0 / 10, a43 = 6.0 / 5;
  static const double a51 = -11.0 / 54, a52 = 5.0 / 2, a53 = -70.0 / 27, a54 = 35.0 / 27;
  static const double a61 = 1631.0 / 55296, a62 = 175.0 / 512, a63 = 575.0 / 13824,
                      a64 = 44275.0 / 110592, a65 = 253.0 / 4096;
  static const double b1 = 37.0 / 378, b3 = 250.0 / 621, b4 = 125.0 / 594, b6 = 512.0 / 1771;
  static const double c1 = 2825.0 / 27648, c3 = 18575.0 / 48384, c4 = 13525.0 / 55296,
                      c5 = 277.0 / 14336, c6 = 1.0 / 4;

  auto fld = [&](const Vec& x) { return Vec(direction * geo.field(x)); };

  FlowResult out;
  Vec x = geo.retract(std::move(x0));
  Mat v = v0;
  if (v.cols() > 0) {
    for (int i = 0; i < v.cols(); ++i) v.col(i) = geo.tangent_project(x, v.col(i));
    v = orthonormalize(v);
  }
  double t = 0, h = 1e-3;
  double fx = sys.surface.f(x);

  out.traj.times.push_back(t);
  out.traj.points.push_back(x);
  out.traj.values.push_back(fx);

  auto note_entries = [&](const Vec& at) {
    for (std::size_t ci = 0; ci < sys.crits.size(); ++ci) {
      if (out.entry.count(static_cast<int>(ci))) continue;
      Vec d = geo.displacement(sys.crits[ci].x, at);
      if (d.norm() < cfg.class_radius) out.entry[static_cast<int>(ci)] = d;
    }
  };
  note_entries(x);

  // Arrival right at the start (flows launched at a critical point).
  for (std::size_t ci = 0; ci < sys.crits.size(); ++ci)
    if (geo.distance(x, sys.crits[ci].x) < cfg.delta_arrive) {
      out.arrival = static_cast<int>(ci);
      out.traj.arrival = sys.crits[ci].id;
      out.traj.arrival_dist = geo.distance(x, sys.crits[ci].x);
      out.end = x;
      out.end_field = fld(x);
      out.frame = v;
      return out;
    }

  for (long step = 0; step < cfg.max_steps; ++step) {
    Vec k1 = fld(x);
    if (k1.norm() < 1e-14) throw MaxStepsExceeded("flow stalled away from critical points");

    Vec k2, k3, k4, k5, k6, x5;
    double err;
    while (true) {
      k2 = fld(geo.retract(x + h * (a21 * k1)));
      k3 = fld(geo.retract(x + h * (a31 * k1 + a32 * k2)));
      k4 = fld(geo.retract(x + h * (a41 * k1 + a42 * k2 + a43 * k3)));
      k5 = fld(geo.retract(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4)));
      k6 = fld(geo.retract(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5)));
      x5 = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b6 * k6);
      Vec x4 = x + h * (c1 * k1 + c3 * k3 + c4 * k4 + c5 * k5 + c6 * k6);
      err = (x5 - x4).norm() / (cfg.rk_tol * (1.0 + x.norm()));
      if (err <= 1.0 || h < 1e-12) break;
      h *= std::max(0.2, 0.9 * std::pow(err, -0.25));
    }
    if (h < 1e-12) throw MaxStepsExceeded("step size underflow");

    Vec x_new = geo.retract(x5);
    if (!geo.in_domain(x_new)) throw LeftChartDomain("flow left the chart domain");

    if (v.cols() > 0) {
      Vec x_mid = geo.retract(x + 0.5 * geo.displacement(x, x_new));
      auto jac = [&](const Vec& at, const Mat& w) {
        Mat out_w(w.rows(), w.cols());
        for (int i = 0; i < w.cols(); ++i) out_w.col(i) = geo.field_dir_deriv(at, w.col(i), direction);
        return out_w;
      };
      Mat j1 = jac(x, v);
      Mat j2 = jac(x_mid, Mat(v + 0.5 * h * j1));
      Mat j3 = jac(x_mid, Mat(v + 0.5 * h * j2));
      Mat j4 = jac(x_new, Mat(v + h * j3));
      v += (h / 6.0) * (j1 + 2.0 * j2 + 2.0 * j3 + j4);
      for (int i = 0; i < v.cols(); ++i) v.col(i) = geo.tangent_project(x_new, v.col(i));
      v = orthonormalize(v);
    }

    t += h;
    x = std::move(x_new);
    double fx_new = sys.surface.f(x);
    if (direction > 0 && fx_new >= fx + 1e-13 * (1.0 + std::abs(fx))) out.traj.monotone = false;
    fx = fx_new;
    out.traj.times.push_back(t);
    out.traj.points.push_back(x);
    out.traj.values.push_back(fx);
    note_entries(x);

    if (stop_near && geo.distance(x, *stop_near) < stop_radius) {
      out.end = x;
      out.end_field = fld(x);
      out.frame = v;
      return out;
    }

    for (std::size_t ci = 0; ci < sys.crits.size(); ++ci)
      if (geo.distance(x, sys.crits[ci].x) < cfg.delta_arrive) {
        out.arrival = static_cast<int>(ci);
        out.traj.arrival = sys.crits[ci].id;
        out.traj.arrival_dist = geo.distance(x, sys.crits[ci].x);
        out.end = x;
        out.end_field = fld(x);
        out.frame = v;
        return out;
      }

    h = std::min({h * std::min(5.0, 0.9 * std::pow(std::max(err, 1e-10), -0.2)), cfg.max_step});
  }
  throw MaxStepsExceeded("no arrival after max_steps");
}

}  // namespace

const CriticalPointRec* MorseSystem::find(const std::string& id) const {
  for (const auto& c : crits)
    if (c.id == id) return &c;
  return nullptr;
}

const CriticalPointRec& MorseSystem::get(const std::string& id) const {
  const CriticalPointRec* c = find(id);
  if (!c) throw UnknownObject(id);
  return *c;
}

std::vector<CriticalPointRec> find_critical_points(const SurfaceSpec& s,
                                                   const NumericConfig& cfg) {
  Geom geo{s, cfg};
  const bool torus = s.kind == SurfaceSpec::Kind::FlatTorus;

  std::vector<Vec> found;
  for (const Vec& seed : s.seeds) {
    Vec x;
    try {
      x = geo.retract(seed);
    } catch (const LeftChartDomain&) {
      continue;
    }
    bool converged = false;
    if (torus) {
      for (int it = 0; it < 80; ++it) {
        Vec g = s.grad_f(x);
        if (g.norm() <= cfg.tol_crit) {
          converged = true;
          break;
        }
        Mat h = s.hess_f(x);
        Eigen::FullPivLU<Mat> lu(h);
        if (!lu.isInvertible()) break;
        Vec step = lu.solve(g);
        if (!step.allFinite() || step.norm() > 2.0) break;
        x = geo.canonical(x - step);
      }
    } else {
      // Constrained stationarity: grad f = lambda grad g on {g = 0}.
      Vec gg = s.grad_g(x);
      double lambda = s.grad_f(x).dot(gg) / gg.squaredNorm();
      for (int it = 0; it < 80; ++it) {
        Vec gf = s.grad_f(x);
        gg = s.grad_g(x);
        double gv = s.g(x);
        if (geo.grad_norm(x) <= cfg.tol_crit && std::abs(gv) <= 1e-12) {
          converged = true;
          break;
        }
        Mat jac(4, 4);
        jac.topLeftCorner(3, 3) = s.hess_f(x) - lambda * s.hess_g(x);
        jac.topRightCorner(3, 1) = -gg;
        jac.bottomLeftCorner(1, 3) = gg.transpose();
        jac(3, 3) = 0.0;
        Vec rhs(4);
        rhs.head(3) = -(gf - lambda * gg);
        rhs(3) = -gv;
        Eigen::FullPivLU<Mat> lu(jac);
        if (!lu.isInvertible()) break;
        Vec step = lu.solve(rhs);
        if (!step.allFinite() || step.norm() > 2.0) break;
        x += step.head(3);
        lambda += step(3);
      }
    }
    if (!converged) continue;
    if (!geo.in_domain(x)) continue;
    bool dup = false;
    for (const Vec& y : found)
      if (geo.distance(x, y) < cfg.tol_merge) {
        dup = true;
        break;
      }
    if (!dup) found.push_back(x);
  }

  std::vector<CriticalPointRec> recs;
  for (const Vec& x : found) {
    CriticalPointRec rec;
    rec.x = x;
    rec.value = s.f(x);

    Mat restricted;
    Mat tangent_basis;  // columns, ambient coords
    if (torus) {
      restricted = s.hess_f(x);
      tangent_basis = Mat::Identity(s.dim, s.dim);
    } else {
      Vec n = s.grad_g(x).normalized();
      int small = 0;
      for (int i = 1; i < 3; ++i)
        if (std::abs(n[i]) < std::abs(n[small])) small = i;
      Vec e = Vec::Zero(3);
      e[small] = 1.0;
      Vec t1 = (e - n.dot(e) * n).normalized();
      Vec t2(3);
      t2 << n[1] * t1[2] - n[2] * t1[1], n[2] * t1[0] - n[0] * t1[2],
          n[0] * t1[1] - n[1] * t1[0];
      tangent_basis = Mat(3, 2);
      tangent_basis.col(0) = t1;
      tangent_basis.col(1) = t2;
      double lambda = s.grad_f(x).dot(s.grad_g(x)) / s.grad_g(x).squaredNorm();
      Mat full = s.hess_f(x) - lambda * s.hess_g(x);
      restricted = tangent_basis.transpose() * full * tangent_basis;
    }

    Eigen::SelfAdjointEigenSolver<Mat> eig(restricted);
    Vec vals = eig.eigenvalues();
    double smallest = vals.cwiseAbs().minCoeff();
    if (smallest < cfg.tol_nondeg) {
      std::ostringstream os;
      os << "at (";
      for (int i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
      os << "), smallest |eigenvalue| = " << smallest;
      throw DegenerateCriticalPoint(os.str());
    }
    rec.eigenvalues = vals;
    rec.eigenvectors = tangent_basis * eig.eigenvectors();
    for (int i = 0; i < rec.eigenvectors.cols(); ++i) {
      int big = 0;
      for (int j = 1; j < rec.eigenvectors.rows(); ++j)
        if (std::abs(rec.eigenvectors(j, i)) > std::abs(rec.eigenvectors(big, i))) big = j;
      if (rec.eigenvectors(big, i) < 0) rec.eigenvectors.col(i) = -rec.eigenvectors.col(i);
    }
    rec.index = 0;
    for (int i = 0; i < vals.size(); ++i)
      if (vals[i] < 0) ++rec.index;
    recs.push_back(std::move(rec));
  }

  std::sort(recs.begin(), recs.end(), [](const CriticalPointRec& a, const CriticalPointRec& b) {
    if (a.index != b.index) return a.index > b.index;
    if (std::abs(a.value - b.value) > 1e-12) return a.value < b.value;
    for (int i = 0; i < a.x.size(); ++i)
      if (std::abs(a.x[i] - b.x[i]) > 1e-9) return a.x[i] < b.x[i];
    return false;
  });
  std::map<int, int> seq;
  for (auto& r : recs) {
    r.id = "i" + std::to_string(r.index) + "_" + std::to_string(seq[r.index]++);
    std::ostringstream os;
    os.precision(9);
    os << "index=" << r.index << " f=" << r.value << " x=(";
    for (int i = 0; i < r.x.size(); ++i) os << (i ? "," : "") << r.x[i];
    os << ")";
    r.label = os.str();
  }
  return recs;
}

MorseSystem analyze(SurfaceSpec s, NumericConfig cfg) {
  MorseSystem sys;
  sys.crits = find_critical_points(s, cfg);
  sys.surface = std::move(s);
  sys.cfg = cfg;
  return sys;
}

Trajectory integrate_flow(const MorseSystem& sys, const Vec& x0) {
  FlowResult r = integrate_impl(sys, x0, Mat(x0.size(), 0), +1);
  return r.traj;
}

namespace {

// Arrival classification: object id plus the basin side the flow came in on.
// The side is the sign pattern, in the arrival point's eigenbasis, of the
// displacement when the trajectory first entered the classification ball;
// every component is still well above noise there, so crossings that flip
// only the strongly contracted direction remain visible.
struct ArrivalClass {
  int crit = -1;
  int side = 0;  // base-3 encoding of per-eigendirection signs
  bool operator==(const ArrivalClass& o) const { return crit == o.crit && side == o.side; }
  bool operator!=(const ArrivalClass& o) const { return !(*this == o); }
};

ArrivalClass classify(const MorseSystem& sys, const FlowResult& fr) {
  ArrivalClass c;
  c.crit = fr.arrival;
  if (fr.arrival < 0) return c;
  const CriticalPointRec& cp = sys.crits[static_cast<std::size_t>(fr.arrival)];
  if (cp.index != 0) return c;
  auto it = fr.entry.find(fr.arrival);
  if (it == fr.entry.end()) return c;
  const Vec& disp = it->second;
  const double cutoff = 1e-4 * sys.cfg.class_radius;
  int code = 0, scale = 1;
  for (int j = 0; j < cp.eigenvectors.cols(); ++j) {
    double d = disp.dot(cp.eigenvectors.col(j));
    int trit = (d > cutoff) ? 1 : (d < -cutoff ? 2 : 0);
    code += trit * scale;
    scale *= 3;
  }
  c.side = code;
  return c;
}

struct Connection {
  double theta = 0;
  int target = -1;  // crit index
  int sign = 0;
  Trajectory traj;
};

struct Sweep {
  int source = -1;
  std::vector<Connection> conns;  // sorted by theta
  ArrivalClass uniform;           // class of samples when no connections exist
};

class Sweeper {
 public:
  explicit Sweeper(const MorseSystem& sys) : sys_(sys) {}

  const Sweep& sweep(const std::string& id) {
    auto it = cache_.find(id);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(id, run(id)).first->second;
  }

 private:
  const MorseSystem& sys_;
  std::map<std::string, Sweep> cache_;

  Vec start_point(const CriticalPointRec& a, const Vec& dir) const {
    Geom geo{sys_.surface, sys_.cfg};
    return geo.retract(a.x + sys_.cfg.shoot_radius * dir);
  }

  FlowResult shoot(const CriticalPointRec& a, const Vec& dir, bool with_frame) const {
    Mat v0(a.x.size(), 0);
    if (with_frame) v0 = a.unstable_frame();
    return integrate_impl(sys_, start_point(a, dir), v0, +1);
  }

  // Sign of an orbit: transported unstable frame of the source expressed in
  // (flow direction, unstable frame of the target).
  int orbit_sign(const FlowResult& fr) const {
    const CriticalPointRec& c = sys_.crits[static_cast<std::size_t>(fr.arrival)];
    Mat basis(fr.end.size(), 1 + c.index);
    basis.col(0) = fr.end_field.normalized();
    if (c.index > 0) basis.rightCols(c.index) = c.unstable_frame();
    Mat coords = basis.colPivHouseholderQr().solve(fr.frame);
    double det = coords.determinant();
    if (std::abs(det) < 1e-8)
      throw UnresolvedBoundary("orbit sign determinant is numerically ambiguous");
    return det > 0 ? 1 : -1;
  }

  Sweep run(const std::string& id) const {
    const CriticalPointRec& a = sys_.get(id);
    Sweep sw;
    for (std::size_t i = 0; i < sys_.crits.size(); ++i)
      if (sys_.crits[i].id == id) sw.source = static_cast<int>(i);

    if (a.index == 0) return sw;
    if (a.index == 1) return run_s0(a, sw);
    if (a.index == 2) return run_s1(a, sw);
    throw Error("connecting orbits from sources of index >= 3 are not supported");
  }

  // Unstable sphere S^0: two branches.
  Sweep run_s0(const CriticalPointRec& a, Sweep sw) const {
    Vec u = a.eigenvectors.col(0);
    for (int branch = 0; branch < 2; ++branch) {
      Vec dir = (branch == 0 ? 1.0 : -1.0) * u;
      FlowResult fr = shoot(a, dir, true);
      const CriticalPointRec& c = sys_.crits[static_cast<std::size_t>(fr.arrival)];
      if (c.index >= a.index)
        throw UnresolvedBoundary("flow from " + a.id + " arrived at " + c.id +
                                 " of index >= its source (transversality failure)");
      if (c.index != a.index - 1) continue;  // deeper drop, not a gap-1 orbit
      Connection conn;
      conn.theta = branch == 0 ? 0.0 : 3.14159265358979323846;
      conn.target = fr.arrival;
      conn.traj = fr.traj;
      conn.sign = orbit_sign(fr);
      sw.conns.push_back(std::move(conn));
    }
    if (sw.conns.empty()) {
      FlowResult fr = shoot(a, u, false);
      sw.uniform = classify(sys_, fr);
    }
    return sw;
  }

  // Unstable circle: orbits to index-1 targets are enumerated by shooting
  // backward from each target's stable directions.  This is complete (each
  // stable branch is one orbit) and immune to arbitrarily thin angular
  // wedges, which forward sampling misses.
  Sweep run_s1(const CriticalPointRec& a, Sweep sw) const {
    const NumericConfig& cfg = sys_.cfg;
    Geom geo{sys_.surface, sys_.cfg};
    Vec u1 = a.eigenvectors.col(0), u2 = a.eigenvectors.col(1);
    auto dir_at = [&](double theta) { return Vec(std::cos(theta) * u1 + std::sin(theta) * u2); };

    const double back_offset = 1e-3;

    for (std::size_t ci = 0; ci < sys_.crits.size(); ++ci) {
      const CriticalPointRec& c = sys_.crits[ci];
      if (c.index != a.index - 1) continue;
      int stable_dim = 0;
      for (int col = 0; col < c.eigenvalues.size(); ++col)
        if (c.eigenvalues[col] > 0) ++stable_dim;
      if (stable_dim != 1)
        throw Error("orbit enumeration needs one-dimensional stable sets at the targets");
      // Stable directions: eigenvectors with positive restricted eigenvalue.
      for (int col = 0; col < c.eigenvectors.cols(); ++col) {
        if (c.eigenvalues[col] < 0) continue;
        for (int s : {+1, -1}) {
          Vec x0 = geo.retract(c.x + s * back_offset * c.eigenvectors.col(col));
          // Forward-flow basis at the tail of the would-be orbit.
          Mat basis(x0.size(), 1 + c.index);
          basis.col(0) = geo.field(x0).normalized();
          if (c.index > 0) basis.rightCols(c.index) = c.unstable_frame();

          FlowResult back;
          try {
            back = integrate_impl(sys_, x0, basis, -1);
          } catch (const MaxStepsExceeded&) {
            continue;  // stable set not bounded backward toward this source
          }
          const CriticalPointRec& up = sys_.crits[static_cast<std::size_t>(back.arrival)];
          if (up.index < a.index)
            throw UnresolvedBoundary("backward flow from " + c.id + " reached " + up.id +
                                     " of index " + std::to_string(up.index) +
                                     " (transversality failure)");
          if (up.id != a.id) continue;  // an orbit of a different source

          // Shoot angle estimate: where the backward trajectory crossed the
          // shoot circle around the source.
          double theta_hat = 0;
          bool got = false;
          for (auto it = back.traj.points.rbegin(); it != back.traj.points.rend(); ++it) {
            Vec disp = geo.displacement(a.x, *it);
            if (disp.norm() >= cfg.shoot_radius) {
              theta_hat = std::atan2(disp.dot(u2), disp.dot(u1));
              if (theta_hat < 0) theta_hat += kTwoPi;
              got = true;
              break;
            }
          }
          if (!got)
            throw UnresolvedBoundary("backward orbit from " + c.id + " never left the shoot ball");

          Connection conn;
          conn.target = static_cast<int>(ci);
          conn.theta = refine_theta(a, c, dir_at, theta_hat, &conn.traj);

          // det(coords of the source frame in the transported tail basis)
          // equals the forward-transport sign.
          Mat coords = back.frame.colPivHouseholderQr().solve(a.unstable_frame());
          double det = coords.determinant();
          if (std::abs(det) < 1e-8)
            throw UnresolvedBoundary("orbit sign determinant is numerically ambiguous");
          conn.sign = det > 0 ? 1 : -1;
          sw.conns.push_back(std::move(conn));
        }
      }
    }

    std::sort(sw.conns.begin(), sw.conns.end(),
              [](const Connection& x, const Connection& y) { return x.theta < y.theta; });

    if (sw.conns.empty()) {
      FlowResult fr = shoot(a, dir_at(0.0), false);
      sw.uniform = classify(sys_, fr);
    }
    return sw;
  }

  // Locate the shoot angle whose trajectory converges to the break point: a
  // coarse scan of the closest-approach distance around the estimate, then a
  // ternary descent into its V-shaped minimum.
  double refine_theta(const CriticalPointRec& a, const CriticalPointRec& c,
                      const std::function<Vec(double)>& dir_at, double theta_hat,
                      Trajectory* orbit_out) const {
    Geom geo{sys_.surface, sys_.cfg};
    // Shooting cannot always steer a trajectory into the arrival ball: the
    // residence time near the break amplifies the last bits of the angle.
    // The backward pass has already certified the orbit, so a probe passing
    // within a small multiple of the arrival tolerance is accepted and
    // truncated at its closest approach.
    const double accept = 10.0 * sys_.cfg.delta_arrive;
    auto approach = [&](double theta, FlowResult* out) {
      FlowResult fr = shoot(a, dir_at(theta), false);
      double best = 1e300;
      std::size_t best_i = 0;
      for (std::size_t i = 0; i < fr.traj.points.size(); ++i) {
        double d = geo.distance(fr.traj.points[i], c.x);
        if (d < best) {
          best = d;
          best_i = i;
        }
      }
      if (best < accept) {
        fr.traj.points.resize(best_i + 1);
        fr.traj.times.resize(best_i + 1);
        fr.traj.values.resize(best_i + 1);
        fr.traj.arrival = c.id;
        fr.traj.arrival_dist = best;
      }
      if (out) *out = std::move(fr);
      return best;
    };

    // Iterated grid refinement around the running argmin.  The approach
    // distance has a very narrow V at the orbit, often next to a cliff, so
    // anything assuming unimodality on the whole bracket is unreliable.
    for (double window : {0.02, 0.3}) {
      double center = theta_hat, half = window;
      for (int round = 0; round < 80; ++round) {
        const int grid = 8;
        double best_theta = center, best_d = 1e300;
        for (int i = 0; i <= grid; ++i) {
          double theta = center - half + 2 * half * i / grid;
          FlowResult fr;
          double d = approach(theta, &fr);
          if (d < accept) {
            *orbit_out = std::move(fr.traj);
            return theta;
          }
          if (d < best_d) {
            best_d = d;
            best_theta = theta;
          }
        }
        center = best_theta;
        half = 2 * half / grid;  // one grid step on either side of the argmin
        if (half < 1e-14) break;
      }
    }
    throw UnresolvedBoundary("shoot-angle refinement for the orbit " + a.id + " -> " + c.id +
                             " did not converge");
  }
};

}  // namespace

namespace detail {

ModuliZero orbits_from_sweep(const MorseSystem& sys, Sweeper& swp, const std::string& a,
                             const std::string& b, std::vector<OrbitRecord>* orbits) {
  ModuliZero mz;
  mz.from = a;
  mz.to = b;
  const Sweep& sw = swp.sweep(a);
  for (const auto& conn : sw.conns) {
    if (sys.crits[static_cast<std::size_t>(conn.target)].id != b) continue;
    if (orbits)
      orbits->push_back({a, b, static_cast<int>(mz.signs.size()), conn.traj});
    mz.signs.push_back(conn.sign);
  }
  return mz;
}

}  // namespace detail

ModuliZero connecting_orbits(const MorseSystem& sys, const std::string& a,
                             const std::string& b) {
  if (sys.get(a).index - sys.get(b).index != 1)
    throw PreconditionViolation("connecting_orbits needs index gap 1");
  Sweeper swp(sys);
  return detail::orbits_from_sweep(sys, swp, a, b, nullptr);
}

namespace {

// Exit branch of a trajectory past an intermediate saddle: the sign of its
// displacement along the saddle's unstable direction once it leaves the ball.
int exit_branch(const MorseSystem& sys, const Trajectory& traj, const CriticalPointRec& mid) {
  Geom geo{sys.surface, sys.cfg};
  std::size_t closest = 0;
  double best = 1e300;
  for (std::size_t i = 0; i < traj.points.size(); ++i) {
    double d = geo.distance(traj.points[i], mid.x);
    if (d < best) {
      best = d;
      closest = i;
    }
  }
  const double exit_radius = std::max(0.05, 4.0 * best);
  for (std::size_t i = closest; i < traj.points.size(); ++i) {
    Vec disp = geo.displacement(mid.x, traj.points[i]);
    if (disp.norm() > exit_radius) {
      double d = disp.dot(mid.eigenvectors.col(0));
      if (d == 0) break;
      return d > 0 ? 0 : 1;  // branch 0 shoots along +u
    }
  }
  throw UnresolvedBoundary("could not identify the exit branch past " + mid.id);
}

// Point key of the branch's orbit within M(mid, b).
int branch_point_key(const MorseSystem& sys, Sweeper& swp, const CriticalPointRec& mid,
                     const std::string& b, int branch) {
  const Sweep& sw = swp.sweep(mid.id);
  int key = 0;
  for (const auto& conn : sw.conns) {
    bool to_b = sys.crits[static_cast<std::size_t>(conn.target)].id == b;
    int conn_branch = conn.theta < 1.0 ? 0 : 1;  // S^0 sweeps store 0 and pi
    if (to_b && conn_branch == branch) return key;
    if (to_b) ++key;
  }
  throw UnresolvedBoundary("no orbit from " + mid.id + " to " + b + " on the probed branch");
}

ModuliOne gap2_impl(const MorseSystem& sys, Sweeper& swp, const std::string& a,
                    const std::string& b) {
  const CriticalPointRec& ca = sys.get(a);
  const CriticalPointRec& cb = sys.get(b);
  if (ca.index - cb.index != 2) throw PreconditionViolation("gap2_moduli needs index gap 2");
  if (ca.index != 2)
    throw Error("one-parameter families are traced only for sources with a circle of directions");

  ModuliOne m1;
  m1.from = a;
  m1.to = b;

  const Sweep& sw = swp.sweep(a);
  Geom geo{sys.surface, sys.cfg};
  Vec u1 = ca.eigenvectors.col(0), u2 = ca.eigenvectors.col(1);
  auto dir_at = [&](double theta) { return Vec(std::cos(theta) * u1 + std::sin(theta) * u2); };
  auto probe = [&](double theta) {
    FlowResult fr = integrate_impl(
        sys, geo.retract(ca.x + sys.cfg.shoot_radius * dir_at(theta)), Mat(ca.x.size(), 0), +1);
    return fr;
  };

  if (sw.conns.empty()) {
    if (sw.uniform.crit >= 0 &&
        sys.crits[static_cast<std::size_t>(sw.uniform.crit)].id == b)
      m1.components.push_back(Circle{});
    return m1;
  }

  const std::size_t nc = sw.conns.size();
  for (std::size_t i = 0; i < nc; ++i) {
    const Connection& c0 = sw.conns[i];
    const Connection& c1 = sw.conns[(i + 1) % nc];
    double lo = c0.theta;
    double hi = (i + 1 == nc) ? c1.theta + kTwoPi : c1.theta;
    double len = hi - lo;

    FlowResult mid_probe = probe(lo + 0.5 * len);
    if (mid_probe.arrival < 0 ||
        sys.crits[static_cast<std::size_t>(mid_probe.arrival)].id != b)
      continue;  // this arc belongs to a different target

    // End probes must pass the break point close enough to read the exit
    // branch but not so close that they are captured; shrink toward the
    // break until the approach distance is in the readable band.
    auto make_end = [&](const Connection& conn, double end_theta, double into_arc) {
      const CriticalPointRec& mid = sys.crits[static_cast<std::size_t>(conn.target)];
      double eps = std::min(1e-4, 0.1 * len);
      for (int attempt = 0; attempt < 8; ++attempt) {
        FlowResult fr = probe(end_theta + into_arc * eps);
        bool lands_at_b = fr.arrival >= 0 &&
                          sys.crits[static_cast<std::size_t>(fr.arrival)].id == b;
        double close = 1e300;
        for (const auto& p : fr.traj.points) close = std::min(close, geo.distance(p, mid.x));
        if (lands_at_b && close < 0.3 && close > 10 * sys.cfg.delta_arrive) {
          BrokenFlow bf;
          bf.mid = mid.id;
          int p = 0;  // rank among same-target breaks, in theta order
          for (const auto& other : sw.conns) {
            if (other.target != conn.target) continue;
            if (other.theta < conn.theta) ++p;
          }
          bf.p = p;
          bf.q = branch_point_key(sys, swp, mid, b, exit_branch(sys, fr.traj, mid));
          return bf;
        }
        eps *= (close >= 0.3) ? 0.125 : 4.0;
      }
      throw UnresolvedBoundary("family end probe could not resolve the break at " + mid.id);
    };

    Interval iv;
    iv.end0 = make_end(c0, lo, +1.0);
    iv.end1 = make_end(c1, hi, -1.0);
    m1.components.push_back(iv);
  }
  return m1;
}

}  // namespace

ModuliOne gap2_moduli(const MorseSystem& sys, const std::string& a, const std::string& b) {
  Sweeper swp(sys);
  return gap2_impl(sys, swp, a, b);
}

GeneratedCategory generate_category(const MorseSystem& sys) {
  GeneratedCategory out;
  Sweeper swp(sys);

  for (const auto& c : sys.crits) out.category.objects.push_back({c.id, c.index, c.label});
  out.category.mod2 = false;

  for (const auto& a : sys.crits)
    for (const auto& b : sys.crits) {
      if (a.index - b.index != 1) continue;
      ModuliZero mz = detail::orbits_from_sweep(sys, swp, a.id, b.id, &out.orbits);
      if (!mz.signs.empty()) out.category.moduli0.push_back(std::move(mz));
    }

  for (const auto& a : sys.crits)
    for (const auto& b : sys.crits) {
      if (a.index - b.index != 2 || a.index != 2) continue;
      out.category.has_moduli1 = true;
      out.category.moduli1.push_back(gap2_impl(sys, swp, a.id, b.id));
    }
  return out;
}

FlowCategory build_flow_category(const MorseSystem& sys) {
  return generate_category(sys).category;
}

comparison::ComparisonData continuation_data(const MorseSystem& src, const MorseSystem& tgt) {
  comparison::ComparisonData data;
  data.source = build_flow_category(src);
  data.target = build_flow_category(tgt);

  Geom geo{src.surface, src.cfg};
  const int top = src.surface.dim - (src.surface.kind == SurfaceSpec::Kind::Implicit3D ? 1 : 0);

  for (const auto& a : src.crits) {
    for (const auto& beta : tgt.crits) {
      if (a.index != beta.index) continue;
      std::vector<int> signs;

      if (a.index == 0) {
        // Does the source minimum lie in the target minimum's basin?
        FlowResult fr = integrate_impl(tgt, a.x, Mat(a.x.size(), 0), +1);
        if (tgt.crits[static_cast<std::size_t>(fr.arrival)].id == beta.id) signs.push_back(1);
      } else if (a.index == top) {
        // Reverse flow under the source carries the target's frame up to a
        // source maximum; det sign there matches the forward convention.
        FlowResult fr = integrate_impl(src, beta.x, beta.unstable_frame(), -1);
        const CriticalPointRec& up = src.crits[static_cast<std::size_t>(fr.arrival)];
        if (up.index != top)
          throw UnresolvedBoundary("reverse flow from " + beta.id + " reached " + up.id);
        if (up.id == a.id) {
          Mat coords = a.unstable_frame().colPivHouseholderQr().solve(fr.frame);
          double det = coords.determinant();
          if (std::abs(det) < 1e-8)
            throw UnresolvedBoundary("mixed count sign ambiguous for " + a.id + "->" + beta.id);
          signs.push_back(det > 0 ? 1 : -1);
        }
      } else if (a.index == 1) {
        // Crossings of the source unstable curve with the target's stable
        // curve, located by classifying curve points under the target flow.
        // A crossing shows up either as a class change or as a tear in the
        // closest-approach distances to the target's saddles.
        struct Probe {
          ArrivalClass cls;
          std::vector<double> dmin;  // to each target saddle
        };
        std::vector<const CriticalPointRec*> tgt_saddles;
        for (const auto& cp : tgt.crits)
          if (cp.index == 1) tgt_saddles.push_back(&cp);

        auto probe_at = [&](const Vec& x) {
          FlowResult fr = integrate_impl(tgt, x, Mat(x.size(), 0), +1);
          Probe pr;
          pr.cls = classify(tgt, fr);
          pr.dmin.assign(tgt_saddles.size(), 1e300);
          for (const auto& p : fr.traj.points)
            for (std::size_t t = 0; t < tgt_saddles.size(); ++t)
              pr.dmin[t] = std::min(pr.dmin[t], geo.distance(p, tgt_saddles[t]->x));
          return pr;
        };
        auto suspicious = [&](const Probe& x, const Probe& y) {
          if (x.cls != y.cls) return true;
          for (std::size_t t = 0; t < x.dmin.size(); ++t)
            if (std::abs(x.dmin[t] - y.dmin[t]) > 0.25) return true;
          return false;
        };

        for (int branch = 0; branch < 2; ++branch) {
          Vec dir = (branch == 0 ? 1.0 : -1.0) * a.eigenvectors.col(0);
          FlowResult curve =
              integrate_impl(src, geo.retract(a.x + src.cfg.shoot_radius * dir), Mat(a.x.size(), 0), +1);

          // Resample the curve at bounded spacing.
          std::vector<Vec> pts;
          pts.push_back(curve.traj.points.front());
          for (const auto& p : curve.traj.points)
            if (geo.distance(pts.back(), p) > 0.02) pts.push_back(p);
          pts.push_back(curve.traj.points.back());

          std::vector<Probe> probes(pts.size());
          parallel_for(src.cfg.jobs, static_cast<int>(pts.size()),
                       [&](int i) { probes[static_cast<std::size_t>(i)] = probe_at(pts[static_cast<std::size_t>(i)]); });

          for (std::size_t s = 0; s + 1 < pts.size(); ++s) {
            if (!suspicious(probes[s], probes[s + 1])) continue;
            Vec lo = pts[s], hi = pts[s + 1];
            // Curve tangent at segment scale; bisection shrinks lo/hi together.
            Vec seg_tangent = geo.displacement(pts[s], pts[s + 1]).normalized();
            Probe pl = probes[s], ph = probes[s + 1];
            bool found = false;
            for (int depth = 0; depth < src.cfg.bisect_depth && !found; ++depth) {
              Vec mid = geo.retract(lo + 0.5 * geo.displacement(lo, hi));
              FlowResult fr = integrate_impl(tgt, mid, Mat(mid.size(), 0), +1);
              // Accept the crossing once the probe shadows a target saddle;
              // the residence time there caps how close shooting can get.
              const CriticalPointRec* hit = nullptr;
              if (fr.arrival >= 0 && tgt.crits[static_cast<std::size_t>(fr.arrival)].index == 1)
                hit = &tgt.crits[static_cast<std::size_t>(fr.arrival)];
              if (!hit)
                for (std::size_t t = 0; t < tgt_saddles.size(); ++t) {
                  double close = 1e300;
                  for (const auto& p : fr.traj.points)
                    close = std::min(close, geo.distance(p, tgt_saddles[t]->x));
                  if (close < 10.0 * tgt.cfg.delta_arrive) {
                    hit = tgt_saddles[t];
                    break;
                  }
                }
              if (hit) {
                if (hit->id == beta.id) {
                  // Sign: the oriented curve tangent pushed into the target
                  // saddle, compared with its unstable direction.
                  Vec tangent = seg_tangent;
                  if (branch == 1) tangent = -tangent;
                  Mat v0(mid.size(), 1);
                  v0.col(0) = tangent;
                  double d = 0;
                  for (double radius : {1e-5, 1e-4, 1e-3}) {
                    FlowResult push = integrate_impl(tgt, mid, v0, +1, &beta.x, radius);
                    d = push.frame.col(0).dot(beta.eigenvectors.col(0));
                    bool stopped_near = geo.distance(push.end, beta.x) < radius * 1.01;
                    if (stopped_near && std::abs(d) > 1e-8) break;
                    d = 0;
                  }
                  if (d == 0) throw UnresolvedBoundary("mixed crossing sign ambiguous");
                  signs.push_back(d > 0 ? 1 : -1);
                }
                found = true;
                break;
              }
              Probe pm = probe_at(mid);
              bool left_sus = suspicious(pl, pm), right_sus = suspicious(pm, ph);
              if (left_sus && !right_sus) {
                hi = mid;
                ph = pm;
              } else if (!left_sus && right_sus) {
                lo = mid;
                pl = pm;
              } else if (left_sus) {
                // Both halves look torn; keep the one with the bigger jump.
                double jl = 0, jr = 0;
                for (std::size_t t = 0; t < pm.dmin.size(); ++t) {
                  jl = std::max(jl, std::abs(pl.dmin[t] - pm.dmin[t]));
                  jr = std::max(jr, std::abs(pm.dmin[t] - ph.dmin[t]));
                }
                if (jl >= jr) {
                  hi = mid;
                  ph = pm;
                } else {
                  lo = mid;
                  pl = pm;
                }
              } else {
                break;  // smooth after all
              }
            }
            if (!found && pl.cls.crit != ph.cls.crit)
              throw UnresolvedBoundary("mixed crossing bisection hit depth without separation");
          }
        }
      }

      if (!signs.empty()) data.mixed0.push_back({a.id, beta.id, signs});
    }
  }
  return data;
}

std::string trajectory_tsv(const Trajectory& t) {
  std::ostringstream os;
  os.precision(12);
  os << "# t";
  if (!t.points.empty())
    for (int i = 0; i < t.points.front().size(); ++i) os << "\tx" << i;
  os << "\tf\n";
  for (std::size_t i = 0; i < t.points.size(); ++i) {
    os << t.times[i];
    for (int j = 0; j < t.points[i].size(); ++j) os << '\t' << t.points[i][j];
    os << '\t' << t.values[i] << '\n';
  }
  return os.str();
}

}  // namespace flowcat::morse
