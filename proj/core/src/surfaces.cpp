#include <cmath>
#include <cstdio>

#include "flowcat/errors.hpp"
#include "flowcat/morse_numeric.hpp"

namespace flowcat::morse {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

double wrap_pi(double x) {  // representative in [-pi, pi)
  double y = std::remainder(x, kTwoPi);
  if (y >= kTwoPi / 2) y -= kTwoPi;
  return y;
}
}  // namespace

std::function<Vec(const Vec&)> fd_gradient(std::function<double(const Vec&)> f, double h) {
  return [f, h](const Vec& x) {
    Vec g(x.size());
    for (int i = 0; i < x.size(); ++i) {
      Vec xp = x, xm = x;
      xp[i] += h;
      xm[i] -= h;
      g[i] = (f(xp) - f(xm)) / (2 * h);
    }
    return g;
  };
}

std::function<Mat(const Vec&)> fd_hessian(std::function<double(const Vec&)> f, double h) {
  return [f, h](const Vec& x) {
    const int n = static_cast<int>(x.size());
    Mat m(n, n);
    const double f0 = f(x);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        if (i == j) {
          Vec xp = x, xm = x;
          xp[i] += h;
          xm[i] -= h;
          m(i, i) = (f(xp) - 2 * f0 + f(xm)) / (h * h);
        } else {
          Vec a = x, b = x, c = x, d = x;
          a[i] += h; a[j] += h;
          b[i] += h; b[j] -= h;
          c[i] -= h; c[j] += h;
          d[i] -= h; d[j] -= h;
          m(i, j) = m(j, i) = (f(a) - f(b) - f(c) + f(d)) / (4 * h * h);
        }
      }
    return m;
  };
}

SurfaceSpec circle_surface() {
  SurfaceSpec s;
  s.kind = SurfaceSpec::Kind::FlatTorus;
  s.dim = 1;
  s.name = "circle";
  s.f = [](const Vec& t) { return std::sin(t[0]); };
  s.grad_f = [](const Vec& t) {
    Vec g(1);
    g[0] = std::cos(t[0]);
    return g;
  };
  s.hess_f = [](const Vec& t) {
    Mat h(1, 1);
    h(0, 0) = -std::sin(t[0]);
    return h;
  };
  for (int i = 0; i < 8; ++i) {
    Vec v(1);
    v[0] = kTwoPi * i / 8 + 0.37;
    s.seeds.push_back(v);
  }
  return s;
}

SurfaceSpec sphere_surface() {
  SurfaceSpec s;
  s.kind = SurfaceSpec::Kind::Implicit3D;
  s.dim = 3;
  s.name = "sphere";
  s.g = [](const Vec& x) { return x.squaredNorm() - 1.0; };
  s.grad_g = [](const Vec& x) { return Vec(2.0 * x); };
  s.hess_g = [](const Vec& x) { return Mat(2.0 * Mat::Identity(x.size(), x.size())); };
  s.f = [](const Vec& x) { return x[2]; };
  s.grad_f = [](const Vec&) {
    Vec g = Vec::Zero(3);
    g[2] = 1.0;
    return g;
  };
  s.hess_f = [](const Vec&) { return Mat(Mat::Zero(3, 3)); };
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 12; ++j) {
      double th = (i + 0.5) * (kTwoPi / 2) / 6;  // polar angle
      double ph = j * kTwoPi / 12 + 0.21;
      Vec v(3);
      v << std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th);
      s.seeds.push_back(v);
    }
  return s;
}

SurfaceSpec torus_surface(const Vec& height_dir, double R, double r) {
  SurfaceSpec s;
  s.kind = SurfaceSpec::Kind::Implicit3D;
  s.dim = 3;
  s.name = "torus";
  const Vec a = height_dir.normalized();

  // Tube axis along y: g = (rho - R)^2 + y^2 - r^2 with rho = sqrt(x^2 + z^2).
  s.g = [R, r](const Vec& v) {
    double rho = std::hypot(v[0], v[2]);
    return (rho - R) * (rho - R) + v[1] * v[1] - r * r;
  };
  s.grad_g = [R](const Vec& v) {
    double rho = std::hypot(v[0], v[2]);
    Vec g(3);
    g[0] = 2.0 * (rho - R) * v[0] / rho;
    g[1] = 2.0 * v[1];
    g[2] = 2.0 * (rho - R) * v[2] / rho;
    return g;
  };
  s.hess_g = [R](const Vec& v) {
    double rho = std::hypot(v[0], v[2]);
    double rho3 = rho * rho * rho;
    Mat h = Mat::Zero(3, 3);
    h(0, 0) = 2.0 * (1.0 - R / rho) + 2.0 * R * v[0] * v[0] / rho3;
    h(2, 2) = 2.0 * (1.0 - R / rho) + 2.0 * R * v[2] * v[2] / rho3;
    h(0, 2) = h(2, 0) = 2.0 * R * v[0] * v[2] / rho3;
    h(1, 1) = 2.0;
    return h;
  };

  s.f = [a](const Vec& v) { return a.dot(v); };
  s.grad_f = [a](const Vec&) { return a; };
  s.hess_f = [](const Vec&) { return Mat(Mat::Zero(3, 3)); };

  for (int i = 0; i < 24; ++i)
    for (int j = 0; j < 12; ++j) {
      double psi = i * kTwoPi / 24 + 0.13;  // around the axis, in the x-z plane
      double phi = j * kTwoPi / 12 + 0.29;  // around the tube
      double rho = R + r * std::cos(phi);
      Vec v(3);
      v << rho * std::cos(psi), r * std::sin(phi), rho * std::sin(psi);
      s.seeds.push_back(v);
    }
  return s;
}

SurfaceSpec upright_torus_surface() {
  Vec a(3);
  a << 0.0, 0.08, 1.0;  // near-vertical height; the y part breaks the mirror symmetry
  SurfaceSpec s = torus_surface(a);
  s.name = "torus";
  return s;
}

SurfaceSpec tilted_torus_surface() {
  Vec a(3);
  a << 0.45, 0.22, 1.0;
  SurfaceSpec s = torus_surface(a);
  s.name = "tilted-torus";
  return s;
}

SurfaceSpec broken_geodesic_loopspace(int k, int n, double eps) {
  if (k < 2) throw PreconditionViolation("broken geodesic model needs k >= 2 segments");
  if (eps <= 0.0)
    throw PerturbationTooSmall("eps = " + std::to_string(eps) +
                               ": the unperturbed energy has a degenerate critical circle");

  SurfaceSpec s;
  s.kind = SurfaceSpec::Kind::FlatTorus;
  s.dim = k;
  char eps_text[32];
  std::snprintf(eps_text, sizeof eps_text, "%g", eps);
  s.name = "loopspace:" + std::to_string(k) + "," + std::to_string(n) + "," + eps_text;

  const double ideal = kTwoPi * n / k;

  auto deltas = [k, ideal](const Vec& t) {
    Vec d(k);
    for (int i = 0; i < k; ++i) {
      double next = t[(i + 1) % k];
      d[i] = wrap_pi(next - t[i] - ideal);
    }
    return d;
  };

  s.f = [deltas, eps](const Vec& t) {
    Vec d = deltas(t);
    return d.squaredNorm() + eps * std::cos(t[0]);
  };
  s.grad_f = [deltas, eps, k](const Vec& t) {
    Vec d = deltas(t);
    Vec g(k);
    for (int j = 0; j < k; ++j) g[j] = 2.0 * (d[(j - 1 + k) % k] - d[j]);
    g[0] -= eps * std::sin(t[0]);
    return g;
  };
  s.hess_f = [eps, k](const Vec& t) {
    Mat h = Mat::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      int j = (i + 1) % k;
      h(i, i) += 2.0;
      h(j, j) += 2.0;
      h(i, j) -= 2.0;
      h(j, i) -= 2.0;
    }
    h(0, 0) -= eps * std::cos(t[0]);
    return h;
  };

  // Stay inside the winding sector: increments must not stray toward the
  // next sector's geodesics.
  const double bound = kTwoPi / (2.0 * k);
  s.in_domain = [deltas, bound](const Vec& t) {
    Vec d = deltas(t);
    return d.cwiseAbs().maxCoeff() < bound;
  };

  int per_axis = (k <= 2) ? 16 : 8;
  std::vector<Vec> seeds;
  std::vector<int> digits(static_cast<std::size_t>(k), 0);
  while (true) {
    Vec v(k);
    for (int i = 0; i < k; ++i) v[i] = digits[static_cast<std::size_t>(i)] * kTwoPi / per_axis + 0.17;
    seeds.push_back(v);
    int i = 0;
    for (; i < k; ++i) {
      if (++digits[static_cast<std::size_t>(i)] < per_axis) break;
      digits[static_cast<std::size_t>(i)] = 0;
    }
    if (i == k) break;
  }
  s.seeds = std::move(seeds);
  return s;
}

}  // namespace flowcat::morse
