#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "flowcat/morse_numeric.hpp"
#include "flowcat/comparison.hpp"

using namespace flowcat;
using namespace flowcat::morse;

TEST_CASE("critical points of the sphere height function") {
  MorseSystem sys = analyze(sphere_surface());
  REQUIRE(sys.crits.size() == 2);
  CHECK(sys.crits[0].index == 2);
  CHECK(sys.crits[0].x[2] == doctest::Approx(1.0));
  CHECK(sys.crits[1].index == 0);
  CHECK(sys.crits[1].x[2] == doctest::Approx(-1.0));
}

TEST_CASE("critical points of the torus height function") {
  MorseSystem sys = analyze(upright_torus_surface());
  REQUIRE(sys.crits.size() == 4);
  std::map<int, int> by_index;
  for (const auto& c : sys.crits) by_index[c.index]++;
  CHECK(by_index[2] == 1);
  CHECK(by_index[1] == 2);
  CHECK(by_index[0] == 1);
  for (const auto& c : sys.crits) {
    // stationarity and nondegeneracy as recorded
    CHECK(c.eigenvalues.cwiseAbs().minCoeff() > sys.cfg.tol_nondeg);
    Eigen::VectorXd gg = sys.surface.grad_g(c.x);
    Eigen::VectorXd gf = sys.surface.grad_f(c.x);
    Eigen::VectorXd n = gg.normalized();
    CHECK((gf - n.dot(gf) * n).norm() <= sys.cfg.tol_crit);
  }
}

TEST_CASE("a monkey saddle is rejected loudly") {
  SurfaceSpec s;
  s.kind = SurfaceSpec::Kind::FlatTorus;
  s.dim = 2;
  s.name = "monkey";
  s.f = [](const Vec& t) {
    return std::pow(std::sin(t[0]), 3) - 3.0 * std::sin(t[0]) * std::pow(std::sin(t[1]), 2);
  };
  s.grad_f = fd_gradient(s.f);
  s.hess_f = fd_hessian(s.f);
  Vec seed(2);
  seed << 0.05, 0.03;  // near the degenerate point at the origin
  s.seeds = {seed};
  // Newton stops within sqrt(tol_crit) of the flat point, where the Hessian
  // spectrum is of that same order; the nondegeneracy gate must sit above it.
  NumericConfig cfg;
  cfg.tol_nondeg = 1e-3;
  CHECK_THROWS_AS(analyze(s, cfg), DegenerateCriticalPoint);
}

TEST_CASE("flow from a critical point has length zero") {
  MorseSystem sys = analyze(sphere_surface());
  Trajectory t = integrate_flow(sys, sys.crits[0].x);
  CHECK(t.arrival == sys.crits[0].id);
  CHECK(t.points.size() == 1);
}

TEST_CASE("generic sphere point flows to the south pole monotonically") {
  MorseSystem sys = analyze(sphere_surface());
  Vec x0(3);
  x0 << 0.6, -0.64, 0.48;
  Trajectory t = integrate_flow(sys, x0);
  CHECK(t.arrival == "i0_0");
  CHECK(t.monotone);
  CHECK(t.arrival_dist < sys.cfg.delta_arrive);
  for (std::size_t i = 1; i < t.values.size(); ++i) CHECK(t.values[i] < t.values[i - 1] + 1e-12);
}

TEST_CASE("circle connecting orbits cancel") {
  MorseSystem sys = analyze(circle_surface());
  ModuliZero m = connecting_orbits(sys, "i1_0", "i0_0");
  REQUIRE(m.signs.size() == 2);
  CHECK(m.signed_count() == 0);
  CHECK_THROWS_AS(connecting_orbits(sys, "i0_0", "i1_0"), PreconditionViolation);
}

TEST_CASE("torus connecting orbits: two opposite flows per adjacent pair") {
  MorseSystem sys = analyze(upright_torus_surface());
  auto ids_at = [&](int idx) {
    std::vector<std::string> out;
    for (const auto& c : sys.crits)
      if (c.index == idx) out.push_back(c.id);
    return out;
  };
  for (const auto& a : ids_at(2))
    for (const auto& b : ids_at(1)) {
      ModuliZero m = connecting_orbits(sys, a, b);
      REQUIRE(m.signs.size() == 2);
      CHECK(m.signed_count() == 0);
    }
  for (const auto& a : ids_at(1))
    for (const auto& b : ids_at(0)) {
      ModuliZero m = connecting_orbits(sys, a, b);
      REQUIRE(m.signs.size() == 2);
      CHECK(m.signed_count() == 0);
    }
}

TEST_CASE("torus one-parameter families close up over the broken flows") {
  MorseSystem sys = analyze(upright_torus_surface());
  ModuliOne m = gap2_moduli(sys, "i2_0", "i0_0");
  CHECK(m.components.size() == 4);
  FlowCategory f = build_flow_category(sys);
  CHECK(validate(f).ok());
  CHECK(d_squared_report(f).ok());
  CHECK_THROWS_AS(gap2_moduli(sys, "i2_0", "i1_0"), PreconditionViolation);
}

TEST_CASE("sphere top family is a single circle") {
  MorseSystem sys = analyze(sphere_surface());
  ModuliOne m = gap2_moduli(sys, "i2_0", "i0_0");
  REQUIRE(m.components.size() == 1);
  CHECK(std::holds_alternative<Circle>(m.components[0]));
}

TEST_CASE("generated categories of the built-ins have the right homology") {
  auto groups = [](const SurfaceSpec& s) {
    MorseSystem sys = analyze(s);
    return homology(build_flow_category(sys)).groups;
  };
  using HG = linalg::HomologyGroup;
  CHECK(groups(circle_surface()) == std::vector<HG>{{1, {}}, {1, {}}});
  CHECK(groups(sphere_surface()) == std::vector<HG>{{1, {}}, {0, {}}, {1, {}}});
  CHECK(groups(upright_torus_surface()) == std::vector<HG>{{1, {}}, {2, {}}, {1, {}}});
  CHECK(groups(tilted_torus_surface()) == std::vector<HG>{{1, {}}, {2, {}}, {1, {}}});
}

TEST_CASE("loop model rejects a vanishing perturbation") {
  CHECK_THROWS_AS(broken_geodesic_loopspace(2, 0, 0.0), PerturbationTooSmall);
  CHECK_THROWS_AS(broken_geodesic_loopspace(1, 0, 0.1), PreconditionViolation);
}

TEST_CASE("loop model sectors present the circle") {
  for (auto [k, n] : std::vector<std::pair<int, int>>{{2, 0}, {3, 1}}) {
    MorseSystem sys = analyze(broken_geodesic_loopspace(k, n, 0.1));
    REQUIRE(sys.crits.size() == 2);
    CHECK(sys.crits[0].index == 1);
    CHECK(sys.crits[1].index == 0);
    auto h = homology(build_flow_category(sys)).groups;
    REQUIRE(h.size() == 2);
    CHECK(h[0] == linalg::HomologyGroup{1, {}});
    CHECK(h[1] == linalg::HomologyGroup{1, {}});
  }
}

TEST_CASE("generation is deterministic") {
  MorseSystem a = analyze(upright_torus_surface());
  MorseSystem b = analyze(upright_torus_surface());
  GeneratedCategory ga = generate_category(a);
  GeneratedCategory gb = generate_category(b);
  REQUIRE(ga.category.moduli0.size() == gb.category.moduli0.size());
  for (std::size_t i = 0; i < ga.category.moduli0.size(); ++i) {
    CHECK(ga.category.moduli0[i].from == gb.category.moduli0[i].from);
    CHECK(ga.category.moduli0[i].signs == gb.category.moduli0[i].signs);
  }
}

TEST_CASE("parallel shooting yields identical results") {
  NumericConfig cfg;
  cfg.jobs = 4;
  MorseSystem par = analyze(upright_torus_surface(), cfg);
  MorseSystem seq = analyze(upright_torus_surface());
  GeneratedCategory gp = generate_category(par);
  GeneratedCategory gs = generate_category(seq);
  REQUIRE(gp.category.moduli0.size() == gs.category.moduli0.size());
  for (std::size_t i = 0; i < gp.category.moduli0.size(); ++i)
    CHECK(gp.category.moduli0[i].signs == gs.category.moduli0[i].signs);
}

TEST_CASE("continuation between the two torus functions is a chain map") {
  MorseSystem src = analyze(upright_torus_surface());
  MorseSystem tgt = analyze(tilted_torus_surface());
  comparison::ComparisonData data = continuation_data(src, tgt);
  auto psi = comparison::build_psi(data);
  CHECK(comparison::verify_chain_map(data, psi).ok());
  CHECK(comparison::quasi_iso_check(data, psi).ok());
}

TEST_CASE("step budget violations are loud") {
  NumericConfig cfg;
  cfg.max_steps = 3;
  MorseSystem sys = analyze(sphere_surface(), cfg);
  Vec x0(3);
  x0 << 0.6, -0.64, 0.48;
  CHECK_THROWS_AS(integrate_flow(sys, x0), MaxStepsExceeded);
}

TEST_CASE("leaving a restricted chart is loud") {
  SurfaceSpec s;
  s.kind = SurfaceSpec::Kind::FlatTorus;
  s.dim = 1;
  s.name = "banded-circle";
  s.f = [](const Vec& t) { return std::cos(t[0]); };
  s.grad_f = [](const Vec& t) {
    Vec g(1);
    g[0] = -std::sin(t[0]);
    return g;
  };
  s.hess_f = [](const Vec& t) {
    Mat h(1, 1);
    h(0, 0) = -std::cos(t[0]);
    return h;
  };
  // Domain covers the maximum but not the minimum; descent must exit.
  s.in_domain = [](const Vec& t) {
    double w = std::remainder(t[0], 2 * M_PI);
    return std::abs(w) < 2.0;
  };
  Vec seed(1);
  seed << 0.2;
  s.seeds = {seed};
  MorseSystem sys = analyze(s);
  Vec x0(1);
  x0 << 0.4;
  CHECK_THROWS_AS(integrate_flow(sys, x0), LeftChartDomain);
}

TEST_CASE("the exactly symmetric torus height is rejected, not miscounted") {
  // With a perfectly vertical height direction the two saddles are joined by
  // flow lines along the inner equator; orbit enumeration must refuse rather
  // than fabricate counts.
  Vec a(3);
  a << 0.0, 0.0, 1.0;
  MorseSystem sys = analyze(torus_surface(a));
  REQUIRE(sys.crits.size() == 4);
  CHECK_THROWS_AS(build_flow_category(sys), UnresolvedBoundary);
}

TEST_CASE("trajectory dump format") {
  MorseSystem sys = analyze(circle_surface());
  Vec x0(1);
  x0 << 0.3;
  Trajectory t = integrate_flow(sys, x0);
  std::string tsv = trajectory_tsv(t);
  CHECK(tsv.rfind("# t", 0) == 0);
  CHECK(tsv.find("\tf\n") != std::string::npos);
}

TEST_CASE("flow from a saddle's unstable direction descends monotonically") {
  MorseSystem sys = analyze(upright_torus_surface());
  const CriticalPointRec* upper = nullptr;
  for (const auto& c : sys.crits)
    if (c.index == 1 && (!upper || c.value > upper->value)) upper = &c;
  REQUIRE(upper != nullptr);
  Vec x0 = upper->x + sys.cfg.shoot_radius * upper->eigenvectors.col(0);
  Trajectory t = integrate_flow(sys, x0);
  REQUIRE(!t.arrival.empty());
  CHECK(sys.get(t.arrival).index < upper->index);
  CHECK(t.monotone);
}
