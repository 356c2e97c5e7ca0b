#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "flowcat/realize.hpp"
#include "support/fixtures.hpp"

using namespace flowcat;
using namespace flowcat::cw;
using fixtures::circle_category;
using fixtures::torus_category;

TEST_CASE("torus cells at L = 2") {
  CWData cw = realize(torus_category(), 2);
  REQUIRE(cw.cells.size() == 4);
  std::vector<int> dims;
  for (const auto& c : cw.cells) dims.push_back(c.dim);
  CHECK(dims == std::vector<int>{2, 3, 3, 4});  // ordered by (index, id)
  for (const auto& [pair, deg] : cw.attaching_degrees) CHECK(deg == 0);
}

TEST_CASE("single object, L = 0") {
  FlowCategory f;
  f.objects = {{"pt", 0, ""}};
  CWData cw = realize(f, 0);
  REQUIRE(cw.cells.size() == 1);
  CHECK(cw.cells[0].dim == 0);
  CHECK(cw.attaching_degrees.empty());
}

TEST_CASE("circle cells at L = 1") {
  CWData cw = realize(circle_category(), 1);
  REQUIRE(cw.cells.size() == 2);
  CHECK(cw.cells[0].dim == 1);
  CHECK(cw.cells[1].dim == 2);
  CHECK(cw.attaching_degrees.at({"max", "min"}) == 0);
}

TEST_CASE("shift too small") {
  CHECK_THROWS_AS(realize(torus_category(), 1), ShiftTooSmall);
}

TEST_CASE("cellular complex equals the shifted complex") {
  auto t = torus_category();
  linalg::ChainComplex cell = cellular_complex(realize(t, 2));
  CHECK(cell.lo == 2);
  auto h = cell.homology();
  CHECK(h[0].free_rank == 1);
  CHECK(h[1].free_rank == 2);
  CHECK(h[2].free_rank == 1);

  CHECK(cellular_complex(realize(FlowCategory{}, 0)).empty());
}

TEST_CASE("homology shift invariance over admissible shifts") {
  std::mt19937 rng(3141);
  for (int trial = 0; trial < 40; ++trial) {
    FlowCategory f = fixtures::random_valid_category(rng);
    if (f.empty()) continue;
    GradedHomology base = homology(f);
    int smallest = f.max_index() - f.min_index();
    for (int L : {smallest, smallest + 3}) {
      linalg::ChainComplex cell = cellular_complex(realize(f, L));
      auto shifted = cell.homology();
      int delta = L - f.min_index();
      for (std::size_t i = 0; i < base.groups.size(); ++i) {
        int degree = base.lo + static_cast<int>(i);
        const auto* expect = &base.groups[i];
        long got_rank = 0;
        std::vector<linalg::Int> got_torsion;
        int cell_degree = degree + delta;
        if (cell_degree >= cell.lo && cell_degree <= cell.hi()) {
          auto g = shifted[static_cast<std::size_t>(cell_degree - cell.lo)];
          got_rank = g.free_rank;
          got_torsion = g.torsion;
        }
        CHECK(got_rank == expect->free_rank);
        CHECK(got_torsion == expect->torsion);
      }
    }
  }
}

TEST_CASE("realize is equivariant under relabeling") {
  auto t = torus_category();
  CWData a = realize(t, 2);
  for (auto& o : t.objects) o.id = "r_" + o.id;
  for (auto& m : t.moduli0) {
    m.from = "r_" + m.from;
    m.to = "r_" + m.to;
  }
  for (auto& m : t.moduli1) {
    m.from = "r_" + m.from;
    m.to = "r_" + m.to;
    for (auto& comp : m.components)
      if (Interval* iv = std::get_if<Interval>(&comp)) {
        iv->end0.mid = "r_" + iv->end0.mid;
        iv->end1.mid = "r_" + iv->end1.mid;
      }
  }
  CWData b = realize(t, 2);
  REQUIRE(a.cells.size() == b.cells.size());
  for (std::size_t i = 0; i < a.cells.size(); ++i) {
    CHECK("r_" + a.cells[i].id == b.cells[i].id);
    CHECK(a.cells[i].dim == b.cells[i].dim);
  }
}

TEST_CASE("subquotient levels count objects per index") {
  auto levels = subquotient_report(torus_category());
  REQUIRE(levels.size() == 3);
  CHECK(levels[0].sphere_count == 1);
  CHECK(levels[1].sphere_count == 2);
  CHECK(levels[2].sphere_count == 1);
  CHECK(levels[0].sphere_dim == 2);  // level 0 + (L - q) with L = p - q = 2

  CHECK(subquotient_report(FlowCategory{}).empty());

  FlowCategory one;
  one.objects = {{"pt", 5, ""}};
  auto lv = subquotient_report(one);
  REQUIRE(lv.size() == 1);
  CHECK(lv[0].sphere_count == 1);
}

TEST_CASE("homotopy chain check") {
  CHECK(homotopy_chain_check(torus_category()).ok());

  FlowCategory one;
  one.objects = {{"pt", 0, ""}};
  CHECK(homotopy_chain_check(one).ok());  // vacuous

  FlowCategory bad;
  bad.objects = {{"a", 2, ""}, {"b", 1, ""}, {"c", 0, ""}};
  bad.moduli0 = {{"a", "b", {1}}, {"b", "c", {1}}};
  Report r = homotopy_chain_check(bad);
  CHECK_FALSE(r.ok());
  bool located = false;
  for (const auto& chk : r.checks)
    if (!chk.passed && chk.detail.find("a -> c") != std::string::npos) located = true;
  CHECK(located);
}

TEST_CASE("exports mention every cell") {
  CWData cw = realize(torus_category(), 2);
  std::string text = to_text(cw);
  std::string dot = to_dot(cw);
  for (const auto& c : cw.cells) {
    CHECK(text.find(c.id) != std::string::npos);
    CHECK(dot.find(c.id) != std::string::npos);
  }
  CHECK(dot.rfind("digraph", 0) == 0);
}
