// Command-line front end: validate | homology | spectral | generate |
// compare | realize over category files.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "flowcat/category_io.hpp"
#include "flowcat/comparison.hpp"
#include "flowcat/errors.hpp"
#include "flowcat/morse_numeric.hpp"
#include "flowcat/realize.hpp"
#include "flowcat/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitParse = 2;
constexpr int kExitGeneration = 3;
constexpr int kExitShift = 4;

struct ToolConfig {
  std::string coeffs = "Z";
  int shift = -1;  // realize: -1 means smallest admissible
  unsigned seed = 0;
  int jobs = 1;
  std::string out_dir;
  double tol_crit = 1e-10;
  double tol_nondeg = 1e-6;
  double tol_arrive = 1e-6;
  double tol_merge = 1e-6;
};

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw flowcat::Error("cannot write " + path.string());
  out << text;
}

flowcat::morse::NumericConfig numeric_config(const ToolConfig& tc) {
  flowcat::morse::NumericConfig cfg;
  cfg.tol_crit = tc.tol_crit;
  cfg.tol_nondeg = tc.tol_nondeg;
  cfg.delta_arrive = tc.tol_arrive;
  cfg.tol_merge = tc.tol_merge;
  cfg.jobs = tc.jobs;
  cfg.seed = tc.seed;
  return cfg;
}

std::string sign_convention_text() {
  return "orbit sign = det of the source unstable frame transported along the flow, "
         "expressed in (flow direction, target unstable frame); unstable frames are "
         "ascending-eigenvalue eigenbases with largest component positive";
}

flowcat::morse::SurfaceSpec surface_by_name(const std::string& name) {
  using namespace flowcat::morse;
  if (name == "circle") return circle_surface();
  if (name == "sphere") return sphere_surface();
  if (name == "torus") return upright_torus_surface();
  if (name == "tilted-torus") return tilted_torus_surface();
  if (name.rfind("loopspace:", 0) == 0) {
    std::string rest = name.substr(10);
    int k = 0, n = 0;
    double eps = 0;
    if (std::sscanf(rest.c_str(), "%d,%d,%lf", &k, &n, &eps) != 3)
      throw flowcat::ParseError("loopspace spec needs k,n,eps");
    return broken_geodesic_loopspace(k, n, eps);
  }
  throw flowcat::ParseError("unknown example '" + name + "'");
}

flowcat::morse::SurfaceSpec surface_from_spec_file(const std::string& path) {
  using namespace flowcat::morse;
  std::ifstream in(path);
  if (!in) throw flowcat::ParseError("cannot read " + path);
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const std::exception& e) {
    throw flowcat::ParseError(std::string("invalid surface spec: ") + e.what());
  }
  std::string family = j.value("family", std::string{});
  if (family == "circle") return circle_surface();
  if (family == "sphere") return sphere_surface();
  if (family == "torus") {
    Eigen::VectorXd dir(3);
    dir << 0.0, 0.08, 1.0;
    if (j.contains("height_dir")) {
      auto& hd = j["height_dir"];
      for (int i = 0; i < 3; ++i) dir[i] = hd.at(static_cast<std::size_t>(i)).get<double>();
    }
    return torus_surface(dir, j.value("R", 2.0), j.value("r", 1.0));
  }
  if (family == "loopspace")
    return broken_geodesic_loopspace(j.value("k", 2), j.value("winding", 0),
                                     j.value("eps", 0.1));
  throw flowcat::ParseError("unknown surface family '" + family + "'");
}

std::string sanitize(const std::string& name) {
  std::string s = name;
  for (char& c : s)
    if (c == ':' || c == ',' || c == '/') c = '_';
  return s;
}

// ---------------------------------------------------------------- commands

int cmd_validate(const std::string& path) {
  auto doc = flowcat::io::load_file(path);
  flowcat::Report v = flowcat::validate(doc.category);
  flowcat::Report d2 = flowcat::d_squared_report(doc.category);
  std::cout << "validate:\n" << v << "d_squared:\n" << d2;
  if (v.ok() && d2.ok()) {
    std::cout << "OK\n";
    return kExitOk;
  }
  std::cout << "FAILED\n";
  return kExitCheckFailed;
}

int cmd_homology(const std::string& path, const ToolConfig& tc) {
  auto doc = flowcat::io::load_file(path);
  auto spec = flowcat::linalg::FieldSpec::parse(tc.coeffs);

  std::ostringstream tsv;
  ordered_json out = ordered_json::array();
  tsv << "degree\trank\ttorsion\n";

  if (spec.kind == flowcat::linalg::FieldSpec::Kind::Integers) {
    auto gh = flowcat::homology(doc.category);
    for (std::size_t i = 0; i < gh.groups.size(); ++i) {
      int degree = gh.lo + static_cast<int>(i);
      const auto& g = gh.groups[i];
      tsv << degree << '\t' << g.free_rank << '\t';
      for (std::size_t t = 0; t < g.torsion.size(); ++t)
        tsv << (t ? "," : "") << g.torsion[t].get_str();
      tsv << '\n';
      ordered_json row;
      row["degree"] = degree;
      row["rank"] = g.free_rank;
      row["torsion"] = ordered_json::array();
      for (const auto& t : g.torsion) row["torsion"].push_back(t.get_str());
      out.push_back(row);
    }
  } else {
    auto cx = flowcat::morse_complex(doc.category);
    for (int d = cx.lo; d <= cx.hi(); ++d) {
      long rank_d;
      if (spec.kind == flowcat::linalg::FieldSpec::Kind::Rationals) {
        flowcat::linalg::RationalField k;
        rank_d = cx.rank(d) - flowcat::linalg::rank(k, to_field(k, cx.boundary_or_zero(d))) -
                 flowcat::linalg::rank(k, to_field(k, cx.boundary_or_zero(d + 1)));
      } else {
        flowcat::linalg::PrimeField k{spec.p};
        rank_d = cx.rank(d) - flowcat::linalg::rank(k, to_field(k, cx.boundary_or_zero(d))) -
                 flowcat::linalg::rank(k, to_field(k, cx.boundary_or_zero(d + 1)));
      }
      tsv << d << '\t' << rank_d << "\t\n";
      ordered_json row;
      row["degree"] = d;
      row["rank"] = rank_d;
      out.push_back(row);
    }
  }

  std::cout << "coefficients: " << spec.to_string() << "\n" << tsv.str();
  if (!tc.out_dir.empty()) {
    write_text(fs::path(tc.out_dir) / "homology.tsv", tsv.str());
    write_text(fs::path(tc.out_dir) / "homology.json", out.dump(2) + "\n");
  }
  return kExitOk;
}

int cmd_spectral(const std::string& path, const ToolConfig& tc) {
  auto doc = flowcat::io::load_file(path);
  std::string coeffs = tc.coeffs == "Z" ? "Q" : tc.coeffs;  // pages need a field
  auto spec = flowcat::linalg::FieldSpec::parse(coeffs);

  flowcat::spectral::CoefficientTheory h = flowcat::spectral::CoefficientTheory::ordinary_over(spec);
  auto tables = flowcat::spectral::page_tables(doc.category, h);

  std::ostringstream text;
  ordered_json out;
  text << "coefficients: " << spec.to_string() << "\n";
  for (const auto& t : tables) {
    text << flowcat::spectral::table_text(t);
    ordered_json page = ordered_json::array();
    for (const auto& [key, rank] : t.ranks)
      page.push_back(ordered_json{{"p", key.first}, {"q", key.second}, {"rank", rank}});
    out["E" + std::to_string(t.r)] = page;
  }
  flowcat::Report collapse = flowcat::spectral::collapse_check(doc.category, h);
  text << "collapse:\n";
  std::ostringstream rep;
  rep << collapse;
  text << rep.str();

  std::cout << text.str();
  if (!tc.out_dir.empty()) {
    write_text(fs::path(tc.out_dir) / "spectral.txt", text.str());
    write_text(fs::path(tc.out_dir) / "spectral.json", out.dump(2) + "\n");
  }
  return collapse.ok() ? kExitOk : kExitCheckFailed;
}

int cmd_generate(const std::string& name, const ToolConfig& tc) {
  using namespace flowcat::morse;
  NumericConfig cfg = numeric_config(tc);

  fs::path out_dir = tc.out_dir.empty() ? fs::path(".") : fs::path(tc.out_dir);
  fs::create_directories(out_dir);

  flowcat::io::CategoryDocument doc;
  doc.meta.seed = tc.seed;
  doc.meta.sign_convention = sign_convention_text();
  doc.meta.tolerances = {{"tol_crit", cfg.tol_crit},
                         {"tol_nondeg", cfg.tol_nondeg},
                         {"delta_arrive", cfg.delta_arrive},
                         {"tol_merge", cfg.tol_merge}};

  std::vector<OrbitRecord> orbits;
  std::string stem;

  if (name == "torus-pair") {
    MorseSystem src = analyze(upright_torus_surface(), cfg);
    MorseSystem tgt = analyze(tilted_torus_surface(), cfg);
    auto data = continuation_data(src, tgt);
    doc.category = data.source;
    flowcat::io::ComparisonPayload payload;
    payload.target = data.target;
    payload.mixed0 = data.mixed0;
    doc.comparison = payload;
    doc.meta.producer = "morse_numeric torus/tilted-torus continuation";
    stem = "torus-pair";
    orbits = generate_category(src).orbits;
  } else {
    SurfaceSpec surf = name.size() > 5 && name.substr(name.size() - 5) == ".json"
                           ? surface_from_spec_file(name)
                           : surface_by_name(name);
    MorseSystem sys = analyze(surf, cfg);
    GeneratedCategory gen = generate_category(sys);
    doc.category = gen.category;
    orbits = std::move(gen.orbits);
    doc.meta.producer = "morse_numeric " + surf.name;
    stem = sanitize(surf.name);
  }

  // The generator must hand over data that passes its own checks.
  flowcat::Report v = flowcat::validate(doc.category);
  flowcat::Report d2 = flowcat::d_squared_report(doc.category);
  if (!v.ok() || !d2.ok()) {
    std::cerr << "generated category failed verification:\n" << v << d2;
    return kExitGeneration;
  }

  fs::path file = out_dir / (stem + ".json");
  flowcat::io::save_file(doc, file.string());
  std::cout << file.string() << "\n";

  for (const auto& orbit : orbits) {
    fs::path tsv = out_dir / "trajectories" /
                   (stem + "_" + orbit.from + "_" + orbit.to + "_" +
                    std::to_string(orbit.point) + ".tsv");
    write_text(tsv, trajectory_tsv(orbit.trajectory));
  }
  return kExitOk;
}

int cmd_compare(const std::string& path) {
  auto doc = flowcat::io::load_file(path);
  auto data = doc.comparison_data();
  auto psi = flowcat::comparison::build_psi(data);
  flowcat::Report chain = flowcat::comparison::verify_chain_map(data, psi);
  std::cout << "chain map:\n" << chain;
  if (!chain.ok()) {
    std::cout << "FAILED\n";
    return kExitCheckFailed;
  }
  flowcat::Report qi = flowcat::comparison::quasi_iso_check(data, psi);
  std::cout << "quasi-isomorphism:\n" << qi;
  std::cout << (qi.ok() ? "OK\n" : "FAILED\n");
  return qi.ok() ? kExitOk : kExitCheckFailed;
}

int cmd_realize(const std::string& path, const ToolConfig& tc) {
  auto doc = flowcat::io::load_file(path);
  flowcat::cw::CWData cw = tc.shift < 0 ? flowcat::cw::realize(doc.category)
                                        : flowcat::cw::realize(doc.category, tc.shift);
  std::string text = flowcat::cw::to_text(cw);
  std::string dot = flowcat::cw::to_dot(cw);
  std::cout << text;
  if (!tc.out_dir.empty()) {
    write_text(fs::path(tc.out_dir) / "cw.txt", text);
    write_text(fs::path(tc.out_dir) / "cw.dot", dot);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"flow category toolkit"};
  app.require_subcommand(1);

  ToolConfig tc;
  std::string path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--coeffs", tc.coeffs, "coefficients: Z, Q or Fp:p");
    sub->add_option("--shift", tc.shift, "suspension shift L");
    sub->add_option("--seed", tc.seed, "seed recorded in outputs");
    sub->add_option("--jobs", tc.jobs, "parallel workers");
    sub->add_option("--out", tc.out_dir, "output directory");
    sub->add_option("--tol-crit", tc.tol_crit, "critical point gradient tolerance");
    sub->add_option("--tol-nondeg", tc.tol_nondeg, "Hessian nondegeneracy tolerance");
    sub->add_option("--tol-arrive", tc.tol_arrive, "flow arrival distance");
    sub->add_option("--tol-merge", tc.tol_merge, "critical point merge distance");
  };

  CLI::App* validate = app.add_subcommand("validate", "check a category file");
  validate->add_option("path", path)->required();
  add_common(validate);

  CLI::App* homology = app.add_subcommand("homology", "homology table of a category file");
  homology->add_option("path", path)->required();
  add_common(homology);

  CLI::App* spectral = app.add_subcommand("spectral", "E1/E2 pages of the index filtration");
  spectral->add_option("path", path)->required();
  add_common(spectral);

  CLI::App* generate = app.add_subcommand("generate", "build a category from a surface");
  generate->add_option("name", path, "circle|sphere|torus|tilted-torus|torus-pair|loopspace:k,n,eps|spec.json")
      ->required();
  add_common(generate);

  CLI::App* compare = app.add_subcommand("compare", "verify a comparison block");
  compare->add_option("path", path)->required();
  add_common(compare);

  CLI::App* realize = app.add_subcommand("realize", "cell data of the realization");
  realize->add_option("path", path)->required();
  add_common(realize);

  CLI11_PARSE(app, argc, argv);

  try {
    if (validate->parsed()) return cmd_validate(path);
    if (homology->parsed()) return cmd_homology(path, tc);
    if (spectral->parsed()) return cmd_spectral(path, tc);
    if (generate->parsed()) return cmd_generate(path, tc);
    if (compare->parsed()) return cmd_compare(path);
    if (realize->parsed()) return cmd_realize(path, tc);
  } catch (const flowcat::ShiftTooSmall& e) {
    std::cerr << e.what() << "\n";
    return kExitShift;
  } catch (const flowcat::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitParse;
  } catch (const flowcat::Error& e) {
    std::cerr << e.what() << "\n";
    return generate->parsed() ? kExitGeneration : kExitCheckFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return generate->parsed() ? kExitGeneration : kExitCheckFailed;
  }
  return kExitOk;
}
