#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>

#include "nfisac/sweep.hpp"

using namespace nfisac;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  std::string path = std::string("/tmp/nfisac_test_") + name + ".json";
  std::ofstream out(path);
  out << body;
  return path;
}

const char* kBaseConfig = R"({
  "scenario": {
    "f_c_hz": 28e9,
    "noise_dbm": -113,
    "snapshots": 16,
    "alpha_s": {"magnitude": 1.0, "phase_deg": 0.0},
    "p_max_dbm": 25,
    "gamma_min_db": 1.0
  },
  "array": {"type": "uca", "n_t": 32, "n_r": 32},
  "target": {"rho": [0.6], "phi_deg": [30.0], "y": [0.0]},
  "user": {"rho": 1.5, "phi_deg": -45.0, "y": 0.0},
  "sweep": {"axis": "n_r", "values": [16, 32]},
  "methods": ["isotropic"],
  "seed": 7
})";

} // namespace

TEST_CASE("load_config converts units to SI") {
  std::string path = write_temp("base", kBaseConfig);
  SweepConfig cfg = load_config(path);
  CHECK(cfg.f_c_hz == doctest::Approx(28e9));
  CHECK(cfg.p_max_w == doctest::Approx(0.31622776601683794).epsilon(1e-12));
  CHECK(cfg.noise_power_w == doctest::Approx(5.011872336272722e-15).epsilon(1e-12));
  CHECK(cfg.gamma_min == doctest::Approx(1.2589254117941673).epsilon(1e-12));
  CHECK(cfg.phi_list[0] == doctest::Approx(3.14159265358979323846 / 6).epsilon(1e-12));
  CHECK(cfg.snapshots == 16);
  CHECK(cfg.n_t == 32);
  CHECK(cfg.axis == SweepAxis::Nr);
  REQUIRE(cfg.sweep_values.size() == 2);
  CHECK(cfg.methods.size() == 1);
  CHECK(cfg.seed == 7);
}

TEST_CASE("load_config rejects malformed input with the field path") {
  std::string bad1 = write_temp("bad1", R"({"scenario": {}})");
  CHECK_THROWS_AS(load_config(bad1), config_error);
  try {
    load_config(bad1);
  } catch (const config_error& e) {
    CHECK(std::string(e.what()).find("scenario") != std::string::npos);
  }
  std::string body(kBaseConfig);
  auto sub = [&](const std::string& from, const std::string& to) {
    std::string s = body;
    s.replace(s.find(from), from.size(), to);
    return s;
  };
  CHECK_THROWS_AS(
      load_config(write_temp("bad2", sub("\"axis\": \"n_r\"", "\"axis\": \"bogus\""))),
      config_error);
  CHECK_THROWS_AS(
      load_config(write_temp("bad3", sub("\"rho\": [0.6]", "\"rho\": []"))),
      config_error);
  CHECK_THROWS_AS(
      load_config(write_temp("bad4", sub("\"type\": \"uca\"", "\"type\": \"ula\""))),
      config_error);
  CHECK_THROWS_AS(load_config("/tmp/nfisac_missing_file.json"), config_error);
}

TEST_CASE("single-point isotropic sweep equals the direct baseline call") {
  std::string body(kBaseConfig);
  std::string from = "\"values\": [16, 32]";
  body.replace(body.find(from), from.size(), "\"values\": [32]");
  SweepConfig cfg = load_config(write_temp("single", body));
  std::vector<ResultRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].status == "ok");

  Scenario sc;
  sc.wavelength = kSpeedOfLight / cfg.f_c_hz;
  sc.noise_power = cfg.noise_power_w;
  sc.snapshots = cfg.snapshots;
  sc.alpha_s = cfg.alpha_s;
  sc.p_max = cfg.p_max_w;
  sc.gamma_min = cfg.gamma_min;
  double r = radius_from_spacing(32, sc.wavelength / 2);
  AntennaLayout lt = uca_layout(32, r), lr = uca_layout(32, r);
  FimReport ref = isotropic_baseline(sc, lt, lr,
                                     TargetState::coplanar(0.6, cfg.phi_list[0]));
  CHECK(rows[0].speb_m2 == doctest::Approx(ref.speb).epsilon(1e-12));
  CHECK(rows[0].crb_rho == doctest::Approx(ref.crbs[0]).epsilon(1e-12));
  CHECK(rows[0].crb_phi == doctest::Approx(ref.crbs[1]).epsilon(1e-12));
  CHECK(rows[0].speb_db == doctest::Approx(10 * std::log10(ref.speb)).epsilon(1e-12));
  CHECK_FALSE(rows[0].crb_y.has_value());
  CHECK_FALSE(rows[0].inside_aperture); // 0.6 m is outside a ~3 cm ring
}

TEST_CASE("sweep rows are sorted and CRBs decrease with N_r") {
  SweepConfig cfg = load_config(write_temp("base2", kBaseConfig));
  std::vector<ResultRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].sweep_value == 16);
  CHECK(rows[1].sweep_value == 32);
  CHECK(rows[1].crb_phi < rows[0].crb_phi);
  CHECK(rows[1].crb_rho < rows[0].crb_rho);
  CHECK(rows[1].speb_m2 < rows[0].speb_m2);
}

TEST_CASE("same seed gives byte-identical CSV, including optimizer methods") {
  std::string body(kBaseConfig);
  std::string from = "\"methods\": [\"isotropic\"]";
  body.replace(body.find(from), from.size(),
               "\"methods\": [\"isotropic\", \"closed_form\", \"vqf\", \"oracle\"]");
  std::string from2 = "\"values\": [16, 32]";
  body.replace(body.find(from2), from2.size(), "\"values\": [16]");
  SweepConfig cfg = load_config(write_temp("det", body));
  std::string a = rows_to_csv(run_sweep(cfg));
  std::string b = rows_to_csv(run_sweep(cfg));
  CHECK(a == b);
  CHECK(a.find("wall") == std::string::npos); // timing kept out of the contract
  // schema: fixed header, '.' decimals, one line per row + header
  CHECK(a.rfind("sweep_value,sweep_label,method,", 0) == 0);
  CHECK(a.find(',') != std::string::npos);
  CHECK(a.find(';') == std::string::npos);
  int lines = 0;
  for (char ch : a)
    if (ch == '\n') ++lines;
  CHECK(lines == 5); // header + 4 methods
}

TEST_CASE("method_name round-trip strings") {
  CHECK(method_name(Method::Isotropic) == "isotropic");
  CHECK(method_name(Method::ClosedForm) == "closed_form");
  CHECK(method_name(Method::Vqf) == "vqf");
  CHECK(method_name(Method::Oracle) == "oracle");
}

TEST_CASE("per-point failures are recorded without aborting the sweep") {
  // gamma far above what the channel supports -> infeasible rows, status set
  std::string body(kBaseConfig);
  std::string from = "\"gamma_min_db\": 1.0";
  body.replace(body.find(from), from.size(), "\"gamma_min_db\": 250.0");
  std::string from2 = "\"methods\": [\"isotropic\"]";
  body.replace(body.find(from2), from2.size(),
               "\"methods\": [\"isotropic\", \"closed_form\"]");
  SweepConfig cfg = load_config(write_temp("infeas", body));
  std::vector<ResultRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 4);
  int failed = 0, ok = 0;
  for (const ResultRow& r : rows) {
    if (r.status == "ok") ++ok;
    else ++failed;
  }
  CHECK(ok == 2);     // isotropic rows ignore the SINR constraint
  CHECK(failed == 2); // closed-form rows report infeasibility
}

TEST_CASE("array-type axis produces labeled rows with UCA < UPA SPEB") {
  std::string body(kBaseConfig);
  std::string from = "\"sweep\": {\"axis\": \"n_r\", \"values\": [16, 32]}";
  body.replace(body.find(from), from.size(),
               "\"sweep\": {\"axis\": \"array_type\", "
               "\"labels\": [\"uca\", \"upa_same_aperture\"]}");
  SweepConfig cfg = load_config(write_temp("arr", body));
  std::vector<ResultRow> rows = run_sweep(cfg);
  REQUIRE(rows.size() == 2);
  double uca = 0, upa = 0;
  for (const ResultRow& r : rows) {
    if (r.sweep_label == "uca") uca = r.speb_m2;
    if (r.sweep_label == "upa_same_aperture") upa = r.speb_m2;
  }
  REQUIRE(uca > 0);
  REQUIRE(upa > 0);
  CHECK(uca < upa);
}

TEST_CASE("validate --filter runs only matching checks and they pass") {
  std::vector<ValidationCheck> checks = validate("norm");
  REQUIRE(!checks.empty());
  for (const ValidationCheck& c : checks) {
    CHECK(c.name.find("norm") != std::string::npos);
    CHECK(c.passed);
  }
  std::vector<ValidationCheck> none = validate("zzz-no-such-check");
  CHECK(none.empty());
}

TEST_CASE("write_csv creates the file with the same bytes") {
  SweepConfig cfg = load_config(write_temp("base3", kBaseConfig));
  std::vector<ResultRow> rows = run_sweep(cfg);
  std::string path = "/tmp/nfisac_test_rows.csv";
  write_csv(rows, path);
  std::ifstream in(path);
  std::string disk((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(disk == rows_to_csv(rows));
  std::remove(path.c_str());
}
