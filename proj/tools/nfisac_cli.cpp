#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nfisac/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitValidation = 3;

void print_rows(const std::vector<nfisac::ResultRow>& rows) {
  std::printf("%-12s %-12s %-12s %-13s %-13s %-13s %-12s %-9s %-5s %s\n",
              "sweep_value", "label", "method", "crb_rho", "crb_phi", "crb_y",
              "speb_m2", "speb_db", "iters", "status");
  for (const auto& r : rows) {
    std::printf("%-12.6g %-12s %-12s %-13.6g %-13.6g ", r.sweep_value,
                r.sweep_label.empty() ? "-" : r.sweep_label.c_str(),
                nfisac::method_name(r.method).c_str(), r.crb_rho, r.crb_phi);
    if (r.crb_y)
      std::printf("%-13.6g ", *r.crb_y);
    else
      std::printf("%-13s ", "-");
    std::printf("%-12.6g %-9.4f %-5d %s%s\n", r.speb_m2, r.speb_db,
                r.iterations, r.status.c_str(),
                r.inside_aperture ? " [inside aperture]" : "");
  }
}

bool all_failed(const std::vector<nfisac::ResultRow>& rows,
                const char* needle) {
  if (rows.empty()) return false;
  for (const auto& r : rows)
    if (r.status.find(needle) == std::string::npos) return false;
  return true;
}

nfisac::SweepConfig load_with_overrides(const std::string& path,
                                        const std::optional<std::uint64_t>& seed,
                                        const std::string& out) {
  nfisac::SweepConfig cfg = nfisac::load_config(path);
  if (seed) cfg.seed = *seed;
  if (!out.empty()) cfg.out_path = out;
  return cfg;
}

int run_point_command(const std::string& path,
                      const std::optional<std::uint64_t>& seed,
                      const std::string& out, bool crb_only) {
  nfisac::SweepConfig cfg = load_with_overrides(path, seed, out);
  if (crb_only) cfg.methods = {nfisac::Method::Isotropic};
  std::vector<nfisac::ResultRow> rows = nfisac::run_sweep(cfg);
  print_rows(rows);
  if (!cfg.out_path.empty()) {
    nfisac::write_csv(rows, cfg.out_path);
    std::printf("wrote %s\n", cfg.out_path.c_str());
  }
  if (all_failed(rows, "infeasible")) return kExitInfeasible;
  return kExitOk;
}

int run_sweep_command(const std::string& path,
                      const std::optional<std::uint64_t>& seed,
                      const std::string& out) {
  nfisac::SweepConfig cfg = load_with_overrides(path, seed, out);
  std::vector<nfisac::ResultRow> rows = nfisac::run_sweep(cfg);
  if (cfg.out_path.empty()) {
    std::fputs(nfisac::rows_to_csv(rows).c_str(), stdout);
  } else {
    nfisac::write_csv(rows, cfg.out_path);
    std::printf("wrote %s (%zu rows)\n", cfg.out_path.c_str(), rows.size());
  }
  if (all_failed(rows, "infeasible")) return kExitInfeasible;
  return kExitOk;
}

int run_validate_command(const std::string& filter) {
  std::vector<nfisac::ValidationCheck> checks = nfisac::validate(filter);
  int failed = 0;
  for (const auto& c : checks) {
    std::printf("[%s] %-32s %s\n", c.passed ? "PASS" : "FAIL", c.name.c_str(),
                c.detail.c_str());
    if (!c.passed) ++failed;
  }
  std::printf("%zu checks, %d failed\n", checks.size(), failed);
  return failed == 0 ? kExitOk : kExitValidation;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"near-field ISAC CRB/SPEB evaluation and beamformer harness"};
  app.require_subcommand(1);

  std::string config_path, out_path, filter, format = "csv";
  std::optional<std::uint64_t> seed;

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config)
      sub->add_option("config", config_path, "JSON config file")->required();
    sub->add_option("--seed", seed, "override the RNG seed");
    sub->add_option("--out", out_path, "override the output path");
    sub->add_option("--format", format, "output format")
        ->check(CLI::IsMember({"csv"}));
  };

  CLI::App* crb = app.add_subcommand(
      "crb", "evaluate CRB/SPEB at the configured points (isotropic input)");
  add_common(crb, true);
  CLI::App* opt = app.add_subcommand(
      "optimize", "run the configured beamformer methods");
  add_common(opt, true);
  CLI::App* swp = app.add_subcommand("sweep", "run the sweep and emit CSV");
  add_common(swp, true);
  CLI::App* val = app.add_subcommand("validate", "run the invariant suite");
  val->add_option("--filter", filter, "only run checks whose name contains this");

  CLI11_PARSE(app, argc, argv);

  try {
    if (crb->parsed()) return run_point_command(config_path, seed, out_path, true);
    if (opt->parsed())
      return run_point_command(config_path, seed, out_path, false);
    if (swp->parsed()) return run_sweep_command(config_path, seed, out_path);
    return run_validate_command(filter);
  } catch (const nfisac::config_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const nfisac::infeasible_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  }
}
