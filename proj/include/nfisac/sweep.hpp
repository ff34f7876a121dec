#ifndef NFISAC_SWEEP_HPP
#define NFISAC_SWEEP_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nfisac/beamformer.hpp"

namespace nfisac {

enum class Method { Isotropic, ClosedForm, Vqf, Oracle };
enum class SweepAxis { Nr, PMaxDbm, Rho, Fc, ArrayType };

std::string method_name(Method m);

struct SweepConfig {
  // scenario (SI after load; dBm/dB accepted at the JSON boundary)
  double f_c_hz = 28e9;
  double noise_power_w = 0.0;
  int snapshots = 1;
  cxd alpha_s{1.0, 0.0};
  double p_max_w = 0.0;
  double gamma_min = 0.0; // linear

  // array
  std::string array_type = "uca"; // "uca" | "upa_same_aperture"
  int n_t = 64;
  int n_r = 64;
  std::optional<double> spacing; // default lambda/2
  std::optional<double> radius;  // overrides spacing when present

  // target (first entry of each list is the base point)
  std::vector<double> rho_list;
  std::vector<double> phi_list; // radians after load
  std::vector<double> y_list;

  // communication user position (needed by the optimizer methods)
  double user_rho = 1.5;
  double user_phi = 0.0; // radians after load
  double user_y = 0.0;

  SweepAxis axis = SweepAxis::Nr;
  std::vector<double> sweep_values;        // numeric axes
  std::vector<std::string> sweep_labels;   // array-type axis
  std::vector<Method> methods;
  std::uint64_t seed = 0;
  std::string out_path;
};

// Parses and validates the JSON config; throws config_error with the offending
// field path.
SweepConfig load_config(const std::string& path);

struct ResultRow {
  double sweep_value = 0.0;
  std::string sweep_label;
  Method method = Method::Isotropic;
  double crb_rho = 0.0;
  double crb_phi = 0.0;
  std::optional<double> crb_y; // absent for coplanar targets
  double speb_m2 = 0.0;
  double speb_db = 0.0;
  int iterations = 0;
  double wall_time_ms = 0.0;
  bool inside_aperture = false; // rho < R_CA (allowed, flagged)
  std::string status = "ok";    // per-point failures recorded, sweep continues
};

// Evaluates the Cartesian product of sweep values x methods. Deterministic for
// a fixed seed; rows sorted by (sweep value, method). Thread count from
// NFISAC_THREADS (default: available parallelism).
std::vector<ResultRow> run_sweep(const SweepConfig& config);

// Locale-independent CSV with a fixed header; identical inputs and seed
// produce byte-identical bytes.
std::string rows_to_csv(const std::vector<ResultRow>& rows);
void write_csv(const std::vector<ResultRow>& rows, const std::string& path);

struct ValidationCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Built-in invariant suite (derivative checks, norm identities, FIM
// diagonal-approximation bounds, optimizer-vs-oracle gaps). `filter` keeps
// checks whose name contains the substring.
std::vector<ValidationCheck> validate(const std::string& filter = "");

} // namespace nfisac

#endif
