#ifndef NFISAC_TYPES_HPP
#define NFISAC_TYPES_HPP

#include <complex>
#include <stdexcept>
#include <string>

namespace nfisac {

using cxd = std::complex<double>;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

// Error taxonomy: every throwing precondition in the library maps onto one of
// these so callers (and the CLI) can translate failures into exit codes.
struct invalid_geometry : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};
struct degenerate_geometry : std::domain_error {
  using std::domain_error::domain_error;
};
struct singular_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct pole_error : std::domain_error {
  using std::domain_error::domain_error;
};
struct infeasible_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class TargetCase { Coplanar, NonCoplanar };

// Cylindrical coordinates (rho, phi, y): rho/phi live in the array plane
// (x-z), y is the signed distance along the array normal.
struct TargetState {
  double rho = 0.0; // m, perpendicular distance, >= 0
  double phi = 0.0; // rad, polar angle
  double y = 0.0;   // m, signed distance along the normal

  TargetCase target_case() const {
    return y == 0.0 ? TargetCase::Coplanar : TargetCase::NonCoplanar;
  }

  static TargetState coplanar(double rho, double phi) {
    return TargetState{rho, phi, 0.0};
  }
  static TargetState noncoplanar(double rho, double phi, double y) {
    if (rho <= 0.0)
      throw degenerate_geometry(
          "non-coplanar target requires rho > 0 (normal-axis target rejected)");
    return TargetState{rho, phi, y};
  }
};

struct Scenario {
  double wavelength = 0.0;  // m
  double noise_power = 0.0; // W (sigma^2)
  int snapshots = 1;        // L >= 1
  cxd alpha_s{1.0, 0.0};    // reflection coefficient
  double p_max = 0.0;       // W
  double gamma_min = 0.0;   // linear SINR threshold

  void check() const {
    if (wavelength <= 0.0 || noise_power <= 0.0 || p_max <= 0.0 ||
        snapshots < 1 || std::abs(alpha_s) <= 0.0 || gamma_min < 0.0)
      throw config_error("scenario fields must be positive (L >= 1, gamma_min >= 0)");
  }
};

} // namespace nfisac

#endif
