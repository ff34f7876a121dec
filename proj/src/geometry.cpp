#include "nfisac/geometry.hpp"

#include <cmath>

namespace nfisac {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

Eigen::Vector3d cylindrical_to_cartesian(const TargetState& t) {
  return {t.rho * std::cos(t.phi), t.rho * std::sin(t.phi), t.y};
}

AntennaLayout uca_layout(int n, double radius) {
  if (n < 3) throw invalid_geometry("uca_layout: need at least 3 elements");
  if (!(radius > 0.0)) throw invalid_geometry("uca_layout: radius must be > 0");
  AntennaLayout l;
  l.kind = ArrayKind::UCA;
  l.radius = radius;
  l.spacing = 2 * kPi * radius / n;
  l.positions.resize(3, n);
  for (int m = 0; m < n; ++m) {
    double phi_m = 2 * kPi * m / n;
    l.positions.col(m) << radius * std::cos(phi_m), radius * std::sin(phi_m), 0.0;
  }
  return l;
}

AntennaLayout upa_layout(int nx, int nz, double spacing) {
  if (nx < 1 || nz < 1)
    throw invalid_geometry("upa_layout: grid extents must be >= 1");
  if (!(spacing > 0.0)) throw invalid_geometry("upa_layout: spacing must be > 0");
  AntennaLayout l;
  l.kind = ArrayKind::UPA;
  l.spacing = spacing;
  l.nx = nx;
  l.nz = nz;
  l.positions.resize(3, nx * nz);
  double cx = (nx - 1) / 2.0, cz = (nz - 1) / 2.0;
  int m = 0;
  for (int i = 0; i < nx; ++i)
    for (int k = 0; k < nz; ++k, ++m)
      l.positions.col(m) << (i - cx) * spacing, (k - cz) * spacing, 0.0;
  l.radius = 0.5 * std::hypot((nx - 1) * spacing, (nz - 1) * spacing);
  return l;
}

AntennaLayout upa_same_aperture(int n, double uca_radius) {
  if (n < 2) throw invalid_geometry("upa_same_aperture: need at least 2 elements");
  if (!(uca_radius > 0.0))
    throw invalid_geometry("upa_same_aperture: radius must be > 0");
  int nx = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
  int nz = n / nx;
  if (nz < 1) nz = 1;
  // diagonal of the bounding box equals the UCA diameter
  double diag = std::hypot(static_cast<double>(nx - 1), static_cast<double>(nz - 1));
  double spacing = diag > 0.0 ? 2 * uca_radius / diag : 2 * uca_radius;
  return upa_layout(nx, nz, spacing);
}

double radius_from_spacing(int n, double d) {
  if (n < 3) throw invalid_geometry("radius_from_spacing: need at least 3 elements");
  if (!(d > 0.0)) throw invalid_geometry("radius_from_spacing: spacing must be > 0");
  return n * d / (2 * kPi);
}

double rayleigh_distance(double aperture, double wavelength) {
  if (!(aperture > 0.0) || !(wavelength > 0.0))
    throw invalid_geometry("rayleigh_distance: aperture and wavelength must be > 0");
  return 2 * aperture * aperture / wavelength;
}

} // namespace nfisac
