#ifndef NFISAC_GEOMETRY_HPP
#define NFISAC_GEOMETRY_HPP

#include <Eigen/Dense>

#include "nfisac/types.hpp"

namespace nfisac {

enum class ArrayKind { UCA, UPA };

// Immutable antenna layout. Positions are stored as columns of a 3xN matrix in
// (x, z, y) order so the first two components span the array plane; the
// centroid is always the origin (reference point r_0).
struct AntennaLayout {
  Eigen::Matrix3Xd positions; // meters, (x, z, y) per column
  ArrayKind kind = ArrayKind::UCA;
  double radius = 0.0;  // UCA circumscribed radius (m); for UPA: half-diagonal
  double spacing = 0.0; // UPA grid spacing (m); for UCA: adjacent arc length
  int nx = 0, nz = 0;   // UPA grid extents

  int count() const { return static_cast<int>(positions.cols()); }
};

// Cylindrical (rho, phi, y) -> (x, z, y).
Eigen::Vector3d cylindrical_to_cartesian(const TargetState& t);

// n antennas at angles 2*pi*m/n on a circle of the given radius, y = 0.
AntennaLayout uca_layout(int n, double radius);

// Regular nx-by-nz grid in the array plane, centered at the origin.
AntennaLayout upa_layout(int nx, int nz, double spacing);

// Square-ish UPA benchmark with the same aperture (diagonal = UCA diameter).
// Side counts: ceil(sqrt(n)) x floor(n / ceil(sqrt(n))).
AntennaLayout upa_same_aperture(int n, double uca_radius);

// R = n*d / (2*pi): radius for which the adjacent arc spacing equals d.
double radius_from_spacing(int n, double d);

// 2 * aperture^2 / wavelength.
double rayleigh_distance(double aperture, double wavelength);

} // namespace nfisac

#endif
