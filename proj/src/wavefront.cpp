#include "nfisac/wavefront.hpp"

#include <cmath>

namespace nfisac {

namespace {
constexpr double kPi = 3.14159265358979323846;

// In-plane distance from element m to the target's plane projection; the
// element-to-target distance is sqrt(d_m^2 + y^2) for a planar array.
Eigen::VectorXd plane_distances(const AntennaLayout& layout,
                                const TargetState& t) {
  Eigen::Vector3d p = cylindrical_to_cartesian(t);
  int n = layout.count();
  Eigen::VectorXd d(n);
  for (int m = 0; m < n; ++m) {
    double dx = layout.positions(0, m) - p[0];
    double dz = layout.positions(1, m) - p[1];
    d[m] = std::hypot(dx, dz);
  }
  return d;
}
} // namespace

Eigen::VectorXd propagation_delta(const AntennaLayout& layout,
                                  const TargetState& target) {
  Eigen::Vector3d p = cylindrical_to_cartesian(target);
  double r0 = p.norm();
  int n = layout.count();
  Eigen::VectorXd d(n);
  for (int m = 0; m < n; ++m)
    d[m] = (layout.positions.col(m) - p).norm() - r0;
  return d;
}

Eigen::VectorXcd steering(const AntennaLayout& layout, const TargetState& target,
                          double wavelength) {
  Eigen::VectorXd d = propagation_delta(layout, target);
  Eigen::VectorXcd a(d.size());
  for (int m = 0; m < d.size(); ++m)
    a[m] = std::exp(cxd(0.0, -2 * kPi * d[m] / wavelength));
  return a;
}

Eigen::VectorXcd comm_channel(const AntennaLayout& layout,
                              const TargetState& user, double wavelength) {
  Eigen::Vector3d p = cylindrical_to_cartesian(user);
  int n = layout.count();
  double r0 = p.norm();
  Eigen::VectorXcd h(n);
  for (int m = 0; m < n; ++m) {
    double r_m = (layout.positions.col(m) - p).norm();
    if (!(r_m > 0.0))
      throw singular_error("comm_channel: user coincides with an element");
    h[m] = wavelength / (4 * kPi * r_m) *
           std::exp(cxd(0.0, -2 * kPi * (r_m - r0) / wavelength));
  }
  return h;
}

AuxCoplanar aux_coplanar(const AntennaLayout& layout, const TargetState& target) {
  int n = layout.count();
  Eigen::VectorXd d = plane_distances(layout, target);
  AuxCoplanar aux;
  aux.v1.resize(n);
  aux.v2.resize(n);
  Eigen::Vector3d p = cylindrical_to_cartesian(target);
  for (int m = 0; m < n; ++m) {
    if (!(d[m] > 0.0))
      throw singular_error("aux_coplanar: target coincides with an element");
    double x_m = layout.positions(0, m), z_m = layout.positions(1, m);
    // z_m*x - x_m*z = R_m*rho*sin(phi_m - phi)
    aux.v1[m] = (z_m * p[0] - x_m * p[1]) / d[m];
    // rho - R_m*cos(phi - phi_m), via the unit direction so rho = 0 is exact
    double radial =
        target.rho - (x_m * std::cos(target.phi) + z_m * std::sin(target.phi));
    aux.v2[m] = radial / d[m] - 1.0;
  }
  return aux;
}

AuxNonCoplanar aux_noncoplanar(const AntennaLayout& layout,
                               const TargetState& target) {
  if (!(target.rho > 0.0))
    throw degenerate_geometry("aux_noncoplanar: rho must be > 0");
  int n = layout.count();
  Eigen::VectorXd d = plane_distances(layout, target);
  Eigen::Vector3d p = cylindrical_to_cartesian(target);
  double r0 = std::hypot(target.rho, target.y);
  AuxNonCoplanar aux;
  aux.v21.resize(n);
  aux.v22.resize(n);
  aux.v23.resize(n);
  for (int m = 0; m < n; ++m) {
    double r_m = std::hypot(d[m], target.y);
    if (!(r_m > 0.0))
      throw singular_error("aux_noncoplanar: target coincides with an element");
    double x_m = layout.positions(0, m), z_m = layout.positions(1, m);
    double radius_m = std::hypot(x_m, z_m);
    aux.v21[m] =
        target.rho / r0 -
        (target.rho - (x_m * std::cos(target.phi) + z_m * std::sin(target.phi))) /
            r_m;
    // sin(phi - phi_m) = (x_m*z - z_m*x)/(rho*R_m); kernel excludes the R*rho
    // prefactor that the phi derivative applies
    aux.v22[m] = radius_m > 0.0
                     ? (x_m * p[1] - z_m * p[0]) / (target.rho * radius_m * r_m)
                     : 0.0;
    aux.v23[m] = 1.0 / r0 - 1.0 / r_m;
  }
  return aux;
}

std::vector<Eigen::VectorXcd> steering_derivatives(const AntennaLayout& layout,
                                                   const TargetState& target,
                                                   double wavelength) {
  // Generic planar-layout partials of l^(m); for a UCA they reduce to the
  // documented auxiliary-vector forms.
  Eigen::VectorXcd a = steering(layout, target, wavelength);
  Eigen::VectorXd d = plane_distances(layout, target);
  Eigen::Vector3d p = cylindrical_to_cartesian(target);
  double k = 2 * kPi / wavelength;
  int n = layout.count();
  bool coplanar = target.y == 0.0;
  double r0 = std::hypot(target.rho, target.y);
  Eigen::VectorXcd d_rho(n), d_phi(n), d_y(n);
  for (int m = 0; m < n; ++m) {
    double r_m = std::hypot(d[m], target.y);
    if (!(r_m > 0.0))
      throw singular_error(
          "steering_derivatives: target coincides with an element");
    double x_m = layout.positions(0, m), z_m = layout.positions(1, m);
    double radial =
        target.rho - (x_m * std::cos(target.phi) + z_m * std::sin(target.phi));
    double dl_drho = radial / r_m - (r0 > 0.0 ? target.rho / r0 : 1.0);
    double dl_dphi = (x_m * p[1] - z_m * p[0]) / r_m;
    cxd factor = cxd(0.0, -k) * a[m];
    d_rho[m] = factor * dl_drho;
    d_phi[m] = factor * dl_dphi;
    if (!coplanar) {
      double dl_dy = target.y / r_m - target.y / r0;
      d_y[m] = factor * dl_dy;
    }
  }
  std::vector<Eigen::VectorXcd> out = {d_rho, d_phi};
  if (!coplanar) out.push_back(d_y);
  return out;
}

} // namespace nfisac
