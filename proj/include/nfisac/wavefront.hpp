#ifndef NFISAC_WAVEFRONT_HPP
#define NFISAC_WAVEFRONT_HPP

#include <Eigen/Dense>
#include <vector>

#include "nfisac/geometry.hpp"
#include "nfisac/types.hpp"

namespace nfisac {

// Differential propagation distance l^(m) = ||p_m - p|| - ||p|| per element.
// Computed from raw 3D coordinates; identical to the per-case formulas for a
// UCA and equally valid for a UPA.
Eigen::VectorXd propagation_delta(const AntennaLayout& layout,
                                  const TargetState& target);

// Unit-modulus steering vector, entry m = exp(-j*2*pi*l^(m)/lambda).
Eigen::VectorXcd steering(const AntennaLayout& layout, const TargetState& target,
                          double wavelength);

// Near-field channel: entrywise amplitude lambda/(4*pi*r_m) (absolute
// element-to-user distance) times the steering phase.
Eigen::VectorXcd comm_channel(const AntennaLayout& layout,
                              const TargetState& user, double wavelength);

struct AuxCoplanar {
  Eigen::VectorXd v1; // pairs with the phi derivative
  Eigen::VectorXd v2; // pairs with the rho derivative
};

struct AuxNonCoplanar {
  Eigen::VectorXd v21; // rho
  Eigen::VectorXd v22; // phi (scaled by -R*rho)
  Eigen::VectorXd v23; // y (scaled by y)
};

// [v1]_m = R*rho*sin(2*pi*m/N - phi) / rho_ca^(m)
// [v2]_m = (rho - R*cos(2*pi*m/N - phi)) / rho_ca^(m) - 1
// The full distance rho_ca^(m) in the denominator makes these the exact
// analytic derivative kernels of l^(m) (verified against finite differences).
AuxCoplanar aux_coplanar(const AntennaLayout& layout, const TargetState& target);

// [v21]_m = rho/sqrt(rho^2+y^2) - (rho - R*cos(phi - phi_m))/sqrt(rho_ca^2+y^2)
// [v22]_m = sin(phi - phi_m)/sqrt(rho_ca^2+y^2)
// [v23]_m = 1/sqrt(rho^2+y^2) - 1/sqrt(rho_ca^2+y^2)
AuxNonCoplanar aux_noncoplanar(const AntennaLayout& layout,
                               const TargetState& target);

// Analytic derivatives of the steering vector w.r.t. the estimable
// coordinates, ordered (rho, phi) for coplanar and (rho, phi, y) otherwise:
//   coplanar:      d/drho = -(j*2*pi/lambda) * v2 (.) alpha
//                  d/dphi =  (j*2*pi/lambda) * v1 (.) alpha
//   non-coplanar:  d/drho =  (j*2*pi/lambda)        * v21 (.) alpha
//                  d/dphi = -(j*2*pi*R*rho/lambda)  * v22 (.) alpha
//                  d/dy   =  (j*2*pi*y/lambda)      * v23 (.) alpha
std::vector<Eigen::VectorXcd> steering_derivatives(const AntennaLayout& layout,
                                                   const TargetState& target,
                                                   double wavelength);

} // namespace nfisac

#endif
