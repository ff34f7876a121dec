#ifndef NFISAC_FISHER_HPP
#define NFISAC_FISHER_HPP

#include <Eigen/Dense>
#include <optional>

#include "nfisac/geometry.hpp"
#include "nfisac/types.hpp"
#include "nfisac/wavefront.hpp"

namespace nfisac {

// --- special functions ------------------------------------------------------

// Upsilon(a) = (1/2pi) * int_0^{2pi} (a - cos x)/sqrt(1 - 2a cos x + a^2) dx,
// adaptive quadrature, absolute tolerance 1e-10.
double upsilon(double alpha);

// Complete elliptic integral of the first kind, K(k), modulus convention
// K(k) = int_0^{pi/2} dtheta / sqrt(1 - k^2 sin^2 theta), via the
// arithmetic-geometric mean to 1e-12 relative. Throws for k >= 1.
double elliptic_k(double k);

// --- norm identities --------------------------------------------------------

// ||.||_1 here means the plain signed entry sum (the identities only hold for
// signed sums of these sign-alternating vectors).
struct CoplanarNorms {
  double sum_v2 = 0.0;        // N*(Upsilon(rho/R) - 1)
  double sumsq_v2 = 0.0;      // N*(3/2 - 2*Upsilon)        rho < R
                              // N*(2 - R^2/(2 rho^2) - 2*Upsilon)  rho > R
  double sumsq_v2_alt = 0.0;  // 2 rho^2 N/(R^2-rho^2) resp. 2 R^2 N/(rho^2-R^2)
  double sumsq_v1 = 0.0;      // rho^2*N/2 (rho <= R) or R^2*N/2 (rho > R)
};

// Closed forms; throws pole_error within |rho/R - 1| < 0.02 for the squared
// forms. `sumsq_v2` carries the expression the direct-summation oracle
// confirms, `sumsq_v2_alt` the competing printed variant (kept for reporting).
CoplanarNorms norms_coplanar(const AntennaLayout& layout,
                             const TargetState& target);

// Direct summations of the same quantities (always valid).
CoplanarNorms norms_coplanar_direct(const AntennaLayout& layout,
                                    const TargetState& target);

struct NonCoplanarNorms {
  double sumsq_v22 = 0.0; // (N/g1^2) * (g2 - sqrt(g2^2 - g1^2))
  double sum_v23 = 0.0;   // N/sqrt(rho^2+y^2) - 2N K(.)/(pi sqrt(g2+g1))
  double sumsq_v23 = 0.0; // closed form with K
  double sum_v22 = 0.0;   // ~0
  double sum_v21_v22 = 0.0; // ~0 (direct only)
  double sum_v22_v23 = 0.0; // ~0 (direct only)
  // No closed form exists for the v21 moments; direct summation only.
  double sum_v21 = 0.0;
  double sumsq_v21 = 0.0;
};

NonCoplanarNorms norms_noncoplanar(const AntennaLayout& layout,
                                   const TargetState& target);
NonCoplanarNorms norms_noncoplanar_direct(const AntennaLayout& layout,
                                          const TargetState& target);

// --- numeric FIM ------------------------------------------------------------

struct FimReport {
  Eigen::MatrixXd full_fim;     // [coords..., Re(alpha_s), Im(alpha_s)]
  Eigen::MatrixXd position_fim; // nuisance eliminated (Schur complement)
  Eigen::MatrixXd approx_fim;   // diagonal / block-diagonal closed form
  Eigen::VectorXd crbs;         // per-coordinate, from position_fim inverse
  double speb = 0.0;            // m^2, Cartesian trace bound
  bool singular = false;
  bool amp_block_singular = false;
};

// Slepian-Bangs FIM over [rho, phi(, y), Re alpha_s, Im alpha_s] for the
// covariance R_x (rank-one w*w^H for a beamformed transmission).
Eigen::MatrixXd fim_numeric(const Eigen::MatrixXcd& r_x, const Scenario& sc,
                            const AntennaLayout& layout_t,
                            const AntennaLayout& layout_r,
                            const TargetState& target);
Eigen::MatrixXd fim_numeric(const Eigen::VectorXcd& w, const Scenario& sc,
                            const AntennaLayout& layout_t,
                            const AntennaLayout& layout_r,
                            const TargetState& target);

// Schur complement of the trailing 2x2 amplitude block. Falls back to a
// pseudo-inverse (flag set) when the amplitude block is singular.
Eigen::MatrixXd eliminate_nuisance(const Eigen::MatrixXd& full_fim,
                                   bool* amp_singular = nullptr);

// --- closed-form CRBs -------------------------------------------------------

struct CoplanarCrb {
  double crb_phi = 0.0;
  double crb_rho = 0.0;
  Eigen::Matrix2d fim; // approximate diagonal position FIM, order (rho, phi)
};

// Trace-form CRBs built from the closed-form norm identities; with an
// isotropic R_x = (P/N_t) I they reduce to the analytic branch expressions.
CoplanarCrb crb_coplanar_closed(const Scenario& sc,
                                const AntennaLayout& layout_t,
                                const AntennaLayout& layout_r,
                                const TargetState& target,
                                const Eigen::MatrixXcd& r_x);

struct NonCoplanarCrb {
  double crb_rho = 0.0;
  double crb_phi = 0.0;
  double crb_y = 0.0;
  Eigen::Matrix3d fim; // block-diagonal position FIM, order (rho, phi, y);
                       // the (rho, y) coupling is retained
};

NonCoplanarCrb crb_noncoplanar_closed(const Scenario& sc,
                                      const AntennaLayout& layout_t,
                                      const AntennaLayout& layout_r,
                                      const TargetState& target,
                                      const Eigen::MatrixXcd& r_x);

// --- projection and SPEB ----------------------------------------------------

// Rows are gradients of (rho, phi, y) w.r.t. Cartesian (x, z, y); det = 1/rho.
Eigen::Matrix3d projection_t(const TargetState& target);

// SPEB = tr((T^T J_p T)^{-1}) with J_p over (rho, phi, y). The coplanar
// overload works on the 2x2 (rho, phi) block.
double speb(const Eigen::Matrix3d& position_fim, const Eigen::Matrix3d& t);
double speb_coplanar(const Eigen::Matrix2d& position_fim,
                     const TargetState& target);

// Diagonal weights of (T T^T)^{-1} = diag(1, rho^2, 1): for a diagonal J_p,
// SPEB = sum_i weight_i / J_ii exactly.
Eigen::Vector3d speb_weights(const TargetState& target);

// Full numeric pipeline: FIM -> nuisance elimination -> CRBs -> SPEB.
FimReport fim_report(const Eigen::MatrixXcd& r_x, const Scenario& sc,
                     const AntennaLayout& layout_t,
                     const AntennaLayout& layout_r, const TargetState& target);

} // namespace nfisac

#endif
