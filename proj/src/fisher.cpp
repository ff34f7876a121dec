#include "nfisac/fisher.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace nfisac {

namespace {

constexpr double kPi = 3.14159265358979323846;

void require_uca(const AntennaLayout& layout, const char* who) {
  if (layout.kind != ArrayKind::UCA)
    throw invalid_geometry(std::string(who) + ": closed forms hold for UCA layouts only");
}

// Structured derivative factors: alpha-dot_i = kernel_i (.) alpha, with the
// (complex) scale carried separately so both sides of A can share the kernels.
struct DerivKernels {
  std::vector<Eigen::VectorXd> kernels; // real kernels per coordinate
  std::vector<cxd> scales;              // j-scales per coordinate
};

DerivKernels deriv_kernels(const AntennaLayout& layout, const TargetState& t,
                           double wavelength) {
  double k = 2 * kPi / wavelength;
  DerivKernels d;
  if (t.y == 0.0) {
    AuxCoplanar aux = aux_coplanar(layout, t);
    d.kernels = {aux.v2, aux.v1};
    d.scales = {cxd(0, -k), cxd(0, k)};
  } else {
    AuxNonCoplanar aux = aux_noncoplanar(layout, t);
    d.kernels = {aux.v21, aux.v22, aux.v23};
    d.scales = {cxd(0, k), cxd(0, -k * layout.radius * t.rho), cxd(0, k * t.y)};
  }
  return d;
}

} // namespace

CoplanarNorms norms_coplanar_direct(const AntennaLayout& layout,
                                    const TargetState& target) {
  AuxCoplanar aux = aux_coplanar(layout, target);
  CoplanarNorms n;
  n.sum_v2 = aux.v2.sum();
  n.sumsq_v2 = aux.v2.squaredNorm();
  n.sumsq_v2_alt = n.sumsq_v2;
  n.sumsq_v1 = aux.v1.squaredNorm();
  return n;
}

CoplanarNorms norms_coplanar(const AntennaLayout& layout,
                             const TargetState& target) {
  require_uca(layout, "norms_coplanar");
  double big_r = layout.radius;
  double n_el = layout.count();
  double alpha = target.rho / big_r;
  if (std::abs(alpha - 1.0) < 0.02)
    throw pole_error("norms_coplanar: squared-norm identities diverge at rho = R");
  double ups = upsilon(alpha);
  CoplanarNorms n;
  n.sum_v2 = n_el * (ups - 1.0);
  if (alpha < 1.0) {
    n.sumsq_v2 = n_el * (1.5 - 2.0 * ups);
    n.sumsq_v2_alt = 2.0 * target.rho * target.rho * n_el /
                     (big_r * big_r - target.rho * target.rho);
    n.sumsq_v1 = target.rho * target.rho * n_el / 2.0;
  } else {
    n.sumsq_v2 =
        n_el * (2.0 - big_r * big_r / (2.0 * target.rho * target.rho) - 2.0 * ups);
    n.sumsq_v2_alt = 2.0 * big_r * big_r * n_el /
                     (target.rho * target.rho - big_r * big_r);
    n.sumsq_v1 = big_r * big_r * n_el / 2.0;
  }
  return n;
}

NonCoplanarNorms norms_noncoplanar_direct(const AntennaLayout& layout,
                                          const TargetState& target) {
  AuxNonCoplanar aux = aux_noncoplanar(layout, target);
  NonCoplanarNorms n;
  n.sumsq_v22 = aux.v22.squaredNorm();
  n.sum_v23 = aux.v23.sum();
  n.sumsq_v23 = aux.v23.squaredNorm();
  n.sum_v22 = aux.v22.sum();
  n.sum_v21_v22 = (aux.v21.array() * aux.v22.array()).sum();
  n.sum_v22_v23 = (aux.v22.array() * aux.v23.array()).sum();
  n.sum_v21 = aux.v21.sum();
  n.sumsq_v21 = aux.v21.squaredNorm();
  return n;
}

NonCoplanarNorms norms_noncoplanar(const AntennaLayout& layout,
                                   const TargetState& target) {
  require_uca(layout, "norms_noncoplanar");
  // The v21 moments and the cross terms have no closed form; start from the
  // direct sums and overwrite the fields that do.
  NonCoplanarNorms n = norms_noncoplanar_direct(layout, target);
  double big_r = layout.radius, rho = target.rho, y = target.y;
  double n_el = layout.count();
  double g1 = 2.0 * big_r * rho;
  double g2 = y * y + rho * rho + big_r * big_r;
  double root = std::sqrt(g2 * g2 - g1 * g1);
  double r0 = std::hypot(rho, y);
  double kk = elliptic_k(std::sqrt(2.0 * g1 / (g2 + g1)));
  n.sumsq_v22 = n_el / (g1 * g1) * (g2 - root);
  n.sum_v23 = n_el / r0 - 2.0 * n_el * kk / (kPi * std::sqrt(g2 + g1));
  n.sumsq_v23 = n_el * (1.0 / (r0 * r0) + 1.0 / root -
                        4.0 * kk / (kPi * r0 * std::sqrt(g2 + g1)));
  n.sum_v22 = 0.0;
  return n;
}

// --- numeric FIM -------------------------------------------------------------

namespace {

// Rank-two response derivatives: Adot_i = udot_i * a_t^H + a_r * vdot_i^H.
struct ResponseDerivs {
  Eigen::VectorXcd a_t, a_r;
  std::vector<Eigen::VectorXcd> udot; // receive-side derivative columns
  std::vector<Eigen::VectorXcd> vdot; // transmit-side derivative columns
};

ResponseDerivs response_derivs(const Scenario& sc, const AntennaLayout& lt,
                               const AntennaLayout& lr, const TargetState& t) {
  ResponseDerivs r;
  r.a_t = steering(lt, t, sc.wavelength);
  r.a_r = steering(lr, t, sc.wavelength);
  r.udot = steering_derivatives(lr, t, sc.wavelength);
  r.vdot = steering_derivatives(lt, t, sc.wavelength);
  return r;
}

Eigen::MatrixXd assemble_fim(const ResponseDerivs& r, const Scenario& sc,
                             const Eigen::MatrixXcd& r_x) {
  int nc = static_cast<int>(r.udot.size());
  int dim = nc + 2;
  // shared transmit-side quadratic forms with R_x
  Eigen::VectorXcd rx_at = r_x * r.a_t;
  std::vector<Eigen::VectorXcd> rx_v(nc);
  for (int i = 0; i < nc; ++i) rx_v[i] = r_x * r.vdot[i];
  cxd q00 = r.a_t.dot(rx_at); // a_t^H R_x a_t (real for Hermitian R_x)
  double n_r = static_cast<double>(r.a_r.size());

  // Tr(R_x Adot_i^H Adot_j) with Adot_i = udot_i a_t^H + a_r vdot_i^H:
  //   (udot_i^H udot_j) (a_t^H R_x a_t) + (udot_i^H a_r)(vdot_j^H R_x a_t)
  // + (a_r^H udot_j)(a_t^H R_x vdot_i) + N_r (vdot_j^H R_x vdot_i)
  auto tr_ij = [&](int i, int j) -> cxd {
    return r.udot[i].dot(r.udot[j]) * q00 +
           r.udot[i].dot(r.a_r) * r.vdot[j].dot(rx_at) +
           r.a_r.dot(r.udot[j]) * r.a_t.dot(rx_v[i]) +
           n_r * r.vdot[j].dot(rx_v[i]);
  };
  // Tr(R_x Adot_i^H A) with A = a_r a_t^H
  auto tr_i0 = [&](int i) -> cxd {
    return r.udot[i].dot(r.a_r) * q00 + n_r * r.a_t.dot(rx_v[i]);
  };

  double c_amp = 2.0 * sc.snapshots / sc.noise_power;
  double c_pos = c_amp * std::norm(sc.alpha_s);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(dim, dim);
  for (int i = 0; i < nc; ++i)
    for (int k = i; k < nc; ++k)
      j(i, k) = j(k, i) = c_pos * std::real(tr_ij(i, k));
  for (int i = 0; i < nc; ++i) {
    cxd cross = std::conj(sc.alpha_s) * tr_i0(i);
    j(i, nc) = j(nc, i) = c_amp * std::real(cross);
    j(i, nc + 1) = j(nc + 1, i) = -c_amp * std::imag(cross);
  }
  double amp = c_amp * std::real(n_r * q00);
  j(nc, nc) = amp;
  j(nc + 1, nc + 1) = amp;
  return j;
}

} // namespace

Eigen::MatrixXd fim_numeric(const Eigen::MatrixXcd& r_x, const Scenario& sc,
                            const AntennaLayout& layout_t,
                            const AntennaLayout& layout_r,
                            const TargetState& target) {
  sc.check();
  if (r_x.rows() != layout_t.count() || r_x.cols() != layout_t.count())
    throw config_error("fim_numeric: R_x dimensions must match the transmit array");
  return assemble_fim(response_derivs(sc, layout_t, layout_r, target), sc, r_x);
}

Eigen::MatrixXd fim_numeric(const Eigen::VectorXcd& w, const Scenario& sc,
                            const AntennaLayout& layout_t,
                            const AntennaLayout& layout_r,
                            const TargetState& target) {
  if (w.size() != layout_t.count())
    throw config_error("fim_numeric: w length must match the transmit array");
  return fim_numeric(Eigen::MatrixXcd(w * w.adjoint()), sc, layout_t, layout_r,
                     target);
}

Eigen::MatrixXd eliminate_nuisance(const Eigen::MatrixXd& full_fim,
                                   bool* amp_singular) {
  int dim = static_cast<int>(full_fim.rows());
  if (dim < 3 || full_fim.cols() != dim)
    throw config_error("eliminate_nuisance: expected a square FIM with a 2x2 tail");
  int nc = dim - 2;
  Eigen::Matrix2d c = full_fim.bottomRightCorner(2, 2);
  Eigen::MatrixXd b = full_fim.topRightCorner(nc, 2);
  double scale = c.norm();
  bool singular = !(std::abs(c.determinant()) > 1e-14 * scale * scale);
  if (amp_singular) *amp_singular = singular;
  if (singular) {
    // pseudo-inverse of the amplitude block
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(c);
    Eigen::Vector2d inv = es.eigenvalues();
    for (int i = 0; i < 2; ++i)
      inv[i] = std::abs(inv[i]) > 1e-14 * scale ? 1.0 / inv[i] : 0.0;
    Eigen::Matrix2d pinv =
        es.eigenvectors() * inv.asDiagonal() * es.eigenvectors().transpose();
    return full_fim.topLeftCorner(nc, nc) - b * pinv * b.transpose();
  }
  return full_fim.topLeftCorner(nc, nc) - b * c.inverse() * b.transpose();
}

// --- closed-form CRBs ---------------------------------------------------------

namespace {

// Re Tr(R_x M) for M = c2*abar - c1*(abar D + D abar) + c0 * D abar D with
// abar = a_t a_t^H and D = diag(v): the three transmit-side quadratic forms.
double trace_form(const Eigen::MatrixXcd& r_x, const Eigen::VectorXcd& a_t,
                  const Eigen::VectorXd& v, double c2, double c1, double c0) {
  Eigen::VectorXcd va = v.array() * a_t.array();
  Eigen::VectorXcd rx_at = r_x * a_t;
  double q00 = std::real(a_t.dot(rx_at));
  double q01 = std::real(va.dot(rx_at));
  double q11 = std::real(va.dot(r_x * va));
  return c2 * q00 - 2.0 * c1 * q01 + c0 * q11;
}

} // namespace

CoplanarCrb crb_coplanar_closed(const Scenario& sc, const AntennaLayout& layout_t,
                                const AntennaLayout& layout_r,
                                const TargetState& target,
                                const Eigen::MatrixXcd& r_x) {
  sc.check();
  require_uca(layout_r, "crb_coplanar_closed");
  CoplanarNorms nr = norms_coplanar(layout_r, target);
  AuxCoplanar aux_t = aux_coplanar(layout_t, target);
  Eigen::VectorXcd a_t = steering(layout_t, target, sc.wavelength);
  double n_r = layout_r.count();
  double k2 = std::pow(2 * kPi / sc.wavelength, 2);
  double c0 = 2.0 * std::norm(sc.alpha_s) * sc.snapshots / sc.noise_power;
  // signed receive sums: sum v_r1 = 0 on a full ring
  double tr_rho =
      k2 * trace_form(r_x, a_t, aux_t.v2, nr.sumsq_v2, nr.sum_v2, n_r);
  double tr_phi = k2 * trace_form(r_x, a_t, aux_t.v1, nr.sumsq_v1, 0.0, n_r);
  CoplanarCrb out;
  out.fim << c0 * tr_rho, 0.0, 0.0, c0 * tr_phi;
  if (!(tr_rho > 0.0) || !(tr_phi > 0.0))
    throw singular_error("crb_coplanar_closed: vanishing information");
  out.crb_rho = 1.0 / (c0 * tr_rho);
  out.crb_phi = 1.0 / (c0 * tr_phi);
  return out;
}

NonCoplanarCrb crb_noncoplanar_closed(const Scenario& sc,
                                      const AntennaLayout& layout_t,
                                      const AntennaLayout& layout_r,
                                      const TargetState& target,
                                      const Eigen::MatrixXcd& r_x) {
  sc.check();
  require_uca(layout_r, "crb_noncoplanar_closed");
  NonCoplanarNorms nr = norms_noncoplanar(layout_r, target);
  AuxNonCoplanar aux_t = aux_noncoplanar(layout_t, target);
  Eigen::VectorXcd a_t = steering(layout_t, target, sc.wavelength);
  double n_r = layout_r.count();
  double k2 = std::pow(2 * kPi / sc.wavelength, 2);
  double c0 = 2.0 * std::norm(sc.alpha_s) * sc.snapshots / sc.noise_power;
  double rho = target.rho, y = target.y;
  double r_t = layout_t.radius, r_r = layout_r.radius;

  double tr_rho =
      k2 * trace_form(r_x, a_t, aux_t.v21, nr.sumsq_v21, nr.sum_v21, n_r);
  // phi kernels carry R*rho on each side
  double tr_phi = k2 * rho * rho *
                  trace_form(r_x, a_t, (r_t * aux_t.v22).eval(),
                             r_r * r_r * nr.sumsq_v22, 0.0, n_r);
  double tr_y = k2 * y * y *
                trace_form(r_x, a_t, aux_t.v23, nr.sumsq_v23, nr.sum_v23, n_r);
  // rho-y coupling: Re Tr(R_x Adot_rho^H Adot_y)
  Eigen::VectorXcd v21a = aux_t.v21.array() * a_t.array();
  Eigen::VectorXcd v23a = aux_t.v23.array() * a_t.array();
  Eigen::VectorXcd rx_at = r_x * a_t;
  AuxNonCoplanar aux_r = aux_noncoplanar(layout_r, target);
  double sum_r2123 = (aux_r.v21.array() * aux_r.v23.array()).sum();
  double q00 = std::real(a_t.dot(rx_at));
  double q01_23 = std::real(v23a.dot(rx_at));
  double q01_21 = std::real(v21a.dot(rx_at));
  double q_2123 = std::real(v21a.dot(r_x * v23a));
  double j_rho_y = c0 * k2 * y *
                   (sum_r2123 * q00 - nr.sum_v21 * q01_23 -
                    nr.sum_v23 * q01_21 + n_r * q_2123);

  NonCoplanarCrb out;
  out.fim.setZero();
  out.fim(0, 0) = c0 * tr_rho;
  out.fim(1, 1) = c0 * tr_phi;
  out.fim(2, 2) = c0 * tr_y;
  out.fim(0, 2) = out.fim(2, 0) = j_rho_y;
  Eigen::Matrix3d inv = out.fim.inverse();
  if (!(inv(0, 0) > 0.0) || !(inv(1, 1) > 0.0) || !(inv(2, 2) > 0.0))
    throw singular_error("crb_noncoplanar_closed: information matrix not positive");
  out.crb_rho = inv(0, 0);
  out.crb_phi = inv(1, 1);
  out.crb_y = inv(2, 2);
  return out;
}

// --- projection and SPEB --------------------------------------------------------

Eigen::Matrix3d projection_t(const TargetState& target) {
  if (!(target.rho > 0.0))
    throw singular_error("projection_t: undefined at rho = 0");
  double c = std::cos(target.phi), s = std::sin(target.phi);
  Eigen::Matrix3d t;
  t << c, s, 0.0, -s / target.rho, c / target.rho, 0.0, 0.0, 0.0, 1.0;
  return t;
}

double speb(const Eigen::Matrix3d& position_fim, const Eigen::Matrix3d& t) {
  Eigen::Matrix3d ti = t.inverse();
  return (ti * position_fim.inverse() * ti.transpose()).trace();
}

double speb_coplanar(const Eigen::Matrix2d& position_fim,
                     const TargetState& target) {
  if (!(target.rho > 0.0))
    throw singular_error("speb_coplanar: undefined at rho = 0");
  double c = std::cos(target.phi), s = std::sin(target.phi);
  Eigen::Matrix2d ti; // inverse of the 2x2 projection block
  ti << c, -target.rho * s, s, target.rho * c;
  return (ti * position_fim.inverse() * ti.transpose()).trace();
}

Eigen::Vector3d speb_weights(const TargetState& target) {
  return {1.0, target.rho * target.rho, 1.0};
}

FimReport fim_report(const Eigen::MatrixXcd& r_x, const Scenario& sc,
                     const AntennaLayout& layout_t,
                     const AntennaLayout& layout_r, const TargetState& target) {
  FimReport rep;
  rep.full_fim = fim_numeric(r_x, sc, layout_t, layout_r, target);
  rep.position_fim = eliminate_nuisance(rep.full_fim, &rep.amp_block_singular);
  int nc = static_cast<int>(rep.position_fim.rows());
  Eigen::FullPivLU<Eigen::MatrixXd> lu(rep.position_fim);
  rep.singular = !lu.isInvertible();
  if (rep.singular) {
    rep.crbs = Eigen::VectorXd::Constant(nc, std::numeric_limits<double>::infinity());
    rep.speb = std::numeric_limits<double>::infinity();
  } else {
    Eigen::MatrixXd inv = lu.inverse();
    rep.crbs = inv.diagonal();
    if (nc == 2) {
      rep.speb = speb_coplanar(Eigen::Matrix2d(rep.position_fim), target);
    } else {
      rep.speb = speb(Eigen::Matrix3d(rep.position_fim), projection_t(target));
    }
  }
  // closed-form companion when the geometry admits one
  if (layout_r.kind == ArrayKind::UCA) {
    try {
      if (target.y == 0.0) {
        rep.approx_fim =
            crb_coplanar_closed(sc, layout_t, layout_r, target, r_x).fim;
      } else {
        rep.approx_fim =
            crb_noncoplanar_closed(sc, layout_t, layout_r, target, r_x).fim;
      }
    } catch (const std::domain_error&) {
      rep.approx_fim.resize(0, 0); // pole neighborhood: no closed form
    }
  }
  return rep;
}

} // namespace nfisac
