#include "nfisac/beamformer.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace nfisac {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXcd span_basis(const std::vector<Eigen::VectorXcd>& vectors,
                            const Eigen::VectorXcd& extra) {
  int n = static_cast<int>(extra.size());
  Eigen::MatrixXcd raw(n, vectors.size() + 1);
  for (size_t i = 0; i < vectors.size(); ++i) raw.col(i) = vectors[i];
  raw.col(vectors.size()) = extra;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(raw);
  qr.setThreshold(1e-12);
  int rank = static_cast<int>(qr.rank());
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, rank);
  return q;
}

} // namespace

double surrogate_objective(const DecompositionSet& dec,
                           const Eigen::VectorXcd& w) {
  double of = 0.0;
  for (size_t i = 0; i < dec.vectors.size(); ++i) {
    double denom = std::norm(dec.vectors[i].dot(w));
    if (!(denom > 0.0)) return kInf;
    of += dec.weights[static_cast<int>(i)] / denom;
  }
  return of;
}

DecompositionSet decomposition_vectors(const AntennaLayout& layout_t,
                                       const AntennaLayout& layout_r,
                                       const TargetState& target,
                                       const Scenario& sc) {
  sc.check();
  Eigen::VectorXcd a_t = steering(layout_t, target, sc.wavelength);
  Eigen::VectorXcd a_r = steering(layout_r, target, sc.wavelength);
  std::vector<Eigen::VectorXcd> udot =
      steering_derivatives(layout_r, target, sc.wavelength);
  std::vector<Eigen::VectorXcd> vdot =
      steering_derivatives(layout_t, target, sc.wavelength);
  double n_t = layout_t.count();
  double c0 = 2.0 * std::norm(sc.alpha_s) * sc.snapshots / sc.noise_power;
  double k2 = std::pow(2 * kPi / sc.wavelength, 2);

  // exact on-steer information per coordinate: ||Adot_i a_t||^2 / N_t^2 makes
  // sqrt(q_i) a_t reproduce Tr(R_x Adot_i^H Adot_i) for w along a_t
  auto rayleigh = [&](size_t i) {
    Eigen::VectorXcd col = n_t * udot[i] + a_r * vdot[i].dot(a_t);
    return col.squaredNorm() / (n_t * n_t);
  };

  DecompositionSet dec;
  if (target.y == 0.0) {
    AuxCoplanar aux_t = aux_coplanar(layout_t, target);
    AuxCoplanar aux_r = aux_coplanar(layout_r, target);
    Eigen::VectorXcd h_s =
        std::sqrt(aux_r.v1.squaredNorm()) * a_t +
        (aux_t.v1.array() * a_t.array()).matrix();
    dec.vectors = {h_s, std::sqrt(rayleigh(0)) * a_t};
    dec.weights.resize(2);
    dec.weights << target.rho * target.rho * n_t / (k2 * c0), 1.0 / c0;
  } else {
    AuxNonCoplanar aux_t = aux_noncoplanar(layout_t, target);
    AuxNonCoplanar aux_r = aux_noncoplanar(layout_r, target);
    Eigen::VectorXcd h_s =
        std::sqrt(aux_r.v22.squaredNorm()) * a_t +
        (aux_t.v22.array() * a_t.array()).matrix();
    dec.vectors = {h_s, std::sqrt(rayleigh(0)) * a_t,
                   std::sqrt(rayleigh(2)) * a_t};
    dec.weights.resize(3);
    double r_r = layout_r.radius;
    dec.weights << n_t / (k2 * r_r * r_r * c0), 1.0 / c0, 1.0 / c0;
  }
  return dec;
}

Eigen::VectorXcd closed_form_beamformer(const Eigen::VectorXcd& h_s,
                                        const Eigen::VectorXcd& h_c,
                                        const Scenario& sc) {
  sc.check();
  double p = sc.p_max;
  double req = sc.gamma_min * sc.noise_power;
  double hc2 = h_c.squaredNorm();
  if (req > p * hc2 * (1 + 1e-12))
    throw infeasible_error(
        "closed_form_beamformer: SINR threshold exceeds full-power capacity");
  Eigen::VectorXcd w_s = std::sqrt(p) / h_s.norm() * h_s;
  if (std::norm(h_c.dot(w_s)) >= req) return w_s; // sensing-dominant branch
  // both constraints active: w = x1*u_s + x2*a_s in span{h_s, h_c}
  Eigen::VectorXcd a_s = h_c / std::sqrt(hc2);
  cxd overlap = a_s.dot(h_s); // a_s^H h_s
  Eigen::VectorXcd residual = h_s - overlap * a_s;
  double res_norm = residual.norm();
  double x2_mag = std::sqrt(req / hc2);
  double x1_mag = std::sqrt(std::max(p - x2_mag * x2_mag, 0.0));
  cxd x2 = overlap != cxd(0, 0)
               ? x2_mag * overlap / std::abs(overlap)
               : cxd(x2_mag, 0.0);
  if (res_norm > 1e-14 * h_s.norm()) {
    Eigen::VectorXcd u_s = residual / res_norm;
    return x1_mag * u_s + x2 * a_s; // h_s^H u_s = res_norm > 0, already aligned
  }
  return x2 * a_s;
}

// --- convex subproblem (log-barrier interior point in the span) --------------

namespace {

struct Reduced {
  Eigen::MatrixXcd basis;              // N x k, orthonormal
  std::vector<Eigen::VectorXcd> g;     // reduced a_i
  Eigen::VectorXcd g_c;                // reduced h_c
};

Reduced reduce(const DecompositionSet& dec, const Eigen::VectorXcd& h_c) {
  Reduced r;
  r.basis = span_basis(dec.vectors, h_c);
  r.g.reserve(dec.vectors.size());
  for (const Eigen::VectorXcd& a : dec.vectors)
    r.g.push_back(r.basis.adjoint() * a);
  r.g_c = r.basis.adjoint() * h_c;
  return r;
}

// real parametrization x = [Re z; Im z]; Re(q^H z) = rvec(q) . x
Eigen::VectorXd rvec(const Eigen::VectorXcd& q) {
  int k = static_cast<int>(q.size());
  Eigen::VectorXd r(2 * k);
  r.head(k) = q.real();
  r.tail(k) = q.imag();
  return r;
}

struct BarrierProblem {
  std::vector<Eigen::VectorXd> r;  // bracket gradient directions (2x inside b)
  std::vector<double> d;           // bracket offsets
  Eigen::VectorXd r_c;             // half-space normal
  double s0 = 0.0;
  double p = 0.0;
  bool has_sinr = false;
  double scale = 1.0; // objective normalization so t*f is O(t)

  double bracket(int i, const Eigen::VectorXd& x) const {
    return 2.0 * r[i].dot(x) - d[i];
  }
  bool in_domain(const Eigen::VectorXd& x) const {
    if (!(p - x.squaredNorm() > 0.0)) return false;
    if (has_sinr && !(r_c.dot(x) - s0 > 0.0)) return false;
    for (size_t i = 0; i < r.size(); ++i)
      if (!(bracket(static_cast<int>(i), x) > 0.0)) return false;
    return true;
  }
  double objective(const Eigen::VectorXd& x) const {
    double f = 0.0;
    for (size_t i = 0; i < r.size(); ++i)
      f += 1.0 / bracket(static_cast<int>(i), x);
    return f;
  }
};

Eigen::VectorXd barrier_minimize(const BarrierProblem& prob,
                                 Eigen::VectorXd x) {
  int dim = static_cast<int>(x.size());
  int n_constraints = prob.has_sinr ? 2 : 1;
  double t = 1.0;
  const double mu = 10.0, gap_tol = 1e-8;
  while (static_cast<double>(n_constraints) / t >= gap_tol) {
    for (int newton = 0; newton < 80; ++newton) {
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(dim);
      Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
      for (size_t i = 0; i < prob.r.size(); ++i) {
        double b = prob.bracket(static_cast<int>(i), x);
        grad -= t * prob.scale * 2.0 / (b * b) * prob.r[i];
        hess += t * prob.scale * 8.0 / (b * b * b) * prob.r[i] *
                prob.r[i].transpose();
      }
      double slack = prob.p - x.squaredNorm();
      grad += 2.0 / slack * x;
      hess += 2.0 / slack * Eigen::MatrixXd::Identity(dim, dim) +
              4.0 / (slack * slack) * x * x.transpose();
      if (prob.has_sinr) {
        double g = prob.r_c.dot(x) - prob.s0;
        grad -= prob.r_c / g;
        hess += prob.r_c * prob.r_c.transpose() / (g * g);
      }
      Eigen::VectorXd step = hess.ldlt().solve(-grad);
      double decrement = -grad.dot(step);
      if (!(decrement > 2e-12)) break;
      // backtracking: stay in the domain, then Armijo on the barrier value
      auto value = [&](const Eigen::VectorXd& xx) {
        double v = t * prob.scale * prob.objective(xx);
        v -= std::log(prob.p - xx.squaredNorm());
        if (prob.has_sinr) v -= std::log(prob.r_c.dot(xx) - prob.s0);
        return v;
      };
      double v0 = value(x);
      double alpha = 1.0;
      for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
        Eigen::VectorXd xn = x + alpha * step;
        if (!prob.in_domain(xn)) continue;
        if (value(xn) <= v0 - 0.25 * alpha * decrement) {
          x = xn;
          break;
        }
      }
    }
    t *= mu;
  }
  return x;
}

} // namespace

Eigen::VectorXcd subproblem_solve(const DecompositionSet& dec,
                                  const std::vector<cxd>& y_fixed,
                                  const Eigen::VectorXcd& h_c,
                                  const Scenario& sc,
                                  const Eigen::VectorXcd& w_start) {
  sc.check();
  if (y_fixed.size() != dec.vectors.size())
    throw config_error("subproblem_solve: one auxiliary per decomposition vector");
  Reduced red = reduce(dec, h_c);
  int k = static_cast<int>(red.basis.cols());
  BarrierProblem prob;
  prob.p = sc.p_max;
  double req = sc.gamma_min * sc.noise_power;
  prob.has_sinr = req > 0.0;
  prob.s0 = prob.has_sinr ? std::sqrt(req) : 0.0;
  prob.r_c = rvec(red.g_c);
  for (size_t i = 0; i < dec.vectors.size(); ++i) {
    prob.r.push_back(rvec(y_fixed[i] * red.g[i]));
    prob.d.push_back(std::norm(y_fixed[i]) * dec.weights[static_cast<int>(i)]);
  }
  Eigen::VectorXcd z0 = red.basis.adjoint() * w_start;
  Eigen::VectorXd x(2 * k);
  x.head(k) = z0.real();
  x.tail(k) = z0.imag();
  if (x.squaredNorm() >= prob.p) x *= std::sqrt(prob.p) / x.norm() * (1 - 1e-9);
  if (!prob.in_domain(x)) {
    // pull toward a strictly feasible anchor along the half-space normal
    Eigen::VectorXd anchor =
        0.9 * std::sqrt(prob.p) / prob.r_c.norm() * prob.r_c;
    bool found = false;
    for (double beta = 0.05; beta <= 1.0; beta += 0.05) {
      Eigen::VectorXd cand = (1 - beta) * x + beta * anchor;
      if (prob.in_domain(cand)) {
        x = cand;
        found = true;
        break;
      }
    }
    if (!found)
      throw infeasible_error("subproblem_solve: no strictly feasible start");
  }
  double f0 = prob.objective(x);
  if (std::isfinite(f0) && f0 > 0.0) prob.scale = 1.0 / f0;
  x = barrier_minimize(prob, x);
  Eigen::VectorXcd z(k);
  z.real() = x.head(k);
  z.imag() = x.tail(k);
  return red.basis * z;
}

// --- brute-force span oracle --------------------------------------------------

OracleResult oracle_search(const DecompositionSet& dec,
                           const Eigen::VectorXcd& h_c, const Scenario& sc,
                           std::uint64_t seed, std::int64_t budget) {
  sc.check();
  Reduced red = reduce(dec, h_c);
  int k = static_cast<int>(red.basis.cols());
  double p = sc.p_max;
  double req = sc.gamma_min * sc.noise_power;
  double s0 = req > 0.0 ? std::sqrt(req) : 0.0;
  double gc_norm = red.g_c.norm();
  if (req > p * gc_norm * gc_norm * (1 + 1e-12))
    throw infeasible_error("oracle_search: SINR threshold infeasible");

  std::int64_t evals = 0;
  auto eval = [&](const Eigen::VectorXcd& z) {
    ++evals;
    double of = 0.0;
    for (size_t i = 0; i < red.g.size(); ++i) {
      double denom = std::norm(red.g[i].dot(z));
      if (!(denom > 0.0)) return kInf;
      of += dec.weights[static_cast<int>(i)] / denom;
    }
    return of;
  };
  auto project = [&](Eigen::VectorXcd z) {
    if (s0 > 0.0) {
      cxd corr = red.g_c.dot(z);
      if (std::abs(corr) > 0.0) z *= std::conj(corr) / std::abs(corr);
    }
    double nrm2 = z.squaredNorm();
    if (nrm2 > p) z *= std::sqrt(p / nrm2) * (1 - 1e-12);
    if (s0 > 0.0) {
      double have = std::real(red.g_c.dot(z));
      double target = s0 * (1 + 1e-12);
      if (have < target) {
        Eigen::VectorXcd z_c = std::sqrt(p) * (1 - 1e-12) / gc_norm * red.g_c;
        double top = std::real(red.g_c.dot(z_c));
        double beta = std::min(1.0, (target - have) / (top - have));
        z = (1 - beta) * z + beta * z_c;
      }
    }
    return z;
  };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> ud(0.3, 1.0);

  Eigen::VectorXcd best;
  double best_of = kInf;
  auto consider = [&](const Eigen::VectorXcd& cand) {
    Eigen::VectorXcd z = project(cand);
    double of = eval(z);
    if (of < best_of) {
      best_of = of;
      best = z;
    }
  };

  // special starts: closed-form solution, pure directions, the comm channel
  try {
    Eigen::VectorXcd w_cf = closed_form_beamformer(dec.vectors[0], h_c, sc);
    consider(red.basis.adjoint() * w_cf);
  } catch (const infeasible_error&) {
  }
  for (const Eigen::VectorXcd& g : red.g)
    if (g.norm() > 0) consider((std::sqrt(p) / g.norm() * g).eval());
  consider((std::sqrt(p) / gc_norm * red.g_c).eval());

  std::int64_t random_budget = budget / 2;
  while (evals < random_budget) {
    Eigen::VectorXcd z(k);
    for (int i = 0; i < k; ++i) z[i] = cxd(nd(rng), nd(rng));
    z *= std::sqrt(p) * ud(rng) / z.norm();
    consider(z);
  }

  // coordinate refinement on the real parametrization of the best point
  Eigen::VectorXd x(2 * k);
  x.head(k) = best.real();
  x.tail(k) = best.imag();
  auto unpack = [&](const Eigen::VectorXd& xx) {
    Eigen::VectorXcd z(k);
    z.real() = xx.head(k);
    z.imag() = xx.tail(k);
    return z;
  };
  double step = 0.25 * std::sqrt(p);
  while (evals < budget && step > 1e-10 * std::sqrt(p)) {
    bool improved = false;
    for (int c = 0; c < 2 * k && evals < budget; ++c) {
      for (double sgn : {1.0, -1.0}) {
        Eigen::VectorXd xn = x;
        xn[c] += sgn * step;
        Eigen::VectorXcd z = project(unpack(xn));
        double of = eval(z);
        if (of < best_of) {
          best_of = of;
          best = z;
          x.head(k) = z.real();
          x.tail(k) = z.imag();
          improved = true;
          break;
        }
      }
    }
    if (!improved) step *= 0.5;
  }

  OracleResult out;
  out.w = red.basis * best;
  out.objective = best_of;
  return out;
}

// --- VQF driver ----------------------------------------------------------------

BeamformerResult vqf_solve(const DecompositionSet& dec,
                           const Eigen::VectorXcd& h_c, const Scenario& sc,
                           const AntennaLayout& layout_t,
                           const AntennaLayout& layout_r,
                           const TargetState& target,
                           const VqfOptions& opts) {
  sc.check();
  double req = sc.gamma_min * sc.noise_power;
  BeamformerResult res;
  Eigen::VectorXcd w = closed_form_beamformer(dec.vectors[0], h_c, sc);
  // keep h_c^H w real nonnegative so the SINR set stays a half-space
  cxd corr = h_c.dot(w);
  if (std::abs(corr) > 0.0) w *= std::conj(corr) / std::abs(corr);
  res.objective_trace.push_back(surrogate_objective(dec, w));

  bool dominant =
      std::norm(h_c.dot((std::sqrt(sc.p_max) / dec.vectors[0].norm() *
                         dec.vectors[0])
                            .eval())) >= req;
  if (dominant && dec.vectors.size() == 1) {
    // single ratio: the closed form is already the exact optimizer
    res.termination = Termination::SensingDominant;
  } else {
    res.termination = Termination::MaxIters;
    for (int it = 1; it <= opts.max_iters; ++it) {
      std::vector<cxd> y(dec.vectors.size());
      for (size_t i = 0; i < dec.vectors.size(); ++i) {
        y[i] = dec.vectors[i].dot(w) / dec.weights[static_cast<int>(i)];
        if (y[i] == cxd(0, 0)) y[i] = cxd(1e-30, 0);
      }
      w = subproblem_solve(dec, y, h_c, sc, w);
      double of = surrogate_objective(dec, w);
      double prev = res.objective_trace.back();
      res.objective_trace.push_back(of);
      res.iterations = it;
      if (std::abs(of - prev) <= opts.eps_con * std::abs(prev)) {
        res.termination = Termination::Converged;
        break;
      }
    }
  }
  res.w = w;
  res.sinr_slack = std::norm(h_c.dot(w)) - req;
  res.power_slack = sc.p_max - w.squaredNorm();
  Eigen::MatrixXcd r_x = w * w.adjoint();
  res.speb_full = fim_report(r_x, sc, layout_t, layout_r, target).speb;
  return res;
}

FimReport isotropic_baseline(const Scenario& sc, const AntennaLayout& layout_t,
                             const AntennaLayout& layout_r,
                             const TargetState& target) {
  sc.check();
  int n_t = layout_t.count();
  Eigen::MatrixXcd r_x =
      sc.p_max / n_t * Eigen::MatrixXcd::Identity(n_t, n_t);
  return fim_report(r_x, sc, layout_t, layout_r, target);
}

} // namespace nfisac
