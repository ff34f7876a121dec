#ifndef NFISAC_BEAMFORMER_HPP
#define NFISAC_BEAMFORMER_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "nfisac/fisher.hpp"

namespace nfisac {

enum class Termination { Converged, MaxIters, SensingDominant };

struct BeamformerResult {
  Eigen::VectorXcd w;
  std::vector<double> objective_trace; // surrogate objective per iteration
  int iterations = 0;
  Termination termination = Termination::Converged;
  double sinr_slack = 0.0;  // |h_c^H w|^2 - gamma_min*sigma^2 (linear)
  double power_slack = 0.0; // P_max - ||w||^2 (watts)
  double speb_full = 0.0;   // SPEB recomputed from the full numeric FIM
};

// Ratio denominators |a_i^H w|^2 and their weights: the surrogate objective is
//   OF(w) = sum_i weight_i / |a_i^H w|^2.
struct DecompositionSet {
  std::vector<Eigen::VectorXcd> vectors; // a_i: h_s, alpha_rho (, alpha_y)
  Eigen::VectorXd weights;               // [T~]_(i,i) = (1, rho^2, 1) slots
};

double surrogate_objective(const DecompositionSet& dec,
                           const Eigen::VectorXcd& w);

// h_s = sqrt(||v_{r,1}||_2^2) * alpha_t + alpha_t (.) v_{t,1} (coplanar) and
// the non-coplanar analogue with v_{.,2,2}; the rho/y vectors are Rayleigh
// quotient projections sqrt(a_t^H M a_t / N_t) * alpha_t that absorb the
// trace prefactors, so Tr(R_x Adot^H Adot) ~ |a_i^H w|^2 directly.
DecompositionSet decomposition_vectors(const AntennaLayout& layout_t,
                                       const AntennaLayout& layout_r,
                                       const TargetState& target,
                                       const Scenario& sc);

// Closed-form max |h_s^H w|^2 s.t. SINR and power (two-branch solution).
// Throws infeasible_error when gamma_min*sigma^2 > P_max*||h_c||^2.
Eigen::VectorXcd closed_form_beamformer(const Eigen::VectorXcd& h_s,
                                        const Eigen::VectorXcd& h_c,
                                        const Scenario& sc);

struct VqfOptions {
  double eps_con = 1e-5;
  int max_iters = 100;
};

// Alternating quadratic-transform minimization of the surrogate objective,
// initialized at the closed-form beamformer. Auxiliaries are complex
// (y_i = a_i^H w / T~_ii), which keeps each bracket affine in w; their
// magnitudes reproduce the printed real update.
BeamformerResult vqf_solve(const DecompositionSet& dec,
                           const Eigen::VectorXcd& h_c, const Scenario& sc,
                           const AntennaLayout& layout_t,
                           const AntennaLayout& layout_r,
                           const TargetState& target,
                           const VqfOptions& opts = {});

// Convex subproblem for fixed auxiliaries, solved in the span of
// {decomposition vectors, h_c} (<= 4 complex dims) by a log-barrier interior
// method with Newton steps; duality-gap tolerance 1e-8.
Eigen::VectorXcd subproblem_solve(const DecompositionSet& dec,
                                  const std::vector<cxd>& y_fixed,
                                  const Eigen::VectorXcd& h_c,
                                  const Scenario& sc,
                                  const Eigen::VectorXcd& w_start);

struct OracleResult {
  Eigen::VectorXcd w;
  double objective = 0.0;
};

// Seeded multi-start + coordinate refinement over span coefficients;
// deterministic given the seed. Minimizes the same surrogate objective.
OracleResult oracle_search(const DecompositionSet& dec,
                           const Eigen::VectorXcd& h_c, const Scenario& sc,
                           std::uint64_t seed, std::int64_t budget = 100000);

// CRB/SPEB evaluation at R_x = (P_max/N_t) I via closed forms + numeric FIM.
FimReport isotropic_baseline(const Scenario& sc, const AntennaLayout& layout_t,
                             const AntennaLayout& layout_r,
                             const TargetState& target);

} // namespace nfisac

#endif
