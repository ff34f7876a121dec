#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "nfisac/beamformer.hpp"

using namespace nfisac;
using Eigen::VectorXcd;

namespace {
constexpr double kPi = 3.14159265358979323846;
const double kLambda = kSpeedOfLight / 28e9;

Scenario scenario(double gamma_min) {
  Scenario sc;
  sc.wavelength = kLambda;
  sc.noise_power = 5.0118723362727e-15; // -113 dBm
  sc.snapshots = 16;
  sc.alpha_s = cxd(1.0, 0.0);
  sc.p_max = 0.31622776601683794; // 25 dBm
  sc.gamma_min = gamma_min;
  return sc;
}

double sinr_num(const VectorXcd& h_c, const VectorXcd& w) {
  return std::norm(h_c.dot(w));
}
} // namespace

TEST_CASE("surrogate objective arithmetic") {
  DecompositionSet dec;
  dec.vectors = {VectorXcd::Constant(2, cxd(1, 0)),
                 VectorXcd::Constant(2, cxd(0, 1))};
  dec.weights = Eigen::Vector2d(3.0, 5.0);
  VectorXcd w(2);
  w << cxd(1, 0), cxd(0, 0);
  // |a_1^H w|^2 = 1, |a_2^H w|^2 = 1 -> OF = 3 + 5
  CHECK(surrogate_objective(dec, w) == doctest::Approx(8.0).epsilon(1e-12));
}

TEST_CASE("decomposition reconstructs the diagonal-FIM SPEB on-steer") {
  AntennaLayout l = uca_layout(64, 0.25);
  for (TargetState t : {TargetState::coplanar(0.6, kPi / 6),
                        TargetState::noncoplanar(1.0, kPi / 6, 0.5)}) {
    Scenario sc = scenario(0.0);
    DecompositionSet dec = decomposition_vectors(l, l, t, sc);
    REQUIRE(dec.vectors.size() == (t.y == 0.0 ? 2u : 3u));
    VectorXcd at = steering(l, t, sc.wavelength);
    VectorXcd w = std::sqrt(sc.p_max / 64.0) * at;
    double of = surrogate_objective(dec, w);
    // reference: diagonal entries of the numeric FIM position block
    Eigen::MatrixXd full = fim_numeric(w, sc, l, l, t);
    Eigen::Vector3d wt = speb_weights(t);
    double ref = wt[0] / full(0, 0) + wt[1] / full(1, 1);
    if (t.y != 0.0) ref += wt[2] / full(2, 2);
    CHECK(of == doctest::Approx(ref).epsilon(0.05));
  }
}

TEST_CASE("closed-form beamformer: sensing-dominant branch") {
  AntennaLayout l = uca_layout(32, 0.25);
  TargetState t = TargetState::coplanar(0.6, kPi / 6);
  TargetState user = TargetState::coplanar(1.5, -kPi / 4);
  Scenario sc = scenario(1e-6); // threshold far below what any beam delivers
  DecompositionSet dec = decomposition_vectors(l, l, t, sc);
  VectorXcd h_s = dec.vectors[0];
  VectorXcd h_c = comm_channel(l, user, sc.wavelength);
  VectorXcd w = closed_form_beamformer(h_s, h_c, sc);
  VectorXcd want = std::sqrt(sc.p_max) / h_s.norm() * h_s;
  // equal up to a global phase
  cxd phase = want.dot(w) / std::abs(want.dot(w));
  CHECK((w - phase * want).norm() < 1e-9 * want.norm());
  CHECK(w.squaredNorm() == doctest::Approx(sc.p_max).epsilon(1e-10));
}

TEST_CASE("closed-form beamformer: active-SINR branch hits both constraints") {
  AntennaLayout l = uca_layout(32, 0.25);
  TargetState t = TargetState::coplanar(0.6, kPi / 6);
  TargetState user = TargetState::coplanar(1.5, -kPi / 4);
  Scenario sc = scenario(0.0);
  DecompositionSet dec = decomposition_vectors(l, l, t, sc);
  VectorXcd h_s = dec.vectors[0];
  VectorXcd h_c = comm_channel(l, user, sc.wavelength);
  // pick a threshold strictly between the dominant-branch SINR and the maximum
  double boundary = sc.p_max * std::norm(h_c.dot(h_s)) /
                    (h_s.squaredNorm() * sc.noise_power);
  double top = sc.p_max * h_c.squaredNorm() / sc.noise_power;
  sc.gamma_min = 0.5 * (boundary + top);
  VectorXcd w = closed_form_beamformer(h_s, h_c, sc);
  CHECK(w.squaredNorm() == doctest::Approx(sc.p_max).epsilon(1e-9));
  CHECK(sinr_num(h_c, w) ==
        doctest::Approx(sc.gamma_min * sc.noise_power).epsilon(1e-9));
  // and it beats simply transmitting along h_c
  VectorXcd wc = std::sqrt(sc.p_max) / h_c.norm() * h_c;
  CHECK(std::norm(h_s.dot(w)) > std::norm(h_s.dot(wc)));
}

TEST_CASE("closed-form beamformer is continuous across the branch boundary") {
  AntennaLayout l = uca_layout(32, 0.25);
  TargetState t = TargetState::coplanar(0.6, kPi / 6);
  TargetState user = TargetState::coplanar(1.5, -kPi / 4);
  Scenario sc = scenario(0.0);
  DecompositionSet dec = decomposition_vectors(l, l, t, sc);
  VectorXcd h_s = dec.vectors[0];
  VectorXcd h_c = comm_channel(l, user, sc.wavelength);
  double boundary = sc.p_max * std::norm(h_c.dot(h_s)) /
                    (h_s.squaredNorm() * sc.noise_power);
  Scenario lo = sc, hi = sc;
  lo.gamma_min = boundary * (1 - 1e-8);
  hi.gamma_min = boundary * (1 + 1e-8);
  VectorXcd wl = closed_form_beamformer(h_s, h_c, lo);
  VectorXcd wh = closed_form_beamformer(h_s, h_c, hi);
  cxd phase = wl.dot(wh);
  phase /= std::abs(phase);
  CHECK((wl * phase - wh).norm() < 1e-6 * wl.norm());
}

TEST_CASE("closed-form beamformer infeasibility") {
  AntennaLayout l = uca_layout(32, 0.25);
  TargetState t = TargetState::coplanar(0.6, kPi / 6);
  Scenario sc = scenario(0.0);
  DecompositionSet dec = decomposition_vectors(l, l, t, sc);
  VectorXcd h_c = comm_channel(l, TargetState::coplanar(1.5, 0.2), sc.wavelength);
  sc.gamma_min = 1.01 * sc.p_max * h_c.squaredNorm() / sc.noise_power;
  CHECK_THROWS_AS(closed_form_beamformer(dec.vectors[0], h_c, sc),
                  infeasible_error);
}

TEST_CASE("closed-form matches the brute-force oracle on the single ratio") {
  AntennaLayout l = uca_layout(32, 0.25);
  TargetState t = TargetState::coplanar(0.6, kPi / 6);
  TargetState user = TargetState::coplanar(1.5, -kPi / 4);
  Scenario sc = scenario(0.0);
  DecompositionSet full = decomposition_vectors(l, l, t, sc);
  VectorXcd h_c = comm_channel(l, user, sc.wavelength);
  double boundary = sc.p_max * std::norm(h_c.dot(full.vectors[0])) /
                    (full.vectors[0].squaredNorm() * sc.noise_power);
  double top = sc.p_max * h_c.squaredNorm() / sc.noise_power;
  for (double g : {0.25 * boundary, 0.5 * (boundary + top)}) {
    sc.gamma_min = g;
    DecompositionSet one;
    one.vectors = {full.vectors[0]};
    one.weights = Eigen::VectorXd::Constant(1, 1.0);
    VectorXcd w = closed_form_beamformer(full.vectors[0], h_c, sc);
    OracleResult best = oracle_search(one, h_c, sc, /*seed=*/42);
    double of_closed = surrogate_objective(one, w);
    CHECK(of_closed <= best.objective * (1 + 1e-9)); // closed form is optimal
    CHECK(best.objective == doctest::Approx(of_closed).epsilon(1e-4));
  }
}

TEST_CASE("oracle_search is deterministic and respects the constraints") {
  AntennaLayout l = uca_layout(32, 0.25);
  TargetState t = TargetState::coplanar(0.6, kPi / 6);
  Scenario sc = scenario(0.0);
  DecompositionSet dec = decomposition_vectors(l, l, t, sc);
  VectorXcd h_c = comm_channel(l, TargetState::coplanar(1.5, 0.4), sc.wavelength);
  sc.gamma_min = 0.3 * sc.p_max * h_c.squaredNorm() / sc.noise_power;
  OracleResult a = oracle_search(dec, h_c, sc, 7);
  OracleResult b = oracle_search(dec, h_c, sc, 7);
  CHECK((a.w - b.w).norm() == 0.0);
  CHECK(a.objective == b.objective);
  OracleResult c = oracle_search(dec, h_c, sc, 1234);
  CHECK(c.objective == doctest::Approx(a.objective).epsilon(1e-4));
  CHECK(a.w.squaredNorm() <= sc.p_max * (1 + 1e-9));
  CHECK(sinr_num(h_c, a.w) >=
        sc.gamma_min * sc.noise_power * (1 - 1e-6));
}

TEST_CASE("subproblem_solve matches a frozen independent-solver optimum") {
  // deterministic 6-element instance; reference solved offline to high
  // precision with an SQP solver over R^12
  int n = 6;
  VectorXcd a1(n), a2(n), h_c(n);
  for (int m = 0; m < n; ++m) {
    a1[m] = std::exp(cxd(0, 0.7 * m + 0.2 * m * m));
    a2[m] = 0.9 * std::exp(cxd(0, 0.3 * m));
    h_c[m] = 0.8 * std::exp(cxd(0, 1.1 * m - 0.15 * m * m));
  }
  DecompositionSet dec;
  dec.vectors = {a1, a2};
  dec.weights = Eigen::Vector2d(1.0, 2.5);
  std::vector<cxd> y = {cxd(0.4, 0.1), cxd(0.25, -0.05)};
  Scenario sc;
  sc.wavelength = 1.0;
  sc.noise_power = 1.0;
  sc.snapshots = 1;
  sc.p_max = 2.0;
  sc.gamma_min = 0.5; // s0 = sqrt(0.5)
  VectorXcd w0 = std::sqrt(sc.p_max) / h_c.norm() * h_c;
  VectorXcd w = subproblem_solve(dec, y, h_c, sc, w0);
  auto bracket_obj = [&](const VectorXcd& v) {
    double s = 0.0;
    for (int i = 0; i < 2; ++i) {
      double b = 2 * std::real(std::conj(y[i]) * dec.vectors[i].dot(v)) -
                 std::norm(y[i]) * dec.weights[i];
      REQUIRE(b > 0.0);
      s += 1.0 / b;
    }
    return s;
  };
  CHECK(bracket_obj(w) == doctest::Approx(1.4317225627787573).epsilon(1e-5));
  CHECK(w.squaredNorm() <= sc.p_max * (1 + 1e-7));
  CHECK(std::real(h_c.dot(w)) >= std::sqrt(0.5) * (1 - 1e-7));
  // the optimum lies in span{a_1, a_2, h_c}
  Eigen::MatrixXcd basis(n, 3);
  basis.col(0) = a1;
  basis.col(1) = a2;
  basis.col(2) = h_c;
  Eigen::MatrixXcd q = Eigen::HouseholderQR<Eigen::MatrixXcd>(basis)
                           .householderQ() *
                       Eigen::MatrixXcd::Identity(n, 3);
  VectorXcd proj = q * (q.adjoint() * w);
  CHECK((w - proj).norm() < 1e-7 * w.norm());
}

TEST_CASE("vqf: monotone trace, feasible output, bounded oracle gap") {
  AntennaLayout l = uca_layout(32, 0.25);
  Scenario sc0 = scenario(0.0);
  TargetState user = TargetState::coplanar(1.5, -kPi / 4);
  VectorXcd h_c = comm_channel(l, user, sc0.wavelength);
  for (TargetState t : {TargetState::coplanar(0.6, kPi / 6),
                        TargetState::noncoplanar(0.9, kPi / 6, 0.4)}) {
    Scenario sc = sc0;
    sc.gamma_min = 0.4 * sc.p_max * h_c.squaredNorm() / sc.noise_power;
    DecompositionSet dec = decomposition_vectors(l, l, t, sc);
    BeamformerResult res = vqf_solve(dec, h_c, sc, l, l, t);
    REQUIRE(res.objective_trace.size() >= 1);
    for (size_t k = 1; k < res.objective_trace.size(); ++k)
      CHECK(res.objective_trace[k] <=
            res.objective_trace[k - 1] * (1 + 1e-9));
    CHECK(res.iterations <= 100);
    CHECK(res.w.squaredNorm() <= sc.p_max * (1 + 1e-9));
    CHECK(sinr_num(h_c, res.w) >=
          sc.gamma_min * sc.noise_power * (1 - 1e-5));
    CHECK(res.sinr_slack >= -1e-5 * sc.gamma_min * sc.noise_power);
    CHECK(res.power_slack >= -1e-9 * sc.p_max);
    OracleResult best = oracle_search(dec, h_c, sc, 99);
    double vqf_of = res.objective_trace.back();
    CHECK(vqf_of <= best.objective * 1.15);
  }
}

TEST_CASE("vqf objective is invariant to a global phase on h_c") {
  AntennaLayout l = uca_layout(32, 0.25);
  Scenario sc = scenario(0.0);
  TargetState t = TargetState::coplanar(0.6, kPi / 6);
  VectorXcd h_c = comm_channel(l, TargetState::coplanar(1.4, 0.9), sc.wavelength);
  sc.gamma_min = 0.4 * sc.p_max * h_c.squaredNorm() / sc.noise_power;
  DecompositionSet dec = decomposition_vectors(l, l, t, sc);
  BeamformerResult a = vqf_solve(dec, h_c, sc, l, l, t);
  BeamformerResult b =
      vqf_solve(dec, (std::exp(cxd(0, 1.234)) * h_c).eval(), sc, l, l, t);
  CHECK(a.objective_trace.back() ==
        doctest::Approx(b.objective_trace.back()).epsilon(1e-8));
}

TEST_CASE("vqf with a trivially low SINR threshold reports sensing dominance") {
  AntennaLayout l = uca_layout(32, 0.25);
  Scenario sc = scenario(1e-9);
  TargetState t = TargetState::coplanar(0.6, kPi / 6);
  VectorXcd h_c = comm_channel(l, TargetState::coplanar(1.4, 0.9), sc.wavelength);
  DecompositionSet one;
  one.vectors = {decomposition_vectors(l, l, t, sc).vectors[0]};
  one.weights = Eigen::VectorXd::Constant(1, 1.0);
  BeamformerResult res = vqf_solve(one, h_c, sc, l, l, t);
  CHECK(res.termination == Termination::SensingDominant);
  // the closed form is already optimal for the single ratio
  VectorXcd w = closed_form_beamformer(one.vectors[0], h_c, sc);
  CHECK(res.objective_trace.back() ==
        doctest::Approx(surrogate_objective(one, w)).epsilon(1e-6));
}
