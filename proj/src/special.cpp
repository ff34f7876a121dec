#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "nfisac/fisher.hpp"

namespace nfisac {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

double upsilon(double alpha) {
  if (alpha < 0.0) throw std::domain_error("upsilon: alpha must be >= 0");
  if (alpha == 0.0) return 0.0;
  auto integrand = [alpha](double x) {
    double c = std::cos(x);
    double denom2 = 1.0 - 2.0 * alpha * c + alpha * alpha;
    if (denom2 <= 0.0) return 0.0; // removable 0/0 point at alpha = 1, x = 0
    return (alpha - c) / std::sqrt(denom2);
  };
  double err = 0.0;
  double value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, 2 * kPi, /*max_depth=*/15, /*tol=*/1e-12, &err);
  return value / (2 * kPi);
}

double elliptic_k(double k) {
  if (!(k < 1.0) || k < 0.0)
    throw std::domain_error("elliptic_k: modulus must satisfy 0 <= k < 1");
  double a = 1.0, b = std::sqrt(1.0 - k * k);
  while (std::abs(a - b) > 1e-15 * a) {
    double an = 0.5 * (a + b);
    b = std::sqrt(a * b);
    a = an;
  }
  return kPi / (2 * a);
}

} // namespace nfisac
