#pragma once

// Critical exponents of the damped semilinear wave problem and the
// exponent-valued functions of p built from them.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <stdexcept>
#include <string>

namespace lifespan {

enum class Regime { Subcritical, Critical, Supercritical };

/// |p - p_S(5)| at or below this counts as the critical power.
inline constexpr double kCriticalTolerance = 1e-9;

/// Thrown where a formula is evaluated exactly at its pole.
class SingularError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Subcritical: return "Subcritical";
    case Regime::Critical: return "Critical";
    case Regime::Supercritical: return "Supercritical";
  }
  return "?";
}

/// gamma(p, n) = 2 + (n+1) p - (n-1) p^2.
template <std::floating_point Scalar>
Scalar gamma(Scalar p, int n) {
  if (!(p > Scalar(1))) throw std::domain_error("gamma: requires p > 1");
  if (n < 2) throw std::domain_error("gamma: requires n >= 2");
  return Scalar(2) + Scalar(n + 1) * p - Scalar(n - 1) * p * p;
}

/// Positive root of gamma(., n).
template <std::floating_point Scalar = double>
Scalar strauss_exponent(int n) {
  if (n < 2) throw std::domain_error("strauss_exponent: requires n >= 2");
  const Scalar nn = Scalar(n);
  return (nn + 1 + std::sqrt(nn * nn + 10 * nn - 7)) / (2 * (nn - 1));
}

template <std::floating_point Scalar = double>
Scalar fujita_exponent(int n) {
  if (n < 1) throw std::domain_error("fujita_exponent: requires n >= 1");
  return Scalar(1) + Scalar(2) / Scalar(n);
}

template <std::floating_point Scalar>
struct WeightExponents {
  Scalar q;
  Scalar q_bar;
};

/// q = max{2(p-1), 1}, q_bar = max{0, 2p-3}.
template <std::floating_point Scalar>
WeightExponents<Scalar> weight_exponents(Scalar p) {
  if (!(p > Scalar(1))) throw std::domain_error("weight_exponents: requires p > 1");
  return {std::max(Scalar(2) * (p - 1), Scalar(1)), std::max(Scalar(0), Scalar(2) * p - 3)};
}

template <std::floating_point Scalar>
Regime classify(Scalar p) {
  if (!(p > Scalar(1))) throw std::domain_error("classify: requires p > 1");
  const Scalar ps = strauss_exponent<Scalar>(5);
  if (std::abs(p - ps) <= Scalar(kCriticalTolerance)) return Regime::Critical;
  return p < ps ? Regime::Subcritical : Regime::Supercritical;
}

/// 2p(p-1)/gamma(p,5), the power of 1/eps in the subcritical lifespan.
template <std::floating_point Scalar>
Scalar lifespan_exponent(Scalar p) {
  switch (classify(p)) {
    case Regime::Critical:
      throw SingularError("lifespan_exponent: gamma(p,5) vanishes at p_S(5)");
    case Regime::Supercritical:
      throw std::domain_error("lifespan_exponent: requires p < p_S(5)");
    case Regime::Subcritical: break;
  }
  return Scalar(2) * p * (p - 1) / gamma(p, 5);
}

/// Regularity order m(p): 1 below p = 2, 2 from there on.
template <std::floating_point Scalar>
int regularity_order(Scalar p) {
  return p < Scalar(2) ? 1 : 2;
}

struct ExponentReport {
  double p = 0;
  int n = 3;
  double gamma = 0;
  double strauss = 0;
  double fujita = 0;
  double q = 0;
  double q_bar = 0;
  int m = 1;
  // Raw 2p(p-1)/gamma(p,5): +inf at the critical power, negative above it.
  double lifespan_exponent = 0;
  Regime regime = Regime::Subcritical;
};

/// Everything the CLI prints for one p. gamma/strauss use dimension n; the
/// regime and lifespan exponent always refer to the shifted dimension 5.
inline ExponentReport exponent_report(double p, int n = 3) {
  ExponentReport rep;
  rep.p = p;
  rep.n = n;
  rep.gamma = gamma(p, n);
  rep.strauss = strauss_exponent(n);
  rep.fujita = fujita_exponent(n);
  const auto we = weight_exponents(p);
  rep.q = we.q;
  rep.q_bar = we.q_bar;
  rep.m = regularity_order(p);
  rep.regime = classify(p);
  rep.lifespan_exponent = rep.regime == Regime::Critical
                              ? std::numeric_limits<double>::infinity()
                              : 2.0 * p * (p - 1) / gamma(p, 5);
  return rep;
}

}  // namespace lifespan
