#pragma once

// Weighted sup norms, the growth factor D(T), empirical checks of the a-priori
// estimates, and the lower lifespan bound assembled from measured constants.

#include "lifespan/char_field.hpp"
#include "lifespan/exponents.hpp"

#include <limits>
#include <string>
#include <vector>

namespace lifespan {

struct WeightSpec {
  double p = 2;
  double rho = 1;
  double q = 1;
  double q_bar = 0;
  bool special_log_case = false;  // exactly p == 3/2
};

WeightSpec make_weight_spec(double p, double rho);

/// Power form rho^{-2(p-1)} (t+r+2rho)^q (t-r+2rho)^{q_bar}; at p == 3/2 the
/// log form rho^{-1} (t+r+2rho) / log(2(t+r+2rho)/(t-r+2rho)).
double weight(double r, double t, const WeightSpec& spec);

inline constexpr double kAllLevels = std::numeric_limits<double>::infinity();

/// sup over nodes with t <= T of w(r,t) |u~(r,t)|. Throws on non-finite data.
double weighted_norm(const CharField& field, const WeightSpec& spec, double T = kAllLevels);
double weighted_distance(const CharField& a, const CharField& b, const WeightSpec& spec,
                         double T = kAllLevels);

/// sup of rho^{-1} (t+r+2rho) |u~|, the norm used for the free solution.
double zero_norm(const CharField& field, double rho, double T = kAllLevels);

/// Power ((2T+3rho)/rho)^{gamma(p,5)/2} below p_S(5), log((T+2rho)/rho) at
/// it, 1 above.
double growth_factor_D(double T, double p, double rho);

enum class LemmaId { AprioriL, CrossTerm };
inline const char* to_string(LemmaId id) {
  return id == LemmaId::AprioriL ? "apriori" : "crossterm";
}

/// Spread factor applied to the largest observed ratio.
inline constexpr double kConstantMargin = 1.25;
/// Largest admissible least-squares slope of log(ratio) against log(T).
inline constexpr double kBoundedSlope = 0.1;

struct EstimateReport {
  LemmaId lemma_id = LemmaId::AprioriL;
  double p = 0;
  double rho = 1;
  double nu = 0;
  int samples = 0;               // samples that entered (zero fields are skipped)
  double max_ratio = 0;          // best constant over samples and horizons
  double empirical_constant = 0; // max_ratio * kConstantMargin
  double D_of_T_used = 0;        // D-factor at the largest horizon
  std::vector<double> horizons;
  std::vector<double> ratio_by_T;  // max over samples, per horizon
  double slope = 0;                // of log(ratio_by_T) against log(T)
  bool pass = false;               // slope <= kBoundedSlope
  std::string worst_sample;
};

/// ||L[|u|^p]||_T / (rho^2 ||u||_T^p D(T)) per sample and horizon. Samples
/// must cover the largest horizon and be supported in r <= t + rho.
EstimateReport verify_apriori(const std::vector<CharField>& samples, double p, double rho,
                              const std::vector<double>& horizons);

/// ||L[|u0|^{p-nu} |u|^nu]|| against rho^2 ||u0||_0^{p-nu} ||u||^nu times
/// D(T)^0, D(T)^{1/p} or D(T)^{(p-1)/(p+1)} for nu = 0, 1, p-1.
EstimateReport verify_crossterm(const CharField& u0, const std::vector<CharField>& samples,
                                double nu, double p, double rho,
                                const std::vector<double>& horizons);

/// The field 1/w on r <= t + rho: the unit-norm sample that maximizes
/// ||L[|u|^p]|| among ||u|| <= 1, since L has a nonnegative kernel.
CharField extremal_sample(const Lattice& lattice, const WeightSpec& spec);

struct SampleBattery {
  std::vector<CharField> fields;
  std::vector<std::string> labels;
  std::vector<double> epsilons;
};

/// Free solutions for eps in {0.05, 0.1, 0.2} and bumps k in {3, 4, 6} on a
/// lattice covering T = 32 rho.
SampleBattery standard_battery(double rho, double h_over_rho);

struct ContractionCertificate {
  double C0 = 0, C1 = 0, C2 = 0, C3 = 0;
  double M0_const = 0;
  double epsilon0 = 0;
  double T_low = 0;  // at epsilon0
};

/// Assembles C3 and M0 from measured C0, C1, C2 and fixes epsilon0.
ContractionCertificate assemble_certificate(double C0, double C1, double C2, double p,
                                            double rho);

/// Runs the battery for p at rho and returns the certificate.
ContractionCertificate measure_certificate(double p, double rho, double h_over_rho = 1.0 / 8);

/// T with C3 eps^{p(p-1)} equal to (4T/rho)^{-gamma/2} (subcritical) or
/// (log(2T/rho))^{-1} (critical). Throws for eps > cert.epsilon0.
double lower_bound_lifespan(double epsilon, const ContractionCertificate& cert, double p,
                            double rho);

/// Same formula without the epsilon0 gate.
double lower_bound_formula(double epsilon, double C3, double p, double rho);

/// Least-squares slope of y on x.
double ls_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace lifespan
