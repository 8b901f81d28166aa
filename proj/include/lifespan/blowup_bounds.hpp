#pragma once

// Blow-up side: slicing sets, the first-step lower bound, the iteration
// sequences and their envelopes, the J functionals and the upper lifespan
// bound.

#include "lifespan/char_field.hpp"
#include "lifespan/exponents.hpp"
#include "lifespan/radial.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lifespan {

inline constexpr int kMaxSequenceLength = 60;

struct SlicingLevels {
  std::vector<double> l;  // l_j = 2 - 2^{-j}
  double rho = 1;
  int j_max = 0;

  /// l_j rho <= t - r <= r.
  bool in_sigma(int j, double r, double t) const;
  /// 2 rho <= t - r <= r.
  bool in_sigma_infinity(double r, double t) const;
};

SlicingLevels make_slicing_levels(double rho, int j_max);

struct FirstStepConstants {
  double M0 = 0;
  double a = 0;
  double b = 0;
  double M = 0;
};

/// [a, b] is the widest run of positive H-table nodes with H <= min H / 2;
/// M0 = -max_{[a,b]} H / (2 eps). Throws std::invalid_argument if g == 0 or
/// eps == 0, and std::domain_error if no such run exists.
FirstStepConstants first_step_constants(const RadialProfile& g, double epsilon, double p,
                                        double step);
/// Same with a quadrature step of rho / 512.
FirstStepConstants first_step_constants(const RadialProfile& g, double epsilon, double p);

enum class SequenceRegime { Subcritical, Critical };

/// One row j. Subcritical: (a_j, b_j, log D_j). Critical: a holds d_j, b the
/// constant power 2p-3, log_coef is log E_j.
struct SequenceRow {
  int j = 0;
  double a = 0, b = 0, log_coef = 0;
  double closed_a = 0, closed_b = 0, closed_log_coef = 0;
};

struct SequenceTable {
  SequenceRegime regime = SequenceRegime::Subcritical;
  double p = 0;
  double epsilon = 0;
  double M = 0;
  bool log_domain = true;
  std::vector<SequenceRow> rows;
};

/// Throws std::domain_error for supercritical p, std::invalid_argument for
/// j_max outside [0, 60] or non-positive M, eps.
SequenceTable build_sequences(double p, double epsilon, double M, int j_max);

/// Partial sums of sum_{k>=1} (log F - 2k log p) / p^k (subcritical) or
/// sum_{k>=1} (log G - (k-1) log(2p)) / p^k (critical), stopped once the
/// increment falls below 1e-14 in magnitude.
double convergence_constant_q(double p, SequenceRegime regime);
double q_partial_sum(double p, SequenceRegime regime, int terms);

struct EnvelopeValue {
  double value = 0;
  double log_value = -std::numeric_limits<double>::infinity();
  bool overflow = false;
  bool applicable = false;  // node inside the set the envelope lives on
};

/// The j-th pointwise lower bound; zero outside Sigma_0 (subcritical) or
/// Sigma_j (critical).
EnvelopeValue envelope(int j, double r, double t, const SequenceTable& table,
                       const SlicingLevels& levels);

/// Subcritical: log{eps^p M e^q (t-r-rho)^{(p+1)/(p-1)} / (t-r)^{2p}} for
/// t - r > rho. Critical: log(eps^p (B^{-1} log((t-r)/(2 rho)))^{1/(p-1)})
/// for t - r > 2 rho. -inf outside.
double J_functional(double r, double t, double p, double epsilon, double M, double q,
                    double rho);

/// log B: subcritical B = (2^{2(p^2-2p-1)/(p-1)} M e^q)^{-2(p-1)/gamma},
/// critical B = (M e^q)^{-(p-1)}.
double log_B_constant(double p, double M, double q);

/// Largest eps admitted by B eps^{-2p(p-1)/gamma} >= 8 rho (subcritical) or
/// B eps^{-p(p-1)} >= log(4 rho) (critical).
double upper_epsilon0(double p, double M, double q, double rho);

/// B eps^{-2p(p-1)/gamma} or exp(2 B eps^{-p(p-1)}); +inf on overflow.
/// Throws std::domain_error above upper_epsilon0.
double upper_bound_lifespan(double epsilon, double p, double M, double q, double rho);
/// Same formula without the threshold.
double upper_bound_formula(double epsilon, double p, double M, double q);

struct DominationLevel {
  int j = 0;
  long nodes_checked = 0;
  long violations = 0;
  long waived = 0;
  double min_ratio = std::numeric_limits<double>::infinity();  // u~ / envelope
  bool underflow = false;  // every applicable envelope value is below 1e-300
  std::optional<std::pair<double, double>> first_violation;  // (r, t)
};

struct DominationReport {
  std::vector<DominationLevel> levels;
  bool pass = true;
  double rel_tolerance = 0;
};

inline constexpr double kDominationTolerance = 1e-3;

/// u~ >= M eps^p / ((t+r)(t-r)^{2p-3}) at every lattice node of Sigma_0; a
/// shortfall of at most rel_tol * (|u~| + bound) is waived.
DominationLevel first_step_check(const CharField& field, double p, double epsilon, double M,
                                 double rel_tol = kDominationTolerance);

/// u~ >= envelope(j) for j = 0..j_max at every applicable node.
DominationReport domination_check(const CharField& field, const SequenceTable& table,
                                  const SlicingLevels& levels, int j_max,
                                  double rel_tol = kDominationTolerance);

/// Header j,a_j,b_j,logD_j,closed_a,closed_b,closed_logD (subcritical) or
/// j,d_j,logE_j,closed_d,closed_logE (critical).
void write_sequence_csv(std::ostream& os, const SequenceTable& table);
void write_domination_csv(std::ostream& os, const DominationReport& report);

}  // namespace lifespan
