#pragma once

// Lifespan sweeps over eps, the scaling fit, configuration and report files.

#include "lifespan/duhamel.hpp"
#include "lifespan/exponents.hpp"
#include "lifespan/radial.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lifespan {

struct SweepConfig {
  double p = 1.5;
  double rho = 1;
  // Data: f = f_amplitude * bump_k, g = g_amplitude * bump_k on r <= rho.
  double f_amplitude = 0;
  double g_amplitude = 1;
  int bump_k = 4;
  // eps_start * eps_ratio^i for i < eps_count unless eps_list is given.
  double eps_start = 0.5;
  int eps_count = 8;
  double eps_ratio = 0.70710678118654752;
  std::vector<double> eps_list;
  double h_over_rho = 1.0 / 32;
  int levels = 2;
  double blowup_threshold = kDefaultBlowupThreshold;
  double t_max_over_rho = 2000;
  int workers = 1;

  std::vector<double> epsilons() const;
  RadialProfile f() const;
  RadialProfile g() const;
  BlowupProblem problem(double epsilon) const;
};

/// Defaults for a critical-power sweep: 8 points from 1.2 down to 0.7.
SweepConfig critical_sweep_config();

/// Flat `key = value` lines, `#` comments. Unknown keys throw
/// std::invalid_argument.
SweepConfig parse_sweep_config(std::istream& in, SweepConfig base = {});
SweepConfig load_sweep_config(const std::filesystem::path& path, SweepConfig base = {});
void apply_override(SweepConfig& cfg, const std::string& key, const std::string& value);

/// Throws std::invalid_argument unless eps is strictly decreasing and
/// positive, with at least 4 values. Returns warnings.
std::vector<std::string> validate(const SweepConfig& cfg);

struct SweepRow {
  double epsilon = 0;
  double T = 0;
  double uncertainty = 0;
  bool censored = false;
};

/// One estimate_blowup_time per eps on a pool of cfg.workers threads; rows
/// come back in eps order. Throws std::runtime_error if every row is censored.
std::vector<SweepRow> lifespan_sweep(const SweepConfig& cfg);

enum class Verdict { Consistent, Inconsistent, Inconclusive };
const char* to_string(Verdict v);

struct LifespanFit {
  std::vector<SweepRow> rows;
  Regime regime = Regime::Subcritical;
  double p = 0;
  double fitted_slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double slope_stderr = std::numeric_limits<double>::quiet_NaN();
  double theory_slope = 0;
  double tolerance = 0;  // relative
  int used_rows = 0;
  int censored_rows = 0;
  int excluded_rows = 0;  // uncensored but outside the fit's domain (log T <= 0)
  Verdict verdict = Verdict::Inconclusive;
};

inline constexpr double kSubcriticalFitTolerance = 0.15;
inline constexpr double kCriticalFitTolerance = 0.25;

/// log T (subcritical) or log log T (critical) against log eps, weighted by
/// the propagated uncertainties. Fewer than 4 usable rows, or more than half
/// censored, gives Inconclusive.
LifespanFit fit_scaling(const std::vector<SweepRow>& rows, double p);

struct SweepPredictions {
  std::vector<std::optional<double>> T_low;
  std::vector<std::optional<double>> T_up;
  std::string note;
};

/// T_low from the measured contraction certificate and T_up from the
/// first-step constant and q, each where its eps threshold admits the row.
SweepPredictions predict_bounds(const SweepConfig& cfg, const std::vector<SweepRow>& rows);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows);
void write_fit_csv(std::ostream& os, const LifespanFit& fit);
void write_summary(std::ostream& os, const SweepConfig& cfg, const LifespanFit& fit,
                   const SweepPredictions& pred);

/// sweep.csv, fit.csv and summary.txt in `dir`. Throws std::runtime_error
/// naming the file on I/O failure.
void write_report(const std::filesystem::path& dir, const SweepConfig& cfg,
                  const LifespanFit& fit, const SweepPredictions& pred);

/// Parses a sweep.csv back into rows.
std::vector<SweepRow> read_sweep_csv(std::istream& in);

}  // namespace lifespan
