#pragma once

// The reduced Duhamel operator on spherical means and the solvers built on it.
//
// For (r, t) the backward region is
//   R(r,t) = {(lambda, s) : t-r <= s+lambda <= t+r, s-lambda <= t-r, s >= 0}
// and, with Phi = r u~, the nonlinear part of the solution is
//   Phi_L(r,t) = iint_R (lambda/2) (1+s)^{-(p-1)} w~(lambda, s) dlambda ds.
// In alpha = s+lambda, beta = s-lambda the region is axis aligned and the
// Jacobian is 1/2. Odd reflection across r = 0 turns the integral into the
// full-line one, for which R(N) = R(E) + R(W) - R(S) + diamond(N); the lattice
// operator sums the diamonds with the trapezoid rule on their four corners.

#include "lifespan/char_field.hpp"
#include "lifespan/norms.hpp"
#include "lifespan/radial.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lifespan {

struct CharRegion {
  double r = 0;
  double t = 0;

  double alpha_min() const { return t - r; }
  double alpha_max() const { return t + r; }
  double beta_min(double alpha) const { return -alpha; }
  double beta_max(double alpha) const { return std::min(t - r, alpha); }
  bool empty() const { return r == 0 || t == 0; }

  bool contains(double lambda, double s) const {
    return t - r <= s + lambda && s + lambda <= t + r && s - lambda <= t - r && s >= 0;
  }
  static double lambda_of(double alpha, double beta) { return 0.5 * (alpha - beta); }
  static double s_of(double alpha, double beta) { return 0.5 * (alpha + beta); }
};

/// (1+s)^{-(p-1)}, the time weight of the transformed nonlinearity.
inline double damping_weight(double s, double p) { return std::pow(1.0 + s, -(p - 1.0)); }

/// r |u~|^p stored as a field, the source form consumed by duhamel_apply.
CharField power_source(const CharField& field, double p);
/// r |u0~|^{p-nu} |u~|^nu.
CharField mixed_source(const CharField& u0, const CharField& u, double p, double nu);

/// r (L w)~ on the source's lattice. `source` stores r w~.
CharField duhamel_apply(const CharField& source, double p);
/// As above; throws std::invalid_argument unless `output` equals the source lattice.
CharField duhamel_apply(const CharField& source, double p, const Lattice& output);

enum class SolveStatus { Converged, IterationBudgetExhausted, BlowupDetected };
inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "Converged";
    case SolveStatus::IterationBudgetExhausted: return "IterationBudgetExhausted";
    case SolveStatus::BlowupDetected: return "BlowupDetected";
  }
  return "?";
}

struct SolveResult {
  CharField field;
  SolveStatus status = SolveStatus::Converged;
  std::optional<double> blowup_time;
  // Picard: weighted distance of successive iterates. March: max |u~| per level.
  std::vector<double> iterates_norm_history;
  std::optional<double> contraction_ratio;
  int iterations = 0;
  double max_abs_u = 0;
};

inline constexpr int kDefaultIterationBudget = 50;
inline constexpr double kDefaultPicardTol = 1e-10;
inline constexpr double kDefaultBlowupThreshold = 1e6;

/// u_{n+1} = u^0 + L[|u_n|^p] on levels t <= T of u0's lattice, stopped when
/// the weighted distance of successive iterates drops below tol.
SolveResult picard_solve(const CharField& u0, double p, double T,
                         int n_max = kDefaultIterationBudget, double tol = kDefaultPicardTol);

/// U_{n+1} = L[|u^0 + U_n|^p] from U_0 = 0; the returned field is u^0 + U.
SolveResult perturbed_picard_solve(const CharField& u0, double p, double T,
                                   int n_max = kDefaultIterationBudget,
                                   double tol = kDefaultPicardTol);

struct MarchOptions {
  double blowup_threshold = kDefaultBlowupThreshold;
  bool keep_field = true;
};

/// Level-by-level solve of the lattice equation Phi = Phi^0 + L_h[r|Phi/r|^p]:
/// each node depends on two earlier levels and on itself, and the scalar
/// equation for itself is solved by Newton. Stops at the first level where
/// max |u~| exceeds the threshold or the nodal equation has no root.
SolveResult causal_march(const CharField& u0, double p, double t_max,
                         double blowup_threshold = kDefaultBlowupThreshold);
/// Same, with Phi^0 evaluated on the fly so no full field is stored unless
/// requested.
SolveResult causal_march(const LinearSolution& lin, const Lattice& lattice, double p,
                         const MarchOptions& options = {});

/// Root of x = a + kappa |x|^p continuous in kappa at kappa = 0, if any.
std::optional<double> solve_node(double a, double kappa, double p);

struct BlowupProblem {
  double p = 1.5;
  double epsilon = 0.5;
  RadialProfile f;
  RadialProfile g;
  double h = 1.0 / 32;
  double t_max = 64;
  double blowup_threshold = kDefaultBlowupThreshold;
};

struct BlowupEstimate {
  double T_num = 0;
  double uncertainty = 0;
  std::vector<double> steps;           // h, h/2, ...
  std::vector<std::optional<double>> level_times;
};

class NoBlowupWithinHorizon : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Marches at h, h/2, ..., h/2^{levels-1} and extrapolates the threshold
/// crossing time assuming second-order convergence. The uncertainty is the
/// spread of the two finest crossing times (h itself for a single level).
/// Throws NoBlowupWithinHorizon, without running the finer levels, when the
/// coarsest march reaches t_max.
BlowupEstimate estimate_blowup_time(const BlowupProblem& problem, int levels);

}  // namespace lifespan
