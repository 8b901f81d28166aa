#pragma once

// Finite differences for the damped equation
//   v_tt - v_rr - (2/r) v_r + mu (1+t)^{-beta} v_t = |v|^p,
//   v(0) = eps f, v_t(0) = eps g,
// on staggered radial nodes, used to cross-check the integral solver through
// u = (1+t) v.

#include "lifespan/char_field.hpp"
#include "lifespan/radial.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace lifespan {

struct ModelParams {
  double p = 2;
  double mu = 2;
  double beta = 1;
  double epsilon = 0.1;
  double rho = 1;
};

inline constexpr double kCflLimit = 0.9;

struct FDGrid {
  double dr = 0;
  double dt = 0;
  double r_max = 0;
  double t_max = 0;
  int nr = 0;  // r_i = (i + 1/2) dr, i < nr
  int nt = 0;  // t_n = n dt, n < nt

  double r(int i) const { return (i + 0.5) * dr; }
  double t(int n) const { return n * dt; }
};

/// Throws std::invalid_argument if dt > 0.9 dr or r_max < t_max + rho + dr.
/// r_max defaults to t_max + rho + 4 dr.
FDGrid make_fd_grid(double dr, double dt, double t_max, double rho,
                    std::optional<double> r_max = std::nullopt);

struct FDOptions {
  double blowup_threshold = 1e6;  // on (1+t)|v|
  bool nonlinear = true;
  int output_stride = 1;          // store every k-th level
  std::function<double(double r, double t)> source;  // added to the right-hand side
};

struct FDResult {
  FDGrid grid;
  ModelParams params;
  std::vector<double> times;  // stored levels
  FieldArray v;               // rows: stored levels, cols: r nodes
  std::optional<double> blowup_time;
  bool finite = true;
  int output_stride = 1;
};

FDResult fd_solve(const ModelParams& params, const RadialProfile& f, const RadialProfile& g,
                  const FDGrid& grid, const FDOptions& options = {});

struct TransformReport {
  double max_disc = 0;
  double l2_disc = 0;
  double max_abs_u = 0;
  long nodes = 0;
};

/// Discrepancy between (1+t) v and u~ on the nodes both solvers share.
/// Requires mu == 2, beta == 1, equal r steps and a stored FD time step equal
/// to the lattice step; throws std::invalid_argument otherwise.
TransformReport transform_compare(const FDResult& fd, const CharField& u);

struct RefinementRow {
  double dr = 0;
  double dt = 0;
  double max_disc = 0;
  double l2_disc = 0;
  double order_estimate = 0;  // NaN on the first row
  double max_abs_u = 0;
};

/// Integral march at h = dr and FD at (dr, dr/2) for each dr, compared on the
/// common nodes up to t_max.
std::vector<RefinementRow> refinement_study(const ModelParams& params, const RadialProfile& f,
                                            const RadialProfile& g, double t_max,
                                            const std::vector<double>& dr_list);

}  // namespace lifespan
