#include "lifespan/fd_oracle.hpp"

#include "lifespan/duhamel.hpp"

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace lifespan {

FDGrid make_fd_grid(double dr, double dt, double t_max, double rho, std::optional<double> r_max) {
  if (!(dr > 0 && dt > 0 && t_max >= 0 && rho > 0))
    throw std::invalid_argument("make_fd_grid: need dr, dt, rho > 0 and t_max >= 0");
  if (dt > kCflLimit * dr * (1 + 1e-12))
    throw std::invalid_argument("make_fd_grid: CFL violated, dt > 0.9 dr");
  const double rm = r_max.value_or(t_max + rho + 4 * dr);
  if (rm < t_max + rho + dr)
    throw std::invalid_argument("make_fd_grid: r_max does not cover the light cone");
  FDGrid g;
  g.dr = dr;
  g.dt = dt;
  g.t_max = t_max;
  g.r_max = rm;
  g.nr = static_cast<int>(std::ceil(rm / dr));
  g.nt = static_cast<int>(std::llround(t_max / dt)) + 1;
  return g;
}

namespace {

// (1/r) d^2(r v)/dr^2 with v_{-1} = v_0 and v_{nr} = 0.
void laplacian(const Eigen::ArrayXd& v, const Eigen::ArrayXd& r, double dr, Eigen::ArrayXd& out) {
  const Eigen::Index n = v.size();
  const double inv = 1.0 / (dr * dr);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double w0 = r(i) * v(i);
    const double wm = i == 0 ? -w0 : r(i - 1) * v(i - 1);
    const double wp = i + 1 < n ? r(i + 1) * v(i + 1) : 0.0;
    out(i) = (wp - 2 * w0 + wm) * inv / r(i);
  }
}

}  // namespace

FDResult fd_solve(const ModelParams& mp, const RadialProfile& f, const RadialProfile& g,
                  const FDGrid& grid, const FDOptions& opt) {
  if (grid.dt > kCflLimit * grid.dr * (1 + 1e-12))
    throw std::invalid_argument("fd_solve: CFL violated");
  if (opt.output_stride < 1) throw std::invalid_argument("fd_solve: output_stride < 1");
  const int nr = grid.nr;
  const double dt = grid.dt, p = mp.p;
  Eigen::ArrayXd r(nr);
  for (int i = 0; i < nr; ++i) r(i) = grid.r(i);

  FDResult res;
  res.grid = grid;
  res.params = mp;
  res.output_stride = opt.output_stride;
  const int stored = (grid.nt - 1) / opt.output_stride + 1;
  res.v = FieldArray::Zero(stored, nr);

  auto rhs_extra = [&](const Eigen::ArrayXd& v, double t, Eigen::ArrayXd& acc) {
    if (opt.nonlinear) acc += v.abs().pow(p);
    if (opt.source)
      for (int i = 0; i < nr; ++i) acc(i) += opt.source(r(i), t);
  };
  auto damping = [&](double t) { return mp.mu * std::pow(1.0 + t, -mp.beta); };

  Eigen::ArrayXd prev(nr), cur(nr), next(nr), vt0(nr), lap(nr);
  for (int i = 0; i < nr; ++i) {
    cur(i) = mp.epsilon * f(r(i));
    vt0(i) = mp.epsilon * g(r(i));
  }
  res.v.row(0) = cur.transpose();
  res.times.push_back(0.0);

  int last_stored = 0;
  double prev_umax = cur.abs().maxCoeff();
  auto check = [&](int n, const Eigen::ArrayXd& v) {
    const double t = grid.t(n);
    const double umax = (1 + t) * v.abs().maxCoeff();
    if (!v.allFinite() || !std::isfinite(umax)) {
      res.finite = false;
      res.blowup_time = t;
      return true;
    }
    if (umax > opt.blowup_threshold) {
      double tb = t;
      if (prev_umax > 0 && prev_umax < opt.blowup_threshold)
        tb = grid.t(n - 1) + dt * (std::log(opt.blowup_threshold) - std::log(prev_umax)) /
                                 (std::log(umax) - std::log(prev_umax));
      res.blowup_time = tb;
      return true;
    }
    prev_umax = umax;
    if (n % opt.output_stride == 0) {
      last_stored = n / opt.output_stride;
      res.v.row(last_stored) = v.transpose();
      res.times.push_back(t);
    }
    return false;
  };

  if (grid.nt > 1) {
    // Taylor start with v_tt(0) taken from the equation.
    laplacian(cur, r, grid.dr, lap);
    Eigen::ArrayXd vtt = lap - damping(0.0) * vt0;
    rhs_extra(cur, 0.0, vtt);
    next = cur + dt * vt0 + 0.5 * dt * dt * vtt;
    prev = cur;
    cur = next;
    bool stop = check(1, cur);
    for (int n = 1; !stop && n + 1 < grid.nt; ++n) {
      const double t = grid.t(n);
      const double c = 0.5 * dt * damping(t);
      laplacian(cur, r, grid.dr, lap);
      Eigen::ArrayXd force = lap;
      rhs_extra(cur, t, force);
      next = (2 * cur - (1 - c) * prev + dt * dt * force) / (1 + c);
      prev = cur;
      cur = next;
      stop = check(n + 1, cur);
    }
  }
  res.v.conservativeResize(last_stored + 1, Eigen::NoChange);
  return res;
}

TransformReport transform_compare(const FDResult& fd, const CharField& u) {
  if (fd.params.mu != 2.0 || fd.params.beta != 1.0)
    throw std::invalid_argument("transform_compare: requires mu = 2, beta = 1");
  const Lattice& lat = u.lattice();
  const double h = lat.h;
  const double stored_dt = fd.grid.dt * fd.output_stride;
  if (std::abs(fd.grid.dr - h) > 1e-12 * h || std::abs(stored_dt - h) > 1e-12 * h)
    throw std::invalid_argument("transform_compare: grids share no common nodes");
  TransformReport rep;
  const int nt = std::min(static_cast<int>(fd.v.rows()), lat.nt);
  const int nr = std::min(fd.grid.nr, lat.nr);
  double sq = 0;
  for (int j = 0; j < nt; ++j) {
    const double scale = 1 + lat.t(j);
    for (int i = 0; i < nr; ++i) {
      const double uu = u.u(j, i);
      const double d = std::abs(scale * fd.v(j, i) - uu);
      rep.max_disc = std::max(rep.max_disc, d);
      rep.max_abs_u = std::max(rep.max_abs_u, std::abs(uu));
      sq += d * d;
      ++rep.nodes;
    }
  }
  rep.l2_disc = std::sqrt(sq * h * h);
  return rep;
}

std::vector<RefinementRow> refinement_study(const ModelParams& mp, const RadialProfile& f,
                                            const RadialProfile& g, double t_max,
                                            const std::vector<double>& dr_list) {
  std::vector<RefinementRow> rows;
  for (double dr : dr_list) {
    const Lattice lat = make_lattice(dr, t_max, mp.rho);
    const LinearSolution lin(f, g, mp.epsilon, h_table_step(dr, mp.rho));
    MarchOptions mo;
    mo.blowup_threshold = std::numeric_limits<double>::infinity();
    const SolveResult sol = causal_march(lin, lat, mp.p, mo);

    const FDGrid grid = make_fd_grid(dr, 0.5 * dr, t_max, mp.rho);
    FDOptions fo;
    fo.output_stride = 2;
    fo.blowup_threshold = std::numeric_limits<double>::infinity();
    const FDResult fd = fd_solve(mp, f, g, grid, fo);
    const TransformReport tr = transform_compare(fd, sol.field);

    RefinementRow row;
    row.dr = dr;
    row.dt = grid.dt;
    row.max_disc = tr.max_disc;
    row.l2_disc = tr.l2_disc;
    row.max_abs_u = tr.max_abs_u;
    row.order_estimate = rows.empty() ? std::numeric_limits<double>::quiet_NaN()
                                      : std::log(rows.back().max_disc / tr.max_disc) /
                                            std::log(rows.back().dr / dr);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace lifespan
