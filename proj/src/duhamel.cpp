#include "lifespan/duhamel.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace lifespan {

namespace {

// Trapezoid weights of the two kinds of cell in (lambda, s) area units: the
// full diamond (area 2h^2, four corners) and the first-step triangle
// (area h^2, three corners).
double diamond_weight(double h) { return 0.5 * h * h; }
double triangle_weight(double h) { return h * h / 3.0; }

// Per-column r^{1-p} and per-level (1+t)^{-(p-1)} / 2.
struct KernelTables {
  Eigen::ArrayXd r_pow;
  Eigen::ArrayXd half_damping;
  KernelTables(const Lattice& lat, double p) : r_pow(lat.nr), half_damping(lat.nt) {
    for (int i = 0; i < lat.nr; ++i) r_pow(i) = std::pow(lat.r(i), 1.0 - p);
    for (int j = 0; j < lat.nt; ++j) half_damping(j) = 0.5 * damping_weight(lat.t(j), p);
  }
};

// Value at column i of a level stored in `row`, with odd reflection at r = 0
// and zero past the stored range.
template <class Row>
double odd_at(const Row& row, int i, int nr) {
  if (i < 0) return -row[0];
  if (i >= nr) return 0.0;
  return row[i];
}

int first_nonfinite_level(const FieldArray& a) {
  for (Eigen::Index j = 0; j < a.rows(); ++j)
    if (!a.row(j).allFinite()) return static_cast<int>(j);
  return -1;
}

}  // namespace

CharField power_source(const CharField& field, double p) {
  const Lattice& lat = field.lattice();
  CharField out(lat);
  for (int i = 0; i < lat.nr; ++i) {
    const double r = lat.r(i);
    out.values().col(i) = r * (field.values().col(i).abs() / r).pow(p);
  }
  return out;
}

CharField mixed_source(const CharField& u0, const CharField& u, double p, double nu) {
  u0.check_same(u);
  const Lattice& lat = u.lattice();
  CharField out(lat);
  for (int i = 0; i < lat.nr; ++i) {
    const double r = lat.r(i);
    const auto a = (u0.values().col(i).abs() / r).pow(p - nu);
    const auto b = nu == 0.0 ? Eigen::ArrayXd::Ones(lat.nt).eval()
                             : (u.values().col(i).abs() / r).pow(nu).eval();
    out.values().col(i) = r * a * b;
  }
  return out;
}

CharField duhamel_apply(const CharField& source, double p) {
  const Lattice& lat = source.lattice();
  const int nt = lat.nt, nr = lat.nr;
  const double h = lat.h;
  CharField out(lat);
  if (nt < 2) return out;

  FieldArray G(nt, nr);
  for (int j = 0; j < nt; ++j)
    G.row(j) = (0.5 * damping_weight(lat.t(j), p)) * source.values().row(j);

  const double wt = triangle_weight(h), wd = diamond_weight(h);
  FieldArray& L = out.values();
  for (int i = 0; i < nr; ++i) {
    const auto g0 = G.row(0);
    L(1, i) = wt * (G(1, i) + odd_at(g0, i + 1, nr) + odd_at(g0, i - 1, nr));
  }
  for (int j = 1; j + 1 < nt; ++j) {
    const auto lj = L.row(j), lm = L.row(j - 1);
    const auto gj = G.row(j), gm = G.row(j - 1);
    for (int i = 0; i < nr; ++i) {
      L(j + 1, i) = odd_at(lj, i + 1, nr) + odd_at(lj, i - 1, nr) - lm[i] +
                    wd * (G(j + 1, i) + odd_at(gj, i + 1, nr) + odd_at(gj, i - 1, nr) + gm[i]);
    }
  }
  return out;
}

CharField duhamel_apply(const CharField& source, double p, const Lattice& output) {
  if (!(source.lattice() == output))
    throw std::invalid_argument("duhamel_apply: source and output lattices differ");
  return duhamel_apply(source, p);
}

namespace {

SolveResult picard_loop(const CharField& base, double p, int n_max, double tol, bool perturbed) {
  const WeightSpec spec = make_weight_spec(p, base.rho());
  SolveResult res;
  CharField iterate = perturbed ? CharField(base.lattice()) : base;
  double prev_dist = -1;
  for (int n = 0; n < n_max; ++n) {
    const CharField& total = iterate;
    CharField next = perturbed ? duhamel_apply(power_source(base + total, p), p)
                               : base + duhamel_apply(power_source(total, p), p);
    res.iterations = n + 1;
    const int bad = first_nonfinite_level(next.values());
    if (bad >= 0) {
      res.status = SolveStatus::BlowupDetected;
      res.blowup_time = base.lattice().t(bad);
      res.field = perturbed ? base + iterate : iterate;
      res.max_abs_u = res.field.max_abs_u();
      return res;
    }
    const double dist = weighted_distance(next, iterate, spec);
    res.iterates_norm_history.push_back(dist);
    if (prev_dist > 0) res.contraction_ratio = dist / prev_dist;
    prev_dist = dist;
    iterate = std::move(next);
    if (dist < tol) {
      res.status = SolveStatus::Converged;
      res.field = perturbed ? base + iterate : iterate;
      res.max_abs_u = res.field.max_abs_u();
      return res;
    }
  }
  res.status = SolveStatus::IterationBudgetExhausted;
  res.field = perturbed ? base + iterate : iterate;
  res.max_abs_u = res.field.max_abs_u();
  return res;
}

}  // namespace

SolveResult picard_solve(const CharField& u0, double p, double T, int n_max, double tol) {
  if (T > u0.t_max() + 1e-12) throw std::invalid_argument("picard_solve: T beyond lattice");
  return picard_loop(u0.truncated(T), p, n_max, tol, false);
}

SolveResult perturbed_picard_solve(const CharField& u0, double p, double T, int n_max,
                                   double tol) {
  if (T > u0.t_max() + 1e-12)
    throw std::invalid_argument("perturbed_picard_solve: T beyond lattice");
  return picard_loop(u0.truncated(T), p, n_max, tol, true);
}

namespace {

double abs_pow(double ax, double e) {
  if (e == 0.5) return std::sqrt(ax);
  if (e == 1.0) return ax;
  return std::pow(ax, e);
}

// Newton for x = a + kappa |x|^p. On success `xp` holds |x|^p.
// f(x) = x - kappa x^p - a is concave for x > 0 and has a root iff
// kappa a^{p-1} <= bound = (p-1)^{p-1} / p^p.
bool node_newton(double a, double kappa, double p, double bound, double& x, double& xp) {
  x = a;
  if (kappa == 0.0 || a == 0.0) {
    xp = abs_pow(std::abs(a), p - 1.0) * std::abs(a);
    return std::isfinite(a);
  }
  if (!std::isfinite(a)) return false;
  for (int k = 0; k < 200; ++k) {
    const double ax = std::abs(x);
    const double pw = abs_pow(ax, p - 1.0);
    if (k == 0 && a > 0 && kappa * pw > bound) return false;
    xp = pw * ax;
    const double f = x - kappa * xp - a;
    if (std::abs(f) <= 4e-16 * (ax + std::abs(a))) return true;
    const double fp = 1.0 - p * kappa * pw * (x < 0 ? -1.0 : 1.0);
    if (!(fp > 0)) break;
    x -= f / fp;
  }
  const double ax = std::abs(x);
  xp = abs_pow(ax, p - 1.0) * ax;
  return true;
}

double existence_bound(double p) { return std::pow(p - 1.0, p - 1.0) / std::pow(p, p); }

}  // namespace

std::optional<double> solve_node(double a, double kappa, double p) {
  double x, xp;
  if (!node_newton(a, kappa, p, existence_bound(p), x, xp)) return std::nullopt;
  return x;
}

namespace {

template <class Phi0>
SolveResult march_core(const Lattice& lat, double p, const Phi0& phi0,
                       const MarchOptions& opt) {
  const int nt = lat.nt, nr = lat.nr;
  const double h = lat.h;
  const KernelTables k(lat, p);
  const double bound = existence_bound(p);
  SolveResult res;
  FieldArray full;
  if (opt.keep_field) full = FieldArray::Zero(nt, nr);

  // Rolling storage of the nonlinear part Lambda and the kernel values G.
  std::array<Eigen::ArrayXd, 3> lam, G;
  for (int s = 0; s < 3; ++s) {
    lam[s] = Eigen::ArrayXd::Zero(nr);
    G[s] = Eigen::ArrayXd::Zero(nr);
  }

  auto level_max = [&](const Eigen::ArrayXd& row_phi, int end) {
    double m = 0;
    for (int i = 0; i < end; ++i) m = std::max(m, std::abs(row_phi[i]) / lat.r(i));
    return m;
  };

  Eigen::ArrayXd row_phi = Eigen::ArrayXd::Zero(nr);
  {
    const int end = lat.support_end(0);
    for (int i = 0; i < end; ++i) {
      row_phi[i] = phi0(0, i);
      const double ax = std::abs(row_phi[i]);
      G[0][i] = k.half_damping(0) * abs_pow(ax, p - 1.0) * ax * k.r_pow(i);
    }
    if (opt.keep_field) full.row(0) = row_phi.transpose();
    const double m = level_max(row_phi, end);
    res.iterates_norm_history.push_back(m);
    res.max_abs_u = m;
  }

  int completed = 1;
  double prev_max = res.max_abs_u;
  for (int n = 1; n < nt; ++n) {
    Eigen::ArrayXd& lam_n = lam[n % 3];
    Eigen::ArrayXd& G_n = G[n % 3];
    const Eigen::ArrayXd& lam_j = lam[(n - 1) % 3];
    const Eigen::ArrayXd& G_j = G[(n - 1) % 3];
    const Eigen::ArrayXd& lam_m = lam[(n + 1) % 3];  // level n-2
    const Eigen::ArrayXd& G_m = G[(n + 1) % 3];
    const bool first = n == 1;
    const double w = first ? triangle_weight(h) : diamond_weight(h);
    const int end = lat.support_end(n);
    bool failed = false;
    for (int i = 0; i < end; ++i) {
      double known;
      if (first) {
        known = w * (odd_at(G_j, i + 1, nr) + odd_at(G_j, i - 1, nr));
      } else {
        known = odd_at(lam_j, i + 1, nr) + odd_at(lam_j, i - 1, nr) - lam_m[i] +
                w * (odd_at(G_j, i + 1, nr) + odd_at(G_j, i - 1, nr) + G_m[i]);
      }
      const double base = phi0(n, i);
      const double kappa = w * k.half_damping(n) * k.r_pow(i);
      double x, xp;
      if (!node_newton(base + known, kappa, p, bound, x, xp)) {
        failed = true;
        break;
      }
      row_phi[i] = x;
      lam_n[i] = x - base;
      G_n[i] = k.half_damping(n) * xp * k.r_pow(i);
    }
    if (failed) {
      res.status = SolveStatus::BlowupDetected;
      res.blowup_time = lat.t(n);
      break;
    }
    completed = n + 1;
    if (opt.keep_field) full.row(n) = row_phi.transpose();
    const double m = level_max(row_phi, end);
    res.iterates_norm_history.push_back(m);
    res.max_abs_u = std::max(res.max_abs_u, m);
    if (!std::isfinite(m) || m > opt.blowup_threshold) {
      res.status = SolveStatus::BlowupDetected;
      double tb = lat.t(n);
      if (std::isfinite(m) && prev_max > 0 && prev_max < opt.blowup_threshold) {
        const double frac = (std::log(opt.blowup_threshold) - std::log(prev_max)) /
                            (std::log(m) - std::log(prev_max));
        tb = lat.t(n - 1) + h * frac;
      }
      res.blowup_time = tb;
      break;
    }
    prev_max = m;
  }
  res.iterations = completed;
  if (opt.keep_field) {
    Lattice out = lat;
    out.nt = completed;
    out.t_max = lat.t(completed - 1);
    res.field = CharField(out, full.topRows(completed));
  }
  return res;
}

}  // namespace

SolveResult causal_march(const CharField& u0, double p, double t_max, double blowup_threshold) {
  if (!(blowup_threshold > 0)) throw std::invalid_argument("causal_march: threshold must be > 0");
  const CharField base = u0.truncated(t_max);
  MarchOptions opt;
  opt.blowup_threshold = blowup_threshold;
  return march_core(base.lattice(), p, [&](int j, int i) { return base.phi(j, i); }, opt);
}

SolveResult causal_march(const LinearSolution& lin, const Lattice& lattice, double p,
                         const MarchOptions& options) {
  if (!(options.blowup_threshold > 0))
    throw std::invalid_argument("causal_march: threshold must be > 0");
  return march_core(
      lattice, p, [&](int j, int i) { return lin.phi(lattice.r(i), lattice.t(j)); }, options);
}

BlowupEstimate estimate_blowup_time(const BlowupProblem& pb, int levels) {
  if (levels < 1) throw std::invalid_argument("estimate_blowup_time: need >= 1 level");
  const double rho = std::max(pb.f.support_radius(), pb.g.support_radius());
  BlowupEstimate est;
  for (int k = 0; k < levels; ++k) {
    const double h = pb.h / std::pow(2.0, k);
    const Lattice lat = make_lattice(h, pb.t_max, rho);
    const LinearSolution lin(pb.f, pb.g, pb.epsilon, h_table_step(h, rho));
    MarchOptions opt;
    opt.blowup_threshold = pb.blowup_threshold;
    opt.keep_field = false;
    const SolveResult res = causal_march(lin, lat, pb.p, opt);
    est.steps.push_back(h);
    est.level_times.push_back(res.status == SolveStatus::BlowupDetected ? res.blowup_time
                                                                         : std::nullopt);
    if (k == 0 && !est.level_times[0])
      throw NoBlowupWithinHorizon("no blow-up before t_max on the coarsest lattice");
  }
  std::vector<double> times;
  for (const auto& t : est.level_times)
    if (t) times.push_back(*t);

  const auto& finest = est.level_times.back();
  if (!finest) {
    // Coarse lattices blew up but the finest did not: the crossing is near the horizon.
    est.T_num = times.back();
    est.uncertainty = std::max(pb.t_max - times.back(), pb.h);
    return est;
  }
  if (times.size() == 1 || !est.level_times[levels - 2]) {
    est.T_num = *finest;
    est.uncertainty = est.steps.back();
    return est;
  }
  const double fine = *finest, coarse = *est.level_times[levels - 2];
  est.T_num = fine + (fine - coarse) / 3.0;
  est.uncertainty = std::abs(fine - coarse);
  return est;
}

}  // namespace lifespan
