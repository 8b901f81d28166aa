#include "lifespan/radial.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace lifespan {

RadialProfile make_bump(double rho, double amplitude, int k) {
  if (!(rho >= 1)) throw std::invalid_argument("make_bump: requires rho >= 1");
  if (k < 3) throw std::invalid_argument("make_bump: k < 3 is not C^2 with compact support");
  if (!(amplitude >= 0)) throw std::invalid_argument("make_bump: requires amplitude >= 0");
  auto eval = [rho, amplitude, k](double r) {
    const double x = r / rho;
    return amplitude * std::pow(1.0 - x * x, k);
  };
  return RadialProfile(eval, rho, k, amplitude, "bump");
}

RadialProfile zero_profile(double rho) { return RadialProfile({}, rho, 1000, 0.0, "zero"); }

RadialProfile operator+(const RadialProfile& a, const RadialProfile& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  auto eval = [a, b](double r) { return a(r) + b(r); };
  return RadialProfile(eval, std::max(a.support_radius(), b.support_radius()),
                       std::min(a.smoothness_order(), b.smoothness_order()),
                       a.amplitude() + b.amplitude(), "sum");
}

RadialProfile operator*(double c, const RadialProfile& a) {
  if (a.is_zero() || c == 0.0) return zero_profile(a.support_radius());
  auto eval = [a, c](double r) { return c * a(r); };
  return RadialProfile(eval, a.support_radius(), a.smoothness_order(), c * a.amplitude(),
                       a.kind());
}

double ProfileH::operator()(double s) const {
  if (s >= rho_ || table_.size() == 0) return 0.0;
  if (s <= 0) return table_(0);
  const double x = s / step_;
  const auto k = static_cast<Eigen::Index>(x);
  if (k + 1 >= table_.size()) return table_(table_.size() - 1);
  const double w = x - static_cast<double>(k);
  if (w == 0.0) return table_(k);
  return (1.0 - w) * table_(k) + w * table_(k + 1);
}

ProfileH compute_H(const RadialProfile& g, double epsilon, double step) {
  const double rho = g.support_radius();
  if (!(step > 0)) throw std::invalid_argument("compute_H: step must be positive");
  if (step > rho / 8) throw std::invalid_argument("compute_H: step > rho/8, quadrature too coarse");
  if (!(epsilon >= 0)) throw std::invalid_argument("compute_H: epsilon must be nonnegative");
  const auto n = static_cast<Eigen::Index>(std::ceil(rho / step - 1e-12));
  Eigen::ArrayXd table = Eigen::ArrayXd::Zero(n + 1);
  if (!g.is_zero() && epsilon != 0.0) {
    double prev = n * step * g(n * step);
    for (Eigen::Index k = n - 1; k >= 0; --k) {
      const double s = k * step;
      const double cur = s * g(s);
      table(k) = table(k + 1) - epsilon * 0.5 * step * (cur + prev);
      prev = cur;
    }
  }
  return ProfileH(rho, step, epsilon, std::move(table));
}

double h_table_step(double h, double rho) {
  const double half = 0.5 * h;
  const int m = std::max(1, static_cast<int>(std::ceil(half / (rho / 8) - 1e-12)));
  return half / m;
}

LinearSolution::LinearSolution(const RadialProfile& f, const RadialProfile& g, double epsilon,
                               double step)
    : f_(f),
      epsilon_(epsilon),
      rho_(std::max(f.support_radius(), g.support_radius())),
      H_(compute_H(f + g, epsilon, step)) {}

double LinearSolution::phi(double r, double t) const {
  // d'Alembert with odd extension of r f and r (f + g); H is used at |t - r|.
  double out = 0.5 * (H_(t + r) - H_(std::abs(t - r)));
  if (!f_.is_zero() && epsilon_ != 0.0) {
    const double d = r - t;
    out += 0.5 * epsilon_ * ((r + t) * f_(r + t) + d * f_(std::abs(d)));
  }
  return out;
}

CharField linear_solution(const RadialProfile& f, const RadialProfile& g, double epsilon,
                          const Lattice& lattice) {
  CharField field(lattice);
  if (epsilon == 0.0 || (f.is_zero() && g.is_zero())) return field;
  const LinearSolution lin(f, g, epsilon, h_table_step(lattice.h, lattice.rho));
  for (int j = 0; j < lattice.nt; ++j) {
    const int end = lattice.support_end(j);
    for (int i = 0; i < end; ++i) field.phi(j, i) = lin.phi(lattice.r(i), lattice.t(j));
  }
  return field;
}

namespace {

struct RadialSups {
  double value = 0, d1 = 0, d2_diag = 0, d2_off = 0;
};

RadialSups radial_sups(const RadialProfile& g) {
  RadialSups s;
  if (g.is_zero()) return s;
  const double rho = g.support_radius();
  const int n = 4000;
  const double dr = rho / n;
  for (int k = 0; k <= n + 2; ++k) {
    const double r = k * dr;
    const double gm = k == 0 ? g(dr) : g(r - dr);  // even across r = 0
    const double g0 = g(r), gp = g(r + dr);
    const double d1 = (gp - gm) / (2 * dr);
    const double d2 = (gp - 2 * g0 + gm) / (dr * dr);
    const double d1_over_r = r > 0 ? d1 / r : d2;
    s.value = std::max(s.value, std::abs(g0));
    s.d1 = std::max(s.d1, std::abs(d1));
    s.d2_diag = std::max({s.d2_diag, std::abs(d2), std::abs(d1_over_r)});
    s.d2_off = std::max(s.d2_off, 0.5 * std::abs(d2 - d1_over_r));
  }
  return s;
}

}  // namespace

double data_norm_N0(const RadialProfile& f, const RadialProfile& g) {
  const double rho = std::max(f.support_radius(), g.support_radius());
  const RadialSups sf = radial_sups(f);
  const RadialSups sg = radial_sups(g);
  // |alpha| <= 2 on f: 1 + 3 + (3 diagonal + 3 off-diagonal) multi-indices.
  const double f_part =
      sf.value + rho * 3 * sf.d1 + rho * rho * (3 * sf.d2_diag + 3 * sf.d2_off);
  // |beta| <= 1 on f and g with one extra power of rho.
  const double fg_part = rho * (sf.value + sg.value) + rho * rho * 3 * (sf.d1 + sg.d1);
  return f_part + fg_part;
}

LinearDecayReport verify_linear_decay(const CharField& field, double epsilon, double N_0) {
  LinearDecayReport rep;
  rep.norms.N_0 = N_0;
  const Lattice& lat = field.lattice();
  const double rho = lat.rho;
  rep.finite = field.all_finite();
  double gmax = 0;
  for (int j = 0; j < lat.nt; ++j) {
    const double t = lat.t(j);
    const double decay = rho / (t + rho);
    for (int i = 0; i < lat.nr; ++i) {
      const double r = lat.r(i);
      const double u = std::abs(field.u(j, i));
      if (std::abs(t - r) >= rho) rep.support_max = std::max(rep.support_max, u);
      if (epsilon > 0 && N_0 > 0) gmax = std::max(gmax, u / (epsilon * decay * N_0));
    }
  }
  rep.norms.gamma_lin = gmax;
  return rep;
}

void write_field_csv(std::ostream& os, const CharField& field) {
  const auto old = os.precision(17);
  os << "r,t,phi,u\n";
  const Lattice& lat = field.lattice();
  for (int j = 0; j < lat.nt; ++j)
    for (int i = 0; i < lat.nr; ++i)
      os << lat.r(i) << ',' << lat.t(j) << ',' << field.phi(j, i) << ',' << field.u(j, i) << '\n';
  os.precision(old);
}

}  // namespace lifespan
