#include "lifespan/blowup_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace lifespan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

SequenceRegime sequence_regime(double p) {
  switch (classify(p)) {
    case Regime::Subcritical: return SequenceRegime::Subcritical;
    case Regime::Critical: return SequenceRegime::Critical;
    case Regime::Supercritical: break;
  }
  throw std::domain_error("no blow-up iteration above p_S(5)");
}

EnvelopeValue from_log(double lv) {
  EnvelopeValue e;
  e.applicable = true;
  e.log_value = lv;
  if (lv > std::log(std::numeric_limits<double>::max())) {
    e.overflow = true;
    e.value = kInf;
  } else {
    e.value = std::exp(lv);
  }
  return e;
}

}  // namespace

bool SlicingLevels::in_sigma(int j, double r, double t) const {
  if (j < 0 || j >= static_cast<int>(l.size()))
    throw std::out_of_range("SlicingLevels: level beyond j_max");
  const double d = t - r;
  return l[j] * rho <= d && d <= r;
}

bool SlicingLevels::in_sigma_infinity(double r, double t) const {
  const double d = t - r;
  return 2 * rho <= d && d <= r;
}

SlicingLevels make_slicing_levels(double rho, int j_max) {
  if (j_max < 0) throw std::invalid_argument("make_slicing_levels: j_max < 0");
  SlicingLevels s;
  s.rho = rho;
  s.j_max = j_max;
  s.l.resize(j_max + 1);
  double term = 1, sum = 0;
  for (int j = 0; j <= j_max; ++j) {
    sum += term;
    s.l[j] = sum;
    term *= 0.5;
  }
  return s;
}

FirstStepConstants first_step_constants(const RadialProfile& g, double epsilon, double p,
                                        double step) {
  if (g.is_zero()) throw std::invalid_argument("first_step_constants: g vanishes identically");
  if (!(epsilon > 0)) throw std::invalid_argument("first_step_constants: epsilon must be > 0");
  if (!(p > 1)) throw std::invalid_argument("first_step_constants: requires p > 1");
  const double rho = g.support_radius();
  const ProfileH H = compute_H(g, epsilon, step);
  const Eigen::ArrayXd& tab = H.table();
  const double half = 0.5 * tab.minCoeff();
  if (!(half < 0)) throw std::domain_error("first_step_constants: H has no negative part");
  // Widest run of nodes k >= 1 with s_k < rho and H(s_k) <= min H / 2.
  int best_lo = -1, best_hi = -1, lo = -1;
  const int last = static_cast<int>(tab.size()) - 1;
  for (int k = 1; k <= last; ++k) {
    const bool in = k * step < rho && tab(k) <= half;
    if (in && lo < 0) lo = k;
    if ((!in || k == last) && lo >= 0) {
      const int hi = in ? k : k - 1;
      if (hi - lo > best_hi - best_lo) {
        best_lo = lo;
        best_hi = hi;
      }
      lo = -1;
    }
  }
  if (best_lo < 0 || best_hi == best_lo)
    throw std::domain_error("first_step_constants: no interval at half depth");
  FirstStepConstants c;
  c.a = best_lo * step;
  c.b = best_hi * step;
  c.M0 = -tab.segment(best_lo, best_hi - best_lo + 1).maxCoeff() / (2 * epsilon);
  c.M = 0.5 * std::pow(18.0, -p) * (c.b - c.a) * (1 - c.b / rho) * std::pow(c.M0, p);
  return c;
}

FirstStepConstants first_step_constants(const RadialProfile& g, double epsilon, double p) {
  return first_step_constants(g, epsilon, p, g.support_radius() / 512);
}

SequenceTable build_sequences(double p, double epsilon, double M, int j_max) {
  if (j_max < 0 || j_max > kMaxSequenceLength)
    throw std::invalid_argument("build_sequences: j_max must lie in [0, 60]");
  if (!(M > 0) || !(epsilon > 0))
    throw std::invalid_argument("build_sequences: requires M > 0, eps > 0");
  SequenceTable tab;
  tab.regime = sequence_regime(p);
  tab.p = p;
  tab.epsilon = epsilon;
  tab.M = M;
  const double log0 = std::log(M) + p * std::log(epsilon);
  const double log18p = -p * std::log(18.0);

  if (tab.regime == SequenceRegime::Subcritical) {
    double a = 1, b = 2 * (p - 1), lD = log0;
    for (int j = 0; j <= j_max; ++j) {
      SequenceRow row;
      row.j = j;
      row.a = a;
      row.b = b;
      row.log_coef = lD;
      const double pj = std::pow(p, j);
      row.closed_a = (pj * (p + 1) - 2) / (p - 1);
      row.closed_b = 2 * (pj * p - 1);
      double closed = pj * log0;
      for (int k = 1; k <= j; ++k) {
        const double ak = (std::pow(p, k) * (p + 1) - 2) / (p - 1);
        closed += std::pow(p, j - k) * (log18p - std::log(2 * ak * ak));
      }
      row.closed_log_coef = closed;
      tab.rows.push_back(row);
      a = p * a + 2;
      b = p * b + 2 * (p - 1);
      lD = log18p - std::log(2 * a * a) + p * lD;
    }
  } else {
    double d = 0, lE = log0;
    for (int j = 0; j <= j_max; ++j) {
      SequenceRow row;
      row.j = j;
      row.a = d;
      row.b = row.closed_b = 2 * p - 3;
      row.log_coef = lE;
      const double pj = std::pow(p, j);
      row.closed_a = (pj - 1) / (p - 1);
      double closed = pj * log0;
      for (int k = 1; k <= j; ++k) {
        const double dk = (std::pow(p, k) - 1) / (p - 1);
        closed += std::pow(p, j - k) * (log18p - (k + 2) * std::log(2.0) - std::log(dk));
      }
      row.closed_log_coef = closed;
      tab.rows.push_back(row);
      d = p * d + 1;
      lE = log18p - (j + 3) * std::log(2.0) - std::log(d) + p * lE;
    }
  }
  return tab;
}

namespace {

double q_term(double p, SequenceRegime regime, int k) {
  if (regime == SequenceRegime::Subcritical) {
    const double logF = -p * std::log(18.0) - std::log(2.0) + 2 * std::log((p - 1) / (p + 1));
    return (logF - 2 * k * std::log(p)) * std::pow(p, -k);
  }
  const double logG = -p * std::log(18.0) + std::log(p - 1) - std::log(8 * p);
  return (logG - (k - 1) * std::log(2 * p)) * std::pow(p, -k);
}

}  // namespace

double q_partial_sum(double p, SequenceRegime regime, int terms) {
  if (!(p > 1)) throw std::domain_error("q_partial_sum: requires p > 1");
  double s = 0;
  for (int k = 1; k <= terms; ++k) s += q_term(p, regime, k);
  return s;
}

double convergence_constant_q(double p, SequenceRegime regime) {
  if (!(p > 1)) throw std::domain_error("convergence_constant_q: requires p > 1");
  double s = 0;
  for (int k = 1; k < 1000000; ++k) {
    const double inc = q_term(p, regime, k);
    s += inc;
    if (std::abs(inc) < 1e-14) break;
  }
  return s;
}

EnvelopeValue envelope(int j, double r, double t, const SequenceTable& table,
                       const SlicingLevels& levels) {
  if (j < 0 || j >= static_cast<int>(table.rows.size()))
    throw std::out_of_range("envelope: j beyond table");
  const SequenceRow& row = table.rows[j];
  const double d = t - r, p = table.p, rho = levels.rho;
  if (table.regime == SequenceRegime::Subcritical) {
    if (!levels.in_sigma(0, r, t)) return {};
    if (d == rho) {
      EnvelopeValue e;
      e.applicable = true;
      return e;
    }
    return from_log(row.log_coef + row.a * std::log(d - rho) - std::log(t + r) -
                    row.b * std::log(d));
  }
  if (!levels.in_sigma(j, r, t)) return {};
  const double lg = std::log(d / (levels.l[j] * rho));
  double lv = row.log_coef - std::log(t + r) - (2 * p - 3) * std::log(d);
  if (row.a > 0) {
    if (lg <= 0) {
      EnvelopeValue e;
      e.applicable = true;
      return e;
    }
    lv += row.a * std::log(lg);
  }
  return from_log(lv);
}

double log_B_constant(double p, double M, double q) {
  if (!(M > 0)) throw std::invalid_argument("log_B_constant: M must be positive");
  const double lMq = std::log(M) + q;
  if (sequence_regime(p) == SequenceRegime::Subcritical) {
    const double l2 = 2 * (p * p - 2 * p - 1) / (p - 1) * std::log(2.0);
    return -2 * (p - 1) / gamma(p, 5) * (l2 + lMq);
  }
  return -(p - 1) * lMq;
}

double J_functional(double r, double t, double p, double epsilon, double M, double q,
                    double rho) {
  const double d = t - r;
  if (sequence_regime(p) == SequenceRegime::Subcritical) {
    if (!(d > rho)) return -kInf;
    return p * std::log(epsilon) + std::log(M) + q + (p + 1) / (p - 1) * std::log(d - rho) -
           2 * p * std::log(d);
  }
  if (!(d > 2 * rho)) return -kInf;
  const double lB = log_B_constant(p, M, q);
  return p * std::log(epsilon) + (std::log(std::log(d / (2 * rho))) - lB) / (p - 1);
}

double upper_epsilon0(double p, double M, double q, double rho) {
  const double lB = log_B_constant(p, M, q);
  if (sequence_regime(p) == SequenceRegime::Subcritical) {
    const double e = 2 * p * (p - 1) / gamma(p, 5);
    return std::exp((lB - std::log(8 * rho)) / e);
  }
  return std::exp((lB - std::log(std::log(4 * rho))) / (p * (p - 1)));
}

double upper_bound_formula(double epsilon, double p, double M, double q) {
  const double lB = log_B_constant(p, M, q);
  if (sequence_regime(p) == SequenceRegime::Subcritical) {
    const double e = 2 * p * (p - 1) / gamma(p, 5);
    return std::exp(lB - e * std::log(epsilon));
  }
  const double x = std::exp(lB - p * (p - 1) * std::log(epsilon));
  return std::exp(2 * x);
}

double upper_bound_lifespan(double epsilon, double p, double M, double q, double rho) {
  if (!(epsilon > 0)) throw std::invalid_argument("upper_bound_lifespan: epsilon must be > 0");
  if (epsilon > upper_epsilon0(p, M, q, rho))
    throw std::domain_error("upper_bound_lifespan: epsilon above threshold");
  return upper_bound_formula(epsilon, p, M, q);
}

namespace {

void tally(DominationLevel& lv, double r, double t, double u, double bound, double rel_tol) {
  ++lv.nodes_checked;
  if (bound > 0) lv.min_ratio = std::min(lv.min_ratio, u / bound);
  if (u >= bound) return;
  if (bound - u <= rel_tol * (std::abs(u) + bound)) {
    ++lv.waived;
    return;
  }
  ++lv.violations;
  if (!lv.first_violation) lv.first_violation = std::make_pair(r, t);
}

}  // namespace

DominationLevel first_step_check(const CharField& field, double p, double epsilon, double M,
                                 double rel_tol) {
  const Lattice& lat = field.lattice();
  DominationLevel lv;
  const double c = M * std::pow(epsilon, p);
  for (int j = 0; j < lat.nt; ++j) {
    const double t = lat.t(j);
    for (int i = 0; i < lat.nr; ++i) {
      const double r = lat.r(i);
      const double d = t - r;
      if (!(lat.rho <= d && d <= r)) continue;
      tally(lv, r, t, field.u(j, i), c / ((t + r) * std::pow(d, 2 * p - 3)), rel_tol);
    }
  }
  return lv;
}

DominationReport domination_check(const CharField& field, const SequenceTable& table,
                                  const SlicingLevels& levels, int j_max, double rel_tol) {
  const Lattice& lat = field.lattice();
  const int top = std::min({j_max, static_cast<int>(table.rows.size()) - 1, levels.j_max});
  DominationReport rep;
  rep.rel_tolerance = rel_tol;
  for (int jj = 0; jj <= top; ++jj) {
    DominationLevel lv;
    lv.j = jj;
    bool any_normal = false;
    for (int j = 0; j < lat.nt; ++j) {
      const double t = lat.t(j);
      for (int i = 0; i < lat.nr; ++i) {
        const double r = lat.r(i);
        const EnvelopeValue e = envelope(jj, r, t, table, levels);
        if (!e.applicable) continue;
        if (e.value > 1e-300) any_normal = true;
        tally(lv, r, t, field.u(j, i), e.value, rel_tol);
      }
    }
    lv.underflow = lv.nodes_checked > 0 && !any_normal;
    if (lv.violations > 0) rep.pass = false;
    rep.levels.push_back(lv);
  }
  return rep;
}

void write_sequence_csv(std::ostream& os, const SequenceTable& table) {
  const auto old = os.precision(17);
  if (table.regime == SequenceRegime::Subcritical) {
    os << "j,a_j,b_j,logD_j,closed_a,closed_b,closed_logD\n";
    for (const auto& r : table.rows)
      os << r.j << ',' << r.a << ',' << r.b << ',' << r.log_coef << ',' << r.closed_a << ','
         << r.closed_b << ',' << r.closed_log_coef << '\n';
  } else {
    os << "j,d_j,logE_j,closed_d,closed_logE\n";
    for (const auto& r : table.rows)
      os << r.j << ',' << r.a << ',' << r.log_coef << ',' << r.closed_a << ','
         << r.closed_log_coef << '\n';
  }
  os.precision(old);
}

void write_domination_csv(std::ostream& os, const DominationReport& report) {
  const auto old = os.precision(17);
  os << "j,nodes_checked,violations,waived,min_ratio,underflow,first_violation_r,"
        "first_violation_t\n";
  for (const auto& lv : report.levels) {
    os << lv.j << ',' << lv.nodes_checked << ',' << lv.violations << ',' << lv.waived << ','
       << lv.min_ratio << ',' << (lv.underflow ? 1 : 0) << ',';
    if (lv.first_violation)
      os << lv.first_violation->first << ',' << lv.first_violation->second;
    else
      os << ',';
    os << '\n';
  }
  os.precision(old);
}

}  // namespace lifespan
