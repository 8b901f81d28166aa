#include "lifespan/norms.hpp"

#include "lifespan/duhamel.hpp"
#include "lifespan/radial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lifespan {

WeightSpec make_weight_spec(double p, double rho) {
  if (!(rho > 0)) throw std::invalid_argument("make_weight_spec: rho must be positive");
  const auto we = weight_exponents(p);
  WeightSpec spec;
  spec.p = p;
  spec.rho = rho;
  spec.q = we.q;
  spec.q_bar = we.q_bar;
  spec.special_log_case = p == 1.5;
  return spec;
}

double weight(double r, double t, const WeightSpec& s) {
  const double plus = t + r + 2 * s.rho;
  const double minus = t - r + 2 * s.rho;
  if (s.special_log_case) return plus / (s.rho * std::log(2 * plus / minus));
  return std::pow(s.rho, -2 * (s.p - 1)) * std::pow(plus, s.q) *
         (s.q_bar == 0 ? 1.0 : std::pow(minus, s.q_bar));
}

namespace {

int levels_upto(const Lattice& lat, double T) {
  if (!(T < lat.t_max + lat.h)) return lat.nt;
  const int n = static_cast<int>(std::floor(T / lat.h + 1e-9)) + 1;
  return std::min(n, lat.nt);
}

template <class Weight>
double sup_weighted(const FieldArray& phi, const Lattice& lat, double T, Weight&& w) {
  if (!phi.allFinite()) throw std::domain_error("weighted norm of a non-finite field");
  const int nt = levels_upto(lat, T);
  double out = 0;
  for (int j = 0; j < nt; ++j) {
    const double t = lat.t(j);
    for (int i = 0; i < lat.nr; ++i) {
      const double v = phi(j, i);
      if (v == 0.0) continue;
      const double r = lat.r(i);
      out = std::max(out, w(r, t) * std::abs(v) / r);
    }
  }
  return out;
}

}  // namespace

double weighted_norm(const CharField& field, const WeightSpec& spec, double T) {
  return sup_weighted(field.values(), field.lattice(), T,
                      [&](double r, double t) { return weight(r, t, spec); });
}

double weighted_distance(const CharField& a, const CharField& b, const WeightSpec& spec,
                         double T) {
  a.check_same(b);
  const FieldArray diff = a.values() - b.values();
  return sup_weighted(diff, a.lattice(), T, [&](double r, double t) { return weight(r, t, spec); });
}

double zero_norm(const CharField& field, double rho, double T) {
  return sup_weighted(field.values(), field.lattice(), T,
                      [&](double r, double t) { return (t + r + 2 * rho) / rho; });
}

double growth_factor_D(double T, double p, double rho) {
  switch (classify(p)) {
    case Regime::Subcritical: return std::pow((2 * T + 3 * rho) / rho, gamma(p, 5) / 2);
    case Regime::Critical: return std::log((T + 2 * rho) / rho);
    case Regime::Supercritical: return 1.0;
  }
  return 1.0;
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("ls_slope: need two or more paired values");
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  return sxy / sxx;
}

namespace {

// Shared driver: ratio(T) = ||L[source]||_T / rhs(T) per sample, maximized over
// samples at each horizon.
template <class Source, class Rhs>
EstimateReport run_estimate(LemmaId id, const std::vector<CharField>& samples, double p,
                            double rho, double nu, const std::vector<double>& horizons,
                            Source&& source, Rhs&& rhs) {
  if (horizons.empty()) throw std::invalid_argument("estimate: no horizons");
  const WeightSpec spec = make_weight_spec(p, rho);
  EstimateReport rep;
  rep.lemma_id = id;
  rep.p = p;
  rep.rho = rho;
  rep.nu = nu;
  rep.horizons = horizons;
  rep.ratio_by_T.assign(horizons.size(), 0.0);
  const double T_last = *std::max_element(horizons.begin(), horizons.end());
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const CharField& u = samples[s];
    if (u.t_max() + 1e-9 < T_last)
      throw std::invalid_argument("estimate: sample does not cover the largest horizon");
    if (weighted_norm(u, spec) == 0.0) continue;
    const CharField lhs = duhamel_apply(source(u), p);
    bool used = false;
    for (std::size_t k = 0; k < horizons.size(); ++k) {
      const double T = horizons[k];
      const double den = rhs(u, spec, T);
      if (!(den > 0)) continue;
      const double ratio = weighted_norm(lhs, spec, T) / den;
      used = true;
      if (ratio > rep.ratio_by_T[k]) rep.ratio_by_T[k] = ratio;
      if (ratio > rep.max_ratio) {
        rep.max_ratio = ratio;
        rep.worst_sample = "sample " + std::to_string(s) + " at T=" + std::to_string(T);
      }
    }
    if (used) ++rep.samples;
  }
  rep.empirical_constant = rep.max_ratio * kConstantMargin;
  rep.D_of_T_used = growth_factor_D(T_last, p, rho);
  if (rep.samples == 0) {
    rep.pass = true;
    return rep;
  }
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < horizons.size(); ++k) {
    if (rep.ratio_by_T[k] > 0) {
      lx.push_back(std::log(horizons[k]));
      ly.push_back(std::log(rep.ratio_by_T[k]));
    }
  }
  rep.slope = lx.size() >= 2 ? ls_slope(lx, ly) : 0.0;
  rep.pass = std::isfinite(rep.empirical_constant) && rep.slope <= kBoundedSlope;
  return rep;
}

}  // namespace

EstimateReport verify_apriori(const std::vector<CharField>& samples, double p, double rho,
                              const std::vector<double>& horizons) {
  return run_estimate(
      LemmaId::AprioriL, samples, p, rho, 0.0, horizons,
      [p](const CharField& u) { return power_source(u, p); },
      [p, rho](const CharField& u, const WeightSpec& spec, double T) {
        return rho * rho * std::pow(weighted_norm(u, spec, T), p) * growth_factor_D(T, p, rho);
      });
}

EstimateReport verify_crossterm(const CharField& u0, const std::vector<CharField>& samples,
                                double nu, double p, double rho,
                                const std::vector<double>& horizons) {
  double d_power;
  if (nu == 0.0) d_power = 0.0;
  else if (nu == 1.0) d_power = 1.0 / p;
  else if (std::abs(nu - (p - 1)) < 1e-12) d_power = (p - 1) / (p + 1);
  else throw std::invalid_argument("verify_crossterm: nu must be 0, 1 or p-1");
  const double n0 = zero_norm(u0, rho);
  std::vector<CharField> fitted;
  fitted.reserve(samples.size());
  for (const CharField& s : samples) fitted.push_back(s.truncated(u0.t_max()));
  EstimateReport rep = run_estimate(
      LemmaId::CrossTerm, fitted, p, rho, nu, horizons,
      [&](const CharField& u) {
        return mixed_source(u0.truncated(u.t_max()), u, p, nu);
      },
      [&](const CharField& u, const WeightSpec& spec, double T) {
        const double un = nu == 0.0 ? 1.0 : std::pow(weighted_norm(u, spec, T), nu);
        return rho * rho * std::pow(n0, p - nu) * un *
               std::pow(growth_factor_D(T, p, rho), d_power);
      });
  return rep;
}

CharField extremal_sample(const Lattice& lat, const WeightSpec& spec) {
  CharField out(lat);
  for (int j = 0; j < lat.nt; ++j) {
    const double t = lat.t(j);
    for (int i = 0; i < lat.nr; ++i) {
      const double r = lat.r(i);
      if (r <= t + lat.rho) out.phi(j, i) = r / weight(r, t, spec);
    }
  }
  return out;
}

SampleBattery standard_battery(double rho, double h_over_rho) {
  const Lattice lat = make_lattice(h_over_rho * rho, 32 * rho, rho);
  SampleBattery b;
  for (int k : {3, 4, 6}) {
    const RadialProfile g = make_bump(rho, 1.0, k);
    const RadialProfile f = zero_profile(rho);
    for (double eps : {0.05, 0.1, 0.2}) {
      b.fields.push_back(linear_solution(f, g, eps, lat));
      b.labels.push_back("u0 bump k=" + std::to_string(k) + " eps=" + std::to_string(eps));
      b.epsilons.push_back(eps);
    }
  }
  return b;
}

ContractionCertificate assemble_certificate(double C0, double C1, double C2, double p,
                                            double rho) {
  if (!(C0 > 0 && C1 > 0 && C2 > 0))
    throw std::invalid_argument("assemble_certificate: constants must be positive");
  ContractionCertificate c;
  c.C0 = C0;
  c.C1 = C1;
  c.C2 = C2;
  const double r2 = rho * rho;
  c.M0_const = std::pow(2.0, p) * p * r2 * std::pow(C0, p) * std::max(C1, C2);
  const double M0 = c.M0_const;
  const double m = std::max({C1 * r2 * std::pow(M0, p - 1), std::pow(C2 * r2 * std::pow(C0, p - 1), p),
                             std::pow(C2 * r2 * std::pow(M0, p - 2) * C0, p / (p - 1))});
  c.C3 = std::pow(std::pow(2.0, 2 * p + 2) * p, p / (p - 1)) * m;
  const Regime reg = classify(p);
  if (reg == Regime::Supercritical) {
    c.epsilon0 = std::pow(1.0 / c.C3, 1.0 / (p * (p - 1)));
    c.T_low = std::numeric_limits<double>::infinity();
    return c;
  }
  const double target = reg == Regime::Subcritical ? std::pow(6.0, -gamma(p, 5) / 2)
                                                   : 1.0 / std::log(4.0);
  c.epsilon0 = std::pow(target / c.C3, 1.0 / (p * (p - 1)));
  c.T_low = lower_bound_formula(c.epsilon0, c.C3, p, rho);
  return c;
}

ContractionCertificate measure_certificate(double p, double rho, double h_over_rho) {
  const SampleBattery b = standard_battery(rho, h_over_rho);
  const std::vector<double> horizons{4 * rho, 8 * rho, 16 * rho, 32 * rho};
  double C0 = 0;
  for (std::size_t k = 0; k < b.fields.size(); ++k)
    C0 = std::max(C0, zero_norm(b.fields[k], rho) / b.epsilons[k]);
  C0 *= kConstantMargin;
  const double C1 = verify_apriori(b.fields, p, rho, horizons).empirical_constant;
  double C2 = 0;
  std::vector<double> nus{0.0, 1.0};
  if (std::abs(p - 2) > 1e-12) nus.push_back(p - 1);
  for (const CharField& u0 : b.fields)
    for (double nu : nus)
      C2 = std::max(C2, verify_crossterm(u0, b.fields, nu, p, rho, horizons).empirical_constant);
  return assemble_certificate(C0, C1, C2, p, rho);
}

double lower_bound_formula(double epsilon, double C3, double p, double rho) {
  const double x = C3 * std::pow(epsilon, p * (p - 1));
  switch (classify(p)) {
    case Regime::Subcritical: return 0.25 * rho * std::pow(x, -2.0 / gamma(p, 5));
    case Regime::Critical: return 0.5 * rho * std::exp(1.0 / x);
    case Regime::Supercritical: break;
  }
  throw std::domain_error("lower_bound_formula: requires p <= p_S(5)");
}

double lower_bound_lifespan(double epsilon, const ContractionCertificate& cert, double p,
                            double rho) {
  if (!(epsilon > 0)) throw std::invalid_argument("lower_bound_lifespan: epsilon must be > 0");
  if (epsilon > cert.epsilon0)
    throw std::domain_error("lower_bound_lifespan: epsilon exceeds epsilon0");
  return lower_bound_formula(epsilon, cert.C3, p, rho);
}

}  // namespace lifespan
