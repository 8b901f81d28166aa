#include "lifespan/experiment.hpp"

#include "lifespan/blowup_bounds.hpp"
#include "lifespan/norms.hpp"

#include <Eigen/Dense>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lifespan {

std::vector<double> SweepConfig::epsilons() const {
  if (!eps_list.empty()) return eps_list;
  std::vector<double> out;
  double e = eps_start;
  for (int i = 0; i < eps_count; ++i, e *= eps_ratio) out.push_back(e);
  return out;
}

RadialProfile SweepConfig::f() const {
  return f_amplitude == 0 ? zero_profile(rho) : make_bump(rho, f_amplitude, bump_k);
}

RadialProfile SweepConfig::g() const {
  return g_amplitude == 0 ? zero_profile(rho) : make_bump(rho, g_amplitude, bump_k);
}

BlowupProblem SweepConfig::problem(double epsilon) const {
  BlowupProblem pb;
  pb.p = p;
  pb.epsilon = epsilon;
  pb.f = f();
  pb.g = g();
  pb.h = h_over_rho * rho;
  pb.t_max = t_max_over_rho * rho;
  pb.blowup_threshold = blowup_threshold;
  return pb;
}

SweepConfig critical_sweep_config() {
  SweepConfig c;
  c.p = strauss_exponent(5);
  c.eps_start = 1.2;
  c.eps_count = 8;
  c.eps_ratio = std::pow(0.7 / 1.2, 1.0 / 7);
  return c;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  std::size_t pos = 0;
  double x;
  try {
    x = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("config: bad number for " + key + ": " + v);
  }
  if (pos != v.size()) throw std::invalid_argument("config: bad number for " + key + ": " + v);
  return x;
}

int to_int(const std::string& key, const std::string& v) {
  const double x = to_double(key, v);
  if (x != std::floor(x)) throw std::invalid_argument("config: " + key + " must be an integer");
  return static_cast<int>(x);
}

}  // namespace

void apply_override(SweepConfig& c, const std::string& key_in, const std::string& value_in) {
  const std::string key = trim(key_in), v = trim(value_in);
  if (key == "p") c.p = v == "strauss" ? strauss_exponent(5) : to_double(key, v);
  else if (key == "rho") c.rho = to_double(key, v);
  else if (key == "f_amplitude") c.f_amplitude = to_double(key, v);
  else if (key == "g_amplitude") c.g_amplitude = to_double(key, v);
  else if (key == "bump_k") c.bump_k = to_int(key, v);
  else if (key == "eps_start") c.eps_start = to_double(key, v);
  else if (key == "eps_count") c.eps_count = to_int(key, v);
  else if (key == "eps_ratio") c.eps_ratio = to_double(key, v);
  else if (key == "eps_list") {
    c.eps_list.clear();
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) c.eps_list.push_back(to_double(key, trim(item)));
  } else if (key == "h_over_rho") c.h_over_rho = to_double(key, v);
  else if (key == "levels") c.levels = to_int(key, v);
  else if (key == "blowup_threshold") c.blowup_threshold = to_double(key, v);
  else if (key == "t_max_over_rho") c.t_max_over_rho = to_double(key, v);
  else if (key == "workers") c.workers = to_int(key, v);
  else throw std::invalid_argument("config: unknown key " + key);
}

SweepConfig parse_sweep_config(std::istream& in, SweepConfig c) {
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(n) + ": expected key = value");
    apply_override(c, line.substr(0, eq), line.substr(eq + 1));
  }
  return c;
}

SweepConfig load_sweep_config(const std::filesystem::path& path, SweepConfig base) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  return parse_sweep_config(in, std::move(base));
}

std::vector<std::string> validate(const SweepConfig& c) {
  const auto eps = c.epsilons();
  if (eps.size() < 4) throw std::invalid_argument("sweep: need at least 4 eps values");
  for (std::size_t i = 0; i < eps.size(); ++i) {
    if (!(eps[i] > 0)) throw std::invalid_argument("sweep: eps must be positive");
    if (i > 0 && !(eps[i] < eps[i - 1]))
      throw std::invalid_argument("sweep: eps list must be strictly decreasing");
  }
  if (!(c.h_over_rho > 0) || c.levels < 1 || c.workers < 1 || !(c.t_max_over_rho > 0))
    throw std::invalid_argument("sweep: bad lattice or worker settings");
  std::vector<std::string> warn;
  if (classify(c.p) != Regime::Supercritical && c.g_amplitude > 0 && c.f_amplitude == 0) {
    try {
      const auto fs = first_step_constants(c.g(), eps.front(), c.p);
      const auto reg = classify(c.p) == Regime::Critical ? SequenceRegime::Critical
                                                         : SequenceRegime::Subcritical;
      const double Tup = upper_bound_formula(eps.front(), c.p, fs.M, convergence_constant_q(c.p, reg));
      if (c.t_max_over_rho * c.rho < Tup) {
        std::ostringstream os;
        os << std::setprecision(6) << "t_max " << c.t_max_over_rho * c.rho
           << " is below the predicted upper bound " << Tup << " at eps " << eps.front();
        warn.push_back(os.str());
      }
    } catch (const std::exception&) {
    }
  }
  return warn;
}

std::vector<SweepRow> lifespan_sweep(const SweepConfig& cfg) {
  validate(cfg);
  const auto eps = cfg.epsilons();
  std::vector<SweepRow> rows(eps.size());
  std::vector<std::string> errors(eps.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < eps.size();) {
      SweepRow& row = rows[k];
      row.epsilon = eps[k];
      try {
        const BlowupEstimate est = estimate_blowup_time(cfg.problem(eps[k]), cfg.levels);
        row.T = est.T_num;
        row.uncertainty = est.uncertainty;
      } catch (const NoBlowupWithinHorizon&) {
        row.censored = true;
        row.T = cfg.t_max_over_rho * cfg.rho;
        row.uncertainty = std::numeric_limits<double>::infinity();
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  const int nw = std::max(1, std::min<int>(cfg.workers, static_cast<int>(eps.size())));
  if (nw == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < nw; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (!e.empty()) throw std::runtime_error("sweep: " + e);
  bool any = false;
  for (const auto& r : rows) any = any || !r.censored;
  if (!any) throw std::runtime_error("sweep: every row is censored");
  return rows;
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Consistent: return "Consistent";
    case Verdict::Inconsistent: return "Inconsistent";
    case Verdict::Inconclusive: return "Inconclusive";
  }
  return "?";
}

LifespanFit fit_scaling(const std::vector<SweepRow>& rows, double p) {
  LifespanFit fit;
  fit.rows = rows;
  fit.p = p;
  fit.regime = classify(p);
  const bool critical = fit.regime == Regime::Critical;
  if (fit.regime == Regime::Supercritical) {
    fit.theory_slope = std::numeric_limits<double>::quiet_NaN();
  } else {
    fit.theory_slope = critical ? -p * (p - 1) : -lifespan_exponent(p);
  }
  fit.tolerance = critical ? kCriticalFitTolerance : kSubcriticalFitTolerance;

  std::vector<double> x, y, w;
  for (const auto& r : rows) {
    if (r.censored) {
      ++fit.censored_rows;
      continue;
    }
    if (!(r.T > 0) || (critical && !(r.T > 1))) {
      ++fit.excluded_rows;
      continue;
    }
    const double lt = std::log(r.T);
    double yi = lt, sigma = r.uncertainty / r.T;
    if (critical) {
      yi = std::log(lt);
      sigma /= lt;
    }
    if (!std::isfinite(sigma)) sigma = 0;
    x.push_back(std::log(r.epsilon));
    y.push_back(yi);
    w.push_back(1.0 / (sigma * sigma + 1e-6));
  }
  fit.used_rows = static_cast<int>(x.size());
  const bool inconclusive = fit.used_rows < 4 ||
                            2 * fit.censored_rows > static_cast<int>(rows.size()) ||
                            fit.regime == Regime::Supercritical;
  fit.verdict = Verdict::Inconclusive;
  if (fit.used_rows < 2) return fit;

  const Eigen::Index n = fit.used_rows;
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double s = std::sqrt(w[i]);
    A(i, 0) = s * x[i];
    A(i, 1) = s;
    b(i) = s * y[i];
  }
  const Eigen::Vector2d beta = A.colPivHouseholderQr().solve(b);
  fit.fitted_slope = beta(0);
  fit.intercept = beta(1);
  if (n > 2) {
    const double s2 = (A * beta - b).squaredNorm() / static_cast<double>(n - 2);
    const Eigen::Matrix2d cov = (A.transpose() * A).inverse() * s2;
    fit.slope_stderr = std::sqrt(std::max(0.0, cov(0, 0)));
  } else {
    fit.slope_stderr = 0;
  }
  if (inconclusive) return fit;
  const double allowed = std::max(fit.tolerance * std::abs(fit.theory_slope), 2 * fit.slope_stderr);
  fit.verdict = std::abs(fit.fitted_slope - fit.theory_slope) <= allowed ? Verdict::Consistent
                                                                         : Verdict::Inconsistent;
  return fit;
}

SweepPredictions predict_bounds(const SweepConfig& cfg, const std::vector<SweepRow>& rows) {
  SweepPredictions pred;
  pred.T_low.assign(rows.size(), std::nullopt);
  pred.T_up.assign(rows.size(), std::nullopt);
  const Regime reg = classify(cfg.p);
  if (reg == Regime::Supercritical) {
    pred.note = "supercritical: no finite-time bounds";
    return pred;
  }
  std::ostringstream note;
  note << std::setprecision(17);
  try {
    const ContractionCertificate cert = measure_certificate(cfg.p, cfg.rho);
    note << "C3=" << cert.C3 << " epsilon0_low=" << cert.epsilon0 << ' ';
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (rows[k].epsilon <= cert.epsilon0)
        pred.T_low[k] = lower_bound_lifespan(rows[k].epsilon, cert, cfg.p, cfg.rho);
  } catch (const std::exception& e) {
    note << "lower bound unavailable (" << e.what() << ") ";
  }
  try {
    if (cfg.f_amplitude != 0) throw std::domain_error("upper bound needs f = 0");
    const auto fs = first_step_constants(cfg.g(), 1.0, cfg.p);
    const double q = convergence_constant_q(
        cfg.p, reg == Regime::Critical ? SequenceRegime::Critical : SequenceRegime::Subcritical);
    const double e0 = upper_epsilon0(cfg.p, fs.M, q, cfg.rho);
    note << "M=" << fs.M << " q=" << q << " epsilon0_up=" << e0;
    for (std::size_t k = 0; k < rows.size(); ++k)
      if (rows[k].epsilon <= e0)
        pred.T_up[k] = upper_bound_lifespan(rows[k].epsilon, cfg.p, fs.M, q, cfg.rho);
  } catch (const std::exception& e) {
    note << "upper bound unavailable (" << e.what() << ")";
  }
  pred.note = note.str();
  return pred;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  const auto old = os.precision(17);
  os << "eps,T,uncertainty,censored\n";
  for (const auto& r : rows)
    os << r.epsilon << ',' << r.T << ',' << r.uncertainty << ',' << (r.censored ? 1 : 0) << '\n';
  os.precision(old);
}

void write_fit_csv(std::ostream& os, const LifespanFit& fit) {
  const auto old = os.precision(17);
  os << "p,regime,fitted_slope,stderr,theory_slope,verdict\n";
  os << fit.p << ',' << to_string(fit.regime) << ',' << fit.fitted_slope << ','
     << fit.slope_stderr << ',' << fit.theory_slope << ',' << to_string(fit.verdict) << '\n';
  os.precision(old);
}

void write_summary(std::ostream& os, const SweepConfig& cfg, const LifespanFit& fit,
                   const SweepPredictions& pred) {
  const auto old = os.precision(17);
  const ExponentReport ex = exponent_report(cfg.p);
  os << "exponents: p=" << ex.p << " gamma(p,3)=" << ex.gamma << " p_S(3)=" << ex.strauss
     << " p_F(3)=" << ex.fujita << " q=" << ex.q << " q_bar=" << ex.q_bar << " m=" << ex.m
     << " lifespan_exponent=" << ex.lifespan_exponent << " regime=" << to_string(ex.regime)
     << '\n';
  os << "fit: slope=" << fit.fitted_slope << " stderr=" << fit.slope_stderr
     << " theory=" << fit.theory_slope << " used=" << fit.used_rows
     << " censored=" << fit.censored_rows << " excluded=" << fit.excluded_rows
     << " verdict=" << to_string(fit.verdict) << '\n';
  os << "bounds: " << pred.note << '\n';
  os << "eps,T_low,T_num,T_up,censored\n";
  for (std::size_t k = 0; k < fit.rows.size(); ++k) {
    const auto& r = fit.rows[k];
    os << r.epsilon << ',';
    if (k < pred.T_low.size() && pred.T_low[k]) os << *pred.T_low[k];
    else os << "NA";
    os << ',' << r.T << ',';
    if (k < pred.T_up.size() && pred.T_up[k]) os << *pred.T_up[k];
    else os << "NA";
    os << ',' << (r.censored ? 1 : 0) << '\n';
  }
  os.precision(old);
}

namespace {

template <class F>
void write_file(const std::filesystem::path& path, F&& body) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  body(out);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

void write_report(const std::filesystem::path& dir, const SweepConfig& cfg,
                  const LifespanFit& fit, const SweepPredictions& pred) {
  std::filesystem::create_directories(dir);
  write_file(dir / "sweep.csv", [&](std::ostream& os) { write_sweep_csv(os, fit.rows); });
  write_file(dir / "fit.csv", [&](std::ostream& os) { write_fit_csv(os, fit); });
  write_file(dir / "summary.txt", [&](std::ostream& os) { write_summary(os, cfg, fit, pred); });
}

std::vector<SweepRow> read_sweep_csv(std::istream& in) {
  std::vector<SweepRow> rows;
  std::string line;
  if (!std::getline(in, line) || trim(line) != "eps,T,uncertainty,censored")
    throw std::invalid_argument("sweep csv: unexpected header");
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::stringstream ss(line);
    std::string a, b, c, d;
    if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c, ',') ||
        !std::getline(ss, d, ','))
      throw std::invalid_argument("sweep csv: malformed row: " + line);
    SweepRow r;
    r.epsilon = std::stod(a);
    r.T = std::stod(b);
    r.uncertainty = std::stod(c);
    r.censored = trim(d) == "1";
    rows.push_back(r);
  }
  return rows;
}

}  // namespace lifespan
