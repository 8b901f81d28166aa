// Command-line entry point: exponents, solve, sweep, fit, verify-estimates,
// verify-bounds, oracle-compare.

#include "lifespan/blowup_bounds.hpp"
#include "lifespan/duhamel.hpp"
#include "lifespan/experiment.hpp"
#include "lifespan/exponents.hpp"
#include "lifespan/fd_oracle.hpp"
#include "lifespan/norms.hpp"
#include "lifespan/radial.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace lifespan;

namespace {

struct Globals {
  std::string config;
  std::string out = "out";
  int workers = 1;
  std::uint64_t seed = 12345;
};

SweepConfig base_config(const Globals& g, double p) {
  SweepConfig cfg = classify(p) == Regime::Critical ? critical_sweep_config() : SweepConfig{};
  cfg.p = p;
  if (!g.config.empty()) cfg = load_sweep_config(g.config, cfg);
  cfg.workers = g.workers;
  return cfg;
}

std::ofstream open_out(const Globals& g, const std::string& name, bool append = false) {
  fs::create_directories(g.out);
  const fs::path path = fs::path(g.out) / name;
  std::ofstream os(path, append ? std::ios::app : std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open " + path.string());
  os << std::setprecision(17);
  return os;
}

double json_safe(double x) { return std::isfinite(x) ? x : -1; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lifespan experiments for the damped semilinear wave equation"};
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "flat key = value sweep configuration");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--seed", g.seed, "seed of the randomized estimate samples");

  // exponents
  double ex_p = 1.5;
  int ex_n = 3;
  auto* ex = app.add_subcommand("exponents", "critical exponents and derived quantities");
  ex->add_option("--p", ex_p)->required();
  ex->add_option("--n", ex_n);

  // solve
  double so_p = 2, so_eps = 0.1, so_h = 1.0 / 16, so_tmax = 8, so_rho = 1;
  int so_k = 4;
  std::string so_mode = "march";
  auto* so = app.add_subcommand("solve", "solve the integral equation on a lattice");
  so->add_option("--p", so_p)->required();
  so->add_option("--eps", so_eps)->required();
  so->add_option("--h", so_h);
  so->add_option("--tmax", so_tmax);
  so->add_option("--rho", so_rho);
  so->add_option("--k", so_k, "bump exponent of g");
  so->add_option("--mode", so_mode)->check(CLI::IsMember({"picard", "perturbed", "march"}));

  // sweep
  double sw_p = 1.5;
  auto* sw = app.add_subcommand("sweep", "lifespan sweep over eps, fit and bounds");
  sw->add_option("--p", sw_p)->required();

  // fit
  double fi_p = 1.5;
  std::string fi_in;
  auto* fi = app.add_subcommand("fit", "fit a sweep.csv");
  fi->add_option("--p", fi_p)->required();
  fi->add_option("--input", fi_in)->required();

  // verify-estimates
  double ve_p = 1.5, ve_rho = 1, ve_nu = 0, ve_h = 1.0 / 8;
  std::string ve_lemma = "apriori";
  int ve_random = 3;
  auto* ve = app.add_subcommand("verify-estimates", "empirical a-priori estimate check");
  ve->add_option("--p", ve_p)->required();
  ve->add_option("--rho", ve_rho);
  ve->add_option("--lemma", ve_lemma)->check(CLI::IsMember({"apriori", "crossterm"}));
  ve->add_option("--nu", ve_nu);
  ve->add_option("--h", ve_h, "lattice step over rho");
  ve->add_option("--random-samples", ve_random, "extra seeded free solutions");

  // verify-bounds
  double vb_p = 1.5, vb_eps = 0.05, vb_tmax = 24;
  int vb_jmax = 10;
  auto* vb = app.add_subcommand("verify-bounds", "iteration sequences and domination check");
  vb->add_option("--p", vb_p)->required();
  vb->add_option("--eps", vb_eps)->required();
  vb->add_option("--jmax", vb_jmax);
  vb->add_option("--tmax", vb_tmax);

  // oracle-compare
  double oc_p = 2, oc_eps = 0.1, oc_dr = 1.0 / 16, oc_tmax = 8;
  int oc_levels = 3;
  auto* oc = app.add_subcommand("oracle-compare", "finite differences against the integral solver");
  oc->add_option("--p", oc_p)->required();
  oc->add_option("--eps", oc_eps)->required();
  oc->add_option("--dr", oc_dr);
  oc->add_option("--tmax", oc_tmax);
  oc->add_option("--levels", oc_levels, "number of halvings of dr");

  CLI11_PARSE(app, argc, argv);
  std::cout << std::setprecision(17);

  try {
    if (*ex) {
      const ExponentReport r = exponent_report(ex_p, ex_n);
      std::cout << std::left << std::setw(20) << "p" << r.p << '\n'
                << std::setw(20) << "n" << r.n << '\n'
                << std::setw(20) << "gamma(p,n)" << r.gamma << '\n'
                << std::setw(20) << "strauss p_S(n)" << r.strauss << '\n'
                << std::setw(20) << "fujita p_F(n)" << r.fujita << '\n'
                << std::setw(20) << "q" << r.q << '\n'
                << std::setw(20) << "q_bar" << r.q_bar << '\n'
                << std::setw(20) << "m(p)" << r.m << '\n'
                << std::setw(20) << "lifespan exponent" << r.lifespan_exponent << '\n'
                << std::setw(20) << "regime" << to_string(r.regime) << "\n\n";
      std::cout << "p,n,gamma,strauss,fujita,q,q_bar,m,lifespan_exponent,regime\n"
                << r.p << ',' << r.n << ',' << r.gamma << ',' << r.strauss << ',' << r.fujita
                << ',' << r.q << ',' << r.q_bar << ',' << r.m << ',' << r.lifespan_exponent
                << ',' << to_string(r.regime) << '\n';
      return 0;
    }

    if (*so) {
      const RadialProfile f = zero_profile(so_rho);
      const RadialProfile gg = make_bump(so_rho, 1.0, so_k);
      const Lattice lat = make_lattice(so_h, so_tmax, so_rho);
      SolveResult res;
      if (so_mode == "march") {
        const LinearSolution lin(f, gg, so_eps, h_table_step(so_h, so_rho));
        res = causal_march(lin, lat, so_p);
      } else {
        const CharField u0 = linear_solution(f, gg, so_eps, lat);
        res = so_mode == "picard" ? picard_solve(u0, so_p, so_tmax)
                                  : perturbed_picard_solve(u0, so_p, so_tmax);
      }
      auto os = open_out(g, "field.csv");
      write_field_csv(os, res.field);
      nlohmann::json j;
      j["mode"] = so_mode;
      j["status"] = to_string(res.status);
      j["blowup_time"] = res.blowup_time ? nlohmann::json(*res.blowup_time) : nlohmann::json();
      j["iterations"] = res.iterations;
      j["max_abs_u"] = json_safe(res.max_abs_u);
      if (res.field.all_finite() && res.field.nt() > 0) {
        j["weighted_norm"] = weighted_norm(res.field, make_weight_spec(so_p, so_rho));
        j["zero_norm"] = zero_norm(res.field, so_rho);
      }
      if (res.contraction_ratio) j["contraction_ratio"] = *res.contraction_ratio;
      j["field_csv"] = (fs::path(g.out) / "field.csv").string();
      std::cout << j.dump(2) << '\n';
      return 0;
    }

    if (*sw) {
      const SweepConfig cfg = base_config(g, sw_p);
      for (const auto& w : validate(cfg)) std::cerr << "warning: " << w << '\n';
      const auto rows = lifespan_sweep(cfg);
      const LifespanFit fit = fit_scaling(rows, cfg.p);
      const SweepPredictions pred = predict_bounds(cfg, rows);
      write_report(g.out, cfg, fit, pred);
      write_summary(std::cout, cfg, fit, pred);
      return 0;
    }

    if (*fi) {
      std::ifstream in(fi_in);
      if (!in) throw std::runtime_error("cannot open " + fi_in);
      const LifespanFit fit = fit_scaling(read_sweep_csv(in), fi_p);
      auto os = open_out(g, "fit.csv");
      write_fit_csv(os, fit);
      write_fit_csv(std::cout, fit);
      return 0;
    }

    if (*ve) {
      SampleBattery b = standard_battery(ve_rho, ve_h);
      const Lattice lat = b.fields.front().lattice();
      std::mt19937_64 rng(g.seed);
      std::uniform_int_distribution<int> kd(3, 8);
      std::uniform_real_distribution<double> ed(0.02, 0.3), ad(0.25, 2.0);
      for (int s = 0; s < ve_random; ++s) {
        const int k = kd(rng);
        const double e = ed(rng), a = ad(rng);
        b.fields.push_back(linear_solution(zero_profile(ve_rho), make_bump(ve_rho, a, k), e, lat));
        b.epsilons.push_back(e);
      }
      const std::vector<double> horizons{4 * ve_rho, 8 * ve_rho, 16 * ve_rho, 32 * ve_rho};
      EstimateReport rep;
      if (ve_lemma == "apriori") {
        rep = verify_apriori(b.fields, ve_p, ve_rho, horizons);
      } else {
        rep = verify_crossterm(b.fields.front(), b.fields, ve_nu, ve_p, ve_rho, horizons);
      }
      std::cout << "lemma " << to_string(rep.lemma_id) << " p " << rep.p << " rho " << rep.rho
                << " nu " << rep.nu << '\n'
                << "samples " << rep.samples << " max_ratio " << rep.max_ratio
                << " empirical_constant " << rep.empirical_constant << '\n'
                << "D(T_max) " << rep.D_of_T_used << " slope " << rep.slope
                << " pass " << (rep.pass ? "true" : "false") << '\n'
                << "worst " << rep.worst_sample << '\n';
      for (std::size_t k = 0; k < rep.horizons.size(); ++k)
        std::cout << "  T " << rep.horizons[k] << " ratio " << rep.ratio_by_T[k] << '\n';
      const fs::path path = fs::path(g.out) / "estimates.csv";
      const bool fresh = !fs::exists(path);
      auto os = open_out(g, "estimates.csv", true);
      if (fresh) os << "lemma,p,rho,nu,samples,empirical_constant,slope,pass\n";
      os << to_string(rep.lemma_id) << ',' << rep.p << ',' << rep.rho << ',' << rep.nu << ','
         << rep.samples << ',' << rep.empirical_constant << ',' << rep.slope << ','
         << (rep.pass ? 1 : 0) << '\n';
      return 0;
    }

    if (*vb) {
      const double rho = 1;
      const RadialProfile gg = make_bump(rho, 1.0, 4);
      const FirstStepConstants c = first_step_constants(gg, vb_eps, vb_p);
      const SequenceTable tab = build_sequences(vb_p, vb_eps, c.M, vb_jmax);
      {
        auto os = open_out(g, "sequences.csv");
        write_sequence_csv(os, tab);
      }
      write_sequence_csv(std::cout, tab);
      const Lattice lat = make_lattice(1.0 / 16, vb_tmax, rho);
      const LinearSolution lin(zero_profile(rho), gg, vb_eps, h_table_step(lat.h, rho));
      const SolveResult res = causal_march(lin, lat, vb_p);
      const DominationReport rep =
          domination_check(res.field, tab, make_slicing_levels(rho, vb_jmax), vb_jmax);
      const DominationLevel first = first_step_check(res.field, vb_p, vb_eps, c.M);
      {
        auto os = open_out(g, "domination.csv");
        write_domination_csv(os, rep);
      }
      std::cout << "\nfirst step: M=" << c.M << " M0=" << c.M0 << " a=" << c.a << " b=" << c.b
                << " nodes=" << first.nodes_checked << " violations=" << first.violations
                << " min_ratio=" << first.min_ratio << '\n';
      write_domination_csv(std::cout, rep);
      std::cout << "domination " << (rep.pass ? "pass" : "fail") << '\n';
      return 0;
    }

    if (*oc) {
      ModelParams mp;
      mp.p = oc_p;
      mp.epsilon = oc_eps;
      std::vector<double> drs;
      for (int k = 0; k < oc_levels; ++k) drs.push_back(oc_dr / std::pow(2.0, k));
      const auto rows = refinement_study(mp, zero_profile(1), make_bump(1, 1.0, 4), oc_tmax, drs);
      auto os = open_out(g, "oracle.csv");
      for (std::ostream* s : {static_cast<std::ostream*>(&os), static_cast<std::ostream*>(&std::cout)}) {
        *s << "dr,dt,max_disc,l2_disc,order_estimate\n";
        for (const auto& r : rows)
          *s << r.dr << ',' << r.dt << ',' << r.max_disc << ',' << r.l2_disc << ','
             << r.order_estimate << '\n';
      }
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
