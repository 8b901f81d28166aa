#include "doctest.h"

#include "lifespan/fd_oracle.hpp"

#include <cmath>

using namespace lifespan;

namespace {

// v = exp(-r^2) cos t solves the damped linear equation with this source.
double mms_source(double r, double t) {
  return std::exp(-r * r) * ((5 - 4 * r * r) * std::cos(t) - 2 * std::sin(t) / (1 + t));
}

double mms_error(double dr) {
  ModelParams mp;
  mp.epsilon = 1;
  const RadialProfile f([](double r) { return std::exp(-r * r); }, 8, 100, 1, "gauss");
  const FDGrid grid = make_fd_grid(dr, dr / 2, 2, 1, 8.0);
  FDOptions opt;
  opt.nonlinear = false;
  opt.source = mms_source;
  const FDResult res = fd_solve(mp, f, zero_profile(8), grid, opt);
  double err = 0;
  for (int n = 0; n < static_cast<int>(res.times.size()); ++n)
    for (int i = 0; i < grid.nr; ++i) {
      const double r = grid.r(i);
      err = std::max(err, std::abs(res.v(n, i) - std::exp(-r * r) * std::cos(res.times[n])));
    }
  return err;
}

}  // namespace

TEST_CASE("grid construction") {
  const FDGrid g = make_fd_grid(0.1, 0.05, 2, 1);
  CHECK(g.r_max == doctest::Approx(3.4));
  CHECK(g.nt == 41);
  CHECK(g.r(0) == doctest::Approx(0.05));
  CHECK_THROWS_AS(make_fd_grid(0.1, 0.095, 2, 1), std::invalid_argument);
  CHECK_THROWS_AS(make_fd_grid(0.1, 0.05, 2, 1, 2.5), std::invalid_argument);
}

TEST_CASE("manufactured solution converges at second order") {
  const double e1 = mms_error(1.0 / 16), e2 = mms_error(1.0 / 32), e3 = mms_error(1.0 / 64);
  CHECK(e2 < e1);
  CHECK(std::log(e2 / e3) / std::log(2.0) >= 1.8);
  CHECK(e3 < 1e-3);
}

TEST_CASE("zero data stays zero") {
  ModelParams mp;
  const FDGrid grid = make_fd_grid(1.0 / 16, 1.0 / 32, 4, 1);
  const FDResult res = fd_solve(mp, zero_profile(1), zero_profile(1), grid);
  CHECK(res.v.abs().maxCoeff() == 0.0);
  CHECK(res.finite);
  CHECK_FALSE(res.blowup_time);
}

TEST_CASE("positivity and finite propagation") {
  ModelParams mp;
  mp.p = 1.5;
  mp.epsilon = 0.3;
  const double dr = 1.0 / 32;
  const FDGrid grid = make_fd_grid(dr, dr / 2, 6, 1);
  const FDResult res = fd_solve(mp, zero_profile(1), make_bump(1, 1, 4), grid);
  REQUIRE(res.finite);
  const double vmax = res.v.abs().maxCoeff();
  CHECK(res.v.minCoeff() >= -1e-8 * vmax);
  double ahead = 0;
  for (int n = 0; n < static_cast<int>(res.times.size()); ++n) {
    const double t = res.times[n];
    for (int i = 0; i < grid.nr; ++i) {
      const double r = grid.r(i);
      // The leapfrog stencil moves one cell per step.
      if (r > 1 + n * dr + dr) CHECK(res.v(n, i) == 0.0);
      if (r >= t + 1 + 2 * dr) ahead = std::max(ahead, std::abs(res.v(n, i)));
    }
  }
  CHECK(ahead <= 1e-3 * vmax);
}

TEST_CASE("initial velocity") {
  ModelParams mp;
  mp.epsilon = 0.2;
  const double dr = 1.0 / 256;
  const auto g = make_bump(1, 1, 4);
  const FDGrid grid = make_fd_grid(dr, dr / 2, 0.1, 1);
  const FDResult res = fd_solve(mp, zero_profile(1), g, grid);
  for (int i : {2, 40, 120, 200}) {
    const double vt = (res.v(1, i) - res.v(0, i)) / grid.dt;
    CHECK(vt == doctest::Approx(0.2 * g(grid.r(i))).epsilon(1e-2).scale(1e-3));
  }
}

TEST_CASE("linear FD matches the transformed free solution") {
  ModelParams mp;
  mp.epsilon = 0.2;
  const auto f = make_bump(1, 0.5, 4), g = make_bump(1, 1, 4);
  const double h = 1.0 / 32;
  FDOptions opt;
  opt.nonlinear = false;
  opt.output_stride = 2;
  const FDResult fd = fd_solve(mp, f, g, make_fd_grid(h, h / 2, 6, 1), opt);
  const CharField u0 = linear_solution(f, g, 0.2, make_lattice(h, 6, 1));
  const auto rep = transform_compare(fd, u0);
  CHECK(rep.nodes > 0);
  CHECK(rep.max_disc < 0.02 * rep.max_abs_u);
}

TEST_CASE("transform comparison preconditions") {
  ModelParams mp;
  mp.mu = 3;
  const double h = 1.0 / 16;
  FDOptions opt;
  opt.output_stride = 2;
  const FDResult fd = fd_solve(mp, zero_profile(1), make_bump(1, 1, 4), make_fd_grid(h, h / 2, 2, 1), opt);
  const CharField u(make_lattice(h, 2, 1));
  CHECK_THROWS_AS(transform_compare(fd, u), std::invalid_argument);
  mp.mu = 2;
  opt.output_stride = 1;
  const FDResult fd1 = fd_solve(mp, zero_profile(1), make_bump(1, 1, 4), make_fd_grid(h, h / 2, 2, 1), opt);
  CHECK_THROWS_AS(transform_compare(fd1, u), std::invalid_argument);
}

TEST_CASE("blow-up in the FD solver") {
  ModelParams mp;
  mp.p = 1.5;
  mp.epsilon = 4;
  const double h = 1.0 / 16;
  const FDResult fd = fd_solve(mp, zero_profile(1), make_bump(1, 1, 4), make_fd_grid(h, h / 2, 80, 1));
  REQUIRE(fd.blowup_time);
  CHECK(*fd.blowup_time > 0);
  CHECK(*fd.blowup_time < 80);
}

TEST_CASE("refinement study") {
  ModelParams mp;
  mp.epsilon = 0.1;
  const auto rows = refinement_study(mp, zero_profile(1), make_bump(1, 1, 4), 4, {1.0 / 8, 1.0 / 16, 1.0 / 32});
  REQUIRE(rows.size() == 3);
  CHECK(std::isnan(rows[0].order_estimate));
  CHECK(rows[2].max_disc < rows[1].max_disc);
  CHECK(rows[2].order_estimate >= 1.0);
  CHECK(rows[2].dt == doctest::Approx(rows[2].dr / 2));
}
