#pragma once

// Radially symmetric data, the profile H of the free solution, and the free
// wave u^0 written through d'Alembert's formula for r * u~^0.

#include "lifespan/char_field.hpp"

#include <Eigen/Core>

#include <functional>
#include <string>

namespace lifespan {

/// A compactly supported function of r >= 0.
class RadialProfile {
 public:
  RadialProfile() = default;
  RadialProfile(std::function<double(double)> eval, double support_radius, int smoothness_order,
                double amplitude, std::string kind)
      : eval_(std::move(eval)),
        support_radius_(support_radius),
        smoothness_order_(smoothness_order),
        amplitude_(amplitude),
        kind_(std::move(kind)) {}

  double operator()(double r) const {
    if (r >= support_radius_ || !eval_) return 0.0;
    return eval_(r);
  }
  double support_radius() const { return support_radius_; }
  int smoothness_order() const { return smoothness_order_; }
  double amplitude() const { return amplitude_; }
  const std::string& kind() const { return kind_; }
  bool is_zero() const { return !eval_ || amplitude_ == 0.0; }

 private:
  std::function<double(double)> eval_;
  double support_radius_ = 1;
  int smoothness_order_ = 0;
  double amplitude_ = 0;
  std::string kind_ = "zero";
};

/// amplitude * (1 - (r/rho)^2)^k on r <= rho. Requires rho >= 1, k >= 3.
RadialProfile make_bump(double rho, double amplitude, int k);
RadialProfile zero_profile(double rho);
RadialProfile operator+(const RadialProfile& a, const RadialProfile& b);
RadialProfile operator*(double c, const RadialProfile& a);

/// Spherical average over |xi| = 1. Data that is constant on spheres is its
/// own mean, so this returns the input.
inline RadialProfile spherical_mean(const RadialProfile& profile) { return profile; }

/// H(s) = -eps * int_s^inf sigma g(sigma) d sigma, tabulated on s_k = k * step
/// by the composite trapezoid rule and linearly interpolated in between.
class ProfileH {
 public:
  ProfileH() = default;
  ProfileH(double rho, double step, double epsilon, Eigen::ArrayXd table)
      : rho_(rho), step_(step), epsilon_(epsilon), table_(std::move(table)) {}

  /// For s <= 0 the integrand contributes nothing below 0, so H(s) = H(0).
  double operator()(double s) const;
  double rho() const { return rho_; }
  double quadrature_step() const { return step_; }
  double epsilon() const { return epsilon_; }
  const Eigen::ArrayXd& table() const { return table_; }

 private:
  double rho_ = 1;
  double step_ = 0;
  double epsilon_ = 0;
  Eigen::ArrayXd table_;
};

/// Throws std::invalid_argument for step > rho/8.
ProfileH compute_H(const RadialProfile& g, double epsilon, double step);

/// Phi^0 = r u~^0 for data (eps f, eps (f + g)) of the transformed problem,
/// evaluated at arbitrary (r, t). For f == 0 this is (H(t+r) - H(|t-r|)) / 2.
class LinearSolution {
 public:
  LinearSolution(const RadialProfile& f, const RadialProfile& g, double epsilon, double step);

  double phi(double r, double t) const;
  double u(double r, double t) const { return phi(r, t) / r; }
  double epsilon() const { return epsilon_; }
  double rho() const { return rho_; }
  const ProfileH& H() const { return H_; }

 private:
  RadialProfile f_;
  double epsilon_;
  double rho_;
  ProfileH H_;  // built from f + g
};

/// Quadrature step used for a lattice of step h: h/2, refined until it is
/// also <= rho/8, so that every t +- r on the lattice is a table node.
double h_table_step(double h, double rho);

CharField linear_solution(const RadialProfile& f, const RadialProfile& g, double epsilon,
                          const Lattice& lattice);

struct DataNorms {
  double N_0 = 0;
  double gamma_lin = 0;
};

/// N_0 of the data: sup norms of f up to order 2 and of f, g up to order 1,
/// with the rho-weights of the decay estimate. Radial derivatives are taken
/// by central differences; each Cartesian derivative of a radial function is
/// bounded through g', g'' and g'/r.
double data_norm_N0(const RadialProfile& f, const RadialProfile& g);

struct LinearDecayReport {
  DataNorms norms;
  double support_max = 0;  // max |u~^0| over nodes with |t - r| >= rho
  bool finite = true;
};

/// Smallest gamma_lin with |u~^0| <= eps gamma_lin ((t+rho)/rho)^{-1} N_0 on
/// the lattice.
LinearDecayReport verify_linear_decay(const CharField& field, double epsilon, double N_0);

}  // namespace lifespan
