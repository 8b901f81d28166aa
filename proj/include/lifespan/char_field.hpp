#pragma once

// Space-time lattice with step h in both r and t. The r nodes are staggered,
// r_i = (i + 1/2) h, so r = 0 is never a node; t_j = j h starts at t = 0.
// Along a node's backward diamond, t+r and t-r are multiples of h/2.

#include <Eigen/Core>

#include <cmath>
#include <iosfwd>
#include <limits>
#include <stdexcept>
#include <string>

namespace lifespan {

using FieldArray = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class OriginPolicy { StaggeredEvenExtrapolation };

struct Lattice {
  double h = 0;
  double t_max = 0;
  double rho = 1;  // support radius of the data; sizes the r range
  int nt = 0;      // time levels t_0..t_{nt-1}
  int nr = 0;      // r nodes r_0..r_{nr-1}

  double r(int i) const { return (i + 0.5) * h; }
  double t(int j) const { return j * h; }

  /// Exclusive upper bound on the r index that can be nonzero at level j.
  int support_end(int j) const {
    const int end = static_cast<int>(std::ceil((t(j) + rho) / h)) + 1;
    return end < nr ? end : nr;
  }

  bool operator==(const Lattice& o) const {
    return h == o.h && nt == o.nt && nr == o.nr && rho == o.rho;
  }
};

/// Lattice covering [0, t_max] and the whole forward light cone r < t + rho.
inline Lattice make_lattice(double h, double t_max, double rho) {
  if (!(h > 0) || !(t_max >= 0) || !(rho > 0))
    throw std::invalid_argument("make_lattice: need h > 0, t_max >= 0, rho > 0");
  Lattice lat;
  lat.h = h;
  lat.rho = rho;
  lat.nt = static_cast<int>(std::llround(t_max / h)) + 1;
  lat.t_max = (lat.nt - 1) * h;
  lat.nr = static_cast<int>(std::ceil((lat.t_max + rho) / h)) + 2;
  return lat;
}

/// Phi = r * u~(r, t) on a lattice; rows are time levels, columns r nodes.
class CharField {
 public:
  CharField() = default;
  explicit CharField(const Lattice& lat)
      : lattice_(lat), phi_(FieldArray::Zero(lat.nt, lat.nr)) {}
  CharField(const Lattice& lat, FieldArray phi) : lattice_(lat), phi_(std::move(phi)) {
    if (phi_.rows() != lat.nt || phi_.cols() != lat.nr)
      throw std::invalid_argument("CharField: array shape does not match lattice");
  }

  const Lattice& lattice() const { return lattice_; }
  double h() const { return lattice_.h; }
  double t_max() const { return lattice_.t_max; }
  double rho() const { return lattice_.rho; }
  int nt() const { return lattice_.nt; }
  int nr() const { return lattice_.nr; }
  OriginPolicy origin_policy() const { return OriginPolicy::StaggeredEvenExtrapolation; }

  const FieldArray& values() const { return phi_; }
  FieldArray& values() { return phi_; }

  double phi(int j, int i) const { return phi_(j, i); }
  double& phi(int j, int i) { return phi_(j, i); }
  double u(int j, int i) const { return phi_(j, i) / lattice_.r(i); }

  /// u~(0, t_j) from the even quadratic through the two innermost nodes.
  double u_origin(int j) const { return (9.0 * u(j, 0) - u(j, 1)) / 8.0; }

  /// The recovered u~ = Phi / r on every node.
  FieldArray u_values() const {
    FieldArray out(phi_.rows(), phi_.cols());
    for (int i = 0; i < nr(); ++i) out.col(i) = phi_.col(i) / lattice_.r(i);
    return out;
  }

  double max_abs_u() const { return u_values().abs().maxCoeff(); }
  bool all_finite() const { return phi_.allFinite(); }

  /// Levels t_j <= T only.
  CharField truncated(double T) const;

  CharField& operator+=(const CharField& o) {
    check_same(o);
    phi_ += o.phi_;
    return *this;
  }
  CharField& operator-=(const CharField& o) {
    check_same(o);
    phi_ -= o.phi_;
    return *this;
  }
  CharField& operator*=(double c) {
    phi_ *= c;
    return *this;
  }
  friend CharField operator+(CharField a, const CharField& b) { return a += b; }
  friend CharField operator-(CharField a, const CharField& b) { return a -= b; }
  friend CharField operator*(double c, CharField a) { return a *= c; }

  void check_same(const CharField& o) const {
    if (!(lattice_ == o.lattice_)) throw std::invalid_argument("CharField: lattice mismatch");
  }

 private:
  Lattice lattice_;
  FieldArray phi_;
};

inline CharField CharField::truncated(double T) const {
  Lattice lat = lattice_;
  const int levels = static_cast<int>(std::floor(T / lattice_.h + 1e-9)) + 1;
  lat.nt = levels < lattice_.nt ? levels : lattice_.nt;
  lat.t_max = (lat.nt - 1) * lat.h;
  return CharField(lat, phi_.topRows(lat.nt));
}

/// Header `r,t,phi,u`, one row per node, row-major in t then r.
void write_field_csv(std::ostream& os, const CharField& field);

}  // namespace lifespan
