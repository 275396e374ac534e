#pragma once

#include <cmath>
#include <cstddef>
#include <memory>
#include <vector>

#include "choq/errors.hpp"

namespace choq {

inline constexpr double kPi = 3.14159265358979323846;

// Surface area of the unit sphere S^{n-1} in R^n.
double sphere_area(int n);

enum class GridMode { Cartesian, Radial };

// Computational domain: either a cell-centered cube [-R,R]^3 (n=3 only) or a
// uniform radial grid r_i = (i+1)h on (0,R], any n >= 3. Immutable after
// construction; shared read-only across threads.
class Grid {
 public:
  static std::shared_ptr<const Grid> make_cartesian(double R, int points_per_axis,
                                                    int padding_factor);
  static std::shared_ptr<const Grid> make_radial(int n, double R, int radial_points,
                                                 int lmax, int padding_factor);

  GridMode mode() const { return mode_; }
  int dim() const { return n_; }
  double radius() const { return R_; }
  double spacing() const { return h_; }
  int pad() const { return pad_; }
  int lmax() const { return lmax_; }

  // Cartesian: points per axis. Radial: node count.
  int points() const { return P_; }
  std::size_t size() const { return size_; }

  // Quadrature weight of node i; weights sum exactly to the domain volume
  // ((2R)^3 cartesian, |B_R^n| radial).
  double weight(std::size_t i) const {
    return mode_ == GridMode::Cartesian ? cell_volume_ : w_[i];
  }
  double cell_volume() const { return cell_volume_; }
  double volume() const { return volume_; }

  // Cartesian axis coordinate of index m along one axis (cell center).
  double axis(int m) const { return -R_ + (m + 0.5) * h_; }
  std::size_t flat(int i, int j, int k) const {
    return (static_cast<std::size_t>(i) * P_ + j) * P_ + k;
  }
  // |x| at a cartesian node.
  double cart_rad(int i, int j, int k) const {
    double x = axis(i), y = axis(j), z = axis(k);
    return std::sqrt(x * x + y * y + z * z);
  }

  // Radial node r_i = (i+1)h, i = 0..N-1; the last node sits on r = R where
  // homogeneous Dirichlet data lives.
  double rnode(std::size_t i) const { return r_[i]; }
  const std::vector<double>& rnodes() const { return r_; }
  const std::vector<double>& weights() const { return w_; }

  bool same_as(const Grid& o) const;

 private:
  Grid() = default;
  GridMode mode_ = GridMode::Cartesian;
  int n_ = 3;
  double R_ = 0, h_ = 0;
  int P_ = 0, pad_ = 2, lmax_ = 0;
  std::size_t size_ = 0;
  double cell_volume_ = 0, volume_ = 0;
  std::vector<double> r_, w_;
};

using GridPtr = std::shared_ptr<const Grid>;

enum class FieldRole { Potential, Density, Confinement, Generic };

// A real scalar function sampled on a grid.
struct ScalarField {
  GridPtr grid;
  FieldRole role = FieldRole::Generic;
  std::vector<double> v;

  ScalarField() = default;
  ScalarField(GridPtr g, FieldRole r = FieldRole::Generic, double fill = 0.0)
      : grid(std::move(g)), role(r), v(grid->size(), fill) {}

  std::size_t size() const { return v.size(); }
  double& operator[](std::size_t i) { return v[i]; }
  double operator[](std::size_t i) const { return v[i]; }
};

// Quadrature inner product / integral / norms over the field's grid.
double dot(const ScalarField& f, const ScalarField& g);
double integral(const ScalarField& f);
double norm2(const ScalarField& f);       // sqrt(dot(f,f))
double max_abs(const ScalarField& f);

void check_same_grid(const ScalarField& a, const ScalarField& b, const char* where);

// Validates the density-role invariants: nonnegative samples (within -1e-10)
// and finiteness. Throws NegativeDensity / NonFiniteField.
void check_density(const ScalarField& rho);

}  // namespace choq
