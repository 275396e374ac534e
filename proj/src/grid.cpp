#include "choq/grid.hpp"

#include <algorithm>
#include <cmath>

namespace choq {

double sphere_area(int n) {
  // |S^{n-1}| = 2 pi^{n/2} / Gamma(n/2)
  return 2.0 * std::pow(kPi, 0.5 * n) / std::tgamma(0.5 * n);
}

std::shared_ptr<const Grid> Grid::make_cartesian(double R, int points_per_axis,
                                                 int padding_factor) {
  if (R <= 0) fail("BadGrid", "R must be positive");
  if (points_per_axis < 16) fail("BadGrid", "points_per_axis must be >= 16");
  if (padding_factor < 2) fail("BadGrid", "padding_factor must be >= 2");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->mode_ = GridMode::Cartesian;
  g->n_ = 3;
  g->R_ = R;
  g->P_ = points_per_axis;
  g->pad_ = padding_factor;
  g->h_ = 2.0 * R / points_per_axis;
  g->size_ = static_cast<std::size_t>(points_per_axis) * points_per_axis * points_per_axis;
  g->cell_volume_ = g->h_ * g->h_ * g->h_;
  g->volume_ = 8.0 * R * R * R;
  return g;
}

std::shared_ptr<const Grid> Grid::make_radial(int n, double R, int radial_points,
                                              int lmax, int padding_factor) {
  if (n < 3) fail("BadGrid", "radial grid needs n >= 3");
  if (R <= 0) fail("BadGrid", "R must be positive");
  if (radial_points < 16) fail("BadGrid", "radial_points must be >= 16");
  if (lmax < 0) fail("BadGrid", "lmax must be >= 0");
  auto g = std::shared_ptr<Grid>(new Grid());
  g->mode_ = GridMode::Radial;
  g->n_ = n;
  g->R_ = R;
  g->P_ = radial_points;
  g->pad_ = std::max(2, padding_factor);
  g->lmax_ = lmax;
  g->h_ = R / radial_points;
  g->size_ = radial_points;
  g->cell_volume_ = g->h_;
  const double sig = sphere_area(n);
  g->r_.resize(radial_points);
  g->w_.resize(radial_points);
  // Exact-cell weights: cell i spans [r_i - h/2, r_i + h/2] clipped to [0,R];
  // the innermost cell absorbs [0, h/2] so the weights sum to |B_R| exactly.
  for (int i = 0; i < radial_points; ++i) {
    double r = (i + 1) * g->h_;
    g->r_[i] = r;
    double a = (i == 0) ? 0.0 : r - 0.5 * g->h_;
    double b = (i == radial_points - 1) ? R : r + 0.5 * g->h_;
    g->w_[i] = sig * (std::pow(b, n) - std::pow(a, n)) / n;
  }
  g->volume_ = sig * std::pow(R, n) / n;
  return g;
}

bool Grid::same_as(const Grid& o) const {
  return mode_ == o.mode_ && n_ == o.n_ && R_ == o.R_ && P_ == o.P_ && pad_ == o.pad_;
}

double dot(const ScalarField& f, const ScalarField& g) {
  check_same_grid(f, g, "dot");
  const Grid& gr = *f.grid;
  double s = 0;
  if (gr.mode() == GridMode::Cartesian) {
    for (std::size_t i = 0; i < f.size(); ++i) s += f.v[i] * g.v[i];
    return s * gr.cell_volume();
  }
  const auto& w = gr.weights();
  for (std::size_t i = 0; i < f.size(); ++i) s += f.v[i] * g.v[i] * w[i];
  return s;
}

double integral(const ScalarField& f) {
  const Grid& gr = *f.grid;
  double s = 0;
  if (gr.mode() == GridMode::Cartesian) {
    for (double x : f.v) s += x;
    return s * gr.cell_volume();
  }
  const auto& w = gr.weights();
  for (std::size_t i = 0; i < f.size(); ++i) s += f.v[i] * w[i];
  return s;
}

double norm2(const ScalarField& f) { return std::sqrt(std::max(0.0, dot(f, f))); }

double max_abs(const ScalarField& f) {
  double m = 0;
  for (double x : f.v) m = std::max(m, std::abs(x));
  return m;
}

void check_same_grid(const ScalarField& a, const ScalarField& b, const char* where) {
  if (!a.grid || !b.grid || !a.grid->same_as(*b.grid))
    fail("GridMismatch", std::string("fields on different grids in ") + where);
}

void check_density(const ScalarField& rho) {
  for (double x : rho.v) {
    if (!std::isfinite(x)) fail("NonFiniteField", "density has non-finite samples");
    if (x < -1e-10) fail("NegativeDensity", "density sample below -1e-10");
  }
}

}  // namespace choq
