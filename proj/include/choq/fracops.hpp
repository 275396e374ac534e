#pragma once

#include <complex>
#include <memory>
#include <vector>

#include "choq/fft.hpp"
#include "choq/grid.hpp"

namespace choq {

// Riesz kernel constant A(alpha) with I_alpha = A(alpha) |x|^{alpha-n}.
// DomainError if alpha >= n.
double riesz_constant(double alpha, int n);

// Integral of |z|^{alpha-3} over the origin cell [-h/2,h/2]^3 (n = 3).
// Reduced to a smooth 2D integral over one cube face patch and evaluated by
// tensor Gauss-Legendre; used to regularize the kernel table at zero offset.
double singular_cell_integral(double alpha, double h);

// Free-space operators on the cartesian grid, realized on the zero-padded
// periodic box of edge pad*2R (Hockney). The spectral pair (frac_laplacian,
// hnorm) shares the multiplier |xi|^alpha, so the quadratic form and the
// operator are adjoint-consistent on the grid by construction.
class CartFracOps {
 public:
  CartFracOps(GridPtr grid, double alpha);

  double alpha() const { return alpha_; }
  const GridPtr& grid() const { return g_; }

  // (-Delta)^{alpha/2} V via the multiplier |xi|^alpha on the padded box.
  ScalarField frac_laplacian(const ScalarField& V) const;

  // I_alpha * rho, zero-padded convolution with the tabulated
  // A(alpha)|x|^{alpha-n} kernel (origin cell replaced by its cell average).
  ScalarField riesz_convolve(const ScalarField& rho) const;

  // <V,V>_{alpha/2} and its bilinear companion, computed spectrally.
  double hnorm(const ScalarField& V) const;
  double hnorm_inner(const ScalarField& U, const ScalarField& V) const;

  // Kernel profile along the +x axis: (offset, distance, value). Audit dump.
  std::vector<std::array<double, 3>> kernel_axis_profile() const;

  // Periodic-core entry points on full padded Q^3 arrays, where the spectral
  // identities are exact (symbol calibration tests).
  void frac_laplacian_padded(std::vector<double>& data) const;
  double hnorm_padded(const std::vector<double>& data) const;
  int padded_points() const { return Q_; }

 private:
  void pad_field(const ScalarField& f, std::vector<double>& out) const;
  void extract_box(const std::vector<double>& in, ScalarField& out) const;

  GridPtr g_;
  double alpha_;
  int Q_;
  Fft3 fft_;
  std::vector<double> symbol_;                     // |xi|^alpha, r2c layout
  std::vector<std::complex<double>> kernel_hat_;   // DFT(kernel) * h^3, corrected
  double corr_scale_ = 0;                          // C(alpha) h^alpha local term
};

// O(h^alpha) lattice discrepancy constant of the tabulated kernel sum.
double kernel_lattice_constant(double alpha);

// Poisson solve -Delta V = rho on the ball B_R (R <= grid radius) with V = 0
// outside, via preconditioned CG on the masked 7-point stencil. Throws
// SupportViolation if rho lives outside the ball.
ScalarField dirichlet_green_cartesian(const ScalarField& rho, double R,
                                      double tol = 1e-12, int max_iter = 2000);

// Masked stencil application y = (-Delta_h V) restricted to |x| < R, and the
// associated quadratic form <V, -Delta_h V> (exactly consistent with
// dirichlet_green_cartesian).
ScalarField ball_laplacian_apply(const ScalarField& V, double R);
double ball_h1_form(const ScalarField& V, double R);

// ---- radial operators (any n >= 3) ----

enum class RadialBC {
  FreeSpace,  // Dirichlet data at r=R from the exact exterior multipole value
  BallZero,   // homogeneous Dirichlet at r=R (ball-truncated problem)
};

// alpha = 2 Newton solve: tridiagonal inversion of the conservative radial
// Laplacian stencil, exact for rho supported inside the grid.
ScalarField riesz_radial(const ScalarField& rho, RadialBC bc);

// Dirichlet Green function of the ball B_R for R <= grid radius.
ScalarField dirichlet_green_radial(const ScalarField& rho, double R);

// (n, alpha) = (3, 1): angular-averaged log kernel
//   V(r) = (1/pi) \int rho(r') (r'/r) log((r+r')/|r-r'|) dr'.
ScalarField riesz_radial_log31(const ScalarField& rho);

// Conservative radial Laplacian apply (-Delta V)_i; the last node is treated
// as the boundary row (no exterior flux).
ScalarField radial_laplacian_apply(const ScalarField& V);

// <V,V>_{alpha/2} on the radial grid. alpha=2: face-difference gradient
// quadrature, plus the exact exterior-tail energy when free_tail is set.
// alpha<2 requires n=3 and uses the sine-transform (Hankel) representation.
double hnorm_radial(const ScalarField& V, double alpha, bool free_tail = true);

// Residual of the radial stencil equation -Delta V = rho over interior nodes,
// in the quadrature L2 norm.
double radial_poisson_residual(const ScalarField& V, const ScalarField& rho);

// Mode-dispatching wrappers implementing the public operation contracts.
// Cartesian: spectral multiplier / Hockney kernel. Radial: alpha=2 uses the
// exact radial stencil and the Newton tridiagonal solve; (n,alpha)=(3,1)
// riesz uses the angular-averaged log kernel; other radial alpha<2
// combinations refuse (UnsupportedRadialFractional).
ScalarField frac_laplacian(const ScalarField& V, double alpha);
ScalarField riesz_convolve(const ScalarField& rho, double alpha);
double hnorm(const ScalarField& V, double alpha);

}  // namespace choq
