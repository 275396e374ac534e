#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "choq/fracops.hpp"
#include "choq/grid.hpp"
#include "choq/model.hpp"
#include "choq/spectrum.hpp"

namespace choq {

// Which realization of the Riesz map the solve couples to. Ball is the
// ball-truncated problem (Dirichlet Green function); FreeSpace the whole-space
// kernel. Each realization owns a quadratic form that is exactly the inverse
// of its solve map on the grid, so the DC descent test and the Euler-Lagrange
// residual are meaningful to solver precision.
enum class RieszRealization { FreeSpace, Ball };

enum class SolveStatus { Converged, Stalled, UnboundedSuspected };

struct SolverOptions {
  std::optional<RieszRealization> riesz;  // default: Ball for cartesian alpha=2,
                                          // FreeSpace otherwise
  std::string init = "zero";              // zero | thomas-fermi
  double theta0 = 1.0;
  double theta_min = 1e-4;
  double tol_h_rel = 1e-10;
  double tol_el = 1e-6;
  int max_iters = 500;
  double h_floor = -1e6;        // runaway guards
  double hnorm_ceiling = 1e8;
  EigOptions eig;
};

struct IterRecord {
  int iter;
  double H, G, quad, el_residual, theta;
};

struct SolveReport {
  std::vector<IterRecord> trace;
  ScalarField V;
  OrbitalFrame frame;
  double H = 0, G = 0, quad = 0;
  double el_residual = 0;
  double fixed_point_residual = 0;
  SolveStatus status = SolveStatus::Stalled;
  int iterations = 0;
};

// Shared mean-field machinery: the (quadratic form, Riesz map) pair for one
// grid and realization. Used by both the dual SCF loop and the primal
// energy/gradient so the two sides of the duality identity live in one
// discrete model.
class RieszSolver {
 public:
  RieszSolver(const ProblemSpec& spec, GridPtr grid, RieszRealization realization);

  RieszRealization realization() const { return realization_; }
  const GridPtr& grid() const { return grid_; }

  // Exact minimizer of the convex part against a linearized concave part.
  ScalarField apply(const ScalarField& rho) const;
  // <V,V>_{alpha/2} in this realization's discretization.
  double quad_form(const ScalarField& V) const;
  // <rho, apply(rho)> without forming the potential twice.
  double self_energy(const ScalarField& rho) const;

  // Consistent Euler-Lagrange residual |(-Delta)^{a/2} V - rho| / (1+|rho|);
  // realizations without a pointwise operator (cartesian free space with
  // alpha < 2) fall back to the equivalent fixed-point form
  // |V - I_alpha rho| / (1 + |I_alpha rho|).
  double el_residual(const ScalarField& V, const ScalarField& rho) const;
  double fixed_point_residual(const ScalarField& V, const ScalarField& rho) const;

  const CartFracOps* cart_ops() const { return cart_.get(); }

 private:
  ProblemSpec spec_;
  GridPtr grid_;
  RieszRealization realization_;
  std::shared_ptr<const CartFracOps> cart_;
};

// Orchestrates h evaluation and the monotone SCF/DC iteration.
class DualSolver {
 public:
  DualSolver(ProblemSpec spec, SolverOptions opt = {});

  const ProblemSpec& spec() const { return spec_; }
  const GridPtr& grid() const { return grid_; }
  const ScalarField& confinement() const { return W_; }
  const RieszSolver& riesz() const { return riesz_; }
  const SolverOptions& options() const { return opt_; }

  ScalarField zero_potential() const { return ScalarField(grid_, FieldRole::Potential); }
  ScalarField thomas_fermi_seed() const;

  // H = (a/2) <V,V> + sum beta_j lambda_j(V) in the solver's realization.
  double h_value(const ScalarField& V, GEvaluation* ev_out = nullptr) const;

  // One mixed DC step: (1-theta) V + theta I_alpha(rho(V)).
  ScalarField scf_step(const ScalarField& V, double theta) const;

  SolveReport solve(const ScalarField* init = nullptr, int start_iter = 0) const;

 private:
  ProblemSpec spec_;
  SolverOptions opt_;
  GridPtr grid_;
  ScalarField W_;
  RieszSolver riesz_;
};

// Operation-level wrappers (free-space spectral convention, as the public
// contracts state them).
double h_value(const ProblemSpec& spec, const ScalarField& V);
ScalarField scf_step(const ProblemSpec& spec, const ScalarField& V, double theta);
SolveReport solve_dual(const ProblemSpec& spec, const SolverOptions& opt = {},
                       const ScalarField* init = nullptr);
double el_residual(const ProblemSpec& spec, const ScalarField& V);

}  // namespace choq
