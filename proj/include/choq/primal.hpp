#pragma once

#include <vector>

#include "choq/dualsolve.hpp"
#include "choq/grid.hpp"
#include "choq/model.hpp"
#include "choq/spectrum.hpp"

namespace choq {

struct PrimalOptions {
  std::optional<RieszRealization> riesz;  // defaults like the dual side
  double tol_grad = 1e-6;
  int max_iters = 5000;
  double step0 = 1e-2;
  EigOptions eig;  // bare-operator init frame
};

struct PrimalIterRecord {
  int iter;
  double E, gradnorm, orthodefect;
};

struct PrimalReport {
  OrbitalFrame frame;
  double E = 0;
  double gradnorm = 0;
  double offdiag = 0;  // max |<(L-aV)phi_j, phi_i>|, i != j, at the last iterate
  std::vector<PrimalIterRecord> trace;
  bool converged = false;
  int iterations = 0;
};

// E = (1/2) sum_j beta_j [ <<phi_j,phi_j>>_W - (a/2) sum_i beta_i
//     <|phi_j|^2, I_alpha |phi_i|^2> ], with the pair terms taken through the
// given Riesz realization. Throws NonOrthonormalFrame when the frame's
// orthonormality defect exceeds 1e-8.
double energy_primal(const ProblemSpec& spec, const OrbitalFrame& frame,
                     const RieszSolver& riesz);
double energy_primal(const ProblemSpec& spec, const OrbitalFrame& frame);

// Projected-gradient descent over orthonormal k-frames: tangent projection,
// sequential re-orthonormalization retraction, monotone backtracking line
// search with a Barzilai-Borwein trial step.
PrimalReport stiefel_descent(const ProblemSpec& spec, PrimalOptions opt = {},
                             const OrbitalFrame* init = nullptr);

// |H(V) - 2 E(frame)| / (1 + |H(V)|), both sides in one realization.
double duality_gap(const ProblemSpec& spec, const ScalarField& V,
                   const OrbitalFrame& frame, const RieszSolver& riesz,
                   const EigOptions& eig = {});

}  // namespace choq
