#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "choq/fft.hpp"
#include "choq/fracops.hpp"
#include "choq/grid.hpp"
#include "choq/model.hpp"

namespace choq {

// ---- operator assembly ----

// -Delta + W - aV on the cartesian box, 7-point stencil with zero ghost
// values one cell outside the grid.
struct BoxHamiltonian {
  GridPtr grid;
  std::vector<double> weff;  // W - aV at nodes
  void apply(const double* x, double* y) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
};

// One angular channel of the radial problem in the u = r^{(n-1)/2} phi
// variable: tridiagonal -u'' + [W - aV + ((n-1)(n-3)/4 + l(l+n-2))/r^2] u on
// interior nodes (homogeneous Dirichlet at r=0 and r=R).
struct RadialHamiltonian {
  GridPtr grid;
  int ell = 0;
  std::vector<double> diag, off;  // dimension N-1 and N-2
  static double centrifugal(int n, int ell, double r);
};

BoxHamiltonian assemble_box_hamiltonian(const ScalarField& W, const ScalarField& V,
                                        double a);
RadialHamiltonian assemble_radial_hamiltonian(const ScalarField& W,
                                              const ScalarField& V, double a, int ell);

// ---- eigensolvers ----

struct EigOptions {
  double tol = 1e-8;      // residual target, relative to 1 + |lambda|
  int max_iter = 5000;
  int extra = 4;          // extra block vectors beyond k
  int k_cap = 16;
  std::uint64_t seed = 1;
  bool require_convergence = true;
};

struct BlockEigResult {
  Eigen::MatrixXd X;              // size x m, Euclidean-orthonormal columns
  std::vector<double> lambda;     // ascending
  std::vector<double> residual;   // L2 quadrature residual norms
  int iterations = 0;
  bool converged = false;
};

// Preconditioned block (LOBPCG-style) extremal eigensolver with a DST-based
// (-Delta + sigma)^{-1} preconditioner and deterministic seeded start.
BlockEigResult lobpcg_lowest(const BoxHamiltonian& H, int k, const EigOptions& opt,
                             const Eigen::MatrixXd* warm = nullptr);

struct TridiagEig {
  std::vector<double> lambda;
  Eigen::MatrixXd U;  // interior-node eigenvectors, Euclidean-orthonormal
};

// (bare operator + sigma)^{-1} in the Euclidean coordinates of either mode:
// cartesian applies (-Delta_h + sigma)^{-1} through the sine transform, radial
// factorizes the l=0 tridiagonal with the confinement kept. Used as a metric
// preconditioner by the manifold descent.
class ShiftedInversePrecond {
 public:
  ShiftedInversePrecond(GridPtr grid, const ScalarField* W, double sigma);
  Eigen::VectorXd apply(const Eigen::VectorXd& r) const;

 private:
  GridPtr grid_;
  double sigma_;
  std::shared_ptr<Dst3> dst_;
  std::vector<double> sym_;
  double scale_ = 0;
  std::vector<double> thomas_c_, thomas_dinv_;  // radial prefactorization
};

// Lowest k eigenpairs of one radial channel (LAPACK stevr).
TridiagEig tridiag_lowest(const RadialHamiltonian& H, int k);
// All eigenpairs below zero, capped.
TridiagEig tridiag_negative(const RadialHamiltonian& H, int cap);

// ---- orbital frames ----

struct OrbitalFrame {
  std::vector<ScalarField> phi;   // quadrature-orthonormal eigenfunctions
  std::vector<double> lambda;     // ascending
  std::vector<double> residual;   // ||(L-aV-lambda)phi||_2
  std::vector<int> ell;           // angular channel (-1 in cartesian mode)
  std::vector<int> nodes;         // radial node count (cartesian: state index)
  bool degenerate_at_k = false;
  int iterations = 0;

  double orthonormality_defect() const;
};

// k lowest states of L^W - aV per the spec's solve contract: cartesian blocks
// via lobpcg (deterministic degenerate-subspace canonicalization, phase fixed
// by the largest-magnitude sample), radial via the l=0 sector.
OrbitalFrame lowest_eigs(const ProblemSpec& spec, const ScalarField& W,
                         const ScalarField& V, int k, const EigOptions& opt,
                         const OrbitalFrame* warm = nullptr,
                         Eigen::MatrixXd* block_out = nullptr,
                         const Eigen::MatrixXd* warm_block = nullptr);

// ---- merged radial spectrum (reporting / critical module) ----

struct MergedLevel {
  double lambda;
  int ell;
  int nodes;
  int degeneracy;
};

// Angular-momentum degeneracy dim of spherical harmonics of degree l on S^{n-1}.
int angular_degeneracy(int n, int ell);

// Channel-merged ascending spectrum of -Delta + W - aV with degeneracy labels
// (enough channels to cover kmax states, bounded by grid lmax).
std::vector<MergedLevel> radial_merged_spectrum(const ScalarField& W,
                                                const ScalarField& V, double a,
                                                int kmax);

// Negative eigenvalues of -Delta - aV (confinement off), merged across
// channels with multiplicity, ascending; at most max_count entries. Channels
// stop at the first non-binding l (centrifugal monotonicity).
std::vector<double> negative_levels_radial(const ScalarField& V, double a,
                                           int max_count);

// ---- the concave eigenvalue functional ----

struct GEvaluation {
  OrbitalFrame frame;
  double g = 0;
  Eigen::MatrixXd block;  // full eigensolver block (cartesian), for warm starts
};

GEvaluation eval_g(const ProblemSpec& spec, const ScalarField& W, const ScalarField& V,
                   const EigOptions& opt, const OrbitalFrame* warm = nullptr,
                   const Eigen::MatrixXd* warm_block = nullptr);

double g_value(const ProblemSpec& spec, const ScalarField& W, const ScalarField& V,
               const EigOptions& opt);

// rho = sum_j beta_j |phi_j|^2, role = density; integral = sum beta = 1.
ScalarField g_supergradient(const ProblemSpec& spec, const ScalarField& W,
                            const ScalarField& V, const EigOptions& opt);
ScalarField density_of(const OrbitalFrame& frame, const std::vector<double>& beta);

// ---- structure checks ----

struct Rearrangement {
  std::vector<int> perm;
  double value;
};

// Brute-force minimum of sum_j beta_{perm(j)} lambda_j over permutations;
// identity must win for descending beta / ascending lambda.
Rearrangement rearrangement_check(const std::vector<double>& beta,
                                  const std::vector<double>& lambda);

struct LTRecord {
  double gamma = 0;
  std::vector<double> mu;   // negative eigenvalues found (with multiplicity)
  double riesz_sum = 0;     // sum |mu_j|^gamma
  double v_integral = 0;    // int (aV)_+^{n/2+gamma}
  double ratio = 0;
  bool truncated = false;   // TooManyBoundStates: cap hit, ratio is a lower bound
};

// Semiclassical Lieb-Thirring constant; the configured reference default is
// 4x this value.
double lt_classical_constant(double gamma, int n);

LTRecord lieb_thirring_ratio(const ScalarField& V, double gamma, double a,
                             int cap = 256);

// min over sampled t in (0,1) of G(tV1+(1-t)V2) - tG(V1) - (1-t)G(V2);
// concavity demands the result >= -1e-8.
double concavity_probe(const ProblemSpec& spec, const ScalarField& W,
                       const ScalarField& V1, const ScalarField& V2, int m_samples,
                       const EigOptions& opt);

}  // namespace choq
