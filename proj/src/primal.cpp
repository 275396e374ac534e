#include "choq/primal.hpp"

#include <algorithm>
#include <cmath>

namespace choq {

namespace {

// The frame lives in Euclidean coordinates in which quadrature orthonormality
// is exact: x = phi h^{3/2} (cartesian) or u_i = phi_i sqrt(w_i) on interior
// nodes (radial, l = 0 sector).
struct Coords {
  GridPtr grid;
  long dim;

  explicit Coords(GridPtr g) : grid(std::move(g)) {
    dim = grid->mode() == GridMode::Cartesian ? grid->size() : grid->points() - 1;
  }
  Eigen::VectorXd to_vec(const ScalarField& phi) const {
    Eigen::VectorXd x(dim);
    if (grid->mode() == GridMode::Cartesian) {
      const double s = std::pow(grid->spacing(), 1.5);
      for (long i = 0; i < dim; ++i) x[i] = phi.v[i] * s;
    } else {
      for (long i = 0; i < dim; ++i) x[i] = phi.v[i] * std::sqrt(grid->weight(i));
    }
    return x;
  }
  ScalarField to_field(const Eigen::VectorXd& x) const {
    ScalarField phi(grid, FieldRole::Generic);
    if (grid->mode() == GridMode::Cartesian) {
      const double s = std::pow(grid->spacing(), -1.5);
      for (long i = 0; i < dim; ++i) phi.v[i] = x[i] * s;
    } else {
      for (long i = 0; i < dim; ++i) phi.v[i] = x[i] / std::sqrt(grid->weight(i));
      phi.v[grid->size() - 1] = 0.0;
    }
    return phi;
  }
};

struct PrimalWork {
  const ProblemSpec& spec;
  GridPtr grid;
  ScalarField W;
  const RieszSolver& riesz;
  Coords co;

  PrimalWork(const ProblemSpec& s, GridPtr g, ScalarField w, const RieszSolver& rz)
      : spec(s), grid(std::move(g)), W(std::move(w)), riesz(rz), co(grid) {}

  // y = (-Delta + W - a V) x in coordinates
  Eigen::VectorXd apply_h(const ScalarField& V, double a,
                          const Eigen::VectorXd& x) const {
    if (grid->mode() == GridMode::Cartesian) {
      BoxHamiltonian H = assemble_box_hamiltonian(W, V, a);
      return H.apply(x);
    }
    RadialHamiltonian H = assemble_radial_hamiltonian(W, V, a, 0);
    Eigen::VectorXd y(x.size());
    for (long i = 0; i < x.size(); ++i) {
      double s = H.diag[i] * x[i];
      if (i > 0) s += H.off[i - 1] * x[i - 1];
      if (i + 1 < x.size()) s += H.off[i] * x[i + 1];
      y[i] = s;
    }
    return y;
  }

  ScalarField density(const Eigen::MatrixXd& X) const {
    ScalarField rho(grid, FieldRole::Density);
    for (int j = 0; j < X.cols(); ++j) {
      ScalarField phi = co.to_field(X.col(j));
      for (std::size_t i = 0; i < rho.size(); ++i)
        rho.v[i] += spec.beta[j] * phi.v[i] * phi.v[i];
    }
    return rho;
  }

  // E and the ambient (unprojected) gradient, sharing one riesz solve
  double eval(const Eigen::MatrixXd& X, Eigen::MatrixXd* grad) const {
    ScalarField rho = density(X);
    ScalarField Vr = riesz.apply(rho);
    ScalarField zero(grid, FieldRole::Potential);
    double E = 0;
    for (int j = 0; j < X.cols(); ++j) {
      Eigen::VectorXd hx = apply_h(zero, 0.0, X.col(j));
      E += 0.5 * spec.beta[j] * X.col(j).dot(hx);
    }
    E -= 0.25 * spec.a * dot(rho, Vr);
    if (grad) {
      grad->resize(X.rows(), X.cols());
      for (int j = 0; j < X.cols(); ++j)
        grad->col(j) = spec.beta[j] * apply_h(Vr, spec.a, X.col(j));
    }
    return E;
  }
};

void retract_gs(Eigen::MatrixXd& X) {
  for (int j = 0; j < X.cols(); ++j) {
    for (int i = 0; i < j; ++i) X.col(j) -= X.col(i).dot(X.col(j)) * X.col(i);
    double n = X.col(j).norm();
    if (n == 0) fail("NonOrthonormalFrame", "frame collapsed during retraction");
    X.col(j) /= n;
  }
}

double ortho_defect(const Eigen::MatrixXd& X) {
  Eigen::MatrixXd G = X.transpose() * X;
  G.diagonal().array() -= 1.0;
  return G.cwiseAbs().maxCoeff();
}

}  // namespace

double energy_primal(const ProblemSpec& spec, const OrbitalFrame& frame,
                     const RieszSolver& riesz) {
  if (frame.phi.empty()) fail("NonOrthonormalFrame", "empty frame");
  if (frame.orthonormality_defect() > 1e-8)
    fail("NonOrthonormalFrame", "orthonormality defect above 1e-8");
  GridPtr grid = frame.phi[0].grid;
  PrimalWork work(spec, grid, eval_confinement(spec, grid), riesz);
  Eigen::MatrixXd X(work.co.dim, frame.phi.size());
  for (std::size_t j = 0; j < frame.phi.size(); ++j)
    X.col(j) = work.co.to_vec(frame.phi[j]);
  return work.eval(X, nullptr);
}

double energy_primal(const ProblemSpec& spec, const OrbitalFrame& frame) {
  RieszSolver riesz(spec, frame.phi.at(0).grid, RieszRealization::FreeSpace);
  return energy_primal(spec, frame, riesz);
}

PrimalReport stiefel_descent(const ProblemSpec& spec, PrimalOptions opt,
                             const OrbitalFrame* init) {
  GridPtr grid = make_grid(spec);
  ScalarField W = eval_confinement(spec, grid);
  RieszRealization real = opt.riesz.value_or(
      spec.mode == GridMode::Cartesian && spec.alpha == 2.0 ? RieszRealization::Ball
                                                            : RieszRealization::FreeSpace);
  RieszSolver riesz(spec, grid, real);
  PrimalWork work(spec, grid, W, riesz);

  OrbitalFrame bare;
  if (!init) {
    ScalarField zero(grid, FieldRole::Potential);
    bare = lowest_eigs(spec, W, zero, spec.k, opt.eig);
    init = &bare;
  }
  Eigen::MatrixXd X(work.co.dim, spec.k);
  for (int j = 0; j < spec.k; ++j) X.col(j) = work.co.to_vec(init->phi[j]);
  retract_gs(X);

  // descend in the (bare operator + 1)^{-1} metric; the stiff kinetic tail of
  // the discretization would otherwise dictate the step size
  ShiftedInversePrecond precond(grid, &W, 1.0);

  Eigen::MatrixXd G, Gt;
  double E = work.eval(X, &G);
  double tau = 1.0;

  PrimalReport rep;
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    Eigen::MatrixXd XtG = X.transpose() * G;
    Eigen::MatrixXd Ghat = G - X * (0.5 * (XtG + XtG.transpose()));
    double gn = Ghat.norm();
    rep.trace.push_back({it, E, gn, ortho_defect(X)});
    if (gn <= opt.tol_grad) {
      rep.converged = true;
      break;
    }

    Eigen::MatrixXd D(X.rows(), X.cols());
    for (int j = 0; j < spec.k; ++j) D.col(j) = precond.apply(Ghat.col(j));
    Eigen::MatrixXd XtD = X.transpose() * D;
    D -= X * (0.5 * (XtD + XtD.transpose()));
    double slope = (Ghat.array() * D.array()).sum();
    if (slope <= 0) {
      D = Ghat;  // fall back to the plain gradient
      slope = gn * gn;
    }

    bool accepted = false;
    double Et = 0;
    Eigen::MatrixXd Xt;
    double t = tau;
    for (int bt = 0; bt < 60; ++bt) {
      Xt = X - t * D;
      retract_gs(Xt);
      Et = work.eval(Xt, &Gt);
      if (Et <= E - 1e-4 * t * slope) {
        accepted = true;
        break;
      }
      t *= 0.5;
    }
    if (!accepted) break;
    tau = std::min(t * 1.5, 1e3);
    X = std::move(Xt);
    G = std::move(Gt);
    E = Et;
  }
  rep.iterations = it;
  if (!rep.converged && it >= opt.max_iters)
    fail("IterationCapExceeded", "stiefel descent hit the iteration cap");

  // final frame, Lagrange-multiplier diagonality, labels
  ScalarField rho = work.density(X);
  ScalarField Vr = riesz.apply(rho);
  Eigen::MatrixXd M(spec.k, spec.k);
  for (int j = 0; j < spec.k; ++j) {
    Eigen::VectorXd hx = work.apply_h(Vr, spec.a, X.col(j));
    for (int i = 0; i < spec.k; ++i) M(i, j) = X.col(i).dot(hx);
  }
  rep.offdiag = 0;
  for (int i = 0; i < spec.k; ++i)
    for (int j = 0; j < spec.k; ++j)
      if (i != j) rep.offdiag = std::max(rep.offdiag, std::abs(M(i, j)));

  for (int j = 0; j < spec.k; ++j) {
    rep.frame.phi.push_back(work.co.to_field(X.col(j)));
    rep.frame.lambda.push_back(M(j, j));
    rep.frame.ell.push_back(grid->mode() == GridMode::Radial ? 0 : -1);
    rep.frame.nodes.push_back(j);
    Eigen::VectorXd r = work.apply_h(Vr, spec.a, X.col(j)) - M(j, j) * X.col(j);
    rep.frame.residual.push_back(r.norm());
  }
  rep.E = E;
  rep.gradnorm = rep.trace.empty() ? 0 : rep.trace.back().gradnorm;
  return rep;
}

double duality_gap(const ProblemSpec& spec, const ScalarField& V,
                   const OrbitalFrame& frame, const RieszSolver& riesz,
                   const EigOptions& eig) {
  ScalarField W = eval_confinement(spec, V.grid);
  double H = 0.5 * spec.a * riesz.quad_form(V) + g_value(spec, W, V, eig);
  double E = energy_primal(spec, frame, riesz);
  return std::abs(H - 2.0 * E) / (1.0 + std::abs(H));
}

}  // namespace choq
