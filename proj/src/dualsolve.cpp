#include "choq/dualsolve.hpp"

#include <algorithm>
#include <cmath>

namespace choq {

namespace {

RieszRealization default_realization(const ProblemSpec& spec) {
  if (spec.mode == GridMode::Cartesian && spec.alpha == 2.0)
    return RieszRealization::Ball;
  return RieszRealization::FreeSpace;
}

ScalarField masked_to_ball(const ScalarField& rho, double R) {
  ScalarField out = rho;
  const Grid& g = *rho.grid;
  const int P = g.points();
  std::size_t idx = 0;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k, ++idx)
        if (g.cart_rad(i, j, k) >= R) out.v[idx] = 0.0;
  return out;
}

}  // namespace

RieszSolver::RieszSolver(const ProblemSpec& spec, GridPtr grid,
                         RieszRealization realization)
    : spec_(spec), grid_(std::move(grid)), realization_(realization) {
  if (grid_->mode() == GridMode::Cartesian) {
    if (realization_ == RieszRealization::FreeSpace)
      cart_ = std::make_shared<CartFracOps>(grid_, spec_.alpha);
    else if (spec_.alpha != 2.0)
      fail("UnsupportedRadialFractional",
           "no fractional Dirichlet Green function for alpha < 2");
  } else {
    if (realization_ == RieszRealization::Ball && spec_.alpha != 2.0)
      fail("UnsupportedRadialFractional",
           "no fractional Dirichlet Green function for alpha < 2");
    if (realization_ == RieszRealization::FreeSpace && spec_.alpha != 2.0 &&
        !(spec_.alpha == 1.0 && grid_->dim() == 3))
      fail("UnsupportedRadialFractional",
           "radial free-space riesz supports alpha = 2 (any n) and (3,1)");
  }
}

ScalarField RieszSolver::apply(const ScalarField& rho) const {
  if (grid_->mode() == GridMode::Cartesian) {
    if (realization_ == RieszRealization::FreeSpace) return cart_->riesz_convolve(rho);
    ScalarField rm = masked_to_ball(rho, grid_->radius());
    return dirichlet_green_cartesian(rm, grid_->radius());
  }
  if (realization_ == RieszRealization::Ball)
    return riesz_radial(rho, RadialBC::BallZero);
  if (spec_.alpha == 2.0) return riesz_radial(rho, RadialBC::FreeSpace);
  return riesz_radial_log31(rho);
}

double RieszSolver::quad_form(const ScalarField& V) const {
  if (grid_->mode() == GridMode::Cartesian) {
    if (realization_ == RieszRealization::FreeSpace) return cart_->hnorm(V);
    return ball_h1_form(V, grid_->radius());
  }
  if (realization_ == RieszRealization::Ball) return hnorm_radial(V, 2.0, false);
  return hnorm_radial(V, spec_.alpha, true);
}

double RieszSolver::self_energy(const ScalarField& rho) const {
  return dot(rho, apply(rho));
}

double RieszSolver::fixed_point_residual(const ScalarField& V,
                                         const ScalarField& rho) const {
  ScalarField Vs = apply(rho);
  ScalarField d = V;
  for (std::size_t i = 0; i < d.size(); ++i) d.v[i] -= Vs.v[i];
  return norm2(d) / (1.0 + norm2(Vs));
}

double RieszSolver::el_residual(const ScalarField& V, const ScalarField& rho) const {
  if (grid_->mode() == GridMode::Cartesian) {
    if (realization_ == RieszRealization::Ball) {
      ScalarField rm = masked_to_ball(rho, grid_->radius());
      ScalarField LV = ball_laplacian_apply(V, grid_->radius());
      for (std::size_t i = 0; i < LV.size(); ++i) LV.v[i] -= rm.v[i];
      return norm2(LV) / (1.0 + norm2(rm));
    }
    // no grid-exact pointwise operator inverts the kernel convolution; use the
    // equivalent fixed-point form of the Euler-Lagrange equation
    return fixed_point_residual(V, rho);
  }
  if (spec_.alpha == 2.0)
    return radial_poisson_residual(V, rho) / (1.0 + norm2(rho));
  return fixed_point_residual(V, rho);
}

DualSolver::DualSolver(ProblemSpec spec, SolverOptions opt)
    : spec_(std::move(spec)),
      opt_(std::move(opt)),
      grid_(make_grid(spec_)),
      W_(eval_confinement(spec_, grid_)),
      riesz_(spec_, grid_, opt_.riesz.value_or(default_realization(spec_))) {}

ScalarField DualSolver::thomas_fermi_seed() const {
  // rho ~ max(0, mu - W)^{n/2}, mu fixed by unit mass, smoothed through the
  // riesz map
  const double p = 0.5 * spec_.n;
  double lo = 0, hi = 1;
  auto mass_at = [&](double mu) {
    double m = 0;
    for (std::size_t i = 0; i < W_.size(); ++i)
      m += std::pow(std::max(0.0, mu - W_.v[i]), p) * grid_->weight(i);
    return m;
  };
  while (mass_at(hi) < 1.0 && hi < 1e12) hi *= 2;
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    (mass_at(mid) < 1.0 ? lo : hi) = mid;
  }
  double mu = 0.5 * (lo + hi), m = mass_at(mu);
  ScalarField rho(grid_, FieldRole::Density);
  for (std::size_t i = 0; i < rho.size(); ++i)
    rho.v[i] = std::pow(std::max(0.0, mu - W_.v[i]), p) / m;
  return riesz_.apply(rho);
}

double DualSolver::h_value(const ScalarField& V, GEvaluation* ev_out) const {
  GEvaluation ev = eval_g(spec_, W_, V, opt_.eig);
  double q = riesz_.quad_form(V);
  double g = ev.g;
  if (ev_out) *ev_out = std::move(ev);
  return 0.5 * spec_.a * q + g;
}

ScalarField DualSolver::scf_step(const ScalarField& V, double theta) const {
  if (!(theta > 0.0) || theta > 1.0) fail("BadMixing", "theta must lie in (0,1]");
  GEvaluation ev = eval_g(spec_, W_, V, opt_.eig);
  ScalarField rho = density_of(ev.frame, spec_.beta);
  ScalarField Vs = riesz_.apply(rho);
  ScalarField out(grid_, FieldRole::Potential);
  for (std::size_t i = 0; i < out.size(); ++i)
    out.v[i] = (1.0 - theta) * V.v[i] + theta * Vs.v[i];
  return out;
}

SolveReport DualSolver::solve(const ScalarField* init, int start_iter) const {
  SolveReport rep;
  ScalarField V = init ? *init
                 : (opt_.init == "thomas-fermi" ? thomas_fermi_seed() : zero_potential());

  GEvaluation ev = eval_g(spec_, W_, V, opt_.eig);
  double quad = riesz_.quad_form(V);
  double H = 0.5 * spec_.a * quad + ev.g;
  ScalarField rho = density_of(ev.frame, spec_.beta);
  ScalarField Vstar = riesz_.apply(rho);
  double el = riesz_.el_residual(V, rho);
  double theta = opt_.theta0;
  rep.trace.push_back({start_iter, H, ev.g, quad, el, theta});

  int streak = 0;
  rep.status = SolveStatus::Stalled;
  rep.iterations = start_iter;
  bool decided = false;

  for (int it = start_iter + 1; it <= start_iter + opt_.max_iters; ++it) {
    bool accepted = false;
    GEvaluation evt;
    double Ht = 0, quadt = 0;
    ScalarField Vt;
    while (theta >= opt_.theta_min) {
      Vt = ScalarField(grid_, FieldRole::Potential);
      for (std::size_t i = 0; i < Vt.size(); ++i)
        Vt.v[i] = (1.0 - theta) * V.v[i] + theta * Vstar.v[i];
      evt = eval_g(spec_, W_, Vt, opt_.eig, &ev.frame, &ev.block);
      quadt = riesz_.quad_form(Vt);
      Ht = 0.5 * spec_.a * quadt + evt.g;
      if (Ht <= H + 1e-10) {
        accepted = true;
        break;
      }
      theta *= 0.5;
      streak = 0;
    }
    if (!accepted) {
      rep.status = el <= opt_.tol_el ? SolveStatus::Converged : SolveStatus::Stalled;
      decided = true;
      break;
    }
    double dH = H - Ht;
    V = std::move(Vt);
    ev = std::move(evt);
    H = Ht;
    quad = quadt;
    rho = density_of(ev.frame, spec_.beta);
    Vstar = riesz_.apply(rho);
    el = riesz_.el_residual(V, rho);
    rep.trace.push_back({it, H, ev.g, quad, el, theta});
    rep.iterations = it;

    if (H < opt_.h_floor || quad > opt_.hnorm_ceiling) {
      rep.status = SolveStatus::UnboundedSuspected;
      decided = true;
      break;
    }
    if (dH <= opt_.tol_h_rel * (1.0 + std::abs(H)) && el <= opt_.tol_el) {
      rep.status = SolveStatus::Converged;
      decided = true;
      break;
    }
    if (++streak >= 3) {
      theta = std::min(opt_.theta0, 2.0 * theta);
      streak = 0;
    }
  }
  if (!decided) rep.status = SolveStatus::Stalled;

  rep.V = std::move(V);
  rep.frame = std::move(ev.frame);
  rep.G = ev.g;
  rep.quad = quad;
  rep.H = H;
  rep.el_residual = el;
  rep.fixed_point_residual = riesz_.fixed_point_residual(rep.V, rho);
  return rep;
}

double h_value(const ProblemSpec& spec, const ScalarField& V) {
  GridPtr g = V.grid;
  ScalarField W = eval_confinement(spec, g);
  EigOptions eo;
  return 0.5 * spec.a * hnorm(V, spec.alpha) + g_value(spec, W, V, eo);
}

ScalarField scf_step(const ProblemSpec& spec, const ScalarField& V, double theta) {
  DualSolver s(spec);
  return s.scf_step(V, theta);
}

SolveReport solve_dual(const ProblemSpec& spec, const SolverOptions& opt,
                       const ScalarField* init) {
  DualSolver s(spec, opt);
  return s.solve(init);
}

double el_residual(const ProblemSpec& spec, const ScalarField& V) {
  ScalarField W = eval_confinement(spec, V.grid);
  EigOptions eo;
  ScalarField rho = g_supergradient(spec, W, V, eo);
  ScalarField LV = frac_laplacian(V, spec.alpha);
  for (std::size_t i = 0; i < LV.size(); ++i) LV.v[i] -= rho.v[i];
  return norm2(LV) / (1.0 + norm2(rho));
}

}  // namespace choq
