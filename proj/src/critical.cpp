#include "choq/critical.hpp"

#include <algorithm>
#include <cmath>

#include "choq/fracops.hpp"
#include "choq/spectrum.hpp"

namespace choq {

namespace {

double catmull_rom(double pm1, double p0, double p1, double p2, double t) {
  return 0.5 * (2.0 * p0 + (-pm1 + p1) * t + (2.0 * pm1 - 5.0 * p0 + 4.0 * p1 - p2) * t * t +
                (-pm1 + 3.0 * p0 - 3.0 * p1 + p2) * t * t * t);
}

// 1D sample of a node array at fractional index; out-of-range reads are zero.
double sample1d(const std::vector<double>& a, double x) {
  double fl = std::floor(x);
  int i0 = static_cast<int>(fl);
  double t = x - fl;
  auto at = [&](int i) -> double {
    return (i >= 0 && i < static_cast<int>(a.size())) ? a[i] : 0.0;
  };
  return catmull_rom(at(i0 - 1), at(i0), at(i0 + 1), at(i0 + 2), t);
}

double support_radius(const ScalarField& V) {
  const Grid& g = *V.grid;
  double cap = 1e-12 * std::max(1e-300, max_abs(V));
  double rs = 0;
  if (g.mode() == GridMode::Radial) {
    for (std::size_t i = 0; i < V.size(); ++i)
      if (std::abs(V.v[i]) > cap) rs = std::max(rs, g.rnode(i));
    return rs;
  }
  const int P = g.points();
  std::size_t idx = 0;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k, ++idx)
        if (std::abs(V.v[idx]) > cap) rs = std::max(rs, g.cart_rad(i, j, k));
  return rs;
}

}  // namespace

ScalarField scale_potential(const ScalarField& V, double delta) {
  if (!(delta > 0)) fail("DomainError", "delta must be positive");
  const Grid& g = *V.grid;
  if (delta < 1.0) {
    double rs = support_radius(V);
    if (rs / delta > g.radius() * (1.0 + 1e-12))
      fail("SupportOverflow", "rescaled support leaves the domain");
  }
  ScalarField out(V.grid, V.role);
  const double d2 = delta * delta;
  if (g.mode() == GridMode::Radial) {
    const double h = g.spacing();
    for (std::size_t i = 0; i < out.size(); ++i) {
      double r = delta * g.rnode(i);
      if (r > g.radius()) continue;  // V vanishes there by the support check
      out.v[i] = d2 * sample1d(V.v, r / h - 1.0);
    }
    return out;
  }
  const int P = g.points();
  const double h = g.spacing(), R = g.radius();
  // tricubic over the local 4x4x4 stencil, zero outside the grid
  auto idx_of = [&](double x) { return (x + R) / h - 0.5; };
  auto at = [&](int a, int b, int c) -> double {
    return (a >= 0 && a < P && b >= 0 && b < P && c >= 0 && c < P)
               ? V.v[g.flat(a, b, c)]
               : 0.0;
  };
  std::size_t idx = 0;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k, ++idx) {
        double X = delta * g.axis(i), Y = delta * g.axis(j), Z = delta * g.axis(k);
        if (std::abs(X) > R || std::abs(Y) > R || std::abs(Z) > R) continue;
        double fx = idx_of(X), fy = idx_of(Y), fz = idx_of(Z);
        int ix = static_cast<int>(std::floor(fx));
        int iy = static_cast<int>(std::floor(fy));
        int iz = static_cast<int>(std::floor(fz));
        double tx = fx - ix, ty = fy - iy, tz = fz - iz;
        double colx[4];
        for (int da = -1; da <= 2; ++da) {
          double coly[4];
          for (int db = -1; db <= 2; ++db) {
            double line[4];
            for (int dc = -1; dc <= 2; ++dc)
              line[dc + 1] = at(ix + da, iy + db, iz + dc);
            coly[db + 1] = catmull_rom(line[0], line[1], line[2], line[3], tz);
          }
          colx[da + 1] = catmull_rom(coly[0], coly[1], coly[2], coly[3], ty);
        }
        out.v[idx] = d2 * catmull_rom(colx[0], colx[1], colx[2], colx[3], tx);
      }
  return out;
}

CriticalConfig critical_config_for(int n, double alpha) {
  if (!((n == 3 && alpha == 1.0) || (n == 4 && alpha == 2.0)))
    fail("BadDimensionOrderPair", "critical laboratory covers (3,1) and (4,2) only");
  CriticalConfig cfg;
  cfg.n = n;
  cfg.alpha = alpha;
  return cfg;
}

std::vector<double> validate_critical_beta(std::vector<double> beta) {
  if (beta.empty()) fail("BadBeta", "beta must be nonempty");
  double sum = 0;
  for (std::size_t j = 0; j < beta.size(); ++j) {
    if (!(beta[j] > 0)) fail("BadBeta", "beta entries must be positive");
    if (j > 0 && beta[j] > beta[j - 1] + 1e-12)
      fail("NonDescendingBeta", "beta must be nonincreasing");
    sum += beta[j];
  }
  if (std::abs(sum - 1.0) > 1e-6) fail("BadBeta", "beta must sum to 1");
  for (double& b : beta) b /= sum;
  return beta;
}

double witness_functional(double a, const std::vector<double>& beta,
                          const ScalarField& V, double alpha) {
  double Q = hnorm_radial(V, alpha, true);
  std::vector<double> mu =
      negative_levels_radial(V, a, static_cast<int>(beta.size()));
  double G0 = 0;
  for (std::size_t j = 0; j < mu.size(); ++j) G0 += beta[j] * mu[j];
  return 0.5 * a * Q + G0;
}

WitnessOutcome unbounded_witness(double a, const std::vector<double>& beta_in,
                                 const CriticalConfig& cfg) {
  std::vector<double> beta = validate_critical_beta(beta_in);
  GridPtr grid = Grid::make_radial(cfg.n, cfg.R, cfg.radial_points, 0, cfg.pad);

  auto gaussian = [&](double depth, double sigma) {
    ScalarField V(grid, FieldRole::Potential);
    double A = depth / a;
    for (std::size_t i = 0; i < V.size(); ++i) {
      double r = grid->rnode(i);
      V.v[i] = A * std::exp(-0.5 * r * r / (sigma * sigma));
    }
    return V;
  };
  auto D_at = [&](double logdepth, double logsigma) {
    return witness_functional(a, beta, gaussian(std::exp(logdepth), std::exp(logsigma)),
                              cfg.alpha);
  };

  WitnessOutcome best;
  best.best_D = 1e300;
  double bl = 0, bs = 0;
  const int m = cfg.grid_pts;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double ld = std::log(cfg.depth_lo) +
                  (std::log(cfg.depth_hi) - std::log(cfg.depth_lo)) * i / (m - 1);
      double ls = std::log(cfg.sigma_lo) +
                  (std::log(cfg.sigma_hi) - std::log(cfg.sigma_lo)) * j / (m - 1);
      double D = D_at(ld, ls);
      if (D < best.best_D) {
        best.best_D = D;
        bl = ld;
        bs = ls;
      }
    }

  // gradient refinement in (log depth, log sigma)
  double step = 0.1;
  double D0 = best.best_D;
  for (int it = 0; it < cfg.refine_steps; ++it) {
    const double eps = 1e-3;
    double gx = (D_at(bl + eps, bs) - D_at(bl - eps, bs)) / (2 * eps);
    double gy = (D_at(bl, bs + eps) - D_at(bl, bs - eps)) / (2 * eps);
    double gn = std::hypot(gx, gy);
    if (gn < 1e-14) break;
    double tl = bl - step * gx / gn, ts = bs - step * gy / gn;
    double Dt = D_at(tl, ts);
    if (Dt < D0) {
      bl = tl;
      bs = ts;
      D0 = Dt;
      step = std::min(0.5, step * 1.2);
    } else {
      step *= 0.5;
      if (step < 1e-6) break;
    }
  }
  best.best_D = D0;
  best.amplitude = std::exp(bl) / a;
  best.sigma = std::exp(bs);
  best.V = gaussian(std::exp(bl), std::exp(bs));
  best.unbounded = best.best_D < cfg.witness_threshold;
  return best;
}

CriticalScan estimate_ac(const std::vector<double>& beta_in, const CriticalConfig& cfg,
                         double a_lo, double a_hi, double tol) {
  std::vector<double> beta = validate_critical_beta(beta_in);
  if (!(a_lo > 0) || !(a_hi > a_lo)) fail("InvalidBracket", "need 0 < a_lo < a_hi");
  CriticalScan scan;
  scan.n = cfg.n;
  scan.alpha = cfg.alpha;
  scan.beta = beta;

  auto eval = [&](double a) {
    WitnessOutcome o = unbounded_witness(a, beta, cfg);
    scan.points.push_back({a, o.unbounded, o.best_D, o.amplitude, o.sigma});
    return o;
  };

  WitnessOutcome lo = eval(a_lo);
  if (lo.unbounded) fail("InvalidBracket", "verdict at a_lo is already unbounded");
  WitnessOutcome hi = eval(a_hi);
  if (!hi.unbounded) fail("InvalidBracket", "no witness found at a_hi");
  scan.witness = hi.V;

  while (a_hi - a_lo > tol) {
    double mid = 0.5 * (a_lo + a_hi);
    WitnessOutcome o = eval(mid);
    if (o.unbounded) {
      a_hi = mid;
      scan.witness = o.V;
    } else {
      a_lo = mid;
    }
  }
  scan.a_lo = a_lo;
  scan.a_hi = a_hi;
  scan.a_c_est = 0.5 * (a_lo + a_hi);
  scan.half_width = 0.5 * (a_hi - a_lo);
  return scan;
}

HardyResult hardy_check(int n, double R, int points) {
  if (n < 3) fail("DomainError", "hardy_check needs n >= 3");
  GridPtr grid = Grid::make_radial(n, R, points, 0, 2);
  const double hardy_const = 0.25 * (n - 2) * (n - 2);

  auto ratio_of = [&](auto&& f) {
    ScalarField F(grid, FieldRole::Generic);
    for (std::size_t i = 0; i < F.size(); ++i) F.v[i] = f(grid->rnode(i));
    double num = hnorm_radial(F, 2.0, false);
    double den = 0;
    for (std::size_t i = 0; i < F.size(); ++i) {
      double r = grid->rnode(i);
      den += F.v[i] * F.v[i] / (r * r) * grid->weight(i);
    }
    return num / (hardy_const * den);
  };

  HardyResult res;
  res.ratios.emplace_back("gauss_w1", ratio_of([](double r) {
    return std::exp(-0.5 * r * r);
  }));
  res.ratios.emplace_back("gauss_w2", ratio_of([](double r) {
    return std::exp(-r * r / 8.0);
  }));
  const double L = 0.6 * R;
  res.ratios.emplace_back("bump", ratio_of([L](double r) {
    double t = r / L;
    return t < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0;
  }));
  const double r0 = 0.05, Lc = 0.5 * R, p = -0.5 * (n - 2);
  for (double eps : {0.5, 0.25, 0.1}) {
    res.ratios.emplace_back(
        "pow_eps_" + std::to_string(eps).substr(0, 4), ratio_of([=](double r) {
          return std::pow(r * r + r0 * r0, 0.5 * (p + eps)) *
                 std::exp(-std::pow(r / Lc, 4));
        }));
  }
  res.min_ratio = 1e300;
  for (auto& [name, ratio] : res.ratios) res.min_ratio = std::min(res.min_ratio, ratio);
  return res;
}

NewtonBoundResult newton_bound_check(const ScalarField& rho, double tol) {
  if (!rho.grid || rho.grid->mode() != GridMode::Radial || rho.grid->dim() != 4)
    fail("GridMismatch", "newton_bound_check needs an n=4 radial grid");
  check_density(rho);
  NewtonBoundResult res;
  res.mass = integral(rho);
  if (res.mass > 1.0 + 1e-9) fail("MassExceedsOne", "density mass exceeds 1");
  ScalarField U = riesz_radial(rho, RadialBC::FreeSpace);
  const double A2 = riesz_constant(2.0, 4);  // 1/(4 pi^2), the point-mass constant
  const Grid& g = *rho.grid;
  res.max_ratio = 0;
  for (std::size_t i = 0; i < U.size(); ++i) {
    double r = g.rnode(i);
    res.max_ratio = std::max(res.max_ratio, U.v[i] * r * r / A2);
  }
  res.holds = res.max_ratio <= 1.0 + tol;
  return res;
}

BarphiResult solve_barphi(double R, int points, int max_outer, double tol) {
  GridPtr grid = Grid::make_radial(4, R, points, 0, 2);
  ScalarField Wzero(grid, FieldRole::Confinement);
  const double raw_kernel_scale = 1.0 / riesz_constant(2.0, 4);  // 4 pi^2

  auto shape_normalize = [&](ScalarField& f) {
    double n2 = norm2(f);
    for (double& x : f.v) x /= n2;
  };

  ScalarField psi(grid, FieldRole::Generic);
  for (std::size_t i = 0; i < psi.size(); ++i) {
    double r = grid->rnode(i);
    psi.v[i] = std::exp(-0.5 * r * r);
  }
  shape_normalize(psi);

  BarphiResult res;
  double c = 2.0;  // running mass scale, |phi|_2
  double s = c * c;
  for (int outer = 0; outer < max_outer; ++outer) {
    ScalarField rho(grid, FieldRole::Density);
    for (std::size_t i = 0; i < rho.size(); ++i) rho.v[i] = psi.v[i] * psi.v[i];
    ScalarField Unit = riesz_radial(rho, RadialBC::FreeSpace);
    for (double& x : Unit.v) x *= raw_kernel_scale;

    // pin the eigenvalue to -1: solve lambda_1(-Delta - s*Unit) = -1 in s = c^2
    // by Hellmann-Feynman Newton with bisection safeguards
    double s_lo = 1e-8, s_hi = 1e12;
    TridiagEig te;
    for (int nit = 0; nit < 100; ++nit) {
      RadialHamiltonian H = assemble_radial_hamiltonian(Wzero, Unit, s, 0);
      te = tridiag_lowest(H, 1);
      double lam = te.lambda[0];
      double g1 = lam + 1.0;
      if (std::abs(g1) < 1e-13) break;
      if (lam > -1.0) s_lo = std::max(s_lo, s);
      else s_hi = std::min(s_hi, s);
      // dlambda/ds = -<u, Unit u> in the u metric
      double grad = 0;
      for (long i = 0; i < te.U.rows(); ++i)
        grad -= Unit.v[i] * te.U(i, 0) * te.U(i, 0);
      double snew = s - g1 / grad;
      if (!(snew > s_lo && snew < s_hi)) snew = 0.5 * (s_lo + s_hi);
      s = snew;
    }
    c = std::sqrt(s);

    // new shape from the pinned ground state, mildly mixed for stability
    ScalarField psin(grid, FieldRole::Generic);
    for (int i = 0; i + 1 < points; ++i)
      psin.v[i] = te.U(i, 0) / std::sqrt(grid->weight(i));
    psin.v[points - 1] = 0.0;
    if (psin.v[0] < 0)
      for (double& x : psin.v) x = -x;
    shape_normalize(psin);

    double drift = 0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      double d = psin.v[i] - psi.v[i];
      drift += d * d * grid->weight(i);
    }
    drift = std::sqrt(drift);
    const double mix = 0.7;
    for (std::size_t i = 0; i < psi.size(); ++i)
      psi.v[i] = (1.0 - mix) * psi.v[i] + mix * psin.v[i];
    shape_normalize(psi);
    res.iterations = outer + 1;
    if (drift < tol) {
      res.converged = true;
      break;
    }
  }

  // phi = c * psi and its equation residual in the discrete eigenbasis form
  res.phi = ScalarField(grid, FieldRole::Generic);
  for (std::size_t i = 0; i < res.phi.size(); ++i) res.phi.v[i] = c * psi.v[i];
  res.l2norm = norm2(res.phi);

  ScalarField rho(grid, FieldRole::Density);
  for (std::size_t i = 0; i < rho.size(); ++i) rho.v[i] = res.phi.v[i] * res.phi.v[i];
  ScalarField U = riesz_radial(rho, RadialBC::FreeSpace);
  for (double& x : U.v) x *= raw_kernel_scale;
  RadialHamiltonian H = assemble_radial_hamiltonian(Wzero, U, 1.0, 0);
  Eigen::VectorXd u(points - 1);
  for (int i = 0; i + 1 < points; ++i)
    u[i] = res.phi.v[i] * std::sqrt(grid->weight(i));
  Eigen::VectorXd r(points - 1);
  for (int i = 0; i + 1 < points; ++i) {
    double sres = H.diag[i] * u[i];
    if (i > 0) sres += H.off[i - 1] * u[i - 1];
    if (i + 2 < points) sres += H.off[i] * u[i + 1];
    r[i] = sres + u[i];  // (-Delta - U) phi = -phi at the soliton
  }
  res.residual = r.norm() / u.norm();
  res.positive = *std::min_element(res.phi.v.begin(), res.phi.v.end()) >
                 -1e-12 * max_abs(res.phi);
  res.decreasing = true;
  for (std::size_t i = 0; i + 2 < res.phi.size(); ++i)
    if (res.phi.v[i + 1] > res.phi.v[i] + 1e-10 * max_abs(res.phi))
      res.decreasing = false;
  return res;
}

}  // namespace choq
