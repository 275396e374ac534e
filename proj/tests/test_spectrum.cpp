#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numeric>
#include <random>

#include "choq/spectrum.hpp"

using namespace choq;

namespace {

ProblemSpec cart_spec(int k, double a, int P = 32, double R = 8.0) {
  ProblemSpec s;
  s.n = 3;
  s.alpha = 2.0;
  s.k = k;
  if (k == 1) s.beta = {1.0};
  else if (k == 2) s.beta = {0.6, 0.4};
  else {
    s.beta.resize(k);
    double sum = 0;
    for (int j = 0; j < k; ++j) sum += (s.beta[j] = k - j);
    for (double& b : s.beta) b /= sum;
  }
  s.a = a;
  s.geometry.R = R;
  s.geometry.points_per_axis = P;
  return validate_spec(s);
}

// deterministic smooth asymmetric potential (breaks oscillator degeneracies)
ScalarField bumps(const GridPtr& g, std::uint64_t seed, int nb = 3, double amp = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(-2.5, 2.5), wid(0.8, 2.0),
      amps(0.3 * amp, amp);
  ScalarField V(g, FieldRole::Potential);
  const int P = g->points();
  for (int b = 0; b < nb; ++b) {
    double cx = pos(rng), cy = pos(rng), cz = pos(rng), s = wid(rng), A = amps(rng);
    std::size_t idx = 0;
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j)
        for (int k = 0; k < P; ++k, ++idx) {
          double d2 = std::pow(g->axis(i) - cx, 2) + std::pow(g->axis(j) - cy, 2) +
                      std::pow(g->axis(k) - cz, 2);
          V.v[idx] += A * std::exp(-0.5 * d2 / (s * s));
        }
  }
  return V;
}

}  // namespace

TEST_CASE("box hamiltonian: discrete sine mode is an exact eigenvector") {
  GridPtr g = Grid::make_cartesian(6.0, 20, 2);
  ScalarField W(g, FieldRole::Confinement), V(g, FieldRole::Potential);
  BoxHamiltonian H = assemble_box_hamiltonian(W, V, 0.5);
  const int P = g->points();
  const double h = g->spacing();
  int mx = 2, my = 5, mz = 1;
  Eigen::VectorXd u(g->size());
  std::size_t idx = 0;
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j)
      for (int k = 0; k < P; ++k, ++idx)
        u[idx] = std::sin(kPi * mx * (i + 1) / (P + 1)) *
                 std::sin(kPi * my * (j + 1) / (P + 1)) *
                 std::sin(kPi * mz * (k + 1) / (P + 1));
  Eigen::VectorXd Au = H.apply(u);
  auto sym = [&](int m) { return (2.0 - 2.0 * std::cos(kPi * m / (P + 1))) / (h * h); };
  double lam = sym(mx) + sym(my) + sym(mz);
  CHECK((Au - lam * u).norm() / u.norm() < 1e-12);
}

TEST_CASE("hamiltonian symmetry on random pairs") {
  GridPtr g = Grid::make_cartesian(6.0, 18, 2);
  ScalarField W(g, FieldRole::Confinement);
  for (std::size_t i = 0; i < W.size(); ++i) W.v[i] = 0.1 * i / W.size();
  ScalarField V = bumps(g, 7);
  BoxHamiltonian H = assemble_box_hamiltonian(W, V, 0.7);
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  Eigen::VectorXd x(g->size()), y(g->size());
  for (std::size_t i = 0; i < g->size(); ++i) {
    x[i] = nd(rng);
    y[i] = nd(rng);
  }
  double a1 = H.apply(x).dot(y), a2 = x.dot(H.apply(y));
  CHECK(a1 == doctest::Approx(a2).epsilon(1e-12));
}

TEST_CASE("radial centrifugal term: n=4, l=0 at r=1 equals 3/4") {
  CHECK(RadialHamiltonian::centrifugal(4, 0, 1.0) ==
        doctest::Approx(0.75).epsilon(1e-15));
  CHECK(RadialHamiltonian::centrifugal(3, 1, 2.0) ==
        doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("oscillator spectrum, cartesian: 3, 5, 5, 5 within grid error") {
  ProblemSpec s = cart_spec(4, 0.1);
  GridPtr g = make_grid(s);
  ScalarField W = eval_confinement(s, g);
  ScalarField V(g, FieldRole::Potential);
  EigOptions opt;
  OrbitalFrame fr = lowest_eigs(s, W, V, 4, opt);
  double h2 = g->spacing() * g->spacing();
  CHECK(std::abs(fr.lambda[0] - 3.0) < 2.0 * h2);
  for (int j = 1; j < 4; ++j) CHECK(std::abs(fr.lambda[j] - 5.0) < 4.0 * h2);
  SUBCASE("orthonormality and residual invariants") {
    CHECK(fr.orthonormality_defect() < 1e-8);
    for (int j = 0; j < 4; ++j)
      CHECK(fr.residual[j] <= 1e-6 * (1.0 + std::abs(fr.lambda[j])));
  }
  SUBCASE("degenerate crossing flag at the triplet") {
    OrbitalFrame f2 = lowest_eigs(s, W, V, 2, opt);
    CHECK(f2.degenerate_at_k);
    OrbitalFrame f1 = lowest_eigs(s, W, V, 1, opt);
    CHECK_FALSE(f1.degenerate_at_k);
  }
  SUBCASE("ground state is positive after the phase convention") {
    OrbitalFrame f1 = lowest_eigs(s, W, V, 1, opt);
    double mn = 0;
    for (double x : f1.phi[0].v) mn = std::min(mn, x);
    CHECK(mn > -1e-6);
  }
}

TEST_CASE("oscillator spectrum, radial l=0: 3, 7, 11") {
  ProblemSpec s;
  s.n = 3;
  s.alpha = 2.0;
  s.k = 3;
  s.beta = {0.5, 0.3, 0.2};
  s.a = 0.1;
  s.mode = GridMode::Radial;
  s.geometry.R = 12.0;
  s.geometry.radial_points = 600;
  s = validate_spec(s);
  GridPtr g = make_grid(s);
  ScalarField W = eval_confinement(s, g);
  ScalarField V(g, FieldRole::Potential);
  EigOptions opt;
  OrbitalFrame fr = lowest_eigs(s, W, V, 3, opt);
  CHECK(fr.lambda[0] == doctest::Approx(3.0).epsilon(5e-4));
  CHECK(fr.lambda[1] == doctest::Approx(7.0).epsilon(5e-4));
  CHECK(fr.lambda[2] == doctest::Approx(11.0).epsilon(5e-4));
  CHECK(fr.orthonormality_defect() < 1e-10);
  CHECK(fr.nodes[0] == 0);
  CHECK(fr.nodes[1] == 1);
  CHECK(fr.nodes[2] == 2);
}

TEST_CASE("merged radial spectrum carries angular degeneracies") {
  SUBCASE("n=3 oscillator shells") {
    GridPtr g = Grid::make_radial(3, 12.0, 400, 4, 2);
    ScalarField W(g, FieldRole::Confinement);
    for (std::size_t i = 0; i < W.size(); ++i) W.v[i] = g->rnode(i) * g->rnode(i);
    ScalarField V(g, FieldRole::Potential);
    auto levels = radial_merged_spectrum(W, V, 0.1, 9);
    CHECK(levels[0].lambda == doctest::Approx(3.0).epsilon(1e-3));
    CHECK(levels[0].degeneracy == 1);
    CHECK(levels[1].lambda == doctest::Approx(5.0).epsilon(1e-3));
    CHECK(levels[1].ell == 1);
    CHECK(levels[1].degeneracy == 3);
  }
  SUBCASE("angular degeneracy law") {
    CHECK(angular_degeneracy(4, 0) == 1);
    CHECK(angular_degeneracy(4, 1) == 4);
    CHECK(angular_degeneracy(4, 2) == 9);
    CHECK(angular_degeneracy(3, 2) == 5);
    CHECK(angular_degeneracy(5, 1) == 5);
  }
}

TEST_CASE("g_value: oscillator weights, rayleigh-ritz k=1, constant shift") {
  ProblemSpec s = cart_spec(2, 0.25);
  GridPtr g = make_grid(s);
  ScalarField W = eval_confinement(s, g);
  ScalarField V(g, FieldRole::Potential);
  EigOptions opt;
  double G0 = g_value(s, W, V, opt);
  double h2 = g->spacing() * g->spacing();
  CHECK(std::abs(G0 - (0.6 * 3.0 + 0.4 * 5.0)) < 5.0 * h2);
  SUBCASE("k=1 is the rayleigh-ritz minimum") {
    ProblemSpec s1 = cart_spec(1, 0.25);
    OrbitalFrame fr = lowest_eigs(s1, W, V, 1, opt);
    CHECK(g_value(s1, W, V, opt) == doctest::Approx(fr.lambda[0]).epsilon(1e-12));
  }
  SUBCASE("constant shift moves G by exactly a c") {
    ScalarField Vc(g, FieldRole::Potential, 0.35);
    double Gc = g_value(s, W, Vc, opt);
    CHECK(G0 - Gc == doctest::Approx(s.a * 0.35).epsilon(1e-9));
  }
}

TEST_CASE("supergradient: mass, finite-difference oracle, concavity bound") {
  ProblemSpec s = cart_spec(2, 0.5, 24, 7.0);
  GridPtr g = make_grid(s);
  ScalarField W = eval_confinement(s, g);
  ScalarField V0 = bumps(g, 11);  // asymmetric: gaps are open at V0
  EigOptions opt;
  ScalarField rho = g_supergradient(s, W, V0, opt);
  CHECK(integral(rho) == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(rho.role == FieldRole::Density);

  ScalarField eta = bumps(g, 23, 2, 0.7);
  SUBCASE("central difference against -a <eta, rho>") {
    const double eps = 1e-4;
    ScalarField Vp = V0, Vm = V0;
    for (std::size_t i = 0; i < V0.size(); ++i) {
      Vp.v[i] += eps * eta.v[i];
      Vm.v[i] -= eps * eta.v[i];
    }
    double fd = (g_value(s, W, Vp, opt) - g_value(s, W, Vm, opt)) / (2 * eps);
    double an = -s.a * dot(eta, rho);
    CHECK(fd == doctest::Approx(an).epsilon(1e-4));
  }
  SUBCASE("supergradient upper bound G(Z) <= G(V) - a <Z-V, rho>") {
    double GV = g_value(s, W, V0, opt);
    for (std::uint64_t seed : {41ull, 42ull, 43ull}) {
      ScalarField Z = bumps(g, seed, 3, 1.3);
      double GZ = g_value(s, W, Z, opt);
      ScalarField d = Z;
      for (std::size_t i = 0; i < d.size(); ++i) d.v[i] -= V0.v[i];
      CHECK(GZ <= GV - s.a * dot(d, rho) + 1e-8);
    }
  }
}

TEST_CASE("eigenvalue continuity and monotonicity in the potential") {
  ProblemSpec s = cart_spec(2, 0.8, 20, 6.0);
  GridPtr g = make_grid(s);
  ScalarField W = eval_confinement(s, g);
  EigOptions opt;
  ScalarField V1 = bumps(g, 5), V2 = bumps(g, 6);
  OrbitalFrame f1 = lowest_eigs(s, W, V1, 2, opt);
  OrbitalFrame f2 = lowest_eigs(s, W, V2, 2, opt);
  double dmax = 0;
  for (std::size_t i = 0; i < V1.size(); ++i)
    dmax = std::max(dmax, std::abs(V1.v[i] - V2.v[i]));
  for (int j = 0; j < 2; ++j)
    CHECK(std::abs(f1.lambda[j] - f2.lambda[j]) <= s.a * dmax + 1e-8);

  SUBCASE("raising V pointwise lowers G") {
    ScalarField bump = bumps(g, 9, 1);
    ScalarField Vr = V1;
    for (std::size_t i = 0; i < Vr.size(); ++i) Vr.v[i] += 0.5 * bump.v[i];
    CHECK(g_value(s, W, Vr, opt) <= g_value(s, W, V1, opt) + 1e-9);
  }
}

TEST_CASE("rearrangement: identity wins for descending beta, ascending lambda") {
  SUBCASE("two elements") {
    Rearrangement r = rearrangement_check({0.7, 0.3}, {1.0, 2.0});
    CHECK(r.perm == std::vector<int>{0, 1});
    CHECK(r.value == doctest::Approx(0.7 * 1 + 0.3 * 2).epsilon(1e-15));
  }
  SUBCASE("negative eigenvalues") {
    Rearrangement r = rearrangement_check({0.5, 0.3, 0.2}, {-2.0, -1.0, 0.0});
    CHECK(r.perm == std::vector<int>{0, 1, 2});
    CHECK(r.value == doctest::Approx(-1.3).epsilon(1e-15));
  }
  SUBCASE("ties report the identity") {
    Rearrangement r = rearrangement_check({0.6, 0.4}, {1.0, 1.0});
    CHECK(r.perm == std::vector<int>{0, 1});
  }
  SUBCASE("length mismatch") {
    CHECK_THROWS_WITH_AS(rearrangement_check({1.0}, {1.0, 2.0}),
                         doctest::Contains("LengthMismatch"), Error);
  }
  SUBCASE("random draws, brute force as the oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0.01, 1.0);
    for (int t = 0; t < 200; ++t) {
      int k = 2 + static_cast<int>(rng() % 5);
      std::vector<double> beta(k), lam(k);
      for (auto& b : beta) b = u(rng);
      std::sort(beta.rbegin(), beta.rend());
      double sum = 0;
      for (double b : beta) sum += b;
      for (auto& b : beta) b /= sum;
      for (auto& l : lam) l = 10.0 * u(rng) - 5.0;
      std::sort(lam.begin(), lam.end());
      Rearrangement r = rearrangement_check(beta, lam);
      std::vector<int> id(k);
      std::iota(id.begin(), id.end(), 0);
      CHECK(r.perm == id);
    }
  }
}

TEST_CASE("lieb-thirring monitor") {
  GridPtr g = Grid::make_radial(3, 30.0, 1024, 0, 2);
  SUBCASE("shallow well binds nothing, ratio 0") {
    ScalarField V(g, FieldRole::Potential);
    for (std::size_t i = 0; i < V.size(); ++i)
      V.v[i] = 0.05 * std::exp(-g->rnode(i) * g->rnode(i));
    LTRecord rec = lieb_thirring_ratio(V, 1.0, 1.0);
    CHECK(rec.mu.empty());
    CHECK(rec.ratio == 0.0);
  }
  SUBCASE("deep well stays under 4x the semiclassical constant") {
    ScalarField V(g, FieldRole::Potential);
    for (std::size_t i = 0; i < V.size(); ++i) {
      double r = g->rnode(i);
      V.v[i] = 30.0 * std::exp(-0.25 * r * r);
    }
    LTRecord rec = lieb_thirring_ratio(V, 1.0, 1.0);
    CHECK(rec.mu.size() > 3);
    CHECK(rec.ratio > 0.0);
    CHECK(rec.ratio <= 4.0 * lt_classical_constant(1.0, 3));
  }
  SUBCASE("scaling invariance of the ratio") {
    ScalarField V(g, FieldRole::Potential);
    for (std::size_t i = 0; i < V.size(); ++i) {
      double r = g->rnode(i);
      V.v[i] = 25.0 * std::exp(-0.5 * r * r);
    }
    LTRecord r1 = lieb_thirring_ratio(V, 1.0, 1.0);
    double delta = 1.5;
    ScalarField Vd(g, FieldRole::Potential);
    for (std::size_t i = 0; i < Vd.size(); ++i) {
      double r = delta * g->rnode(i);
      Vd.v[i] = delta * delta * 25.0 * std::exp(-0.5 * r * r);
    }
    LTRecord r2 = lieb_thirring_ratio(Vd, 1.0, 1.0);
    CHECK(r2.ratio == doctest::Approx(r1.ratio).epsilon(0.02));
  }
  SUBCASE("semiclassical constant value, gamma=1 n=3") {
    double expect = 1.0 / (8.0 * std::pow(kPi, 1.5) * std::tgamma(3.5));
    CHECK(lt_classical_constant(1.0, 3) == doctest::Approx(expect).epsilon(1e-14));
  }
}

TEST_CASE("concavity probe") {
  ProblemSpec s = cart_spec(2, 0.6, 20, 6.0);
  GridPtr g = make_grid(s);
  ScalarField W = eval_confinement(s, g);
  EigOptions opt;
  SUBCASE("identical arguments give zero gap") {
    ScalarField V = bumps(g, 31);
    CHECK(std::abs(concavity_probe(s, W, V, V, 3, opt)) < 1e-10);
  }
  SUBCASE("random smooth pairs stay concave") {
    for (std::uint64_t t = 0; t < 4; ++t) {
      ScalarField V1 = bumps(g, 100 + t), V2 = bumps(g, 200 + t);
      CHECK(concavity_probe(s, W, V1, V2, 3, opt) >= -1e-8);
    }
  }
  SUBCASE("classical k=1 ground-state concavity") {
    ProblemSpec s1 = cart_spec(1, 0.6, 20, 6.0);
    ScalarField V1 = bumps(g, 301), V2 = bumps(g, 302);
    CHECK(concavity_probe(s1, W, V1, V2, 3, opt) >= -1e-8);
  }
}

TEST_CASE("negative levels merge channels with multiplicity") {
  GridPtr g = Grid::make_radial(3, 25.0, 1024, 0, 2);
  ScalarField V(g, FieldRole::Potential);
  for (std::size_t i = 0; i < V.size(); ++i) {
    double r = g->rnode(i);
    V.v[i] = 12.0 * std::exp(-0.125 * r * r);
  }
  auto mu = negative_levels_radial(V, 1.0, 8);
  REQUIRE(mu.size() >= 4);
  // a well this deep binds an l=1 triplet above the ground state
  CHECK(mu[0] < mu[1]);
  CHECK(mu[1] == doctest::Approx(mu[2]).epsilon(1e-12));
  CHECK(mu[2] == doctest::Approx(mu[3]).epsilon(1e-12));
}
