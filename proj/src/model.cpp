#include "choq/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "json.hpp"

namespace choq {

using nlohmann::json;

ProblemSpec validate_spec(ProblemSpec s) {
  if (s.n < 3) fail("BadDimensionOrderPair", "spatial dimension must be >= 3");
  if (!(s.alpha > 0.0) || s.alpha > 2.0)
    fail("BadDimensionOrderPair", "fractional order alpha must lie in (0,2]");
  if (s.k < 1) fail("BadBeta", "state count k must be >= 1");
  if (static_cast<int>(s.beta.size()) != s.k)
    fail("BadBeta", "beta length must equal k");

  for (double b : s.beta)
    if (!(b > 0.0)) fail("NonDescendingBeta", "occupation weights must be positive");
  for (int j = 0; j + 1 < s.k; ++j)
    if (!(s.beta[j] - s.beta[j + 1] >= 1e-12))
      fail("NonDescendingBeta",
           "occupation weights must be strictly descending (gap >= 1e-12)");
  double sum = 0;
  for (double b : s.beta) sum += b;
  if (std::abs(sum - 1.0) > 1e-6)
    fail("BadBeta", "occupation weights must sum to 1 within 1e-6");
  for (double& b : s.beta) b /= sum;

  if (!(s.a > 0.0)) fail("NegativeCoupling", "coupling strength a must be positive");

  const bool subcritical = (s.n < 2.0 + s.alpha);
  if (!subcritical && !s.critical_pair() && !s.exploratory)
    fail("BadDimensionOrderPair",
         "(n, alpha) admissible only when 3 <= n < 2+alpha, or (n,alpha) is one of "
         "the critical pairs (3,1), (4,2); set exploratory to override");

  if (s.n >= 4 && s.mode != GridMode::Radial)
    fail("BadMode", "cartesian storage is n=3 only; n >= 4 requires radial mode");

  if (s.confinement.family == ConfinementFamily::Power) {
    if (!(s.confinement.s > 0)) fail("UnboundedBelowConfinement", "power exponent s must be > 0");
  } else {
    if (s.confinement.coeffs.empty())
      fail("UnboundedBelowConfinement", "well family needs polynomial coefficients");
    if (!(s.confinement.coeffs.back() > 0))
      fail("UnboundedBelowConfinement", "well leading coefficient must be positive");
  }

  if (s.geometry.R <= 0) fail("BadGrid", "R must be positive");
  return s;
}

std::uint64_t estimate_memory_bytes(const ProblemSpec& spec) {
  if (spec.mode == GridMode::Cartesian) {
    std::uint64_t P = spec.geometry.points_per_axis;
    std::uint64_t Q = P * spec.geometry.padding_factor;
    // padded transform buffers dominate: ~4 real + 2 complex arrays on Q^3,
    // plus ~(k + 12) fields on P^3
    return 8 * (Q * Q * Q * 8 + P * P * P * (spec.k + 12));
  }
  std::uint64_t N = spec.geometry.radial_points;
  return 8 * N * (spec.k + 64);
}

GridPtr make_grid(const ProblemSpec& spec, std::uint64_t mem_cap_bytes) {
  if (estimate_memory_bytes(spec) > mem_cap_bytes)
    fail("OutOfMemoryBudget", "estimated storage exceeds the configured cap");
  if (spec.mode == GridMode::Cartesian)
    return Grid::make_cartesian(spec.geometry.R, spec.geometry.points_per_axis,
                                spec.geometry.padding_factor);
  return Grid::make_radial(spec.n, spec.geometry.R, spec.geometry.radial_points,
                           spec.geometry.lmax, spec.geometry.padding_factor);
}

double confinement_value(const Confinement& c, double r) {
  if (c.family == ConfinementFamily::Power) return std::pow(r, c.s);
  double w = 0, r2 = r * r, p = r2;
  for (double cj : c.coeffs) {
    w += cj * p;
    p *= r2;
  }
  return w;
}

ScalarField eval_confinement(const ProblemSpec& spec, const GridPtr& grid) {
  ScalarField W(grid, FieldRole::Confinement);
  if (grid->mode() == GridMode::Cartesian) {
    int P = grid->points();
    std::size_t idx = 0;
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j)
        for (int k = 0; k < P; ++k, ++idx)
          W.v[idx] = confinement_value(spec.confinement, grid->cart_rad(i, j, k));
  } else {
    for (std::size_t i = 0; i < grid->size(); ++i)
      W.v[i] = confinement_value(spec.confinement, grid->rnode(i));
  }
  double mn = *std::min_element(W.v.begin(), W.v.end());
  if (mn < 0) fail("UnboundedBelowConfinement", "confinement dips below zero on the grid");
  return W;
}

namespace {

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed,
                         const char* where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* a : allowed)
      if (it.key() == a) { ok = true; break; }
    if (!ok) fail("ConfigParse", std::string("unknown key '") + it.key() + "' in " + where);
  }
}

}  // namespace

ProblemSpec parse_problem_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const std::exception& e) {
    fail("ConfigParse", std::string("invalid JSON: ") + e.what());
  }
  ProblemSpec s;
  try {
    reject_unknown_keys(j, {"n", "alpha", "k", "beta", "a", "mode", "confinement",
                            "grid", "exploratory"}, "problem");
    s.n = j.at("n").get<int>();
    s.alpha = j.at("alpha").get<double>();
    s.k = j.at("k").get<int>();
    s.beta = j.at("beta").get<std::vector<double>>();
    s.a = j.at("a").get<double>();
    std::string mode = j.value("mode", s.n >= 4 ? "radial" : "cartesian");
    if (mode == "cartesian") s.mode = GridMode::Cartesian;
    else if (mode == "radial") s.mode = GridMode::Radial;
    else fail("ConfigParse", "mode must be 'cartesian' or 'radial'");
    s.exploratory = j.value("exploratory", false);

    if (j.contains("confinement")) {
      const json& c = j.at("confinement");
      reject_unknown_keys(c, {"family", "s", "coeffs"}, "confinement");
      std::string fam = c.value("family", "power");
      if (fam == "power") {
        s.confinement.family = ConfinementFamily::Power;
        s.confinement.s = c.value("s", 2.0);
      } else if (fam == "well") {
        s.confinement.family = ConfinementFamily::Well;
        s.confinement.coeffs = c.at("coeffs").get<std::vector<double>>();
      } else {
        fail("ConfigParse", "confinement family must be 'power' or 'well'");
      }
    }
    if (j.contains("grid")) {
      const json& g = j.at("grid");
      reject_unknown_keys(g, {"R", "points_per_axis", "radial_points", "lmax",
                              "padding_factor"}, "grid");
      s.geometry.R = g.value("R", s.geometry.R);
      s.geometry.points_per_axis = g.value("points_per_axis", s.geometry.points_per_axis);
      s.geometry.radial_points = g.value("radial_points", s.geometry.radial_points);
      s.geometry.lmax = g.value("lmax", s.geometry.lmax);
      s.geometry.padding_factor = g.value("padding_factor", s.geometry.padding_factor);
    }
  } catch (const Error&) {
    throw;
  } catch (const std::exception& e) {
    fail("ConfigParse", e.what());
  }
  return validate_spec(s);
}

std::string problem_to_json(const ProblemSpec& s) {
  json j;
  j["n"] = s.n;
  j["alpha"] = s.alpha;
  j["k"] = s.k;
  j["beta"] = s.beta;
  j["a"] = s.a;
  j["mode"] = s.mode == GridMode::Cartesian ? "cartesian" : "radial";
  j["exploratory"] = s.exploratory;
  json c;
  if (s.confinement.family == ConfinementFamily::Power) {
    c["family"] = "power";
    c["s"] = s.confinement.s;
  } else {
    c["family"] = "well";
    c["coeffs"] = s.confinement.coeffs;
  }
  j["confinement"] = c;
  json g;
  g["R"] = s.geometry.R;
  if (s.mode == GridMode::Cartesian) g["points_per_axis"] = s.geometry.points_per_axis;
  else {
    g["radial_points"] = s.geometry.radial_points;
    g["lmax"] = s.geometry.lmax;
  }
  g["padding_factor"] = s.geometry.padding_factor;
  j["grid"] = g;
  return j.dump();
}

std::uint64_t spec_hash(const ProblemSpec& spec) {
  // FNV-1a over the canonical serialization
  std::string t = problem_to_json(spec);
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : t) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace choq
