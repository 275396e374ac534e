#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "choq/grid.hpp"

namespace choq {

enum class ConfinementFamily { Power, Well };

// Confining potential W: grows at infinity, min W = W(0) = 0.
//   power: W(x) = |x|^s, s > 0
//   well : even polynomial sum c_j |x|^{2j} (j>=1), coefficients giving inf W = 0
struct Confinement {
  ConfinementFamily family = ConfinementFamily::Power;
  double s = 2.0;
  std::vector<double> coeffs;  // well: c_1, c_2, ... for |x|^2, |x|^4, ...
};

struct GridSpec {
  double R = 8.0;
  int points_per_axis = 48;  // cartesian
  int radial_points = 2048;  // radial
  int lmax = 8;              // radial: largest angular-momentum channel
  int padding_factor = 2;
};

// Full problem statement: dimensions, occupation vector, coupling,
// confinement, geometry. Immutable after validate_spec.
struct ProblemSpec {
  int n = 3;
  double alpha = 2.0;
  int k = 1;
  std::vector<double> beta{1.0};
  double a = 0.1;
  Confinement confinement;
  GridSpec geometry;
  GridMode mode = GridMode::Cartesian;
  bool exploratory = false;

  bool critical_pair() const {
    return (n == 3 && alpha == 1.0) || (n == 4 && alpha == 2.0);
  }
};

// Checks every invariant of the problem statement and returns the normalized
// spec (beta rescaled to sum exactly 1 when within 1e-6). Throws
// NonDescendingBeta / BadDimensionOrderPair / NegativeCoupling / BadBeta /
// BadMode on violation.
ProblemSpec validate_spec(ProblemSpec raw);

// Grid construction with a memory estimate guard (OutOfMemoryBudget).
GridPtr make_grid(const ProblemSpec& spec, std::uint64_t mem_cap_bytes = 8ull << 30);

// Estimated peak field storage for a spec (used by the memory guard).
std::uint64_t estimate_memory_bytes(const ProblemSpec& spec);

// Samples W on the grid. Throws UnboundedBelowConfinement if the family
// parameters give inf W < 0.
ScalarField eval_confinement(const ProblemSpec& spec, const GridPtr& grid);

// Pointwise W(|x|) evaluation (shared by both modes).
double confinement_value(const Confinement& c, double r);

// JSON config document <-> spec. Unknown keys are rejected; parse errors and
// invariant violations surface as ConfigParse wrapping the underlying code.
ProblemSpec parse_problem_json(const std::string& text);
std::string problem_to_json(const ProblemSpec& spec);

// Stable 64-bit hash of the canonical serialized spec (checkpoint guard).
std::uint64_t spec_hash(const ProblemSpec& spec);

}  // namespace choq
