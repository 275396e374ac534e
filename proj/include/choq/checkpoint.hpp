#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "choq/grid.hpp"
#include "choq/model.hpp"

namespace choq {

// Versioned little-endian binary container for solver state. Layout:
//   magic "CHQK" | u32 version | u32 endian marker 0x01020304 | u64 spec hash
//   | u8 mode | u8 n | u32 points | f64 R | u32 pad | u32 lmax
//   | u64 iteration | u32 nfields | { u32 namelen | name | u64 count | f64[] }*
// Round trips are bit exact; a stale spec hash or foreign version refuses to
// load (SpecHashMismatch / VersionMismatch).
struct Checkpoint {
  std::uint32_t version = 1;
  std::uint64_t spec_hash = 0;
  GridMode mode = GridMode::Cartesian;
  int n = 3;
  int points = 0;
  double R = 0;
  int pad = 2;
  int lmax = 0;
  std::uint64_t iteration = 0;
  std::vector<std::pair<std::string, std::vector<double>>> fields;

  const std::vector<double>* field(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

Checkpoint make_checkpoint(const ProblemSpec& spec, const GridPtr& grid,
                           std::uint64_t iteration);
void checkpoint_matches_spec(const Checkpoint& ck, const ProblemSpec& spec);

}  // namespace choq
