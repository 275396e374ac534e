#include "choq/checkpoint.hpp"

#include <cstring>
#include <fstream>

namespace choq {

namespace {

constexpr char kMagic[4] = {'C', 'H', 'Q', 'K'};
constexpr std::uint32_t kEndianMarker = 0x01020304u;

template <typename T>
void put(std::ofstream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) fail("VersionMismatch", "truncated checkpoint");
  return v;
}

}  // namespace

const std::vector<double>* Checkpoint::field(const std::string& name) const {
  for (const auto& [k, v] : fields)
    if (k == name) return &v;
  return nullptr;
}

void save_checkpoint(const std::string& path, const Checkpoint& ck) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail("Io", "cannot open checkpoint for writing: " + path);
  os.write(kMagic, 4);
  put(os, ck.version);
  put(os, kEndianMarker);
  put(os, ck.spec_hash);
  put<std::uint8_t>(os, ck.mode == GridMode::Cartesian ? 0 : 1);
  put<std::uint8_t>(os, static_cast<std::uint8_t>(ck.n));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ck.points));
  put(os, ck.R);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ck.pad));
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ck.lmax));
  put(os, ck.iteration);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(ck.fields.size()));
  for (const auto& [name, data] : ck.fields) {
    put<std::uint32_t>(os, static_cast<std::uint32_t>(name.size()));
    os.write(name.data(), static_cast<std::streamsize>(name.size()));
    put<std::uint64_t>(os, data.size());
    os.write(reinterpret_cast<const char*>(data.data()),
             static_cast<std::streamsize>(data.size() * sizeof(double)));
  }
  if (!os) fail("Io", "checkpoint write failed: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail("Io", "cannot open checkpoint: " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    fail("VersionMismatch", "not a checkpoint file");
  Checkpoint ck;
  ck.version = get<std::uint32_t>(is);
  if (ck.version != 1)
    fail("VersionMismatch", "unsupported checkpoint version " + std::to_string(ck.version));
  if (get<std::uint32_t>(is) != kEndianMarker)
    fail("VersionMismatch", "checkpoint byte order does not match this platform");
  ck.spec_hash = get<std::uint64_t>(is);
  ck.mode = get<std::uint8_t>(is) == 0 ? GridMode::Cartesian : GridMode::Radial;
  ck.n = get<std::uint8_t>(is);
  ck.points = static_cast<int>(get<std::uint32_t>(is));
  ck.R = get<double>(is);
  ck.pad = static_cast<int>(get<std::uint32_t>(is));
  ck.lmax = static_cast<int>(get<std::uint32_t>(is));
  ck.iteration = get<std::uint64_t>(is);
  std::uint32_t nf = get<std::uint32_t>(is);
  for (std::uint32_t f = 0; f < nf; ++f) {
    std::uint32_t len = get<std::uint32_t>(is);
    std::string name(len, '\0');
    is.read(name.data(), len);
    std::uint64_t count = get<std::uint64_t>(is);
    std::vector<double> data(count);
    is.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!is) fail("VersionMismatch", "truncated checkpoint payload");
    ck.fields.emplace_back(std::move(name), std::move(data));
  }
  return ck;
}

Checkpoint make_checkpoint(const ProblemSpec& spec, const GridPtr& grid,
                           std::uint64_t iteration) {
  Checkpoint ck;
  ck.spec_hash = spec_hash(spec);
  ck.mode = grid->mode();
  ck.n = grid->dim();
  ck.points = grid->points();
  ck.R = grid->radius();
  ck.pad = grid->pad();
  ck.lmax = grid->lmax();
  ck.iteration = iteration;
  return ck;
}

void checkpoint_matches_spec(const Checkpoint& ck, const ProblemSpec& spec) {
  if (ck.spec_hash != spec_hash(spec))
    fail("SpecHashMismatch", "checkpoint belongs to a different problem spec");
}

}  // namespace choq
