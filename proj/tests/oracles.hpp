// Independent reference implementations used to cross-check the library:
// flood-fill connected components, exhaustive all-pairs surface distances,
// and integer-arithmetic dice. Deliberately written with different algorithms
// than the library (BFS instead of union-find, brute force instead of
// distance transforms) so shared bugs are unlikely.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "metrics.hpp"
#include "volume.hpp"
#include "voxelops.hpp"

namespace testutil {

using maskforge::BinaryMask;
using maskforge::Connectivity;
using maskforge::Dims;
using maskforge::LabelVolume;
using maskforge::Spacing;

inline std::vector<std::array<std::int64_t, 3>> oracle_offsets(Connectivity conn) {
  std::vector<std::array<std::int64_t, 3>> out;
  for (std::int64_t dz = -1; dz <= 1; ++dz)
    for (std::int64_t dy = -1; dy <= 1; ++dy)
      for (std::int64_t dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        const int manhattan = std::abs(static_cast<int>(dx)) +
                              std::abs(static_cast<int>(dy)) +
                              std::abs(static_cast<int>(dz));
        if (conn == Connectivity::Face6 && manhattan != 1) continue;
        out.push_back({dx, dy, dz});
      }
  return out;
}

// Per-voxel canonical component representative: the minimum linear index of
// the voxel's component, or UINT64_MAX for background. Two labelings agree up
// to renumbering iff these arrays are equal.
inline std::vector<std::uint64_t> ccl_oracle_partition(const BinaryMask& mask,
                                                       Connectivity conn) {
  const auto offsets = oracle_offsets(conn);
  const std::uint64_t nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];
  constexpr std::uint64_t kBg = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> repr(mask.occupancy.size(), kBg);

  for (std::uint64_t start = 0; start < mask.occupancy.size(); ++start) {
    if (!mask.occupancy[start] || repr[start] != kBg) continue;
    // BFS; `start` is the minimum linear index of this component because all
    // smaller indices were already visited.
    std::deque<std::uint64_t> queue{start};
    repr[start] = start;
    while (!queue.empty()) {
      const std::uint64_t idx = queue.front();
      queue.pop_front();
      const std::int64_t x = static_cast<std::int64_t>(idx % nx);
      const std::int64_t y = static_cast<std::int64_t>((idx / nx) % ny);
      const std::int64_t z = static_cast<std::int64_t>(idx / (nx * ny));
      for (const auto& d : offsets) {
        const std::int64_t qx = x + d[0], qy = y + d[1], qz = z + d[2];
        if (qx < 0 || qy < 0 || qz < 0 || qx >= static_cast<std::int64_t>(nx) ||
            qy >= static_cast<std::int64_t>(ny) || qz >= static_cast<std::int64_t>(nz))
          continue;
        const std::uint64_t q =
            maskforge::linear_index(mask.dims, static_cast<std::uint64_t>(qx),
                                    static_cast<std::uint64_t>(qy),
                                    static_cast<std::uint64_t>(qz));
        if (mask.occupancy[q] && repr[q] == kBg) {
          repr[q] = start;
          queue.push_back(q);
        }
      }
    }
  }
  return repr;
}

// Same canonical form for the library's labeling output.
inline std::vector<std::uint64_t> ccl_partition_of(
    const maskforge::ComponentLabeling& lab) {
  constexpr std::uint64_t kBg = std::numeric_limits<std::uint64_t>::max();
  std::vector<std::uint64_t> first(lab.count(), kBg);
  for (std::uint64_t i = 0; i < lab.ids.size(); ++i)
    if (lab.ids[i] && first[lab.ids[i] - 1] == kBg) first[lab.ids[i] - 1] = i;
  std::vector<std::uint64_t> repr(lab.ids.size(), kBg);
  for (std::uint64_t i = 0; i < lab.ids.size(); ++i)
    if (lab.ids[i]) repr[i] = first[lab.ids[i] - 1];
  return repr;
}

// (2*|A^B|, |A|+|B|); exact integers.
inline std::pair<std::uint64_t, std::uint64_t> dice_counts(const BinaryMask& a,
                                                           const BinaryMask& b) {
  std::uint64_t inter = 0, total = 0;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) {
    const bool av = a.occupancy[i] != 0, bv = b.occupancy[i] != 0;
    inter += av && bv;
    total += static_cast<std::uint64_t>(av) + static_cast<std::uint64_t>(bv);
  }
  return {2 * inter, total};
}

inline std::vector<std::array<std::uint64_t, 3>> oracle_surface(
    const BinaryMask& mask) {
  const std::uint64_t nx = mask.dims[0], ny = mask.dims[1], nz = mask.dims[2];
  std::vector<std::array<std::uint64_t, 3>> out;
  auto occupied = [&](std::int64_t x, std::int64_t y, std::int64_t z) {
    if (x < 0 || y < 0 || z < 0 || x >= static_cast<std::int64_t>(nx) ||
        y >= static_cast<std::int64_t>(ny) || z >= static_cast<std::int64_t>(nz))
      return false;
    return mask.occupancy[maskforge::linear_index(
               mask.dims, static_cast<std::uint64_t>(x),
               static_cast<std::uint64_t>(y), static_cast<std::uint64_t>(z))] != 0;
  };
  for (std::uint64_t z = 0; z < nz; ++z)
    for (std::uint64_t y = 0; y < ny; ++y)
      for (std::uint64_t x = 0; x < nx; ++x) {
        if (!occupied(x, y, z)) continue;
        const std::int64_t sx = static_cast<std::int64_t>(x),
                           sy = static_cast<std::int64_t>(y),
                           sz = static_cast<std::int64_t>(z);
        if (!occupied(sx - 1, sy, sz) || !occupied(sx + 1, sy, sz) ||
            !occupied(sx, sy - 1, sz) || !occupied(sx, sy + 1, sz) ||
            !occupied(sx, sy, sz - 1) || !occupied(sx, sy, sz + 1))
          out.push_back({x, y, z});
      }
  return out;
}

inline double oracle_percentile95(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const double r = 0.95 * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(r);
  if (lo + 1 >= values.size()) return values[lo];
  return values[lo] + (r - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

// Exhaustive all-pairs hd95; quadratic in surface size.
inline double hd95_oracle(const BinaryMask& a, const BinaryMask& b,
                          const maskforge::EdgeCasePolicy& policy = {}) {
  std::uint64_t na = 0, nb = 0;
  for (std::size_t i = 0; i < a.occupancy.size(); ++i) {
    na += a.occupancy[i] != 0;
    nb += b.occupancy[i] != 0;
  }
  if (na == 0 && nb == 0) return policy.both_empty_hd;
  if (na == 0 || nb == 0) return policy.one_empty_hd;

  const auto sa = oracle_surface(a);
  const auto sb = oracle_surface(b);
  const Spacing sp = a.spacing;
  auto directed = [&sp](const std::vector<std::array<std::uint64_t, 3>>& from,
                        const std::vector<std::array<std::uint64_t, 3>>& to) {
    std::vector<double> dists;
    for (const auto& p : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to) {
        const double dx = (static_cast<double>(p[0]) - static_cast<double>(q[0])) * sp[0];
        const double dy = (static_cast<double>(p[1]) - static_cast<double>(q[1])) * sp[1];
        const double dz = (static_cast<double>(p[2]) - static_cast<double>(q[2])) * sp[2];
        best = std::min(best, std::sqrt(dx * dx + dy * dy + dz * dz));
      }
      dists.push_back(best);
    }
    return dists;
  };
  return std::max(oracle_percentile95(directed(sa, sb)),
                  oracle_percentile95(directed(sb, sa)));
}

/* ---- random fixtures ------------------------------------------------------ */

inline BinaryMask random_mask(const Dims& dims, double density, std::mt19937& rng,
                              const Spacing& spacing = {1.0, 1.0, 1.0}) {
  BinaryMask mask{dims, spacing,
                  std::vector<std::uint8_t>(maskforge::voxel_count(dims), 0)};
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (auto& v : mask.occupancy) v = unit(rng) < density ? 1 : 0;
  return mask;
}

// Structured random volume: a handful of axis-aligned boxes and balls of
// random labels drawn from `labels`, on a mostly-empty grid. Keeps component
// counts realistic, unlike uniform noise.
inline LabelVolume random_blob_volume(const Dims& dims, std::mt19937& rng,
                                      const std::vector<maskforge::label_t>& labels,
                                      int blobs = 8,
                                      const Spacing& spacing = {1.0, 1.0, 1.0}) {
  LabelVolume vol = maskforge::make_volume(
      dims, spacing, std::vector<maskforge::label_t>(maskforge::voxel_count(dims), 0),
      "random");
  std::uniform_int_distribution<std::uint64_t> px(0, dims[0] - 1), py(0, dims[1] - 1),
      pz(0, dims[2] - 1);
  std::uniform_int_distribution<std::uint64_t> radius(1, 4);
  std::uniform_int_distribution<std::size_t> pick(0, labels.size() - 1);
  std::uniform_int_distribution<int> shape(0, 1);
  for (int b = 0; b < blobs; ++b) {
    const std::int64_t cx = static_cast<std::int64_t>(px(rng));
    const std::int64_t cy = static_cast<std::int64_t>(py(rng));
    const std::int64_t cz = static_cast<std::int64_t>(pz(rng));
    const std::int64_t r = static_cast<std::int64_t>(radius(rng));
    const maskforge::label_t label = labels[pick(rng)];
    const bool ball = shape(rng) == 1;
    for (std::int64_t z = std::max<std::int64_t>(0, cz - r);
         z <= std::min<std::int64_t>(dims[2] - 1, cz + r); ++z)
      for (std::int64_t y = std::max<std::int64_t>(0, cy - r);
           y <= std::min<std::int64_t>(dims[1] - 1, cy + r); ++y)
        for (std::int64_t x = std::max<std::int64_t>(0, cx - r);
             x <= std::min<std::int64_t>(dims[0] - 1, cx + r); ++x) {
          if (ball && (x - cx) * (x - cx) + (y - cy) * (y - cy) +
                              (z - cz) * (z - cz) >
                          r * r)
            continue;
          vol.labels[maskforge::linear_index(
              dims, static_cast<std::uint64_t>(x), static_cast<std::uint64_t>(y),
              static_cast<std::uint64_t>(z))] = label;
        }
  }
  return vol;
}

// Self-cleaning scratch directory for tests that touch the filesystem.
struct TempDir {
  std::filesystem::path path;

  explicit TempDir(const std::string& tag = "maskforge_test") {
    static std::mt19937_64 rng{std::random_device{}()};
    const auto base = std::filesystem::temp_directory_path();
    for (;;) {
      std::filesystem::path candidate = base / (tag + "_" + std::to_string(rng()));
      std::error_code ec;
      if (std::filesystem::create_directories(candidate, ec)) {
        path = candidate;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string file(const std::string& name) const { return (path / name).string(); }
};

inline void write_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
}

inline std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::vector<std::uint8_t>((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace testutil
