// Synthetic paired volumes for sanity-checking strategies without real data.
//
// Layout on the 48^3 grid: the tumor anatomy (labels 1/2/3) sits near the
// center, the primary RC lesion sits near the (low x, low y) edge, and extra
// RC components are grown inside disjoint 10^3 corner boxes. The corner boxes
// are >= 25 voxels apart from each other and far from the primary lesion, so
// every injected component stays a separate FULL26 component by construction.

#include "synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>

#include "errors.hpp"
#include "voxelops.hpp"

namespace maskforge {

namespace {

constexpr std::uint64_t kN = 48;  // grid edge

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Unbiased integer in [lo, hi]; avoids std::uniform_int_distribution, whose
// output sequence differs between standard libraries.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t lo, std::uint64_t hi) {
  const std::uint64_t span = hi - lo + 1;
  const std::uint64_t reject_above =
      std::numeric_limits<std::uint64_t>::max() -
      std::numeric_limits<std::uint64_t>::max() % span;
  for (;;) {
    const std::uint64_t v = rng();
    if (v < reject_above) return lo + v % span;
  }
}

void paint_ellipsoid(LabelVolume& vol, const std::array<double, 3>& center,
                     const std::array<double, 3>& radii, label_t label) {
  const Dims& d = vol.dims;
  for (std::uint64_t z = 0; z < d[2]; ++z)
    for (std::uint64_t y = 0; y < d[1]; ++y)
      for (std::uint64_t x = 0; x < d[0]; ++x) {
        const double dx = (static_cast<double>(x) - center[0]) / radii[0];
        const double dy = (static_cast<double>(y) - center[1]) / radii[1];
        const double dz = (static_cast<double>(z) - center[2]) / radii[2];
        if (dx * dx + dy * dy + dz * dz <= 1.0)
          vol.labels[linear_index(d, x, y, z)] = label;
      }
}

// Random FACE6-connected blob of exactly `target` voxels grown from `seed`
// through voxels satisfying `allowed` (which must admit the seed). Returns
// the voxel indices; smaller than `target` only if growth runs out of room.
std::vector<std::uint64_t> grow_blob(
    const Dims& dims, std::uint64_t seed, std::uint64_t target,
    const std::function<bool(std::uint64_t)>& allowed, std::mt19937_64& rng) {
  std::vector<std::uint8_t> seen(voxel_count(dims), 0);
  std::vector<std::uint64_t> blob, frontier;
  const std::uint64_t nx = dims[0], ny = dims[1], nz = dims[2];

  auto push_neighbors = [&](std::uint64_t idx) {
    const std::uint64_t x = idx % nx, y = (idx / nx) % ny, z = idx / (nx * ny);
    const std::int64_t deltas[6][3] = {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
                                       {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
    for (const auto& dlt : deltas) {
      const std::int64_t qx = static_cast<std::int64_t>(x) + dlt[0];
      const std::int64_t qy = static_cast<std::int64_t>(y) + dlt[1];
      const std::int64_t qz = static_cast<std::int64_t>(z) + dlt[2];
      if (qx < 0 || qy < 0 || qz < 0 || qx >= static_cast<std::int64_t>(nx) ||
          qy >= static_cast<std::int64_t>(ny) || qz >= static_cast<std::int64_t>(nz))
        continue;
      const std::uint64_t q = linear_index(dims, static_cast<std::uint64_t>(qx),
                                           static_cast<std::uint64_t>(qy),
                                           static_cast<std::uint64_t>(qz));
      if (!seen[q] && allowed(q)) {
        seen[q] = 1;
        frontier.push_back(q);
      }
    }
  };

  seen[seed] = 1;
  blob.push_back(seed);
  push_neighbors(seed);
  while (blob.size() < target && !frontier.empty()) {
    const std::uint64_t j = bounded(rng, 0, frontier.size() - 1);
    const std::uint64_t idx = frontier[j];
    frontier[j] = frontier.back();
    frontier.pop_back();
    blob.push_back(idx);
    push_neighbors(idx);
  }
  return blob;
}

// The eight 10^3 corner boxes used for injected RC components.
struct Box {
  std::uint64_t lo[3];
  std::uint64_t hi[3];  // inclusive
};

std::vector<Box> corner_boxes() {
  std::vector<Box> boxes;
  for (int cz = 0; cz < 2; ++cz)
    for (int cy = 0; cy < 2; ++cy)
      for (int cx = 0; cx < 2; ++cx) {
        Box b;
        const std::uint64_t los[2] = {2, 36};
        b.lo[0] = los[cx];
        b.lo[1] = los[cy];
        b.lo[2] = los[cz];
        for (int a = 0; a < 3; ++a) b.hi[a] = b.lo[a] + 9;
        boxes.push_back(b);
      }
  return boxes;
}

// Grows an RC component of exactly `size` voxels inside box `b`, writing only
// background voxels.
void inject_rc_component(LabelVolume& vol, const Box& b, std::uint64_t size,
                         std::mt19937_64& rng) {
  const Dims dims = vol.dims;
  auto allowed = [&vol, &b, dims](std::uint64_t idx) {
    const std::uint64_t x = idx % dims[0], y = (idx / dims[0]) % dims[1],
                        z = idx / (dims[0] * dims[1]);
    return vol.labels[idx] == 0 && x >= b.lo[0] && x <= b.hi[0] && y >= b.lo[1] &&
           y <= b.hi[1] && z >= b.lo[2] && z <= b.hi[2];
  };
  const std::uint64_t sx = bounded(rng, b.lo[0] + 3, b.hi[0] - 3);
  const std::uint64_t sy = bounded(rng, b.lo[1] + 3, b.hi[1] - 3);
  const std::uint64_t sz = bounded(rng, b.lo[2] + 3, b.hi[2] - 3);
  const std::vector<std::uint64_t> blob =
      grow_blob(dims, linear_index(dims, sx, sy, sz), size, allowed, rng);
  for (std::uint64_t idx : blob) vol.labels[idx] = 4;
}

double jitter(std::mt19937_64& rng, double center, std::uint64_t plus_minus) {
  return center + static_cast<double>(bounded(rng, 0, 2 * plus_minus)) -
         static_cast<double>(plus_minus);
}

// Tumor anatomy: SNFH ellipsoid with NETC and ET blobs inside, all within
// [13, 35] per axis. Optionally a primary RC lesion of exactly 150-400 voxels
// near the (low x, low y) edge, clear of the corner boxes.
LabelVolume base_anatomy(std::mt19937_64& rng, bool with_primary_rc,
                         std::uint64_t index) {
  char id[32];
  std::snprintf(id, sizeof(id), "case_%04llu",
                static_cast<unsigned long long>(index));
  LabelVolume vol = make_volume({kN, kN, kN}, {1.0, 1.0, 1.0},
                                std::vector<label_t>(kN * kN * kN, 0), id);

  const std::array<double, 3> c = {jitter(rng, 24, 2), jitter(rng, 24, 2),
                                   jitter(rng, 24, 2)};
  const double rw = static_cast<double>(bounded(rng, 7, 9));
  paint_ellipsoid(vol, c, {rw, rw * 0.9, rw * 0.95}, 2);
  paint_ellipsoid(vol, {c[0] - 3, c[1], c[2]},
                  {3.0, 2.5, 2.5}, 1);
  paint_ellipsoid(vol, {c[0] + 3, c[1] + 1, c[2]},
                  {2.5, 2.0, 2.0}, 3);

  if (with_primary_rc) {
    const std::uint64_t size = bounded(rng, 150, 400);
    auto allowed = [&vol](std::uint64_t idx) { return vol.labels[idx] == 0; };
    const std::uint64_t sx = bounded(rng, 7, 9), sy = bounded(rng, 7, 9),
                        sz = bounded(rng, 22, 26);
    const std::vector<std::uint64_t> blob = grow_blob(
        vol.dims, linear_index(vol.dims, sx, sy, sz), size, allowed, rng);
    for (std::uint64_t idx : blob) vol.labels[idx] = 4;
  }
  return vol;
}

void add_corner_components(LabelVolume& vol, std::mt19937_64& rng,
                           std::uint64_t count, std::uint64_t min_size,
                           std::uint64_t max_size) {
  std::vector<Box> boxes = corner_boxes();
  // choose `count` distinct boxes
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::uint64_t j = bounded(rng, i, boxes.size() - 1);
    std::swap(boxes[i], boxes[j]);
    inject_rc_component(vol, boxes[i], bounded(rng, min_size, max_size), rng);
  }
}

void carve_wt_pockets(LabelVolume& pred, std::mt19937_64& rng) {
  const BinaryMask wt = region_mask(pred, {1, 2, 3});
  const BinaryMask interior = erode(wt, Connectivity::Face6, 3);
  std::vector<std::uint64_t> interior_idx;
  for (std::size_t i = 0; i < interior.occupancy.size(); ++i)
    if (interior.occupancy[i]) interior_idx.push_back(i);
  if (interior_idx.empty()) return;  // unreachable with the fixed anatomy radii

  const std::uint64_t pockets = bounded(rng, 1, 3);
  for (std::uint64_t p = 0; p < pockets; ++p) {
    const std::uint64_t seed = interior_idx[bounded(rng, 0, interior_idx.size() - 1)];
    auto allowed = [&interior](std::uint64_t idx) {
      return interior.occupancy[idx] != 0;
    };
    const std::uint64_t size = bounded(rng, 3, 30);
    for (std::uint64_t idx : grow_blob(pred.dims, seed, size, allowed, rng))
      pred.labels[idx] = 0;
  }
}

}  // namespace

std::vector<std::string> synth_scenarios() {
  return {"clean", "small-fp-rc", "true-small-rc", "holey-wt", "multifocal-rc"};
}

std::pair<LabelVolume, LabelVolume> synth_case(const std::string& scenario,
                                               std::uint64_t seed,
                                               std::uint64_t index) {
  std::mt19937_64 rng(splitmix64(splitmix64(seed) + index));

  if (scenario == "clean") {
    LabelVolume gt = base_anatomy(rng, true, index);
    return {gt, gt};
  }
  if (scenario == "small-fp-rc") {
    LabelVolume gt = base_anatomy(rng, true, index);
    LabelVolume pred = gt;
    add_corner_components(pred, rng, bounded(rng, 1, 3), 10, 99);
    return {gt, pred};
  }
  if (scenario == "true-small-rc") {
    LabelVolume gt = base_anatomy(rng, false, index);
    add_corner_components(gt, rng, 1, 10, 99);
    return {gt, gt};
  }
  if (scenario == "holey-wt") {
    LabelVolume gt = base_anatomy(rng, true, index);
    LabelVolume pred = gt;
    carve_wt_pockets(pred, rng);
    return {gt, pred};
  }
  if (scenario == "multifocal-rc") {
    LabelVolume gt = base_anatomy(rng, true, index);
    LabelVolume pred = gt;
    add_corner_components(pred, rng, bounded(rng, 1, 3), 40, 250);
    return {gt, pred};
  }
  throw ValidationError("unknown synth scenario '" + scenario +
                        "' (expected clean, small-fp-rc, true-small-rc, "
                        "holey-wt, or multifocal-rc)");
}

}  // namespace maskforge
