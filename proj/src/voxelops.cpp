// Lattice primitives on binary masks.
//
// Connected components use the classic two-pass raster scan: provisional
// labels from already-visited ("causal") neighbors are merged through a
// union-find table with path halving, then remapped so that component 1 is
// the largest. Everything downstream (top-k, size filtering) relies on that
// deterministic ordering.

#include "voxelops.hpp"

#include <algorithm>
#include <numeric>

#include "errors.hpp"

namespace maskforge {

namespace {

struct Offset {
  int dx, dy, dz;
};

// Neighbors with a smaller linear index under z-major scan order.
std::vector<Offset> causal_offsets(Connectivity conn) {
  if (conn == Connectivity::Face6)
    return {{-1, 0, 0}, {0, -1, 0}, {0, 0, -1}};
  std::vector<Offset> offs;
  for (int dz = -1; dz <= 0; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dz > 0) continue;
        if (dz == 0 && dy > 0) continue;
        if (dz == 0 && dy == 0 && dx >= 0) continue;
        offs.push_back({dx, dy, dz});
      }
  return offs;
}

std::vector<Offset> all_offsets(Connectivity conn) {
  if (conn == Connectivity::Face6)
    return {{-1, 0, 0}, {1, 0, 0},  {0, -1, 0},
            {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
  std::vector<Offset> offs;
  for (int dz = -1; dz <= 1; ++dz)
    for (int dy = -1; dy <= 1; ++dy)
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0 && dz == 0) continue;
        offs.push_back({dx, dy, dz});
      }
  return offs;
}

class UnionFind {
 public:
  std::uint32_t make_set() {
    parent_.push_back(static_cast<std::uint32_t>(parent_.size()));
    return static_cast<std::uint32_t>(parent_.size() - 1);
  }
  std::uint32_t find(std::uint32_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];  // path halving
      x = parent_[x];
    }
    return x;
  }
  void unite(std::uint32_t a, std::uint32_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (a < b) parent_[b] = a;
    else parent_[a] = b;
  }
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::uint32_t> parent_;
};

}  // namespace

ComponentLabeling label_components(const BinaryMask& mask, Connectivity conn) {
  const Dims d = mask.dims;
  const std::uint64_t n = voxel_count(d);
  if (mask.occupancy.size() != n)
    throw DataError("label_components: occupancy length does not match dims");

  ComponentLabeling lab;
  lab.dims = d;
  lab.connectivity = conn;
  lab.ids.assign(n, 0);

  const auto offs = causal_offsets(conn);
  UnionFind uf;
  uf.make_set();  // slot 0 reserved for background

  // pass 1: provisional labels
  std::uint64_t idx = 0;
  for (std::uint64_t z = 0; z < d[2]; ++z) {
    for (std::uint64_t y = 0; y < d[1]; ++y) {
      for (std::uint64_t x = 0; x < d[0]; ++x, ++idx) {
        if (!mask.occupancy[idx]) continue;
        std::uint32_t assigned = 0;
        for (const auto& o : offs) {
          const std::int64_t nx = std::int64_t(x) + o.dx;
          const std::int64_t ny = std::int64_t(y) + o.dy;
          const std::int64_t nz = std::int64_t(z) + o.dz;
          if (nx < 0 || ny < 0 || nz < 0 || nx >= std::int64_t(d[0]) ||
              ny >= std::int64_t(d[1]) || nz >= std::int64_t(d[2]))
            continue;
          const std::uint32_t nb = lab.ids[linear_index(d, nx, ny, nz)];
          if (nb == 0) continue;
          if (assigned == 0) assigned = nb;
          else uf.unite(assigned, nb);
        }
        if (assigned == 0) assigned = uf.make_set();
        lab.ids[idx] = assigned;
      }
    }
  }

  // pass 2: resolve roots, gather per-component size and first-occurrence index
  std::vector<std::uint32_t> root_of(uf.size(), 0);
  for (std::uint32_t p = 1; p < uf.size(); ++p) root_of[p] = uf.find(p);

  std::vector<std::uint64_t> size_of(uf.size(), 0);
  std::vector<std::uint64_t> first_of(uf.size(), std::uint64_t(-1));
  for (std::uint64_t i = 0; i < n; ++i) {
    const std::uint32_t p = lab.ids[i];
    if (p == 0) continue;
    const std::uint32_t r = root_of[p];
    ++size_of[r];
    if (first_of[r] == std::uint64_t(-1)) first_of[r] = i;
  }

  std::vector<std::uint32_t> roots;
  for (std::uint32_t r = 1; r < uf.size(); ++r)
    if (size_of[r] > 0) roots.push_back(r);
  std::sort(roots.begin(), roots.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (size_of[a] != size_of[b]) return size_of[a] > size_of[b];
    return first_of[a] < first_of[b];
  });

  std::vector<std::uint32_t> final_id(uf.size(), 0);
  lab.sizes.resize(roots.size());
  for (std::uint32_t i = 0; i < roots.size(); ++i) {
    final_id[roots[i]] = i + 1;
    lab.sizes[i] = size_of[roots[i]];
  }
  for (std::uint64_t i = 0; i < n; ++i)
    if (lab.ids[i] != 0) lab.ids[i] = final_id[root_of[lab.ids[i]]];

  return lab;
}

BinaryMask top_k_mask(const ComponentLabeling& lab, std::uint64_t k,
                      const Spacing& spacing) {
  BinaryMask out;
  out.dims = lab.dims;
  out.spacing = spacing;
  out.occupancy.resize(lab.ids.size());
  for (std::size_t i = 0; i < lab.ids.size(); ++i)
    out.occupancy[i] = (lab.ids[i] != 0 && lab.ids[i] <= k) ? 1 : 0;
  return out;
}

BinaryMask small_components_mask(const ComponentLabeling& lab, std::uint64_t threshold,
                                 const Spacing& spacing) {
  BinaryMask out;
  out.dims = lab.dims;
  out.spacing = spacing;
  out.occupancy.resize(lab.ids.size());
  for (std::size_t i = 0; i < lab.ids.size(); ++i) {
    const std::uint32_t id = lab.ids[i];
    out.occupancy[i] = (id != 0 && lab.sizes[id - 1] < threshold) ? 1 : 0;
  }
  return out;
}

BinaryMask fill_holes_mask(const BinaryMask& mask, Connectivity bg_conn) {
  const Dims d = mask.dims;
  const std::uint64_t n = voxel_count(d);

  // flood the background from the volume border; unreached background = holes
  std::vector<std::uint8_t> reached(n, 0);
  std::vector<std::uint64_t> stack;
  auto push_if_bg = [&](std::uint64_t x, std::uint64_t y, std::uint64_t z) {
    const std::uint64_t i = linear_index(d, x, y, z);
    if (!mask.occupancy[i] && !reached[i]) {
      reached[i] = 1;
      stack.push_back(i);
    }
  };
  for (std::uint64_t z = 0; z < d[2]; ++z)
    for (std::uint64_t y = 0; y < d[1]; ++y)
      for (std::uint64_t x = 0; x < d[0]; ++x)
        if (x == 0 || y == 0 || z == 0 || x == d[0] - 1 || y == d[1] - 1 ||
            z == d[2] - 1)
          push_if_bg(x, y, z);

  const auto offs = all_offsets(bg_conn);
  while (!stack.empty()) {
    const std::uint64_t i = stack.back();
    stack.pop_back();
    const std::uint64_t z = i / (d[0] * d[1]);
    const std::uint64_t rem = i % (d[0] * d[1]);
    const std::uint64_t y = rem / d[0];
    const std::uint64_t x = rem % d[0];
    for (const auto& o : offs) {
      const std::int64_t nx = std::int64_t(x) + o.dx;
      const std::int64_t ny = std::int64_t(y) + o.dy;
      const std::int64_t nz = std::int64_t(z) + o.dz;
      if (nx < 0 || ny < 0 || nz < 0 || nx >= std::int64_t(d[0]) ||
          ny >= std::int64_t(d[1]) || nz >= std::int64_t(d[2]))
        continue;
      push_if_bg(nx, ny, nz);
    }
  }

  BinaryMask out;
  out.dims = d;
  out.spacing = mask.spacing;
  out.occupancy.resize(n);
  for (std::uint64_t i = 0; i < n; ++i)
    out.occupancy[i] = (mask.occupancy[i] || !reached[i]) ? 1 : 0;
  return out;
}

namespace {

enum class Pass { Dilate, Erode, ErodeBorderFg };

BinaryMask morph_pass(const BinaryMask& mask, Connectivity conn,
                      std::uint64_t iterations, Pass pass) {
  BinaryMask cur = mask;
  const Dims d = mask.dims;
  const auto offs = all_offsets(conn);
  for (std::uint64_t it = 0; it < iterations; ++it) {
    BinaryMask next = cur;
    std::uint64_t i = 0;
    for (std::uint64_t z = 0; z < d[2]; ++z) {
      for (std::uint64_t y = 0; y < d[1]; ++y) {
        for (std::uint64_t x = 0; x < d[0]; ++x, ++i) {
          if (pass == Pass::Dilate) {
            if (cur.occupancy[i]) continue;
            for (const auto& o : offs) {
              const std::int64_t nx = std::int64_t(x) + o.dx;
              const std::int64_t ny = std::int64_t(y) + o.dy;
              const std::int64_t nz = std::int64_t(z) + o.dz;
              if (nx < 0 || ny < 0 || nz < 0 || nx >= std::int64_t(d[0]) ||
                  ny >= std::int64_t(d[1]) || nz >= std::int64_t(d[2]))
                continue;
              if (cur.occupancy[linear_index(d, nx, ny, nz)]) {
                next.occupancy[i] = 1;
                break;
              }
            }
          } else {
            if (!cur.occupancy[i]) continue;
            for (const auto& o : offs) {
              const std::int64_t nx = std::int64_t(x) + o.dx;
              const std::int64_t ny = std::int64_t(y) + o.dy;
              const std::int64_t nz = std::int64_t(z) + o.dz;
              bool inside = !(nx < 0 || ny < 0 || nz < 0 ||
                              nx >= std::int64_t(d[0]) ||
                              ny >= std::int64_t(d[1]) ||
                              nz >= std::int64_t(d[2]));
              if (!inside) {
                // standalone erosion counts out-of-volume as background, so
                // objects erode at the border; ErodeBorderFg ignores the
                // outside instead (see close below)
                if (pass == Pass::Erode) {
                  next.occupancy[i] = 0;
                  break;
                }
                continue;
              }
              if (!cur.occupancy[linear_index(d, nx, ny, nz)]) {
                next.occupancy[i] = 0;
                break;
              }
            }
          }
        }
      }
    }
    cur = std::move(next);
  }
  return cur;
}

}  // namespace

BinaryMask dilate(const BinaryMask& mask, Connectivity conn, std::uint64_t iterations) {
  return morph_pass(mask, conn, iterations, Pass::Dilate);
}

BinaryMask erode(const BinaryMask& mask, Connectivity conn, std::uint64_t iterations) {
  return morph_pass(mask, conn, iterations, Pass::Erode);
}

BinaryMask close(const BinaryMask& mask, Connectivity conn, std::uint64_t iterations) {
  // The erosion half ignores out-of-volume neighbors. With the dilation
  // clipped to the volume this pair is an adjunction, which is what makes
  // closing extensive and idempotent; eroding at the border instead would
  // let a closing delete voxels of the original mask.
  BinaryMask dilated = morph_pass(mask, conn, iterations, Pass::Dilate);
  return morph_pass(dilated, conn, iterations, Pass::ErodeBorderFg);
}

}  // namespace maskforge
