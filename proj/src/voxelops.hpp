#pragma once

#include <cstdint>
#include <vector>

#include "volume.hpp"

namespace maskforge {

// Adjacency rule on the voxel lattice: voxels sharing a face, or sharing a
// face, edge, or corner.
enum class Connectivity { Face6, Full26 };

// Partition of a binary mask into maximal connected components.
// Component ids are 1..count, assigned in decreasing size order; size ties
// break toward the component with the smaller minimum linear voxel index,
// so numbering is deterministic.
struct ComponentLabeling {
  Dims dims{0, 0, 0};
  Connectivity connectivity = Connectivity::Full26;
  std::vector<std::uint32_t> ids;     // 0 = background
  std::vector<std::uint64_t> sizes;   // sizes[i] = voxels in component i+1, non-increasing

  std::uint32_t count() const { return static_cast<std::uint32_t>(sizes.size()); }
};

ComponentLabeling label_components(const BinaryMask& mask, Connectivity conn);

// Union of the first min(k, n) components in deterministic order.
BinaryMask top_k_mask(const ComponentLabeling& lab, std::uint64_t k,
                      const Spacing& spacing = {1.0, 1.0, 1.0});

// Union of components with size strictly less than `threshold`.
BinaryMask small_components_mask(const ComponentLabeling& lab, std::uint64_t threshold,
                                 const Spacing& spacing = {1.0, 1.0, 1.0});

// mask plus every background component that cannot reach the volume border
// under `bg_conn`.
BinaryMask fill_holes_mask(const BinaryMask& mask, Connectivity bg_conn);

// Iterated neighbor union / intersection. Standalone erosion treats
// out-of-volume as background, so objects touching the border erode there.
// close = dilate then erode with identical parameters, except that the
// erosion half of a closing ignores out-of-volume neighbors — that keeps
// closing extensive (output ⊇ input) and idempotent on bounded volumes.
BinaryMask dilate(const BinaryMask& mask, Connectivity conn, std::uint64_t iterations);
BinaryMask erode(const BinaryMask& mask, Connectivity conn, std::uint64_t iterations);
BinaryMask close(const BinaryMask& mask, Connectivity conn, std::uint64_t iterations);

}  // namespace maskforge
