#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace maskforge {

using label_t = std::uint8_t;

using Dims = std::array<std::uint64_t, 3>;     // (nx, ny, nz), voxel counts
using Spacing = std::array<double, 3>;         // (dx, dy, dz), mm per voxel

inline std::uint64_t voxel_count(const Dims& d) { return d[0] * d[1] * d[2]; }

// Row-major with x fastest: idx = x + nx*(y + ny*z). Matches NIfTI data order.
inline std::uint64_t linear_index(const Dims& d, std::uint64_t x,
                                  std::uint64_t y, std::uint64_t z) {
  return x + d[0] * (y + d[1] * z);
}

// Dense 3D grid of uint8 labels with physical voxel spacing. Immutable by
// convention: transforms return new volumes instead of mutating.
struct LabelVolume {
  Dims dims{0, 0, 0};
  Spacing spacing{1.0, 1.0, 1.0};
  std::vector<label_t> labels;
  std::string case_id;
  // Original NIfTI header bytes (348, native byte order) carried through so
  // that orientation metadata survives a load/save round trip. Empty for
  // volumes built in memory.
  std::vector<std::uint8_t> raw_header;

  label_t at(std::uint64_t x, std::uint64_t y, std::uint64_t z) const {
    return labels[linear_index(dims, x, y, z)];
  }
};

// Boolean occupancy grid sharing dims/spacing with its source volume.
struct BinaryMask {
  Dims dims{0, 0, 0};
  Spacing spacing{1.0, 1.0, 1.0};
  std::vector<std::uint8_t> occupancy;  // 0 or 1

  bool at(std::uint64_t x, std::uint64_t y, std::uint64_t z) const {
    return occupancy[linear_index(dims, x, y, z)] != 0;
  }
  std::uint64_t popcount() const;
  bool empty_mask() const { return popcount() == 0; }
};

// Ordered mapping class-name -> label ids. The universe is the union of the
// singleton classes; composed classes may only draw from it.
class LabelScheme {
 public:
  using ClassEntry = std::pair<std::string, std::vector<label_t>>;

  explicit LabelScheme(std::vector<ClassEntry> classes);

  // NETC={1}, SNFH={2}, ET={3}, RC={4}, TC={1,3}, WT={1,2,3}
  static const LabelScheme& brats_default();

  const std::vector<ClassEntry>& classes() const { return classes_; }
  const std::vector<label_t>& class_labels(const std::string& name) const;
  bool has_class(const std::string& name) const;
  const std::vector<label_t>& universe() const { return universe_; }
  bool in_universe(label_t l) const;

 private:
  std::vector<ClassEntry> classes_;
  std::vector<label_t> universe_;  // sorted, unique
};

// Checked constructor for in-memory volumes. Throws ValidationError when the
// invariants (positive finite spacing, labels length = nx*ny*nz) fail.
LabelVolume make_volume(const Dims& dims, const Spacing& spacing,
                        std::vector<label_t> labels, std::string case_id);

// Occupancy true exactly where the voxel label is in `labels`. Labels must
// all be members of the scheme universe.
BinaryMask region_mask(const LabelVolume& vol, const std::vector<label_t>& labels,
                       const LabelScheme& scheme = LabelScheme::brats_default());

// Copy of `vol` with masked voxels set to `label` (universe or 0).
LabelVolume set_region(const LabelVolume& vol, const BinaryMask& mask, label_t label,
                       const LabelScheme& scheme = LabelScheme::brats_default());

// NIfTI-1 I/O. Load accepts uint8/int16/int32/uint16 data, or float32 whose
// scaled values are exact integers; gzip containers are detected by magic
// bytes. Save always writes uint8 with scl_slope=1/scl_inter=0 and gzips iff
// the path ends in ".gz".
LabelVolume load_volume(const std::string& path);
void save_volume(const LabelVolume& vol, const std::string& path);

// Filename stem with a trailing .nii / .nii.gz stripped.
std::string case_id_from_path(const std::string& path);

}  // namespace maskforge
