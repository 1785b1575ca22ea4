#include "volume.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "errors.hpp"

namespace maskforge {

std::uint64_t BinaryMask::popcount() const {
  std::uint64_t n = 0;
  for (std::uint8_t v : occupancy) n += (v != 0);
  return n;
}

LabelScheme::LabelScheme(std::vector<ClassEntry> classes)
    : classes_(std::move(classes)) {
  if (classes_.empty()) throw ValidationError("label scheme: no classes");
  std::set<label_t> uni;
  std::set<std::string> names;
  for (const auto& [name, labels] : classes_) {
    if (name.empty()) throw ValidationError("label scheme: empty class name");
    if (!names.insert(name).second)
      throw ValidationError("label scheme: duplicate class '" + name + "'");
    if (labels.empty())
      throw ValidationError("label scheme: class '" + name + "' has no labels");
    if (labels.size() == 1) {
      if (labels[0] == 0)
        throw ValidationError("label scheme: 0 is reserved for background");
      uni.insert(labels[0]);
    }
  }
  universe_.assign(uni.begin(), uni.end());
  for (const auto& [name, labels] : classes_) {
    for (label_t l : labels) {
      if (!uni.count(l))
        throw ValidationError("label scheme: composed class '" + name +
                              "' uses label outside the universe");
    }
  }
}

const LabelScheme& LabelScheme::brats_default() {
  static const LabelScheme scheme({
      {"NETC", {1}},
      {"SNFH", {2}},
      {"ET", {3}},
      {"RC", {4}},
      {"TC", {1, 3}},
      {"WT", {1, 2, 3}},
  });
  return scheme;
}

const std::vector<label_t>& LabelScheme::class_labels(const std::string& name) const {
  for (const auto& [n, labels] : classes_)
    if (n == name) return labels;
  throw ValidationError("unknown class '" + name + "'");
}

bool LabelScheme::has_class(const std::string& name) const {
  for (const auto& [n, labels] : classes_)
    if (n == name) return true;
  return false;
}

bool LabelScheme::in_universe(label_t l) const {
  return std::binary_search(universe_.begin(), universe_.end(), l);
}

LabelVolume make_volume(const Dims& dims, const Spacing& spacing,
                        std::vector<label_t> labels, std::string case_id) {
  if (dims[0] == 0 || dims[1] == 0 || dims[2] == 0)
    throw ValidationError("volume dims must be positive");
  for (double s : spacing) {
    if (!(s > 0.0) || !std::isfinite(s))
      throw ValidationError("voxel spacing must be finite and > 0");
  }
  if (labels.size() != voxel_count(dims))
    throw ValidationError("label array length does not match dims product");
  LabelVolume vol;
  vol.dims = dims;
  vol.spacing = spacing;
  vol.labels = std::move(labels);
  vol.case_id = std::move(case_id);
  return vol;
}

BinaryMask region_mask(const LabelVolume& vol, const std::vector<label_t>& labels,
                       const LabelScheme& scheme) {
  bool wanted[256] = {};
  for (label_t l : labels) {
    if (!scheme.in_universe(l))
      throw ValidationError("region_mask: label " + std::to_string(int(l)) +
                            " outside the scheme universe");
    wanted[l] = true;
  }
  BinaryMask mask;
  mask.dims = vol.dims;
  mask.spacing = vol.spacing;
  mask.occupancy.resize(vol.labels.size());
  for (std::size_t i = 0; i < vol.labels.size(); ++i)
    mask.occupancy[i] = wanted[vol.labels[i]] ? 1 : 0;
  return mask;
}

LabelVolume set_region(const LabelVolume& vol, const BinaryMask& mask, label_t label,
                       const LabelScheme& scheme) {
  if (mask.dims != vol.dims)
    throw DataError("set_region: mask dims do not match volume dims");
  if (label != 0 && !scheme.in_universe(label))
    throw ValidationError("set_region: label " + std::to_string(int(label)) +
                          " outside the scheme universe");
  LabelVolume out = vol;
  for (std::size_t i = 0; i < out.labels.size(); ++i)
    if (mask.occupancy[i]) out.labels[i] = label;
  return out;
}

std::string case_id_from_path(const std::string& path) {
  std::string name = path;
  auto slash = name.find_last_of("/\\");
  if (slash != std::string::npos) name = name.substr(slash + 1);
  auto strip = [&name](const std::string& suffix) {
    if (name.size() > suffix.size() &&
        name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0)
      name.resize(name.size() - suffix.size());
  };
  strip(".nii.gz");
  strip(".nii");
  return name;
}

}  // namespace maskforge
