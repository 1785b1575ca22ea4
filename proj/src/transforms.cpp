// Label-volume postprocessing transforms.
//
// Size-based removal and replacement share one kernel so that
// remove == replace-with-0 holds exactly. All transforms are pure: the input
// volume is never mutated, and voxels outside the transform's target set are
// bit-identical in the output.

#include "transforms.hpp"

#include <algorithm>
#include <set>

#include "errors.hpp"

namespace maskforge {

namespace {

constexpr Connectivity kDefaultConn = Connectivity::Full26;
constexpr Connectivity kDefaultHoleConn = Connectivity::Face6;
constexpr ApplyMode kDefaultMode = ApplyMode::Sequential;

void require_labels(const TransformParams& p, const LabelScheme& scheme,
                    const char* tname) {
  if (p.labels.empty())
    throw ValidationError(std::string(tname) + ": 'labels' must be non-empty");
  for (label_t l : p.labels)
    if (!scheme.in_universe(l))
      throw ValidationError(std::string(tname) + ": target label " +
                            std::to_string(int(l)) + " outside the scheme universe");
  std::set<label_t> seen(p.labels.begin(), p.labels.end());
  if (seen.size() != p.labels.size())
    throw ValidationError(std::string(tname) + ": duplicate target label");
}

void reject(const char* tname, const char* field, bool present) {
  if (present)
    throw ValidationError(std::string(tname) + ": parameter '" + field +
                          "' is not used by this transform");
}

void validate_size_filter(const TransformParams& p, const LabelScheme& scheme,
                          const char* tname, bool replacement_required) {
  require_labels(p, scheme, tname);
  if (!p.threshold)
    throw ValidationError(std::string(tname) + ": missing 'threshold'");
  if (replacement_required) {
    if (!p.replacement)
      throw ValidationError(std::string(tname) + ": missing 'replacement'");
    if (*p.replacement != 0 && !scheme.in_universe(*p.replacement))
      throw ValidationError(std::string(tname) + ": replacement label " +
                            std::to_string(int(*p.replacement)) +
                            " outside the scheme universe");
  } else if (p.replacement && *p.replacement != 0) {
    throw ValidationError(std::string(tname) +
                          ": nonzero 'replacement' (use replace_small_objects)");
  }
  reject(tname, "k", p.k.has_value());
  reject(tname, "fill_label", p.fill_label.has_value());
  reject(tname, "iterations", p.iterations.has_value());
}

void validate_remove_small(const TransformParams& p, const LabelScheme& scheme) {
  validate_size_filter(p, scheme, "remove_small_objects", false);
}

void validate_replace_small(const TransformParams& p, const LabelScheme& scheme) {
  validate_size_filter(p, scheme, "replace_small_objects", true);
}

void validate_keep_top_k(const TransformParams& p, const LabelScheme& scheme) {
  require_labels(p, scheme, "keep_top_k");
  if (!p.k) throw ValidationError("keep_top_k: missing 'k'");
  if (*p.k < 1) throw ValidationError("keep_top_k: 'k' must be >= 1");
  reject("keep_top_k", "threshold", p.threshold.has_value());
  reject("keep_top_k", "replacement", p.replacement.has_value());
  reject("keep_top_k", "fill_label", p.fill_label.has_value());
  reject("keep_top_k", "iterations", p.iterations.has_value());
}

void validate_fill_holes(const TransformParams& p, const LabelScheme& scheme) {
  require_labels(p, scheme, "fill_holes_with_label");
  if (!p.fill_label) throw ValidationError("fill_holes_with_label: missing 'fill_label'");
  if (!scheme.in_universe(*p.fill_label))
    throw ValidationError("fill_holes_with_label: fill label " +
                          std::to_string(int(*p.fill_label)) +
                          " outside the scheme universe");
  reject("fill_holes_with_label", "threshold", p.threshold.has_value());
  reject("fill_holes_with_label", "replacement", p.replacement.has_value());
  reject("fill_holes_with_label", "k", p.k.has_value());
  reject("fill_holes_with_label", "iterations", p.iterations.has_value());
  reject("fill_holes_with_label", "mode", p.mode.has_value());
}

void validate_closing(const TransformParams& p, const LabelScheme& scheme) {
  require_labels(p, scheme, "morphological_closing");
  if (!p.iterations) throw ValidationError("morphological_closing: missing 'iterations'");
  if (p.mode && *p.mode == ApplyMode::Joint)
    throw ValidationError("morphological_closing: JOINT mode is not supported");
  reject("morphological_closing", "threshold", p.threshold.has_value());
  reject("morphological_closing", "replacement", p.replacement.has_value());
  reject("morphological_closing", "k", p.k.has_value());
  reject("morphological_closing", "fill_label", p.fill_label.has_value());
}

// Replace the voxels of small components (per mode) with `replacement`.
LabelVolume replace_small_impl(const LabelVolume& vol, const TransformParams& p,
                               const LabelScheme& scheme) {
  const std::uint64_t threshold = *p.threshold;
  const label_t replacement = p.replacement.value_or(0);
  const Connectivity conn = p.conn.value_or(kDefaultConn);
  const ApplyMode mode = p.mode.value_or(kDefaultMode);

  if (mode == ApplyMode::Joint) {
    BinaryMask region = region_mask(vol, p.labels, scheme);
    ComponentLabeling lab = label_components(region, conn);
    BinaryMask small = small_components_mask(lab, threshold, vol.spacing);
    return set_region(vol, small, replacement, scheme);
  }
  LabelVolume out = vol;
  for (label_t l : p.labels) {
    BinaryMask region = region_mask(out, {l}, scheme);
    ComponentLabeling lab = label_components(region, conn);
    BinaryMask small = small_components_mask(lab, threshold, vol.spacing);
    out = set_region(out, small, replacement, scheme);
  }
  return out;
}

}  // namespace

LabelVolume remove_small_objects(const LabelVolume& vol, const TransformParams& p,
                                 const LabelScheme& scheme) {
  validate_remove_small(p, scheme);
  TransformParams q = p;
  q.replacement = 0;
  return replace_small_impl(vol, q, scheme);
}

LabelVolume replace_small_objects(const LabelVolume& vol, const TransformParams& p,
                                  const LabelScheme& scheme) {
  validate_replace_small(p, scheme);
  return replace_small_impl(vol, p, scheme);
}

LabelVolume keep_top_k(const LabelVolume& vol, const TransformParams& p,
                       const LabelScheme& scheme) {
  validate_keep_top_k(p, scheme);
  const Connectivity conn = p.conn.value_or(kDefaultConn);
  const ApplyMode mode = p.mode.value_or(kDefaultMode);

  auto drop_beyond_k = [&](LabelVolume cur, const std::vector<label_t>& labels) {
    BinaryMask region = region_mask(cur, labels, scheme);
    ComponentLabeling lab = label_components(region, conn);
    BinaryMask drop;
    drop.dims = lab.dims;
    drop.spacing = cur.spacing;
    drop.occupancy.resize(lab.ids.size());
    for (std::size_t i = 0; i < lab.ids.size(); ++i)
      drop.occupancy[i] = (lab.ids[i] > *p.k) ? 1 : 0;
    return set_region(cur, drop, 0, scheme);
  };

  if (mode == ApplyMode::Joint) return drop_beyond_k(vol, p.labels);
  LabelVolume out = vol;
  for (label_t l : p.labels) out = drop_beyond_k(std::move(out), {l});
  return out;
}

LabelVolume fill_holes_with_label(const LabelVolume& vol, const TransformParams& p,
                                  const LabelScheme& scheme) {
  validate_fill_holes(p, scheme);
  const Connectivity bg_conn = p.conn.value_or(kDefaultHoleConn);
  BinaryMask region = region_mask(vol, p.labels, scheme);
  BinaryMask filled = fill_holes_mask(region, bg_conn);

  // Only voxels that currently hold 0 are written; enclosed voxels of other
  // labels are preserved.
  LabelVolume out = vol;
  for (std::size_t i = 0; i < out.labels.size(); ++i)
    if (filled.occupancy[i] && !region.occupancy[i] && out.labels[i] == 0)
      out.labels[i] = *p.fill_label;
  return out;
}

LabelVolume morphological_closing(const LabelVolume& vol, const TransformParams& p,
                                  const LabelScheme& scheme) {
  validate_closing(p, scheme);
  const Connectivity conn = p.conn.value_or(kDefaultConn);
  LabelVolume out = vol;
  for (label_t l : p.labels) {
    BinaryMask mask = region_mask(out, {l}, scheme);
    BinaryMask closed = close(mask, conn, *p.iterations);
    // result region = mask U (close(mask) & background): original voxels are
    // never eroded away and foreground of other labels is never overwritten
    for (std::size_t i = 0; i < out.labels.size(); ++i)
      if (closed.occupancy[i] && !mask.occupancy[i] && out.labels[i] == 0)
        out.labels[i] = l;
  }
  return out;
}

void TransformRegistry::register_transform(const std::string& name, ValidateFn validate,
                                           TransformFn run) {
  if (frozen_)
    throw ValidationError("transform registry is frozen; register transforms at startup");
  if (name.empty()) throw ValidationError("transform name must be non-empty");
  if (table_.count(name))
    throw ValidationError("transform '" + name + "' is already registered");
  table_.emplace(name, Entry{std::move(validate), std::move(run)});
}

const TransformRegistry::Entry& TransformRegistry::lookup(const std::string& name) const {
  auto it = table_.find(name);
  if (it == table_.end())
    throw ValidationError("unknown transform '" + name + "'");
  return it->second;
}

bool TransformRegistry::contains(const std::string& name) const {
  return table_.count(name) != 0;
}

std::vector<std::string> TransformRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(table_.size());
  for (const auto& [name, entry] : table_) out.push_back(name);
  return out;  // std::map iterates in sorted order
}

TransformRegistry& TransformRegistry::global() {
  static TransformRegistry reg = [] {
    TransformRegistry r;
    register_builtin_transforms(r);
    return r;
  }();
  return reg;
}

void register_builtin_transforms(TransformRegistry& reg) {
  reg.register_transform("remove_small_objects", validate_remove_small,
                         remove_small_objects);
  reg.register_transform("replace_small_objects", validate_replace_small,
                         replace_small_objects);
  reg.register_transform("keep_top_k", validate_keep_top_k, keep_top_k);
  reg.register_transform("fill_holes_with_label", validate_fill_holes,
                         fill_holes_with_label);
  reg.register_transform("morphological_closing", validate_closing,
                         morphological_closing);
}

}  // namespace maskforge
