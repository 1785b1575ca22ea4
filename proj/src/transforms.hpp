#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "volume.hpp"
#include "voxelops.hpp"

namespace maskforge {

// JOINT operates once on the union mask of all target labels; SEQUENTIAL
// processes each target label's own mask in listed order.
enum class ApplyMode { Sequential, Joint };

// Parameter bag shared by all transforms. A field is set iff the transform
// uses it; each transform's validator enforces that.
struct TransformParams {
  std::vector<label_t> labels;
  std::optional<std::uint64_t> threshold;
  std::optional<label_t> replacement;
  std::optional<std::uint64_t> k;
  std::optional<label_t> fill_label;
  std::optional<Connectivity> conn;
  std::optional<std::uint64_t> iterations;
  std::optional<ApplyMode> mode;

  bool operator==(const TransformParams&) const = default;
};

using TransformFn =
    std::function<LabelVolume(const LabelVolume&, const TransformParams&, const LabelScheme&)>;
using ValidateFn = std::function<void(const TransformParams&, const LabelScheme&)>;

// Name -> (validator, executor) table. Mutable until frozen; apply paths
// freeze it before execution so a shared registry is safe to read in
// parallel.
class TransformRegistry {
 public:
  struct Entry {
    ValidateFn validate;
    TransformFn run;
  };

  TransformRegistry() = default;

  void register_transform(const std::string& name, ValidateFn validate, TransformFn run);
  const Entry& lookup(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;  // sorted

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

  // Process-wide registry with the built-in transforms pre-registered.
  static TransformRegistry& global();

 private:
  std::map<std::string, Entry> table_;
  bool frozen_ = false;
};

// Registers remove_small_objects, replace_small_objects, keep_top_k,
// fill_holes_with_label, and morphological_closing into `reg`.
void register_builtin_transforms(TransformRegistry& reg);

// The built-in transforms, callable directly.
LabelVolume remove_small_objects(const LabelVolume& vol, const TransformParams& p,
                                 const LabelScheme& scheme = LabelScheme::brats_default());
LabelVolume replace_small_objects(const LabelVolume& vol, const TransformParams& p,
                                  const LabelScheme& scheme = LabelScheme::brats_default());
LabelVolume keep_top_k(const LabelVolume& vol, const TransformParams& p,
                       const LabelScheme& scheme = LabelScheme::brats_default());
LabelVolume fill_holes_with_label(const LabelVolume& vol, const TransformParams& p,
                                  const LabelScheme& scheme = LabelScheme::brats_default());
LabelVolume morphological_closing(const LabelVolume& vol, const TransformParams& p,
                                  const LabelScheme& scheme = LabelScheme::brats_default());

}  // namespace maskforge
