#pragma once

#include <string>
#include <vector>

#include "transforms.hpp"

namespace maskforge {

struct StrategyStep {
  std::string transform;
  TransformParams params;

  bool operator==(const StrategyStep&) const = default;
};

// Ordered, validated list of transform steps. Immutable after parse; one
// spec may drive many volumes concurrently.
struct StrategySpec {
  std::string name;
  std::vector<StrategyStep> steps;

  bool operator==(const StrategySpec&) const = default;
};

// Parses and validates a strategy document. Unknown keys are rejected;
// defaults (connectivity, mode, replacement) are materialized per transform.
StrategySpec parse_strategy(const std::string& json_text,
                            const TransformRegistry& reg = TransformRegistry::global(),
                            const LabelScheme& scheme = LabelScheme::brats_default());

// Canonical single-line JSON: fixed key order, defaults materialized.
// parse(serialize(spec)) == spec and serialize is a fixed point.
std::string serialize_strategy(const StrategySpec& spec);

// Left fold of the step executors over the volume. Freezes the registry.
LabelVolume apply_strategy(const LabelVolume& vol, const StrategySpec& spec,
                           TransformRegistry& reg = TransformRegistry::global(),
                           const LabelScheme& scheme = LabelScheme::brats_default());

// strategy_1, strategy_2, strategy_3
std::vector<std::string> preset_names();
StrategySpec preset(const std::string& name);

}  // namespace maskforge
