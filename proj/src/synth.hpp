#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "volume.hpp"

namespace maskforge {

std::vector<std::string> synth_scenarios();

// Deterministic paired (ground truth, prediction) case on a 48^3 unit-spacing
// grid. The same (scenario, seed, index) always produces the same pair;
// distinct indices give independent cases within a batch.
//
// Scenarios:
//   clean          prediction equals ground truth
//   small-fp-rc    prediction gains 1-3 false-positive RC components, each
//                  10-99 voxels
//   true-small-rc  one sub-100-voxel RC lesion present in BOTH volumes
//   holey-wt       background pockets carved strictly inside the prediction's
//                  WT region
//   multifocal-rc  prediction has 2-4 RC components of varied size (40-250
//                  voxels beyond the primary one)
std::pair<LabelVolume, LabelVolume> synth_case(const std::string& scenario,
                                               std::uint64_t seed,
                                               std::uint64_t index);

}  // namespace maskforge
