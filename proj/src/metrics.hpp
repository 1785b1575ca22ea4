#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "volume.hpp"

namespace maskforge {

// Conventions for degenerate mask pairs. The 374 mm figure is the usual
// challenge penalty (roughly the diagonal of a standard brain volume) and is
// configurable because nothing downstream depends on the exact number.
struct EdgeCasePolicy {
  double both_empty_dice = 1.0;
  double both_empty_hd = 0.0;   // mm
  double one_empty_dice = 0.0;
  double one_empty_hd = 374.0;  // mm
};

struct LesionMatchConfig {
  std::uint64_t dilation_iterations = 3;  // FACE6 dilation before matching
  std::uint64_t min_lesion_size = 0;      // drop GT lesions smaller than this
  double unmatched_dice = 0.0;
  double unmatched_hd = 374.0;  // mm
};

enum class Metric { Dice, Hd95, LwDice, LwHd95 };

const char* metric_name(Metric m);
Metric metric_from_name(const std::string& name);

struct MetricRecord {
  std::string patient_id;
  std::string strategy_id;
  std::string class_name;
  Metric metric = Metric::Dice;
  double value = 0.0;

  bool operator==(const MetricRecord&) const = default;
};

double dice(const BinaryMask& gt, const BinaryMask& pred,
            const EdgeCasePolicy& policy = {});

// Foreground voxels with at least one FACE6 neighbor that is background or
// outside the volume, in raster order.
std::vector<std::array<std::uint64_t, 3>> surface_voxels(const BinaryMask& mask);

// Max of the two directed 95th-percentile surface distances, in mm.
// Percentile uses linear interpolation at rank 0.95*(n-1) over the sorted
// distances.
double hd95(const BinaryMask& gt, const BinaryMask& pred,
            const EdgeCasePolicy& policy = {});

// Returns (lw_dice, lw_hd95).
std::pair<double, double> lesion_wise(const BinaryMask& gt, const BinaryMask& pred,
                                      const LesionMatchConfig& config = {},
                                      const EdgeCasePolicy& policy = {});

// One record per scheme class x requested metric, in scheme class order and
// then metric name order. patient_id comes from the ground-truth volume.
std::vector<MetricRecord> evaluate_case(
    const LabelVolume& gt, const LabelVolume& pred, const std::string& strategy_id,
    const std::vector<Metric>& metrics, const LesionMatchConfig& config = {},
    const EdgeCasePolicy& policy = {},
    const LabelScheme& scheme = LabelScheme::brats_default());

}  // namespace maskforge
