#include "maskforge.h"

#include <cmath>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "metrics.hpp"
#include "ranking.hpp"
#include "strategy.hpp"
#include "synth.hpp"
#include "transforms.hpp"
#include "volume.hpp"

struct mf_volume {
  maskforge::LabelVolume v;
};
struct mf_strategy {
  maskforge::StrategySpec spec;
};
struct mf_records {
  std::vector<maskforge::MetricRecord> records;
};
struct mf_rank_report {
  maskforge::RankReport report;
};

namespace {

thread_local std::string t_last_error;

mf_status fail(mf_status code, const std::string& msg) {
  t_last_error = msg;
  return code;
}

template <typename Fn>
mf_status guarded(Fn&& fn) {
  try {
    fn();
    t_last_error.clear();
    return MF_OK;
  } catch (const maskforge::IoError& e) {
    return fail(MF_ERR_IO, e.what());
  } catch (const maskforge::FormatError& e) {
    return fail(MF_ERR_FORMAT, e.what());
  } catch (const maskforge::ValidationError& e) {
    return fail(MF_ERR_INVALID, e.what());
  } catch (const maskforge::DataError& e) {
    return fail(MF_ERR_DATA, e.what());
  } catch (const std::exception& e) {
    return fail(MF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MF_ERR_INTERNAL, "unknown internal error");
  }
}

std::vector<maskforge::Metric> parse_metrics_csv(const std::string& csv) {
  std::vector<maskforge::Metric> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = csv.find(',', start);
    std::string token = csv.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    const std::size_t first = token.find_first_not_of(" \t");
    const std::size_t last = token.find_last_not_of(" \t");
    token = first == std::string::npos ? std::string()
                                       : token.substr(first, last - first + 1);
    if (token.empty())
      throw maskforge::ValidationError("empty metric name in metric list");
    out.push_back(maskforge::metric_from_name(token));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

mf_status string_list_out(const std::vector<std::string>& values, char*** names,
                          size_t* count) {
  if (!names || !count) return fail(MF_ERR_INVALID, "null output argument");
  return guarded([&] {
    char** list = new char*[values.size()];
    for (std::size_t i = 0; i < values.size(); ++i) {
      list[i] = new char[values[i].size() + 1];
      std::memcpy(list[i], values[i].c_str(), values[i].size() + 1);
    }
    *names = list;
    *count = values.size();
  });
}

}  // namespace

extern "C" {

const char* mf_version(void) { return "1.0.0"; }

const char* mf_last_error(void) { return t_last_error.c_str(); }

/* ---- volumes ------------------------------------------------------------ */

mf_status mf_volume_load(const char* path, mf_volume** out) {
  if (!path || !out) return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] { *out = new mf_volume{maskforge::load_volume(path)}; });
}

mf_status mf_volume_save(const mf_volume* vol, const char* path) {
  if (!vol || !path) return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] { maskforge::save_volume(vol->v, path); });
}

mf_status mf_volume_create(const uint64_t dims[3], const double spacing[3],
                           const uint8_t* labels, const char* case_id,
                           mf_volume** out) {
  if (!dims || !spacing || !labels || !out)
    return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] {
    const maskforge::Dims d{dims[0], dims[1], dims[2]};
    std::vector<maskforge::label_t> data(labels,
                                         labels + maskforge::voxel_count(d));
    *out = new mf_volume{maskforge::make_volume(
        d, {spacing[0], spacing[1], spacing[2]}, std::move(data),
        case_id ? case_id : "")};
  });
}

void mf_volume_free(mf_volume* vol) { delete vol; }

void mf_volume_dims(const mf_volume* vol, uint64_t out[3]) {
  if (!vol || !out) return;
  for (int i = 0; i < 3; ++i) out[i] = vol->v.dims[i];
}

void mf_volume_spacing(const mf_volume* vol, double out[3]) {
  if (!vol || !out) return;
  for (int i = 0; i < 3; ++i) out[i] = vol->v.spacing[i];
}

const uint8_t* mf_volume_data(const mf_volume* vol) {
  return vol ? vol->v.labels.data() : nullptr;
}

const char* mf_volume_case_id(const mf_volume* vol) {
  return vol ? vol->v.case_id.c_str() : nullptr;
}

/* ---- strategies ---------------------------------------------------------- */

mf_status mf_strategy_parse(const char* json_text, mf_strategy** out) {
  if (!json_text || !out) return fail(MF_ERR_INVALID, "null argument");
  return guarded(
      [&] { *out = new mf_strategy{maskforge::parse_strategy(json_text)}; });
}

mf_status mf_strategy_preset(const char* name, mf_strategy** out) {
  if (!name || !out) return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] { *out = new mf_strategy{maskforge::preset(name)}; });
}

mf_status mf_strategy_serialize(const mf_strategy* strategy, char** out) {
  if (!strategy || !out) return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] {
    const std::string text = maskforge::serialize_strategy(strategy->spec);
    *out = new char[text.size() + 1];
    std::memcpy(*out, text.c_str(), text.size() + 1);
  });
}

const char* mf_strategy_name(const mf_strategy* strategy) {
  return strategy ? strategy->spec.name.c_str() : nullptr;
}

void mf_strategy_free(mf_strategy* strategy) { delete strategy; }

mf_status mf_strategy_apply(const mf_strategy* strategy, const mf_volume* in,
                            mf_volume** out) {
  if (!strategy || !in || !out) return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] {
    *out = new mf_volume{maskforge::apply_strategy(in->v, strategy->spec)};
  });
}

/* ---- name listings ------------------------------------------------------- */

mf_status mf_preset_names(char*** names, size_t* count) {
  return string_list_out(maskforge::preset_names(), names, count);
}

mf_status mf_transform_names(char*** names, size_t* count) {
  return string_list_out(maskforge::TransformRegistry::global().names(), names,
                         count);
}

mf_status mf_synth_scenarios(char*** names, size_t* count) {
  return string_list_out(maskforge::synth_scenarios(), names, count);
}

void mf_string_list_free(char** names, size_t count) {
  if (!names) return;
  for (size_t i = 0; i < count; ++i) delete[] names[i];
  delete[] names;
}

void mf_string_free(char* s) { delete[] s; }

/* ---- evaluation ----------------------------------------------------------- */

void mf_eval_options_init(mf_eval_options* opts) {
  if (!opts) return;
  opts->one_empty_hd_mm = 374.0;
  opts->lesion_dilation_iterations = 3;
  opts->lesion_min_size = 0;
}

mf_status mf_records_new(mf_records** out) {
  if (!out) return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] { *out = new mf_records{}; });
}

void mf_records_free(mf_records* records) { delete records; }

mf_status mf_evaluate_case(const mf_volume* gt, const mf_volume* pred,
                           const char* strategy_id, const char* metrics_csv,
                           const mf_eval_options* options, mf_records* out) {
  if (!gt || !pred || !strategy_id || !metrics_csv || !out)
    return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] {
    maskforge::EdgeCasePolicy policy;
    maskforge::LesionMatchConfig config;
    if (options) {
      if (!std::isfinite(options->one_empty_hd_mm) ||
          options->one_empty_hd_mm <= 0.0)
        throw maskforge::ValidationError(
            "one_empty_hd_mm must be positive and finite");
      policy.one_empty_hd = options->one_empty_hd_mm;
      config.unmatched_hd = options->one_empty_hd_mm;
      config.dilation_iterations = options->lesion_dilation_iterations;
      config.min_lesion_size = options->lesion_min_size;
    }
    std::vector<maskforge::MetricRecord> records = maskforge::evaluate_case(
        gt->v, pred->v, strategy_id, parse_metrics_csv(metrics_csv), config,
        policy);
    out->records.insert(out->records.end(),
                        std::make_move_iterator(records.begin()),
                        std::make_move_iterator(records.end()));
  });
}

size_t mf_records_count(const mf_records* records) {
  return records ? records->records.size() : 0;
}

mf_status mf_records_get(const mf_records* records, size_t index,
                         const char** patient_id, const char** strategy_id,
                         const char** class_name, const char** metric,
                         double* value) {
  if (!records) return fail(MF_ERR_INVALID, "null argument");
  if (index >= records->records.size())
    return fail(MF_ERR_INVALID, "record index out of range");
  const maskforge::MetricRecord& r = records->records[index];
  if (patient_id) *patient_id = r.patient_id.c_str();
  if (strategy_id) *strategy_id = r.strategy_id.c_str();
  if (class_name) *class_name = r.class_name.c_str();
  if (metric) *metric = maskforge::metric_name(r.metric);
  if (value) *value = r.value;
  return MF_OK;
}

mf_status mf_records_add(mf_records* records, const char* patient_id,
                         const char* strategy_id, const char* class_name,
                         const char* metric, double value) {
  if (!records || !patient_id || !strategy_id || !class_name || !metric)
    return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] {
    const maskforge::Metric m = maskforge::metric_from_name(metric);
    if (!std::isfinite(value))
      throw maskforge::DataError("metric value must be finite");
    records->records.push_back(
        {patient_id, strategy_id, class_name, m, value});
  });
}

/* ---- ranking -------------------------------------------------------------- */

mf_status mf_rank(const mf_records* records, mf_rank_report** out) {
  if (!records || !out) return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] {
    const maskforge::RankingGrid grid =
        maskforge::RankingGrid::from_records(records->records);
    *out = new mf_rank_report{maskforge::global_rank(grid)};
  });
}

void mf_rank_report_free(mf_rank_report* report) { delete report; }

size_t mf_rank_strategy_count(const mf_rank_report* report) {
  return report ? report->report.strategies.size() : 0;
}

mf_status mf_rank_global(const mf_rank_report* report, size_t index,
                         const char** strategy, double* avg_rank) {
  if (!report) return fail(MF_ERR_INVALID, "null argument");
  if (index >= report->report.global.size())
    return fail(MF_ERR_INVALID, "strategy index out of range");
  if (strategy) *strategy = report->report.global[index].first.c_str();
  if (avg_rank) *avg_rank = report->report.global[index].second;
  return MF_OK;
}

size_t mf_rank_patient_count(const mf_rank_report* report) {
  return report ? report->report.per_patient.size() : 0;
}

mf_status mf_rank_patient(const mf_rank_report* report, size_t patient_index,
                          size_t strategy_index, const char** patient_id,
                          const char** strategy, double* avg_rank) {
  if (!report) return fail(MF_ERR_INVALID, "null argument");
  if (patient_index >= report->report.per_patient.size())
    return fail(MF_ERR_INVALID, "patient index out of range");
  if (strategy_index >= report->report.strategies.size())
    return fail(MF_ERR_INVALID, "strategy index out of range");
  const auto& entry = report->report.per_patient[patient_index];
  if (patient_id) *patient_id = entry.first.c_str();
  if (strategy) *strategy = report->report.strategies[strategy_index].c_str();
  if (avg_rank) *avg_rank = entry.second[strategy_index];
  return MF_OK;
}

/* ---- synthetic fixtures ---------------------------------------------------- */

mf_status mf_synth_case(const char* scenario, uint64_t seed, uint64_t index,
                        mf_volume** gt, mf_volume** pred) {
  if (!scenario || !gt || !pred) return fail(MF_ERR_INVALID, "null argument");
  return guarded([&] {
    auto [g, p] = maskforge::synth_case(scenario, seed, index);
    *gt = new mf_volume{std::move(g)};
    *pred = new mf_volume{std::move(p)};
  });
}

}  // extern "C"
