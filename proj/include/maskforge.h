/* maskforge - multi-class segmentation mask postprocessing, evaluation, and
 * rank aggregation.
 *
 * Conventions:
 *   - Every fallible call returns mf_status; MF_OK is 0. On failure,
 *     mf_last_error() returns a message for the calling thread.
 *   - Objects created through an `mf_*_new/load/parse/...` out-parameter are
 *     owned by the caller and released with the matching `mf_*_free`.
 *   - Returned `const char*` pointers borrow from the queried object and stay
 *     valid until that object is modified or freed.
 *   - Volumes are dense uint8 label grids in x-fastest (row-major per slice)
 *     order: index = x + nx*(y + ny*z).
 */

#ifndef MASKFORGE_H
#define MASKFORGE_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mf_status {
  MF_OK = 0,
  MF_ERR_IO = 1,      /* filesystem failure */
  MF_ERR_FORMAT = 2,  /* unparseable or unsupported file contents */
  MF_ERR_INVALID = 3, /* invalid argument, configuration, or strategy */
  MF_ERR_DATA = 4,    /* inconsistent data (dims mismatch, incomplete grid) */
  MF_ERR_INTERNAL = 5
} mf_status;

typedef struct mf_volume mf_volume;
typedef struct mf_strategy mf_strategy;
typedef struct mf_records mf_records;
typedef struct mf_rank_report mf_rank_report;

const char* mf_version(void);

/* Message for the most recent failure on the calling thread; empty string if
 * none. */
const char* mf_last_error(void);

/* ---- volumes ------------------------------------------------------------ */

/* Loads a NIfTI-1 label volume (.nii or .nii.gz, detected by content). */
mf_status mf_volume_load(const char* path, mf_volume** out);

/* Writes uint8 NIfTI-1; gzip-compressed when the path ends in ".gz". */
mf_status mf_volume_save(const mf_volume* vol, const char* path);

mf_status mf_volume_create(const uint64_t dims[3], const double spacing[3],
                           const uint8_t* labels, const char* case_id,
                           mf_volume** out);
void mf_volume_free(mf_volume* vol);

void mf_volume_dims(const mf_volume* vol, uint64_t out[3]);
void mf_volume_spacing(const mf_volume* vol, double out[3]);
const uint8_t* mf_volume_data(const mf_volume* vol);
const char* mf_volume_case_id(const mf_volume* vol);

/* ---- strategies ---------------------------------------------------------- */

mf_status mf_strategy_parse(const char* json_text, mf_strategy** out);
mf_status mf_strategy_preset(const char* name, mf_strategy** out);

/* Canonical single-line JSON; free with mf_string_free. */
mf_status mf_strategy_serialize(const mf_strategy* strategy, char** out);
const char* mf_strategy_name(const mf_strategy* strategy);
void mf_strategy_free(mf_strategy* strategy);

mf_status mf_strategy_apply(const mf_strategy* strategy, const mf_volume* in,
                            mf_volume** out);

/* ---- name listings ------------------------------------------------------- */

mf_status mf_preset_names(char*** names, size_t* count);
mf_status mf_transform_names(char*** names, size_t* count);
mf_status mf_synth_scenarios(char*** names, size_t* count);
void mf_string_list_free(char** names, size_t count);
void mf_string_free(char* s);

/* ---- evaluation ----------------------------------------------------------- */

typedef struct mf_eval_options {
  double one_empty_hd_mm;              /* default 374.0 */
  uint64_t lesion_dilation_iterations; /* default 3 */
  uint64_t lesion_min_size;            /* default 0 */
} mf_eval_options;

void mf_eval_options_init(mf_eval_options* opts);

mf_status mf_records_new(mf_records** out);
void mf_records_free(mf_records* records);

/* metrics_csv: comma-separated subset of dice,hd95,lw_dice,lw_hd95. Appends
 * one record per (class, metric) to `out`. Pass NULL options for defaults. */
mf_status mf_evaluate_case(const mf_volume* gt, const mf_volume* pred,
                           const char* strategy_id, const char* metrics_csv,
                           const mf_eval_options* options, mf_records* out);

size_t mf_records_count(const mf_records* records);
mf_status mf_records_get(const mf_records* records, size_t index,
                         const char** patient_id, const char** strategy_id,
                         const char** class_name, const char** metric,
                         double* value);
mf_status mf_records_add(mf_records* records, const char* patient_id,
                         const char* strategy_id, const char* class_name,
                         const char* metric, double value);

/* ---- ranking -------------------------------------------------------------- */

/* Builds the (patient x class x metric) grid from the records and ranks the
 * strategies; the grid must be complete. */
mf_status mf_rank(const mf_records* records, mf_rank_report** out);
void mf_rank_report_free(mf_rank_report* report);

size_t mf_rank_strategy_count(const mf_rank_report* report);

/* Global averages in ascending rank order. */
mf_status mf_rank_global(const mf_rank_report* report, size_t index,
                         const char** strategy, double* avg_rank);

size_t mf_rank_patient_count(const mf_rank_report* report);

/* Per-patient average rank for one (patient, strategy) pair; strategies are
 * indexed in first-appearance order of the input records. */
mf_status mf_rank_patient(const mf_rank_report* report, size_t patient_index,
                          size_t strategy_index, const char** patient_id,
                          const char** strategy, double* avg_rank);

/* ---- synthetic fixtures ---------------------------------------------------- */

/* Deterministic paired ground-truth/prediction case; see `maskforge synth`. */
mf_status mf_synth_case(const char* scenario, uint64_t seed, uint64_t index,
                        mf_volume** gt, mf_volume** pred);

#ifdef __cplusplus
}
#endif

#endif /* MASKFORGE_H */
