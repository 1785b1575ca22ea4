// maskforge command-line tool. Talks to the library exclusively through the
// C API so it doubles as a smoke test of the shared-library surface.

#include <atomic>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "maskforge.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitValidation = 3;

int exit_for(mf_status s) {
  switch (s) {
    case MF_OK:
      return kExitOk;
    case MF_ERR_INVALID:
      return kExitValidation;
    default:
      return kExitData;
  }
}

[[noreturn]] void die(mf_status s) {
  std::cerr << "maskforge: " << mf_last_error() << "\n";
  std::exit(exit_for(s));
}

[[noreturn]] void die_data(const std::string& msg) {
  std::cerr << "maskforge: " << msg << "\n";
  std::exit(kExitData);
}

using volume_ptr = std::unique_ptr<mf_volume, decltype(&mf_volume_free)>;
using strategy_ptr = std::unique_ptr<mf_strategy, decltype(&mf_strategy_free)>;
using records_ptr = std::unique_ptr<mf_records, decltype(&mf_records_free)>;
using report_ptr = std::unique_ptr<mf_rank_report, decltype(&mf_rank_report_free)>;

std::string format_value(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

// Case stem for a volume filename: name minus .nii / .nii.gz. Empty if the
// file is not a volume.
std::string volume_stem(const fs::path& p) {
  std::string name = p.filename().string();
  auto strip = [&name](const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    if (name.size() > n && name.compare(name.size() - n, n, suffix) == 0) {
      name.resize(name.size() - n);
      return true;
    }
    return false;
  };
  if (strip(".nii.gz") || strip(".nii")) return name;
  return "";
}

// stem -> filename, sorted by stem; rejects duplicate stems.
std::map<std::string, std::string> discover_volumes(const std::string& dir) {
  if (!fs::is_directory(dir)) die_data("not a directory: " + dir);
  std::map<std::string, std::string> found;
  for (const fs::directory_entry& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string stem = volume_stem(entry.path());
    if (stem.empty()) continue;
    auto [it, fresh] = found.emplace(stem, entry.path().filename().string());
    if (!fresh)
      die_data("duplicate case '" + stem + "' in " + dir + " (" + it->second +
               " vs " + entry.path().filename().string() + ")");
  }
  return found;
}

unsigned default_jobs() {
  if (const char* env = std::getenv("MASKFORGE_JOBS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end && *end == '\0' && v >= 1 && v <= 1024)
      return static_cast<unsigned>(v);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Returns the smallest
// failing index's error as (message, status), if any.
struct WorkerError {
  bool failed = false;
  std::string message;
  mf_status status = MF_OK;
};

WorkerError run_parallel(std::size_t n, unsigned jobs,
                         const std::function<WorkerError(std::size_t)>& fn) {
  std::vector<WorkerError> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      errors[i] = fn(i);
    }
  };
  const unsigned nthreads =
      static_cast<unsigned>(std::min<std::size_t>(jobs ? jobs : 1, n ? n : 1));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t + 1 < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  for (WorkerError& e : errors)
    if (e.failed) return std::move(e);
  return {};
}

WorkerError error_from_status(mf_status s) {
  return {true, mf_last_error(), s};
}

// Resolve --strategy: preset name first, then a JSON file path.
strategy_ptr resolve_strategy(const std::string& arg) {
  mf_strategy* raw = nullptr;
  if (mf_strategy_preset(arg.c_str(), &raw) == MF_OK)
    return {raw, mf_strategy_free};
  if (!fs::is_regular_file(arg)) {
    std::cerr << "maskforge: strategy '" << arg
              << "' is neither a preset nor a strategy file\n";
    std::exit(kExitValidation);
  }
  std::ifstream in(arg, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  if (!in.good() && !in.eof()) die_data("failed to read " + arg);
  const mf_status s = mf_strategy_parse(buf.str().c_str(), &raw);
  if (s != MF_OK) die(s);
  return {raw, mf_strategy_free};
}

struct Row {
  std::string patient, strategy, cls, metric;
  double value = 0.0;
};

void append_case_rows(mf_records* recs, std::vector<Row>& rows) {
  const size_t n = mf_records_count(recs);
  for (size_t i = 0; i < n; ++i) {
    const char *patient = nullptr, *strategy = nullptr, *cls = nullptr,
               *metric = nullptr;
    double value = 0.0;
    mf_records_get(recs, i, &patient, &strategy, &cls, &metric, &value);
    rows.push_back({patient, strategy, cls, metric, value});
  }
}

void write_metrics_csv(const std::string& path, const std::vector<Row>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary: LF endings everywhere
  if (!out) die_data("cannot open " + path + " for writing");
  out << "patient_id,strategy,class,metric,value\n";
  for (const Row& r : rows)
    out << r.patient << ',' << r.strategy << ',' << r.cls << ',' << r.metric
        << ',' << format_value(r.value) << '\n';
  out.flush();
  if (!out) die_data("failed to write " + path);
}

std::vector<Row> read_metrics_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) die_data("cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) die_data(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "patient_id,strategy,class,metric,value")
    die_data(path + ": unexpected header '" + line + "'");
  std::vector<Row> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 5)
      die_data(path + ":" + std::to_string(lineno) + ": expected 5 fields, got " +
               std::to_string(fields.size()));
    char* end = nullptr;
    const double value = std::strtod(fields[4].c_str(), &end);
    if (!end || *end != '\0' || fields[4].empty())
      die_data(path + ":" + std::to_string(lineno) + ": bad value '" + fields[4] +
               "'");
    rows.push_back({fields[0], fields[1], fields[2], fields[3], value});
  }
  return rows;
}

/* ---- subcommands ---------------------------------------------------------- */

int cmd_postprocess(const std::string& input_dir, const std::string& output_dir,
                    const std::string& strategy_arg, unsigned jobs) {
  strategy_ptr strategy = resolve_strategy(strategy_arg);
  const std::map<std::string, std::string> cases = discover_volumes(input_dir);
  if (cases.empty()) die_data("no volumes found in " + input_dir);

  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) die_data("cannot create " + output_dir + ": " + ec.message());

  std::vector<std::string> filenames;
  for (const auto& [stem, filename] : cases) filenames.push_back(filename);

  const WorkerError err =
      run_parallel(filenames.size(), jobs, [&](std::size_t i) -> WorkerError {
        const fs::path in_path = fs::path(input_dir) / filenames[i];
        const fs::path out_path = fs::path(output_dir) / filenames[i];
        mf_volume* in = nullptr;
        mf_status s = mf_volume_load(in_path.string().c_str(), &in);
        if (s != MF_OK) return error_from_status(s);
        volume_ptr in_guard(in, mf_volume_free);
        mf_volume* out = nullptr;
        s = mf_strategy_apply(strategy.get(), in, &out);
        if (s != MF_OK) return error_from_status(s);
        volume_ptr out_guard(out, mf_volume_free);
        s = mf_volume_save(out, out_path.string().c_str());
        if (s != MF_OK) return error_from_status(s);
        return {};
      });
  if (err.failed) {
    std::cerr << "maskforge: " << err.message << "\n";
    return exit_for(err.status);
  }
  std::cout << "processed " << filenames.size() << " volume(s) with strategy '"
            << mf_strategy_name(strategy.get()) << "'\n";
  return kExitOk;
}

int cmd_evaluate(const std::string& gt_dir, const std::string& pred_dir,
                 const std::string& strategy_id, const std::string& metrics,
                 const std::string& output, unsigned jobs) {
  const std::map<std::string, std::string> gt_cases = discover_volumes(gt_dir);
  const std::map<std::string, std::string> pred_cases = discover_volumes(pred_dir);
  if (pred_cases.empty()) die_data("no volumes found in " + pred_dir);
  for (const auto& [stem, filename] : pred_cases)
    if (!gt_cases.count(stem))
      die_data("prediction '" + filename + "' has no ground-truth match in " +
               gt_dir);

  std::vector<std::pair<std::string, std::string>> pairs;  // gt file, pred file
  for (const auto& [stem, filename] : pred_cases)
    pairs.emplace_back(gt_cases.at(stem), filename);

  std::vector<std::vector<Row>> case_rows(pairs.size());
  const WorkerError err =
      run_parallel(pairs.size(), jobs, [&](std::size_t i) -> WorkerError {
        const fs::path gt_path = fs::path(gt_dir) / pairs[i].first;
        const fs::path pred_path = fs::path(pred_dir) / pairs[i].second;
        mf_volume *gt = nullptr, *pred = nullptr;
        mf_status s = mf_volume_load(gt_path.string().c_str(), &gt);
        if (s != MF_OK) return error_from_status(s);
        volume_ptr gt_guard(gt, mf_volume_free);
        s = mf_volume_load(pred_path.string().c_str(), &pred);
        if (s != MF_OK) return error_from_status(s);
        volume_ptr pred_guard(pred, mf_volume_free);
        mf_records* recs = nullptr;
        s = mf_records_new(&recs);
        if (s != MF_OK) return error_from_status(s);
        records_ptr recs_guard(recs, mf_records_free);
        s = mf_evaluate_case(gt, pred, strategy_id.c_str(), metrics.c_str(),
                             nullptr, recs);
        if (s != MF_OK) return error_from_status(s);
        append_case_rows(recs, case_rows[i]);
        return {};
      });
  if (err.failed) {
    std::cerr << "maskforge: " << err.message << "\n";
    return exit_for(err.status);
  }

  std::vector<Row> rows;
  for (const std::vector<Row>& cr : case_rows)
    rows.insert(rows.end(), cr.begin(), cr.end());
  write_metrics_csv(output, rows);
  std::cout << "wrote " << rows.size() << " record(s) to " << output << "\n";
  return kExitOk;
}

int cmd_rank(const std::vector<std::string>& inputs, const std::string& output) {
  mf_records* raw = nullptr;
  mf_status s = mf_records_new(&raw);
  if (s != MF_OK) die(s);
  records_ptr recs(raw, mf_records_free);

  std::set<std::string> names;
  for (const std::string& input : inputs) {
    const std::size_t eq = input.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == input.size()) {
      std::cerr << "maskforge: --inputs expects name=metrics.csv, got '" << input
                << "'\n";
      return kExitUsage;
    }
    const std::string name = input.substr(0, eq);
    const std::string path = input.substr(eq + 1);
    if (!names.insert(name).second) {
      std::cerr << "maskforge: duplicate strategy name '" << name << "'\n";
      return kExitUsage;
    }
    for (const Row& row : read_metrics_csv(path)) {
      s = mf_records_add(recs.get(), row.patient.c_str(), name.c_str(),
                         row.cls.c_str(), row.metric.c_str(), row.value);
      if (s != MF_OK) {
        std::cerr << "maskforge: " << path << ": " << mf_last_error() << "\n";
        return exit_for(s);
      }
    }
  }

  mf_rank_report* raw_report = nullptr;
  s = mf_rank(recs.get(), &raw_report);
  if (s != MF_OK) die(s);
  report_ptr report(raw_report, mf_rank_report_free);

  std::ofstream out(output, std::ios::binary);
  if (!out) die_data("cannot open " + output + " for writing");
  out << "patient_id,strategy,avg_rank\n";
  const size_t patients = mf_rank_patient_count(report.get());
  const size_t strategies = mf_rank_strategy_count(report.get());
  for (size_t p = 0; p < patients; ++p)
    for (size_t t = 0; t < strategies; ++t) {
      const char *patient = nullptr, *strategy = nullptr;
      double rank = 0.0;
      mf_rank_patient(report.get(), p, t, &patient, &strategy, &rank);
      out << patient << ',' << strategy << ',' << format_value(rank) << '\n';
    }
  out << "\nstrategy,global_avg_rank\n";
  for (size_t t = 0; t < strategies; ++t) {
    const char* strategy = nullptr;
    double rank = 0.0;
    mf_rank_global(report.get(), t, &strategy, &rank);
    out << strategy << ',' << format_value(rank) << '\n';
  }
  out.flush();
  if (!out) die_data("failed to write " + output);

  const char* winner = nullptr;
  double winner_rank = 0.0;
  mf_rank_global(report.get(), 0, &winner, &winner_rank);
  std::cout << "winner: " << winner << " (global average rank "
            << format_value(winner_rank) << ")\n";
  return kExitOk;
}

int cmd_strategies_list() {
  char** names = nullptr;
  size_t count = 0;
  const mf_status s = mf_preset_names(&names, &count);
  if (s != MF_OK) die(s);
  for (size_t i = 0; i < count; ++i) std::cout << names[i] << "\n";
  mf_string_list_free(names, count);
  return kExitOk;
}

int cmd_strategies_show(const std::string& name) {
  mf_strategy* raw = nullptr;
  mf_status s = mf_strategy_preset(name.c_str(), &raw);
  if (s != MF_OK) die(s);
  strategy_ptr strategy(raw, mf_strategy_free);
  char* text = nullptr;
  s = mf_strategy_serialize(strategy.get(), &text);
  if (s != MF_OK) die(s);
  std::cout << text << "\n";
  mf_string_free(text);
  return kExitOk;
}

int cmd_strategies_validate(const std::string& path) {
  if (!fs::is_regular_file(path)) {
    std::cerr << "maskforge: no such strategy file: " << path << "\n";
    return kExitValidation;
  }
  std::ifstream in(path, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  mf_strategy* raw = nullptr;
  const mf_status s = mf_strategy_parse(buf.str().c_str(), &raw);
  if (s != MF_OK) {
    std::cerr << "maskforge: " << path << ": " << mf_last_error() << "\n";
    return exit_for(s);
  }
  strategy_ptr strategy(raw, mf_strategy_free);
  std::cout << path << ": valid strategy '" << mf_strategy_name(strategy.get())
            << "'\n";
  return kExitOk;
}

int cmd_synth(const std::string& scenario, std::uint64_t cases,
              std::uint64_t seed, const std::string& output_dir) {
  const fs::path gt_dir = fs::path(output_dir) / "gt";
  const fs::path pred_dir = fs::path(output_dir) / "pred";

  // Validate the scenario before creating any directories.
  {
    mf_volume *gt = nullptr, *pred = nullptr;
    const mf_status s = mf_synth_case(scenario.c_str(), seed, 0, &gt, &pred);
    if (s != MF_OK) die(s);
    mf_volume_free(gt);
    mf_volume_free(pred);
  }

  std::error_code ec;
  fs::create_directories(gt_dir, ec);
  if (!ec) fs::create_directories(pred_dir, ec);
  if (ec) die_data("cannot create " + output_dir + ": " + ec.message());

  for (std::uint64_t i = 0; i < cases; ++i) {
    mf_volume *gt = nullptr, *pred = nullptr;
    mf_status s = mf_synth_case(scenario.c_str(), seed, i, &gt, &pred);
    if (s != MF_OK) die(s);
    volume_ptr gt_guard(gt, mf_volume_free);
    volume_ptr pred_guard(pred, mf_volume_free);
    const std::string filename = std::string(mf_volume_case_id(gt)) + ".nii.gz";
    s = mf_volume_save(gt, (gt_dir / filename).string().c_str());
    if (s == MF_OK)
      s = mf_volume_save(pred, (pred_dir / filename).string().c_str());
    if (s != MF_OK) die(s);
  }
  std::cout << "wrote " << cases << " case pair(s) under " << output_dir << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"maskforge: postprocess, evaluate, and rank multi-class "
               "segmentation label volumes"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("maskforge ") + mf_version());

  const unsigned jobs_default = default_jobs();

  // postprocess
  auto* post = app.add_subcommand(
      "postprocess", "Apply a strategy to every volume in a directory");
  std::string post_input, post_output, post_strategy;
  unsigned post_jobs = jobs_default;
  post->add_option("--input-dir", post_input, "Directory of input volumes")
      ->required();
  post->add_option("--output-dir", post_output, "Directory for output volumes")
      ->required();
  post->add_option("--strategy", post_strategy,
                   "Preset name or strategy JSON file")
      ->required();
  post->add_option("--jobs", post_jobs, "Worker threads")
      ->check(CLI::Range(1u, 1024u));

  // evaluate
  auto* eval = app.add_subcommand(
      "evaluate", "Score predictions against ground truth, writing a CSV");
  std::string eval_gt, eval_pred, eval_strategy_id, eval_output;
  std::string eval_metrics = "dice,hd95";
  unsigned eval_jobs = jobs_default;
  eval->add_option("--gt-dir", eval_gt, "Ground-truth volumes")->required();
  eval->add_option("--pred-dir", eval_pred, "Predicted volumes")->required();
  eval->add_option("--strategy-id", eval_strategy_id,
                   "Label for the strategy column")
      ->required();
  eval->add_option("--metrics", eval_metrics,
                   "Comma-separated: dice,hd95,lw_dice,lw_hd95");
  eval->add_option("--output", eval_output, "Output CSV path")->required();
  eval->add_option("--jobs", eval_jobs, "Worker threads")
      ->check(CLI::Range(1u, 1024u));

  // rank
  auto* rank = app.add_subcommand(
      "rank", "Aggregate metric CSVs into global strategy ranks");
  std::vector<std::string> rank_inputs;
  std::string rank_output;
  rank->add_option("--inputs", rank_inputs,
                   "name=metrics.csv (repeat; at least two)")
      ->required()
      ->expected(-2);
  rank->add_option("--output", rank_output, "Output CSV path")->required();

  // strategies
  auto* strategies =
      app.add_subcommand("strategies", "Inspect and validate strategies");
  strategies->require_subcommand(1);
  auto* strat_list = strategies->add_subcommand("list", "List preset names");
  auto* strat_show =
      strategies->add_subcommand("show", "Print a preset as canonical JSON");
  std::string show_name;
  strat_show->add_option("name", show_name, "Preset name")->required();
  auto* strat_validate =
      strategies->add_subcommand("validate", "Validate a strategy JSON file");
  std::string validate_path;
  strat_validate->add_option("file", validate_path, "Strategy JSON file")
      ->required();

  // synth
  auto* synth = app.add_subcommand(
      "synth", "Generate paired synthetic ground-truth/prediction volumes");
  std::string synth_scenario, synth_output;
  std::uint64_t synth_cases = 10, synth_seed = 0;
  synth->add_option("--scenario", synth_scenario,
                    "clean, small-fp-rc, true-small-rc, holey-wt, multifocal-rc")
      ->required();
  synth->add_option("--cases", synth_cases, "Number of cases");
  synth->add_option("--seed", synth_seed, "Random seed");
  synth->add_option("--output-dir", synth_output, "Directory for gt/ and pred/")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (post->parsed())
      return cmd_postprocess(post_input, post_output, post_strategy, post_jobs);
    if (eval->parsed())
      return cmd_evaluate(eval_gt, eval_pred, eval_strategy_id, eval_metrics,
                          eval_output, eval_jobs);
    if (rank->parsed()) return cmd_rank(rank_inputs, rank_output);
    if (strategies->parsed()) {
      if (strat_list->parsed()) return cmd_strategies_list();
      if (strat_show->parsed()) return cmd_strategies_show(show_name);
      if (strat_validate->parsed()) return cmd_strategies_validate(validate_path);
    }
    if (synth->parsed())
      return cmd_synth(synth_scenario, synth_cases, synth_seed, synth_output);
  } catch (const std::exception& e) {
    std::cerr << "maskforge: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
