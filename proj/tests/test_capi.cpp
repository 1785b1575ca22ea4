// Exercises the shared library strictly through maskforge.h, the way an
// external binding would: no C++ internals, only the C surface.

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <maskforge.h>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    std::mt19937_64 rng(std::random_device{}());
    for (;;) {
      auto candidate = std::filesystem::temp_directory_path() /
                       ("maskforge_capi_" + std::to_string(rng()));
      std::error_code ec;
      if (std::filesystem::create_directories(candidate, ec)) {
        path = candidate;
        return;
      }
    }
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

struct Cube {
  std::vector<std::uint8_t> data;
  uint64_t dims[3];
  double spacing[3];
  Cube(uint64_t nx, uint64_t ny, uint64_t nz, double sx = 1.0, double sy = 1.0,
       double sz = 1.0)
      : data(nx * ny * nz, 0), dims{nx, ny, nz}, spacing{sx, sy, sz} {}
  std::uint8_t& at(uint64_t x, uint64_t y, uint64_t z) {
    return data[x + dims[0] * (y + dims[1] * z)];
  }
};

const char* kStrategy1Canonical =
    "{\"name\":\"strategy_1\",\"steps\":[{\"transform\":\"remove_small_objects\","
    "\"params\":{\"labels\":[4],\"threshold\":100,\"replacement\":0,"
    "\"connectivity\":26,\"mode\":\"sequential\"}}]}";

}  // namespace

TEST_CASE("version and error channel") {
  const std::string version = mf_version();
  CHECK(version == "1.0.0");

  // failure sets the message, the next success clears it
  mf_volume* vol = nullptr;
  CHECK(mf_volume_load(nullptr, &vol) == MF_ERR_INVALID);
  CHECK(std::string(mf_last_error()) == "null argument");

  Cube cube(2, 2, 2);
  CHECK(mf_volume_create(cube.dims, cube.spacing, cube.data.data(), "c", &vol) ==
        MF_OK);
  CHECK(std::string(mf_last_error()).empty());
  mf_volume_free(vol);
}

TEST_CASE("volume create, accessors, and validation") {
  Cube cube(4, 3, 2, 1.5, 2.0, 2.5);
  cube.at(0, 0, 0) = 4;
  cube.at(3, 2, 1) = 2;

  mf_volume* vol = nullptr;
  REQUIRE(mf_volume_create(cube.dims, cube.spacing, cube.data.data(),
                           "case_0042", &vol) == MF_OK);

  uint64_t dims[3] = {0, 0, 0};
  double spacing[3] = {0, 0, 0};
  mf_volume_dims(vol, dims);
  mf_volume_spacing(vol, spacing);
  CHECK(dims[0] == 4);
  CHECK(dims[1] == 3);
  CHECK(dims[2] == 2);
  CHECK(spacing[0] == 1.5);
  CHECK(spacing[1] == 2.0);
  CHECK(spacing[2] == 2.5);
  CHECK(std::string(mf_volume_case_id(vol)) == "case_0042");

  const uint8_t* data = mf_volume_data(vol);
  REQUIRE(data != nullptr);
  CHECK(data[0] == 4);
  CHECK(data[4 * 3 * 2 - 1] == 2);
  mf_volume_free(vol);

  // invalid geometry
  uint64_t zero_dims[3] = {0, 2, 2};
  CHECK(mf_volume_create(zero_dims, cube.spacing, cube.data.data(), "x", &vol) ==
        MF_ERR_INVALID);
  double bad_spacing[3] = {1.0, -1.0, 1.0};
  CHECK(mf_volume_create(cube.dims, bad_spacing, cube.data.data(), "x", &vol) ==
        MF_ERR_INVALID);
  CHECK(mf_volume_create(cube.dims, cube.spacing, nullptr, "x", &vol) ==
        MF_ERR_INVALID);

  // null-tolerant accessors
  CHECK(mf_volume_data(nullptr) == nullptr);
  CHECK(mf_volume_case_id(nullptr) == nullptr);
  mf_volume_dims(nullptr, dims);   // must not crash
  mf_volume_spacing(vol = nullptr, spacing);
}

TEST_CASE("volume save/load round trip, plain and gzip") {
  TempDir tmp;
  Cube cube(5, 4, 3, 0.5, 1.0, 2.0);
  cube.at(1, 1, 1) = 3;
  cube.at(4, 3, 2) = 4;

  mf_volume* vol = nullptr;
  REQUIRE(mf_volume_create(cube.dims, cube.spacing, cube.data.data(), "orig",
                           &vol) == MF_OK);

  for (const char* name : {"case_0001.nii", "case_0002.nii.gz"}) {
    const std::string path = tmp.file(name);
    REQUIRE(mf_volume_save(vol, path.c_str()) == MF_OK);

    mf_volume* loaded = nullptr;
    REQUIRE(mf_volume_load(path.c_str(), &loaded) == MF_OK);
    uint64_t dims[3];
    double spacing[3];
    mf_volume_dims(loaded, dims);
    mf_volume_spacing(loaded, spacing);
    CHECK(dims[0] == 5);
    CHECK(dims[1] == 4);
    CHECK(dims[2] == 3);
    CHECK(spacing[0] == doctest::Approx(0.5));
    CHECK(spacing[2] == doctest::Approx(2.0));
    const uint8_t* data = mf_volume_data(loaded);
    bool equal = true;
    for (size_t i = 0; i < cube.data.size(); ++i)
      equal = equal && data[i] == cube.data[i];
    CHECK(equal);
    // stem becomes the case id
    const std::string case_id = mf_volume_case_id(loaded);
    CHECK(case_id.substr(0, 5) == "case_");
    mf_volume_free(loaded);
  }
  mf_volume_free(vol);

  mf_volume* missing = nullptr;
  CHECK(mf_volume_load(tmp.file("absent.nii").c_str(), &missing) == MF_ERR_IO);
  CHECK(!std::string(mf_last_error()).empty());

  // not a NIfTI file
  const std::string junk = tmp.file("junk.nii");
  {
    std::filesystem::path p(junk);
    FILE* f = fopen(junk.c_str(), "wb");
    REQUIRE(f != nullptr);
    fputs("this is not a volume", f);
    fclose(f);
  }
  CHECK(mf_volume_load(junk.c_str(), &missing) == MF_ERR_FORMAT);
}

TEST_CASE("strategy parse, preset, serialize, name") {
  mf_strategy* s = nullptr;
  REQUIRE(mf_strategy_preset("strategy_1", &s) == MF_OK);
  CHECK(std::string(mf_strategy_name(s)) == "strategy_1");

  char* text = nullptr;
  REQUIRE(mf_strategy_serialize(s, &text) == MF_OK);
  CHECK(std::string(text) == kStrategy1Canonical);
  mf_string_free(text);
  mf_strategy_free(s);

  REQUIRE(mf_strategy_parse(kStrategy1Canonical, &s) == MF_OK);
  REQUIRE(mf_strategy_serialize(s, &text) == MF_OK);
  CHECK(std::string(text) == kStrategy1Canonical);
  mf_string_free(text);
  mf_strategy_free(s);

  CHECK(mf_strategy_preset("strategy_9", &s) == MF_ERR_INVALID);
  CHECK(std::string(mf_last_error()).find("unknown preset") != std::string::npos);
  CHECK(mf_strategy_parse("{]", &s) == MF_ERR_INVALID);
  CHECK(mf_strategy_parse("{\"name\":\"x\",\"steps\":[{\"transform\":\"nope\","
                          "\"params\":{\"labels\":[1]}}]}",
                          &s) == MF_ERR_INVALID);
  CHECK(mf_strategy_name(nullptr) == nullptr);
}

TEST_CASE("strategy application removes a small component") {
  Cube cube(8, 8, 8);
  for (uint64_t z = 0; z < 3; ++z)
    for (uint64_t y = 0; y < 3; ++y)
      for (uint64_t x = 0; x < 3; ++x) cube.at(x, y, z) = 4;  // 27 voxels
  cube.at(7, 7, 7) = 1;

  mf_volume* vol = nullptr;
  REQUIRE(mf_volume_create(cube.dims, cube.spacing, cube.data.data(), "c",
                           &vol) == MF_OK);
  mf_strategy* s = nullptr;
  REQUIRE(mf_strategy_preset("strategy_1", &s) == MF_OK);

  mf_volume* out = nullptr;
  REQUIRE(mf_strategy_apply(s, vol, &out) == MF_OK);
  const uint8_t* data = mf_volume_data(out);
  size_t label4 = 0, label1 = 0;
  for (size_t i = 0; i < cube.data.size(); ++i) {
    label4 += data[i] == 4;
    label1 += data[i] == 1;
  }
  CHECK(label4 == 0);
  CHECK(label1 == 1);

  CHECK(mf_strategy_apply(nullptr, vol, &out) == MF_ERR_INVALID);
  mf_volume_free(out);
  mf_strategy_free(s);
  mf_volume_free(vol);
}

TEST_CASE("name listings") {
  char** names = nullptr;
  size_t count = 0;

  REQUIRE(mf_preset_names(&names, &count) == MF_OK);
  REQUIRE(count == 3);
  CHECK(std::string(names[0]) == "strategy_1");
  CHECK(std::string(names[1]) == "strategy_2");
  CHECK(std::string(names[2]) == "strategy_3");
  mf_string_list_free(names, count);

  REQUIRE(mf_transform_names(&names, &count) == MF_OK);
  std::vector<std::string> transforms(names, names + count);
  mf_string_list_free(names, count);
  CHECK(transforms == std::vector<std::string>{
                          "fill_holes_with_label", "keep_top_k",
                          "morphological_closing", "remove_small_objects",
                          "replace_small_objects"});

  REQUIRE(mf_synth_scenarios(&names, &count) == MF_OK);
  REQUIRE(count == 5);
  CHECK(std::string(names[0]) == "clean");
  mf_string_list_free(names, count);

  CHECK(mf_preset_names(nullptr, &count) == MF_ERR_INVALID);
  mf_string_list_free(nullptr, 0);  // must not crash
}

TEST_CASE("records container") {
  mf_records* recs = nullptr;
  REQUIRE(mf_records_new(&recs) == MF_OK);
  CHECK(mf_records_count(recs) == 0);

  REQUIRE(mf_records_add(recs, "p1", "a", "ET", "dice", 0.75) == MF_OK);
  REQUIRE(mf_records_count(recs) == 1);

  const char *patient, *strategy, *cls, *metric;
  double value = 0.0;
  REQUIRE(mf_records_get(recs, 0, &patient, &strategy, &cls, &metric, &value) ==
          MF_OK);
  CHECK(std::string(patient) == "p1");
  CHECK(std::string(strategy) == "a");
  CHECK(std::string(cls) == "ET");
  CHECK(std::string(metric) == "dice");
  CHECK(value == 0.75);

  CHECK(mf_records_get(recs, 1, &patient, &strategy, &cls, &metric, &value) ==
        MF_ERR_INVALID);
  CHECK(mf_records_add(recs, "p1", "a", "ET", "dsc", 0.5) == MF_ERR_INVALID);
  CHECK(mf_records_add(recs, "p1", "a", "ET", "dice", NAN) == MF_ERR_DATA);
  CHECK(mf_records_add(nullptr, "p", "a", "ET", "dice", 0.5) == MF_ERR_INVALID);
  CHECK(mf_records_count(nullptr) == 0);
  mf_records_free(recs);
}

TEST_CASE("evaluation through the C surface") {
  Cube cube(6, 6, 6);
  for (uint64_t z = 1; z < 4; ++z)
    for (uint64_t y = 1; y < 4; ++y)
      for (uint64_t x = 1; x < 4; ++x) cube.at(x, y, z) = 4;

  mf_volume* gt = nullptr;
  REQUIRE(mf_volume_create(cube.dims, cube.spacing, cube.data.data(), "p1",
                           &gt) == MF_OK);

  SUBCASE("identity evaluation emits the full class-by-metric grid") {
    mf_records* recs = nullptr;
    REQUIRE(mf_records_new(&recs) == MF_OK);
    REQUIRE(mf_evaluate_case(gt, gt, "baseline", "dice,hd95", nullptr, recs) ==
            MF_OK);
    REQUIRE(mf_records_count(recs) == 12);

    const char *patient, *strategy, *cls, *metric;
    double value;
    REQUIRE(mf_records_get(recs, 6, &patient, &strategy, &cls, &metric,
                           &value) == MF_OK);
    CHECK(std::string(patient) == "p1");
    CHECK(std::string(strategy) == "baseline");
    CHECK(std::string(cls) == "RC");
    CHECK(std::string(metric) == "dice");
    CHECK(value == 1.0);

    // whitespace-tolerant metric list, appending to the same container
    REQUIRE(mf_evaluate_case(gt, gt, "baseline2", " lw_dice , lw_hd95 ",
                             nullptr, recs) == MF_OK);
    CHECK(mf_records_count(recs) == 24);
    mf_records_free(recs);
  }

  SUBCASE("options: empty-prediction penalty is configurable") {
    Cube empty(6, 6, 6);
    mf_volume* pred = nullptr;
    REQUIRE(mf_volume_create(empty.dims, empty.spacing, empty.data.data(), "p1",
                             &pred) == MF_OK);

    mf_eval_options opts;
    mf_eval_options_init(&opts);
    CHECK(opts.one_empty_hd_mm == 374.0);
    CHECK(opts.lesion_dilation_iterations == 3);
    CHECK(opts.lesion_min_size == 0);

    opts.one_empty_hd_mm = 100.0;
    mf_records* recs = nullptr;
    REQUIRE(mf_records_new(&recs) == MF_OK);
    REQUIRE(mf_evaluate_case(gt, pred, "s", "hd95", &opts, recs) == MF_OK);
    REQUIRE(mf_records_count(recs) == 6);
    // RC is record index 3 in class order NETC,SNFH,ET,RC,TC,WT
    const char* cls;
    double value;
    REQUIRE(mf_records_get(recs, 3, nullptr, nullptr, &cls, nullptr, &value) ==
            MF_OK);
    CHECK(std::string(cls) == "RC");
    CHECK(value == 100.0);

    opts.one_empty_hd_mm = -5.0;
    CHECK(mf_evaluate_case(gt, pred, "s", "hd95", &opts, recs) ==
          MF_ERR_INVALID);
    mf_records_free(recs);
    mf_volume_free(pred);
  }

  SUBCASE("argument validation") {
    mf_records* recs = nullptr;
    REQUIRE(mf_records_new(&recs) == MF_OK);
    CHECK(mf_evaluate_case(gt, gt, "s", "dice,nope", nullptr, recs) ==
          MF_ERR_INVALID);
    CHECK(mf_evaluate_case(gt, gt, "s", "", nullptr, recs) == MF_ERR_INVALID);
    CHECK(mf_evaluate_case(nullptr, gt, "s", "dice", nullptr, recs) ==
          MF_ERR_INVALID);

    Cube other(5, 6, 6);
    mf_volume* mismatched = nullptr;
    REQUIRE(mf_volume_create(other.dims, other.spacing, other.data.data(), "p1",
                             &mismatched) == MF_OK);
    CHECK(mf_evaluate_case(gt, mismatched, "s", "dice", nullptr, recs) ==
          MF_ERR_DATA);
    mf_volume_free(mismatched);
    mf_records_free(recs);
  }

  mf_volume_free(gt);
}

TEST_CASE("ranking through the C surface") {
  mf_records* recs = nullptr;
  REQUIRE(mf_records_new(&recs) == MF_OK);
  // p1: a wins; p2: tie
  REQUIRE(mf_records_add(recs, "p1", "a", "ET", "dice", 0.9) == MF_OK);
  REQUIRE(mf_records_add(recs, "p1", "b", "ET", "dice", 0.5) == MF_OK);
  REQUIRE(mf_records_add(recs, "p2", "a", "ET", "dice", 0.7) == MF_OK);
  REQUIRE(mf_records_add(recs, "p2", "b", "ET", "dice", 0.7) == MF_OK);

  mf_rank_report* report = nullptr;
  REQUIRE(mf_rank(recs, &report) == MF_OK);
  CHECK(mf_rank_strategy_count(report) == 2);
  CHECK(mf_rank_patient_count(report) == 2);

  const char* strategy;
  double rank;
  REQUIRE(mf_rank_global(report, 0, &strategy, &rank) == MF_OK);
  CHECK(std::string(strategy) == "a");
  CHECK(rank == doctest::Approx(1.25));  // (1.0 + 1.5) / 2
  REQUIRE(mf_rank_global(report, 1, &strategy, &rank) == MF_OK);
  CHECK(std::string(strategy) == "b");
  CHECK(rank == doctest::Approx(1.75));
  CHECK(mf_rank_global(report, 2, &strategy, &rank) == MF_ERR_INVALID);

  const char* patient;
  REQUIRE(mf_rank_patient(report, 1, 0, &patient, &strategy, &rank) == MF_OK);
  CHECK(std::string(patient) == "p2");
  CHECK(std::string(strategy) == "a");
  CHECK(rank == 1.5);
  CHECK(mf_rank_patient(report, 2, 0, &patient, &strategy, &rank) ==
        MF_ERR_INVALID);
  CHECK(mf_rank_patient(report, 0, 2, &patient, &strategy, &rank) ==
        MF_ERR_INVALID);
  mf_rank_report_free(report);

  // incomplete grid: p3 only has strategy a
  REQUIRE(mf_records_add(recs, "p3", "a", "ET", "dice", 0.1) == MF_OK);
  CHECK(mf_rank(recs, &report) == MF_ERR_DATA);
  CHECK(std::string(mf_last_error()).find("incomplete") != std::string::npos);

  mf_records_free(recs);
}

TEST_CASE("synthetic cases through the C surface") {
  mf_volume *gt = nullptr, *pred = nullptr;
  REQUIRE(mf_synth_case("clean", 5, 2, &gt, &pred) == MF_OK);
  CHECK(std::string(mf_volume_case_id(gt)) == "case_0002");

  uint64_t dims[3];
  mf_volume_dims(gt, dims);
  CHECK(dims[0] == 48);
  const uint8_t* a = mf_volume_data(gt);
  const uint8_t* b = mf_volume_data(pred);
  bool equal = true;
  for (size_t i = 0; i < 48u * 48u * 48u; ++i) equal = equal && a[i] == b[i];
  CHECK(equal);
  mf_volume_free(gt);
  mf_volume_free(pred);

  CHECK(mf_synth_case("not-a-scenario", 5, 0, &gt, &pred) == MF_ERR_INVALID);
  CHECK(mf_synth_case(nullptr, 5, 0, &gt, &pred) == MF_ERR_INVALID);
}
