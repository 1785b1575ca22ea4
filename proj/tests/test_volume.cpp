#include <doctest.h>

#include "errors.hpp"
#include "volume.hpp"

using namespace maskforge;

TEST_CASE("linear index is x-fastest") {
  const Dims d{3, 4, 5};
  CHECK(linear_index(d, 0, 0, 0) == 0);
  CHECK(linear_index(d, 1, 0, 0) == 1);
  CHECK(linear_index(d, 0, 1, 0) == 3);
  CHECK(linear_index(d, 0, 0, 1) == 12);
  CHECK(linear_index(d, 2, 3, 4) == 2 + 3 * 3 + 4 * 12);
  CHECK(voxel_count(d) == 60);
}

TEST_CASE("make_volume validates its invariants") {
  CHECK_NOTHROW(make_volume({2, 2, 2}, {1, 1, 1}, std::vector<label_t>(8, 0), "a"));
  CHECK_THROWS_AS(make_volume({2, 2, 2}, {1, 1, 1}, std::vector<label_t>(7, 0), "a"),
                  ValidationError);
  CHECK_THROWS_AS(make_volume({2, 2, 2}, {0, 1, 1}, std::vector<label_t>(8, 0), "a"),
                  ValidationError);
  CHECK_THROWS_AS(make_volume({2, 2, 2}, {-1, 1, 1}, std::vector<label_t>(8, 0), "a"),
                  ValidationError);
  CHECK_THROWS_AS(make_volume({0, 2, 2}, {1, 1, 1}, {}, "a"), ValidationError);
}

TEST_CASE("default scheme classes and universe") {
  const LabelScheme& s = LabelScheme::brats_default();
  REQUIRE(s.classes().size() == 6);
  CHECK(s.classes()[0].first == "NETC");
  CHECK(s.classes()[1].first == "SNFH");
  CHECK(s.classes()[2].first == "ET");
  CHECK(s.classes()[3].first == "RC");
  CHECK(s.classes()[4].first == "TC");
  CHECK(s.classes()[5].first == "WT");
  CHECK(s.class_labels("TC") == std::vector<label_t>{1, 3});
  CHECK(s.class_labels("WT") == std::vector<label_t>{1, 2, 3});
  CHECK(s.universe() == std::vector<label_t>{1, 2, 3, 4});
  CHECK(s.in_universe(4));
  CHECK(!s.in_universe(0));
  CHECK(!s.in_universe(5));
  CHECK_THROWS_AS(s.class_labels("nope"), ValidationError);
}

TEST_CASE("scheme construction rejects composed classes outside the universe") {
  using CE = LabelScheme::ClassEntry;
  CHECK_NOTHROW(LabelScheme({CE{"A", {1}}, CE{"B", {2}}, CE{"AB", {1, 2}}}));
  // composed class referencing a label no singleton class covers
  CHECK_THROWS_AS(LabelScheme({CE{"A", {1}}, CE{"AB", {1, 2}}}), ValidationError);
  CHECK_THROWS_AS(LabelScheme({CE{"A", {1}}, CE{"A", {2}}}), ValidationError);
  CHECK_THROWS_AS(LabelScheme({CE{"A", {}}}), ValidationError);
  CHECK_THROWS_AS(LabelScheme({CE{"A", {0}}}), ValidationError);
  CHECK_THROWS_AS(LabelScheme({}), ValidationError);
}

TEST_CASE("region_mask selects exactly the requested labels") {
  LabelVolume vol = make_volume({4, 1, 1}, {1, 1, 1}, {0, 1, 2, 3}, "c");
  const BinaryMask netc = region_mask(vol, {1});
  CHECK(netc.occupancy == std::vector<std::uint8_t>{0, 1, 0, 0});
  const BinaryMask wt = region_mask(vol, {1, 2, 3});
  CHECK(wt.occupancy == std::vector<std::uint8_t>{0, 1, 1, 1});
  CHECK(wt.popcount() == 3);
  CHECK(wt.spacing == vol.spacing);
  CHECK_THROWS_AS(region_mask(vol, {5}), ValidationError);
  CHECK_THROWS_AS(region_mask(vol, {0}), ValidationError);
  // empty label set is legal and selects nothing
  CHECK(region_mask(vol, {}).popcount() == 0);
}

TEST_CASE("singleton region masks partition the foreground") {
  LabelVolume vol =
      make_volume({8, 1, 1}, {1, 1, 1}, {0, 1, 2, 3, 4, 4, 1, 0}, "c");
  const LabelScheme& s = LabelScheme::brats_default();
  std::uint64_t total = 0;
  std::vector<std::uint8_t> seen(8, 0);
  for (label_t l : s.universe()) {
    const BinaryMask m = region_mask(vol, {l});
    total += m.popcount();
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(!(seen[i] && m.occupancy[i]));  // disjoint
      seen[i] |= m.occupancy[i];
    }
  }
  CHECK(total == 6);  // number of nonzero voxels
  for (std::size_t i = 0; i < 8; ++i) CHECK(seen[i] == (vol.labels[i] != 0));
}

TEST_CASE("set_region writes the label exactly under the mask") {
  LabelVolume vol = make_volume({4, 1, 1}, {1, 1, 1}, {0, 1, 2, 3}, "c");
  BinaryMask m{{4, 1, 1}, {1, 1, 1}, {1, 0, 0, 1}};
  const LabelVolume out = set_region(vol, m, 4);
  CHECK(out.labels == std::vector<label_t>{4, 1, 2, 4});
  const LabelVolume cleared = set_region(vol, m, 0);
  CHECK(cleared.labels == std::vector<label_t>{0, 1, 2, 0});
  CHECK_THROWS_AS(set_region(vol, m, 9), ValidationError);
  BinaryMask wrong{{2, 1, 1}, {1, 1, 1}, {1, 0}};
  CHECK_THROWS_AS(set_region(vol, wrong, 4), DataError);
}

TEST_CASE("case id comes from the filename stem") {
  CHECK(case_id_from_path("/data/gt/BraTS-0001.nii.gz") == "BraTS-0001");
  CHECK(case_id_from_path("plain.nii") == "plain");
  CHECK(case_id_from_path("dir.with.dots/x.y.nii.gz") == "x.y");
  CHECK(case_id_from_path("noext") == "noext");
}
