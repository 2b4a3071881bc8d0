#include <gtest/gtest.h>

#include <random>

#include "reid/dataset.hpp"
#include "reid/errors.hpp"
#include "reid/feature_io.hpp"
#include "test_helpers.hpp"

namespace reid {
namespace {

using testing::TempDir;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected reid::Error";
  return ErrorCode::IoError;
}

TEST(ParseFilename, DocumentedExample) {
  const auto r = parse_image_filename("21_c0900_t36000_frame0002300_2.jpg");
  EXPECT_EQ(r.person_id, 21u);
  EXPECT_EQ(r.camera_id, "c0900");
  EXPECT_EQ(r.timestamp_sec, 36000);
  EXPECT_EQ(r.frame_number, 2300);
  EXPECT_EQ(r.bbox_index, 2);
  EXPECT_FALSE(r.has_feature());
}

TEST(ParseFilename, SecondExample) {
  const auto r = parse_image_filename("4_c0903_t36481_frame0000386_3.jpg");
  EXPECT_EQ(r.person_id, 4u);
  EXPECT_EQ(r.camera_id, "c0903");
  EXPECT_EQ(r.timestamp_sec, 36481);
  EXPECT_EQ(r.frame_number, 386);
  EXPECT_EQ(r.bbox_index, 3);
}

TEST(ParseFilename, AllZeroWithoutExtension) {
  const auto r = parse_image_filename("0_c0_t0_frame0000000_0");
  EXPECT_EQ(r.person_id, 0u);
  EXPECT_EQ(r.camera_id, "c0");
  EXPECT_EQ(r.timestamp_sec, 0);
  EXPECT_EQ(r.frame_number, 0);
  EXPECT_EQ(r.bbox_index, 0);
}

TEST(ParseFilename, PngAndUppercaseCamera) {
  const auto r = parse_image_filename("7_C0904_t10_frame0000001_1.png");
  EXPECT_EQ(r.camera_id, "c0904");
  EXPECT_EQ(r.person_id, 7u);
}

TEST(ParseFilename, RejectsMalformed) {
  for (const char* bad : {"", "21_c0900_t36000_frame0002300", "21_c0900_t36000_frame0002300_2_9.jpg",
                          "x1_c0900_t36000_frame0002300_2.jpg", "21_0900_t36000_frame0002300_2.jpg",
                          "21_c09a0_t36000_frame0002300_2.jpg", "21_c0900_36000_frame0002300_2.jpg",
                          "21_c0900_t36000_fr0002300_2.jpg", "21_c0900_t36000_frame_2.jpg",
                          "21_c0900_t-5_frame0002300_2.jpg", "21_c0900_t36000_frame0002300_2.gif",
                          "00011004_c37_t01_0002.jpg"}) {
    EXPECT_EQ(code_of([&] { parse_image_filename(bad); }), ErrorCode::MalformedFilename) << bad;
  }
}

TEST(FormatFilename, DocumentedExamples) {
  EXPECT_EQ(format_image_filename(testing::make_record(21, "c0900", 36000, {}, 2300, 2)),
            "21_c0900_t36000_frame0002300_2.jpg");
  ImageRecord zero;
  zero.camera_id = "c0";
  EXPECT_EQ(format_image_filename(zero), "0_c0_t0_frame0000000_0.jpg");
}

TEST(FormatFilename, FrameWiderThanWidthIsRejected) {
  ImageRecord r;
  r.camera_id = "c1";
  r.frame_number = 12345678;
  EXPECT_EQ(code_of([&] { format_image_filename(r); }), ErrorCode::InvalidParameters);
  EXPECT_EQ(format_image_filename(r, 8), "0_c1_t0_frame12345678_0.jpg");
}

TEST(FormatFilename, RoundTripRandomRecords) {
  std::mt19937_64 rng(1234);
  std::uniform_int_distribution<std::uint64_t> pid(0, 1'000'000);
  std::uniform_int_distribution<std::int64_t> t(0, 86'399), frame(0, 9'999'999), bbox(0, 99);
  std::uniform_int_distribution<int> cam_digits(1, 6), digit(0, 9);
  for (int i = 0; i < 1000; ++i) {
    ImageRecord r;
    r.person_id = pid(rng);
    r.camera_id = "c";
    for (int d = cam_digits(rng); d > 0; --d) r.camera_id += static_cast<char>('0' + digit(rng));
    r.timestamp_sec = t(rng);
    r.frame_number = frame(rng);
    r.bbox_index = bbox(rng);
    ASSERT_EQ(parse_image_filename(format_image_filename(r)), r) << format_image_filename(r);
  }
}

TEST(CameraId, NormalizationKeepsLeadingZeros) {
  EXPECT_EQ(normalize_camera_id("C0900"), "c0900");
  EXPECT_NE(normalize_camera_id("c0900"), normalize_camera_id("c900"));
  EXPECT_TRUE(is_valid_camera_id("c0"));
  EXPECT_FALSE(is_valid_camera_id("c"));
  EXPECT_FALSE(is_valid_camera_id("d12"));
}

TEST(Dataset, ValidatesFeatures) {
  using testing::make_record;
  EXPECT_EQ(code_of([] { Dataset(2, {make_record(1, "c1", 0, {1.0, 2.0, 3.0})}, {}); }),
            ErrorCode::DimensionMismatch);
  EXPECT_EQ(code_of([] { Dataset(2, {make_record(1, "c1", 0, {1.0, std::nan("")})}, {}); }),
            ErrorCode::NonFiniteFeature);
  EXPECT_EQ(code_of([] { Dataset(2, {make_record(1, "x1", 0, {1.0, 2.0})}, {}); }), ErrorCode::MalformedFilename);
  Dataset ok(2, {make_record(1, "c1", 0, {1.0, 2.0})}, {});
  EXPECT_THROW(ok.require_non_empty(), Error);
}

TEST(Topology, PublishedWalkingDistances) {
  const auto topo = daa_walking_topology();
  EXPECT_DOUBLE_EQ(walking_distance(topo, "c0900", "c0902"), 48.5);
  EXPECT_DOUBLE_EQ(walking_distance(topo, "c0903", "c0900"), 106.0);
  EXPECT_DOUBLE_EQ(walking_distance(topo, "c0904", "c0904"), 0.0);
  EXPECT_DOUBLE_EQ(walking_distance(topo, "c0903", "c0926"), 97.5);
  EXPECT_DOUBLE_EQ(walking_distance(topo, "C0900", "C0902"), 48.5);
}

TEST(Topology, LookupIsSymmetric) {
  const auto topo = daa_walking_topology();
  for (const auto& a : topo.camera_ids())
    for (const auto& b : topo.camera_ids()) EXPECT_EQ(topo.walking_distance(a, b), topo.walking_distance(b, a));
}

TEST(Topology, ShortSpellingIsItsOwnCamera) {
  const CameraTopology topo({"C900", "C902"}, {0.0, 48.5, 48.5, 0.0});
  EXPECT_DOUBLE_EQ(topo.walking_distance("C900", "c902"), 48.5);
  EXPECT_EQ(code_of([&] { topo.walking_distance("c0900", "c902"); }), ErrorCode::UnknownCamera);
}

TEST(Topology, RejectsInvalidMatrices) {
  EXPECT_EQ(code_of([] { CameraTopology({"c1", "c2"}, {0.0, 1.0, 2.0, 0.0}); }), ErrorCode::InvalidTopology);
  EXPECT_EQ(code_of([] { CameraTopology({"c1", "c2"}, {1.0, 1.0, 1.0, 0.0}); }), ErrorCode::InvalidTopology);
  EXPECT_EQ(code_of([] { CameraTopology({"c1", "c2"}, {0.0, -1.0, -1.0, 0.0}); }), ErrorCode::InvalidTopology);
  EXPECT_EQ(code_of([] { CameraTopology({"c1", "c2"}, {0.0, 1.0, 1.0}); }), ErrorCode::InvalidTopology);
  EXPECT_EQ(code_of([] { CameraTopology({"c1", "C1"}, {0.0, 1.0, 1.0, 0.0}); }), ErrorCode::InvalidTopology);
  EXPECT_NO_THROW(CameraTopology({"c1", "c2"}, {0.0, 1.0, 1.0 + 1e-12, 0.0}));
}

TEST(Topology, CsvRoundTrip) {
  const auto topo = daa_walking_topology();
  const auto back = parse_topology_csv(format_topology_csv(topo));
  EXPECT_EQ(back.camera_ids(), topo.camera_ids());
  for (std::size_t i = 0; i < topo.size(); ++i)
    for (std::size_t j = 0; j < topo.size(); ++j) EXPECT_EQ(back.at(i, j), topo.at(i, j));
}

TEST(Manifest, ParsesSectionsAndComments) {
  const auto m = parse_manifest("# header\n[query]\na.jpg\n\n[gallery]\n  b.jpg \n# skip\nc.jpg\n");
  EXPECT_EQ(m.queries, std::vector<std::string>{"a.jpg"});
  EXPECT_EQ(m.gallery, (std::vector<std::string>{"b.jpg", "c.jpg"}));
  EXPECT_EQ(parse_manifest(format_manifest(m)).gallery, m.gallery);
  EXPECT_EQ(code_of([] { parse_manifest("a.jpg\n"); }), ErrorCode::MalformedInput);
}

class LoadDataset : public ::testing::Test {
 protected:
  TempDir dir;
  Manifest manifest{{"1_c0900_t100_frame0000010_0.jpg"},
                    {"1_c0902_t200_frame0000020_0.jpg", "2_c0903_t300_frame0000030_0.jpg"}};

  FeatureTable features(std::size_t dim) const {
    FeatureTable t;
    t.dimension = dim;
    float v = 0.5f;
    for (const auto* side : {&manifest.queries, &manifest.gallery})
      for (const auto& n : *side) t.entries.push_back({n, std::vector<float>(dim, v += 1.0f)});
    return t;
  }
};

TEST_F(LoadDataset, AttachesFeaturesInManifestOrder) {
  write_manifest(dir / "m.txt", manifest);
  write_features_binary(dir / "f.ridf", features(4));
  const auto ds = load_dataset(dir / "m.txt", dir / "f.ridf");
  EXPECT_EQ(ds.dimension(), 4u);
  ASSERT_EQ(ds.num_queries(), 1u);
  ASSERT_EQ(ds.num_gallery(), 2u);
  EXPECT_EQ(ds.gallery()[0].camera_id, "c0902");
  EXPECT_EQ(ds.gallery()[1].person_id, 2u);
  EXPECT_DOUBLE_EQ((*ds.gallery()[1].feature)[0], 3.5);
  EXPECT_TRUE(ds.all_features_present());
}

TEST_F(LoadDataset, CsvFeaturesWorkToo) {
  write_manifest(dir / "m.txt", manifest);
  write_features_csv(dir / "f.csv", features(3));
  EXPECT_EQ(load_dataset(dir / "m.txt", dir / "f.csv").dimension(), 3u);
}

TEST_F(LoadDataset, MissingFeature) {
  manifest.gallery.push_back("3_c0904_t400_frame0000040_0.jpg");
  write_manifest(dir / "m.txt", manifest);
  manifest.gallery.pop_back();
  write_features_binary(dir / "f.ridf", features(4));
  EXPECT_EQ(code_of([&] { load_dataset(dir / "m.txt", dir / "f.ridf"); }), ErrorCode::MissingFeature);
}

TEST_F(LoadDataset, MixedDimensions) {
  write_manifest(dir / "m.txt", manifest);
  write_file_bytes(dir / "f.csv",
                   "filename,f0,f1,f2,f3\n"
                   "1_c0900_t100_frame0000010_0.jpg,1,2,3,4\n"
                   "1_c0902_t200_frame0000020_0.jpg,1,2,3,4,5\n"
                   "2_c0903_t300_frame0000030_0.jpg,1,2,3,4\n");
  EXPECT_EQ(code_of([&] { load_dataset(dir / "m.txt", dir / "f.csv"); }), ErrorCode::DimensionMismatch);
}

TEST_F(LoadDataset, DuplicateFilename) {
  manifest.gallery.push_back(manifest.queries.front());
  write_manifest(dir / "m.txt", manifest);
  write_features_binary(dir / "f.ridf", features(4));
  EXPECT_EQ(code_of([&] { load_dataset(dir / "m.txt", dir / "f.ridf"); }), ErrorCode::DuplicateFilename);
}

TEST_F(LoadDataset, Deterministic) {
  write_manifest(dir / "m.txt", manifest);
  write_features_binary(dir / "f.ridf", features(4));
  const auto a = load_dataset(dir / "m.txt", dir / "f.ridf");
  const auto b = load_dataset(dir / "m.txt", dir / "f.ridf");
  EXPECT_EQ(a.queries(), b.queries());
  EXPECT_EQ(a.gallery(), b.gallery());
}

}  // namespace
}  // namespace reid
