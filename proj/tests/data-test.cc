#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "doctest.h"
#include "sharc/data.h"
#include "test-util.h"

using namespace sharc;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string &name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string &f) const { return (path / f).string(); }
};

std::string Slurp(const std::string &path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void Spit(const std::string &path, const std::string &bytes) {
  std::ofstream os(path, std::ios::binary);
  os << bytes;
}

template <typename Fn>
ErrorCode CodeOf(Fn fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::kInternal;
}

}  // namespace

TEST_CASE("embedding container round trip is bit exact") {
  TempDir dir("sharc-data-rt");
  std::mt19937_64 rng(1);
  EmbeddingSet set = testing::MakeSet(testing::RandomMatrix(7, 5, rng), {3, 3, 1, 1, 0, 3, 1});
  set.embeddings(2, 3) = 1e-300;
  set.embeddings(4, 1) = -0.0;
  const std::string path = dir / "meeting_a.shrc";
  WriteEmbeddings(set, path);
  EmbeddingSet back = ReadEmbeddings(path);
  CHECK(back.recording_id == "meeting_a");
  CHECK(std::memcmp(back.embeddings.data(), set.embeddings.data(), 35 * sizeof(double)) == 0);
  CHECK(back.labels == set.labels);
  REQUIRE(back.segments.size() == 7);
  CHECK(back.segments[3].onset == set.segments[3].onset);
  CHECK(back.segments[3].duration == set.segments[3].duration);

  // Header layout: magic, u32 version, u64 N, u64 F.
  const std::string bytes = Slurp(path);
  CHECK(bytes.substr(0, 4) == "SHRC");
  CHECK(bytes.size() == 4 + 4 + 16 + 35 * 8);
  uint64_t n;
  std::memcpy(&n, bytes.data() + 8, 8);
  CHECK(n == 7);
}

TEST_CASE("damaged embedding files raise typed errors") {
  TempDir dir("sharc-data-bad");
  std::mt19937_64 rng(2);
  EmbeddingSet set = testing::MakeSet(testing::RandomMatrix(4, 3, rng));
  const std::string path = dir / "x.shrc";
  WriteEmbeddings(set, path);
  const std::string good = Slurp(path);

  Spit(path, good.substr(0, good.size() - 1));
  CHECK(CodeOf([&] { ReadEmbeddings(path); }) == ErrorCode::kTruncated);

  Spit(path, good.substr(0, 10));
  CHECK(CodeOf([&] { ReadEmbeddings(path); }) == ErrorCode::kTruncated);

  std::string bad = good;
  bad[0] = 'X';
  Spit(path, bad);
  CHECK(CodeOf([&] { ReadEmbeddings(path); }) == ErrorCode::kBadMagic);

  bad = good;
  bad[4] = 9;
  Spit(path, bad);
  CHECK(CodeOf([&] { ReadEmbeddings(path); }) == ErrorCode::kUnsupportedVersion);

  bad = good;
  const uint64_t huge = uint64_t{1} << 40;
  std::memcpy(bad.data() + 8, &huge, 8);
  std::memcpy(bad.data() + 16, &huge, 8);
  Spit(path, bad);
  CHECK(CodeOf([&] { ReadEmbeddings(path); }) == ErrorCode::kSizeOverflow);

  Spit(path, good);
  Spit(dir / "x.segs", "0 1.5\n0.75 1.5\n");
  CHECK(CodeOf([&] { ReadEmbeddings(path); }) == ErrorCode::kSidecarMismatch);
  Spit(dir / "x.segs", "0 1 0\n1 1\n2 1 0\n3 1 1\n");
  CHECK(CodeOf([&] { ReadEmbeddings(path); }) == ErrorCode::kSidecarMismatch);

  CHECK(CodeOf([&] { ReadEmbeddings(dir / "missing.shrc"); }) == ErrorCode::kIo);

  EmbeddingSet nan = set;
  nan.embeddings(1, 1) = std::nan("");
  nan.segments.clear();
  WriteEmbeddings(nan, dir / "nan.shrc");
  CHECK(CodeOf([&] { ReadEmbeddings(dir / "nan.shrc"); }) == ErrorCode::kNonFinite);
}

TEST_CASE("similarity container round trip") {
  TempDir dir("sharc-data-sim");
  std::mt19937_64 rng(3);
  SimilarityMatrix s = CosineSimilarity(testing::RandomMatrix(6, 4, rng));
  WriteSimilarity(s, dir / "a.sim");
  CHECK(ReadSimilarity(dir / "a.sim").values == s.values);
  CHECK(SiblingPath("/a/b/rec.shrc", ".sim") == "/a/b/rec.sim");
}

TEST_CASE("rttm formatting") {
  std::vector<Segment> one{{1.25, 2.0}};
  std::vector<int> labels{4};
  std::string text = FormatRttm(LabelsToRttm(labels, one, "rec1"));
  CHECK(text == "SPEAKER rec1 1 1.250 2.000 <NA> <NA> spk4 <NA> <NA>\n");

  // Overlapping segments with alternating labels: boundaries at overlap midpoints.
  std::vector<Segment> segs{{0.0, 1.5}, {0.75, 1.5}, {1.5, 1.5}, {2.25, 1.5}};
  auto recs = LabelsToRttm(std::vector<int>{0, 1, 0, 1}, segs, "r");
  REQUIRE(recs.size() == 4);
  CHECK(recs[0].onset == 0.0);
  CHECK(recs[0].duration == doctest::Approx(1.125));
  CHECK(recs[1].onset == doctest::Approx(1.125));
  CHECK(recs[3].onset + recs[3].duration == doctest::Approx(3.75));

  auto merged = LabelsToRttm(std::vector<int>{2, 2, 2, 2}, segs, "r");
  REQUIRE(merged.size() == 1);
  CHECK(merged[0].duration == doctest::Approx(3.75));
}

TEST_CASE("rttm round trip and parse errors") {
  TempDir dir("sharc-data-rttm");
  std::vector<RttmRecord> recs{{"a", 0.5, 1.234, "spk0"}, {"a", 2.0, 0.5, "spk1"}, {"b", 0.0, 3.0, "x"}};
  WriteRttm(recs, dir / "out.rttm");
  auto back = ReadRttm(dir / "out.rttm");
  REQUIRE(back.size() == 3);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(back[i].recording_id == recs[i].recording_id);
    CHECK(back[i].speaker == recs[i].speaker);
    CHECK(std::abs(back[i].onset - recs[i].onset) <= 1e-3);
    CHECK(std::abs(back[i].duration - recs[i].duration) <= 1e-3);
  }
  CHECK(ParseRttm(";; comment\nSPKR-INFO a 1 <NA> <NA> <NA> unknown spk0 <NA> <NA>\n").empty());
  CHECK(CodeOf([] { ParseRttm("SPEAKER a 1 0.0 1.0\n"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { ParseRttm("SPEAKER a 1 0.0 abc <NA> <NA> s <NA> <NA>\n"); }) == ErrorCode::kParse);
  CHECK(CodeOf([] { ParseRttm("SPEAKER a 1 0.0 -1 <NA> <NA> s <NA> <NA>\n"); }) == ErrorCode::kParse);
}

TEST_CASE("synthetic data") {
  SynthConfig cfg;
  cfg.n_recordings = 4;
  cfg.min_speakers = 2;
  cfg.max_speakers = 6;
  cfg.spread = 0.0;
  cfg.seed = 5;
  auto sets = SynthGenerate(cfg);
  REQUIRE(sets.size() == 4);
  for (const EmbeddingSet &s : sets) {
    CHECK(Validate(s).empty());
    std::set<int> speakers(s.labels->begin(), s.labels->end());
    CHECK(speakers.size() >= 2);
    CHECK(speakers.size() <= 6);
    CHECK(*speakers.rbegin() == static_cast<int>(speakers.size()) - 1);
    for (int i = 0; i < s.size(); ++i) {
      CHECK(s.embeddings.row(i).norm() == doctest::Approx(1.0));
      for (int j = 0; j < i; ++j) {
        if ((*s.labels)[i] == (*s.labels)[j]) CHECK(s.embeddings.row(i) == s.embeddings.row(j));
        else CHECK(s.embeddings.row(i).dot(s.embeddings.row(j)) <= 0.5 + 1e-12);
      }
    }
    for (int i = 1; i < s.size(); ++i) CHECK(s.segments[i].onset >= s.segments[i - 1].onset);
  }

  TempDir dir("sharc-data-synth");
  cfg.spread = 0.3;
  WriteEmbeddings(SynthGenerate(cfg)[1], dir / "a.shrc");
  WriteEmbeddings(SynthGenerate(cfg)[1], dir / "b.shrc");
  CHECK(Slurp(dir / "a.shrc") == Slurp(dir / "b.shrc"));
  CHECK(Slurp(dir / "a.segs") == Slurp(dir / "b.segs"));
  cfg.seed = 6;
  WriteEmbeddings(SynthGenerate(cfg)[1], dir / "c.shrc");
  CHECK(Slurp(dir / "a.shrc") != Slurp(dir / "c.shrc"));

  cfg.dim = 2;
  cfg.min_speakers = cfg.max_speakers = 3;
  cfg.min_angle_deg = 170.0;
  CHECK(CodeOf([&] { SynthGenerate(cfg); }) == ErrorCode::kInfeasible);
}
