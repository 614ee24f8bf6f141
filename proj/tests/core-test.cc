#include <cmath>
#include <limits>

#include "doctest.h"
#include "sharc/core.h"
#include "test-util.h"

using namespace sharc;

TEST_CASE("validate accepts a well-formed set") {
  Matrix x(3, 2);
  x << 1, 0, 0, 1, 1, 1;
  EmbeddingSet s = testing::MakeSet(x);
  CHECK(Validate(s).empty());
  CHECK_NOTHROW(RequireValid(s));
}

TEST_CASE("validate reports the row holding a NaN") {
  Matrix x(3, 2);
  x << 1, 0, 0, std::numeric_limits<double>::quiet_NaN(), 1, 1;
  auto issues = Validate(testing::MakeSet(x));
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("row 1") != std::string::npos);
  try {
    RequireValid(testing::MakeSet(x));
    FAIL("expected throw");
  } catch (const Error &e) {
    CHECK(e.code() == ErrorCode::kNonFinite);
  }
}

TEST_CASE("validate flags label and segment shape mismatches") {
  Matrix x = Matrix::Ones(3, 2);
  EmbeddingSet s = testing::MakeSet(x, {0, 1});
  auto issues = Validate(s);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("shape mismatch") == 0);

  s = testing::MakeSet(x);
  s.segments[2].duration = -0.5;
  issues = Validate(s);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].find("negative duration") != std::string::npos);

  s = testing::MakeSet(x);
  s.segments.pop_back();
  CHECK_FALSE(Validate(s).empty());

  s.embeddings.resize(0, 2);
  s.segments.clear();
  CHECK_FALSE(Validate(s).empty());
}

TEST_CASE("scorer params shapes follow dims") {
  ScorerParams p = ScorerParams::Zeros({5, 7, 3, 4});
  CHECK(p.sage_weight.rows() == 7);
  CHECK(p.sage_weight.cols() == 20);
  CHECK(p.ffn_weight[0].rows() == 3);
  CHECK(p.ffn_weight[0].cols() == 14);
  CHECK(p.ffn_weight[1].rows() == 4);
  CHECK(p.ffn_weight[1].cols() == 3);
  CHECK(p.ffn_weight[2].rows() == 2);
  CHECK(p.NumValues() == 7 * 20 + 7 + 3 * 14 + 3 + 4 * 3 + 4 + 2 * 4 + 2);
  CHECK(p.AllFinite());
  p.ffn_bias[1][0] = std::numeric_limits<double>::infinity();
  CHECK_FALSE(p.AllFinite());
  CHECK_THROWS_AS(ScorerParams::Zeros({0, 1, 1, 1}), Error);
}

TEST_CASE("partition helpers") {
  std::vector<int> a{5, 5, 2, 9}, b{0, 0, 1, 2}, c{0, 1, 1, 2};
  CHECK(DenseLabels(a) == b);
  CHECK(SamePartition(a, b));
  CHECK_FALSE(SamePartition(a, c));
}
