#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "sharc/eval.h"

using namespace sharc;

namespace {

std::vector<RttmRecord> Recs(std::initializer_list<std::tuple<double, double, const char *>> turns,
                             const std::string &rec = "r") {
  std::vector<RttmRecord> out;
  for (auto [b, e, s] : turns) out.push_back({rec, b, e - b, s});
  return out;
}

double BruteF1(const std::vector<int> &t, const std::vector<int> &p) {
  long tp = 0, fp = 0, fn = 0;
  for (size_t i = 0; i < t.size(); ++i) {
    for (size_t j = i + 1; j < t.size(); ++j) {
      const bool a = t[i] == t[j], b = p[i] == p[j];
      tp += a && b;
      fp += !a && b;
      fn += a && !b;
    }
  }
  if (tp + fp + fn == 0) return 1.0;
  if (tp == 0) return 0.0;
  const double prec = double(tp) / (tp + fp), rec = double(tp) / (tp + fn);
  return 2 * prec * rec / (prec + rec);
}

}  // namespace

TEST_CASE("der examples") {
  auto ref = Recs({{0, 10, "A"}});
  CHECK(ScoreDer(ref, ref, {}).total.Der() == 0.0);

  auto hyp = Recs({{0, 9, "x"}, {9, 10, "y"}});
  DerStats s = ScoreDer(ref, hyp, {}).total;
  CHECK(std::abs(s.Der() - 10.0) < 1e-9);
  CHECK(s.confusion == doctest::Approx(1.0));
  CHECK(s.missed == 0.0);
  CHECK(s.false_alarm == 0.0);

  s = ScoreDer(ref, hyp, {0.25, true}).total;
  CHECK(std::abs(s.Der() - 500.0 / 9000.0 * 100.0) < 1e-9);
  CHECK(s.scored == doctest::Approx(9.0));
}

TEST_CASE("missed and false alarm time") {
  auto ref = Recs({{0, 4, "A"}, {6, 10, "B"}});
  auto hyp = Recs({{0, 3, "1"}, {5, 10, "2"}});
  DerStats s = ScoreDer(ref, hyp, {}).total;
  CHECK(s.scored == doctest::Approx(8.0));
  CHECK(s.missed == doctest::Approx(1.0));
  CHECK(s.false_alarm == doctest::Approx(1.0));
  CHECK(s.confusion == 0.0);

  // Overlapped speech: two reference speakers at once, one hypothesis speaker.
  ref = Recs({{0, 4, "A"}, {2, 6, "B"}});
  hyp = Recs({{0, 4, "1"}, {4, 6, "2"}});
  s = ScoreDer(ref, hyp, {}).total;
  CHECK(s.scored == doctest::Approx(8.0));
  CHECK(s.missed == doctest::Approx(2.0));
  s = ScoreDer(ref, hyp, {0.0, false}).total;
  CHECK(s.scored == doctest::Approx(4.0));
  CHECK(s.Der() == 0.0);
}

TEST_CASE("der invariants") {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> ms(0, 20000);
  std::uniform_int_distribution<int> spk(0, 3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<RttmRecord> ref, hyp, renamed;
    for (int t = 0; t < 6; ++t) {
      int a = ms(rng), b = ms(rng);
      if (a == b) continue;
      ref.push_back({"r", std::min(a, b) / 1000.0, std::abs(a - b) / 1000.0, "s" + std::to_string(spk(rng))});
      a = ms(rng);
      b = ms(rng);
      if (a == b) continue;
      const int h = spk(rng);
      hyp.push_back({"r", std::min(a, b) / 1000.0, std::abs(a - b) / 1000.0, "h" + std::to_string(h)});
      renamed.push_back(hyp.back());
      renamed.back().speaker = "z" + std::to_string(3 - h);
    }
    if (ref.empty()) continue;
    for (double collar : {0.0, 0.25}) {
      for (bool overlap : {true, false}) {
        DerOptions o{collar, overlap};
        CHECK(ScoreDer(ref, ref, o).total.Der() == 0.0);
        CHECK(ScoreDer(ref, hyp, o).total.Der() == doctest::Approx(ScoreDer(ref, renamed, o).total.Der()));
      }
    }
  }
}

TEST_CASE("der corpus handling") {
  auto ref = Recs({{0, 10, "A"}}, "a");
  auto more = Recs({{0, 5, "B"}}, "b");
  ref.insert(ref.end(), more.begin(), more.end());
  DerReport r = ScoreDer(ref, Recs({{0, 10, "A"}}, "a"), {});
  REQUIRE(r.recordings.size() == 2);
  CHECK(r.total.scored == doctest::Approx(15.0));
  CHECK(r.total.missed == doctest::Approx(5.0));
  CHECK(FormatDerReport(r, {}).find("a") != std::string::npos);

  try {
    ScoreDer(std::vector<RttmRecord>{}, ref, {});
    FAIL("expected throw");
  } catch (const Error &) {
  }
  try {
    ScoreDer(Recs({{0, 1, "A"}}, "a"), Recs({{0, 1, "A"}}, "zzz"), {});
    FAIL("expected throw");
  } catch (const Error &) {
  }
}

TEST_CASE("maximum weight assignment matches brute force") {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> w(0, 9);
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + trial % 5, cols = 1 + (trial / 5) % 5;
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = w(rng);
    std::vector<int> a = MaxWeightAssignment(m);
    REQUIRE(static_cast<int>(a.size()) == rows);
    double got = 0.0;
    std::vector<int> used;
    for (int r = 0; r < rows; ++r) {
      if (a[r] < 0) continue;
      got += m(r, a[r]);
      used.push_back(a[r]);
    }
    std::sort(used.begin(), used.end());
    CHECK(std::adjacent_find(used.begin(), used.end()) == used.end());
    CHECK(static_cast<int>(used.size()) == std::min(rows, cols));

    // Every injection of the smaller side into the larger one.
    std::vector<int> perm(std::max(rows, cols));
    std::iota(perm.begin(), perm.end(), 0);
    double best = 0.0;
    do {
      double v = 0.0;
      for (int r = 0; r < std::min(rows, cols); ++r) v += rows <= cols ? m(r, perm[r]) : m(perm[r], r);
      best = std::max(best, v);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(got == best);
  }
}

TEST_CASE("pairwise f1") {
  std::vector<int> a{0, 0, 1, 1, 2, 2};
  CHECK(PairwiseF1(a, a) == 1.0);
  CHECK(PairwiseF1(a, std::vector<int>{5, 5, 3, 3, 9, 9}) == 1.0);
  CHECK(PairwiseF1(std::vector<int>(6, 0), std::vector<int>{0, 1, 2, 3, 4, 5}) == 0.0);
  CHECK(PairwiseF1(std::vector<int>{0, 1, 2}, std::vector<int>{0, 1, 2}) == 1.0);

  // 6 nodes: truth {0,1,2}{3,4,5}, prediction {0,1}{2,3}{4,5}.
  std::vector<int> t{0, 0, 0, 1, 1, 1}, p{0, 0, 1, 1, 2, 2};
  // tp = 2, fp = 1, fn = 4 -> P = 2/3, R = 1/3.
  CHECK(PairwiseF1(t, p) == doctest::Approx(4.0 / 9.0));
  CHECK(PairwiseF1(t, p) == doctest::Approx(BruteF1(t, p)));
  CHECK(PairwiseF1(p, t) == doctest::Approx(PairwiseF1(t, p)));

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = 1 + trial % 12;
    std::uniform_int_distribution<int> lab(0, 1 + trial % 5);
    std::vector<int> x(n), y(n);
    for (int i = 0; i < n; ++i) {
      x[i] = lab(rng);
      y[i] = lab(rng);
    }
    CHECK(PairwiseF1(x, y) == doctest::Approx(BruteF1(x, y)).epsilon(1e-12));
  }
}
