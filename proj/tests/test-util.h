// Small builders shared by the unit tests.

#ifndef SHARC_TESTS_TEST_UTIL_H_
#define SHARC_TESTS_TEST_UTIL_H_

#include <random>
#include <vector>

#include "sharc/core.h"
#include "sharc/simgraph.h"

namespace sharc::testing {

inline EmbeddingSet MakeSet(const Matrix &x, std::vector<int> labels = {}) {
  EmbeddingSet s;
  s.recording_id = "rec";
  s.embeddings = x;
  for (int i = 0; i < x.rows(); ++i) s.segments.push_back({0.75 * i, 1.5});
  if (!labels.empty()) s.labels = std::move(labels);
  return s;
}

inline Matrix RandomMatrix(int rows, int cols, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
  return m;
}

// Graph over random features with random similarities and the usual kNN
// structure; for formula checks that don't care where S came from.
inline LevelGraph RandomGraph(int n, int f, int k, std::mt19937_64 &rng) {
  Matrix x = RandomMatrix(n, f, rng);
  Matrix features(n, 2 * f);
  features << x, RandomMatrix(n, f, rng);
  std::vector<std::vector<int>> origin(n);
  for (int i = 0; i < n; ++i) origin[i] = {i};
  return BuildLevelGraph(0, features, origin, CosineSimilarity(x), k);
}

}  // namespace sharc::testing

#endif  // SHARC_TESTS_TEST_UTIL_H_
