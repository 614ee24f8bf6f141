// Supervised training of the edge scorer.
//
// Targets come from a ground-truth hierarchy: level 0 is the kNN graph over
// labeled embeddings, and each further level is obtained by clustering with
// the label oracle (p := q) and aggregating with ground-truth densities. The
// objective per graph is BCE over kNN edges plus the MSE between predicted
// and ground-truth node densities; a batch averages it over every graph of
// every recording in the batch.

#ifndef SHARC_TRAIN_H_
#define SHARC_TRAIN_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sharc/core.h"
#include "sharc/gnn.h"

namespace sharc {

inline constexpr double kProbClamp = 1e-12;

struct TrainGraph {
  LevelGraph graph;
  std::vector<double> target_link;     // q_ij in {0, 1}, per edge
  std::vector<double> target_density;  // d_i, per node
};

struct TrainConfig {
  double learning_rate = 0.01;
  int epochs = 500;
  int batch_size = 1;  // recordings per SGD step
  int k = 60;
  uint64_t seed = 0;
  ScorerDims dims;  // dims.input is taken from the data when 0
  // Apply a fresh random orthogonal transform to the embedding space of every
  // recording at every step. Cosine similarities, and therefore all graphs
  // and targets, are unchanged; only the features the scorer sees move.
  bool augment_rotation = false;
};

// Haar-distributed random orthogonal matrix.
Matrix RandomRotation(int dim, uint64_t seed);

// Requires labels. Graphs without edges are omitted.
std::vector<TrainGraph> BuildTrainingHierarchy(const EmbeddingSet &set, int k);

// Ground-truth targets for an arbitrary graph: q from labels, d from q.
TrainGraph MakeTrainGraph(LevelGraph graph, std::span<const int> labels);

struct LossValue {
  double total = 0.0;
  double conn = 0.0;
  double den = 0.0;
};

LossValue Loss(const EdgeScores &scores, const TrainGraph &tg);

// Gradient of Loss() for one graph, same shapes as `params`.
ScorerParams Backward(const ForwardTrace &trace, const PairCache &cache,
                      const EdgeScores &scores, const TrainGraph &tg,
                      const ScorerParams &params);

// Forward + loss, and the gradient when `grad` is non-null.
LossValue LossAndGradient(const TrainGraph &tg, const ScorerParams &params,
                          ScorerParams *grad = nullptr);

struct EpochStats {
  int epoch = 0;
  double loss = 0.0;
  double conn = 0.0;
  double den = 0.0;
};

struct TrainResult {
  ScorerParams params;
  std::vector<EpochStats> history;
};

// Plain SGD. Throws kDivergence if a batch loss is not finite.
TrainResult Train(std::span<const EmbeddingSet> sets, const TrainConfig &config,
                  const std::function<void(const EpochStats &)> &on_epoch = {},
                  const ScorerParams *initial = nullptr);

struct GradCheckResult {
  double max_rel_error = 0.0;
  int checked = 0;
  int skipped = 0;  // coordinates whose perturbation crossed a ReLU or clamp kink
};

// Compares Backward() with central differences on `n_coords` coordinates
// drawn uniformly from all parameters. Relative error is
// |a - n| / max(|a|, |n|, 1e-6).
GradCheckResult GradCheck(const ScorerParams &params, const TrainGraph &tg, int n_coords,
                          double step, uint64_t seed);

// A small random labeled level-0 graph (2-4 speakers, F = 6, k = 5) with
// random weights and biases.
struct GradCheckInstance {
  ScorerParams params;
  TrainGraph graph;
};
GradCheckInstance RandomGradCheckInstance(uint64_t seed);

}  // namespace sharc

#endif  // SHARC_TRAIN_H_
