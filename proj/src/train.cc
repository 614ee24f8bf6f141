#include "sharc/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "sharc/cluster.h"
#include "sharc/data.h"
#include "sharc/parallel.h"
#include "sharc/simgraph.h"

namespace sharc {

namespace {

// Oracle merges use p := q in {0, 1}, so any threshold in (0, 1] is exact.
constexpr double kOracleThreshold = 0.5;
constexpr double kRelErrorFloor = 1e-6;

double ClampProb(double p) { return std::clamp(p, kProbClamp, 1.0 - kProbClamp); }

int DistinctNodeLabels(const LevelGraph &graph, std::span<const int> labels) {
  std::set<int> seen;
  for (const auto &origin : graph.node_origin) seen.insert(labels[origin.front()]);
  return static_cast<int>(seen.size());
}

void AddScaled(ScorerParams &dst, const ScorerParams &src, double scale) {
  auto d = dst.Tensors();
  auto s = src.Tensors();
  for (size_t t = 0; t < d.size(); ++t) {
    for (size_t i = 0; i < d[t].size(); ++i) d[t][i] += scale * s[t][i];
  }
}

// Sign pattern of every ReLU input plus the BCE clamp state; central
// differences are only meaningful when both probes share one pattern.
std::vector<bool> ActivationPattern(const ForwardTrace &trace, const PairCache &cache,
                                    const EdgeScores &scores) {
  std::vector<bool> pattern;
  auto append = [&pattern](const Matrix &m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) pattern.push_back(m.data()[i] > 0.0);
  };
  append(trace.pre_activation);
  append(cache.hidden1_pre);
  append(cache.hidden2_pre);
  for (double p : scores.linkage_prob) pattern.push_back(ClampProb(p) != p);
  return pattern;
}

TrainGraph Rotated(const TrainGraph &tg, const Matrix &rotation) {
  TrainGraph out = tg;
  const int f = tg.graph.feature_dim();
  out.graph.node_features.leftCols(f) = tg.graph.node_features.leftCols(f) * rotation;
  out.graph.node_features.rightCols(f) = tg.graph.node_features.rightCols(f) * rotation;
  return out;
}

}  // namespace

Matrix RandomRotation(int dim, uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix a(dim, dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ();
  // Sign fix on R's diagonal makes Q uniformly distributed.
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < dim; ++j) {
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  }
  return q;
}

TrainGraph MakeTrainGraph(LevelGraph graph, std::span<const int> labels) {
  TrainGraph tg;
  tg.target_link = LabelOracleScorer({labels.begin(), labels.end()}).Targets(graph);
  tg.target_density = NodeDensity(EdgeWeights(tg.target_link), graph);
  tg.graph = std::move(graph);
  return tg;
}

std::vector<TrainGraph> BuildTrainingHierarchy(const EmbeddingSet &set, int k) {
  if (!set.labels) {
    throw Error(ErrorCode::kMissingLabels,
                "recording '" + set.recording_id + "' has no labels");
  }
  RequireValid(set);
  const std::vector<int> &labels = *set.labels;

  std::vector<TrainGraph> out;
  LevelGraph graph = BuildLevel0(set, k);
  while (graph.num_nodes() > 1) {
    TrainGraph tg = MakeTrainGraph(std::move(graph), labels);
    const LevelGraph &g = tg.graph;
    const int n = g.num_nodes();
    EdgeScores oracle = MakeEdgeScores(tg.target_link, g);
    std::vector<Edge> merges =
        SelectMerges(g, SelectCandidates(g, oracle, kOracleThreshold), oracle);
    // Nodes are label-pure, so one node per label means nothing left to learn.
    const bool done = merges.empty() || DistinctNodeLabels(g, labels) == n;
    LevelGraph next;
    if (!done) {
      Assignment clusters = Components(merges, n);
      next = Aggregate(g, clusters.labels, tg.target_density, k);
    }
    out.push_back(std::move(tg));
    if (done) break;
    graph = std::move(next);
  }
  return out;
}

LossValue Loss(const EdgeScores &scores, const TrainGraph &tg) {
  const size_t num_edges = tg.target_link.size();
  const size_t n = tg.target_density.size();
  if (scores.linkage_prob.size() != num_edges || scores.density.size() != n) {
    throw Error(ErrorCode::kShapeMismatch, "scores not aligned with training graph");
  }
  LossValue v;
  for (size_t e = 0; e < num_edges; ++e) {
    const double p = ClampProb(scores.linkage_prob[e]);
    const double q = tg.target_link[e];
    v.conn -= q * std::log(p) + (1.0 - q) * std::log(1.0 - p);
  }
  if (num_edges > 0) v.conn /= static_cast<double>(num_edges);
  for (size_t i = 0; i < n; ++i) {
    const double r = tg.target_density[i] - scores.density[i];
    v.den += r * r;
  }
  if (n > 0) v.den /= static_cast<double>(n);
  v.total = v.conn + v.den;
  return v;
}

ScorerParams Backward(const ForwardTrace &trace, const PairCache &cache,
                      const EdgeScores &scores, const TrainGraph &tg,
                      const ScorerParams &params) {
  const LevelGraph &g = tg.graph;
  const int n = g.num_nodes();
  const int num_edges = g.num_edges();
  const int latent = params.dims.latent;
  ScorerParams grad = ScorerParams::Zeros(params.dims);
  if (num_edges == 0) return grad;

  // dL/d(l1 - l0) per edge, from both loss terms.
  Vector du(num_edges);
  for (int i = 0; i < n; ++i) {
    const double dden = -2.0 * (tg.target_density[i] - scores.density[i]) / n;
    const double deg = g.out_degree(i);
    for (int e = g.offsets[i]; e < g.offsets[i + 1]; ++e) {
      const double p = scores.linkage_prob[e];
      double g_conn = 0.0;
      if (ClampProb(p) == p) g_conn = (p - tg.target_link[e]) / num_edges;
      const double g_den = dden * 2.0 * g.edge_similarity[e] / deg * p * (1.0 - p);
      du[e] = g_conn + g_den;
    }
  }

  Matrix dlogits(num_edges, 2);
  dlogits.col(0) = -du;
  dlogits.col(1) = du;

  auto relu = [](double x) { return x > 0.0 ? x : 0.0; };
  auto step = [](double x) { return x > 0.0 ? 1.0 : 0.0; };

  const Matrix r2 = cache.hidden2_pre.unaryExpr(relu);
  grad.ffn_weight[2].noalias() = dlogits.transpose() * r2;
  grad.ffn_bias[2] = dlogits.colwise().sum().transpose();
  Matrix da2 = (dlogits * params.ffn_weight[2]).cwiseProduct(cache.hidden2_pre.unaryExpr(step));

  const Matrix r1 = cache.hidden1_pre.unaryExpr(relu);
  grad.ffn_weight[1].noalias() = da2.transpose() * r1;
  grad.ffn_bias[1] = da2.colwise().sum().transpose();
  Matrix da1 = (da2 * params.ffn_weight[1]).cwiseProduct(cache.hidden1_pre.unaryExpr(step));
  grad.ffn_bias[0] = da1.colwise().sum().transpose();

  // Scatter edge gradients back to their endpoints.
  Matrix by_src = Matrix::Zero(n, params.dims.hidden1);
  Matrix by_dst = Matrix::Zero(n, params.dims.hidden1);
  for (int e = 0; e < num_edges; ++e) {
    by_src.row(g.edges[e].src) += da1.row(e);
    by_dst.row(g.edges[e].dst) += da1.row(e);
  }
  grad.ffn_weight[0].leftCols(latent).noalias() = by_src.transpose() * trace.latent;
  grad.ffn_weight[0].rightCols(latent).noalias() = by_dst.transpose() * trace.latent;

  Matrix dlatent = by_src * params.ffn_weight[0].leftCols(latent) +
                   by_dst * params.ffn_weight[0].rightCols(latent);
  Matrix dpre = dlatent.cwiseProduct(trace.pre_activation.unaryExpr(step));
  grad.sage_weight.noalias() = dpre.transpose() * trace.sage_input;
  grad.sage_bias = dpre.colwise().sum().transpose();
  return grad;
}

LossValue LossAndGradient(const TrainGraph &tg, const ScorerParams &params,
                          ScorerParams *grad) {
  ForwardTrace trace = SageForward(tg.graph, params);
  PairCache cache;
  EdgeScores scores = MakeEdgeScores(ScorePairs(trace, tg.graph, params, &cache), tg.graph);
  LossValue v = Loss(scores, tg);
  if (grad) *grad = Backward(trace, cache, scores, tg, params);
  return v;
}

TrainResult Train(std::span<const EmbeddingSet> sets, const TrainConfig &config,
                  const std::function<void(const EpochStats &)> &on_epoch,
                  const ScorerParams *initial) {
  if (!(config.learning_rate >= 0.0) || !std::isfinite(config.learning_rate)) {
    throw Error(ErrorCode::kInvalidArgument, "learning rate must be finite and >= 0");
  }
  if (config.epochs < 1) throw Error(ErrorCode::kInvalidArgument, "epochs must be >= 1");
  if (config.batch_size < 1) throw Error(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (sets.empty()) throw Error(ErrorCode::kInvalidArgument, "no training recordings");

  ScorerDims dims = config.dims;
  if (dims.input == 0) dims.input = sets.front().dim();
  for (const auto &s : sets) {
    if (s.dim() != dims.input) {
      throw Error(ErrorCode::kShapeMismatch, "recording '" + s.recording_id +
                                                 "' has dimension " + std::to_string(s.dim()));
    }
  }

  std::vector<std::vector<TrainGraph>> graphs;
  graphs.reserve(sets.size());
  for (const auto &s : sets) graphs.push_back(BuildTrainingHierarchy(s, config.k));

  TrainResult result;
  if (initial) {
    if (!(initial->dims == dims)) {
      throw Error(ErrorCode::kIncompatibleCheckpoint, "initial params have other dims");
    }
    result.params = *initial;
  } else {
    result.params = InitParams(dims, config.seed);
  }

  std::vector<size_t> order(sets.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    EpochStats stats{epoch, 0.0, 0.0, 0.0};
    size_t epoch_graphs = 0;

    for (size_t b = 0; b < order.size(); b += config.batch_size) {
      std::vector<const TrainGraph *> batch;
      std::vector<TrainGraph> rotated;
      for (size_t r = b; r < std::min(order.size(), b + config.batch_size); ++r) {
        if (config.augment_rotation) {
          const Matrix rot = RandomRotation(dims.input, rng());
          for (const auto &tg : graphs[order[r]]) rotated.push_back(Rotated(tg, rot));
        } else {
          for (const auto &tg : graphs[order[r]]) batch.push_back(&tg);
        }
      }
      for (const auto &tg : rotated) batch.push_back(&tg);
      if (batch.empty()) continue;

      std::vector<LossValue> losses(batch.size());
      std::vector<ScorerParams> grads(batch.size());
      ParallelFor(batch.size(), [&](size_t i) {
        losses[i] = LossAndGradient(*batch[i], result.params, &grads[i]);
      });

      const double scale = 1.0 / static_cast<double>(batch.size());
      ScorerParams total = ScorerParams::Zeros(dims);
      for (size_t i = 0; i < batch.size(); ++i) {
        if (!std::isfinite(losses[i].total)) {
          throw Error(ErrorCode::kDivergence,
                      "non-finite loss at epoch " + std::to_string(epoch) +
                          " (graph level " + std::to_string(batch[i]->graph.level) + ")");
        }
        stats.loss += losses[i].total;
        stats.conn += losses[i].conn;
        stats.den += losses[i].den;
        AddScaled(total, grads[i], scale);
      }
      epoch_graphs += batch.size();
      AddScaled(result.params, total, -config.learning_rate);
      if (!result.params.AllFinite()) {
        throw Error(ErrorCode::kDivergence,
                    "parameters became non-finite at epoch " + std::to_string(epoch));
      }
    }

    if (epoch_graphs > 0) {
      stats.loss /= epoch_graphs;
      stats.conn /= epoch_graphs;
      stats.den /= epoch_graphs;
    }
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

GradCheckResult GradCheck(const ScorerParams &params, const TrainGraph &tg, int n_coords,
                          double step, uint64_t seed) {
  if (n_coords < 1) throw Error(ErrorCode::kInvalidArgument, "n_coords must be >= 1");
  if (!(step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "step must be > 0");

  ScorerParams analytic;
  LossAndGradient(tg, params, &analytic);
  const auto grad_tensors = analytic.Tensors();

  std::vector<std::pair<int, size_t>> coords;
  for (size_t t = 0; t < grad_tensors.size(); ++t) {
    for (size_t i = 0; i < grad_tensors[t].size(); ++i) coords.emplace_back(static_cast<int>(t), i);
  }

  auto probe = [&](const ScorerParams &p, std::vector<bool> *pattern) {
    ForwardTrace trace = SageForward(tg.graph, p);
    PairCache cache;
    EdgeScores scores = MakeEdgeScores(ScorePairs(trace, tg.graph, p, &cache), tg.graph);
    *pattern = ActivationPattern(trace, cache, scores);
    return Loss(scores, tg).total;
  };

  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<size_t> pick(0, coords.size() - 1);
  GradCheckResult result;
  ScorerParams work = params;
  const int max_attempts = 20 * n_coords;
  for (int attempt = 0; attempt < max_attempts && result.checked < n_coords; ++attempt) {
    auto [t, i] = coords[pick(rng)];
    double &x = work.Tensors()[t][i];
    const double saved = x;
    std::vector<bool> plus_pattern, minus_pattern;
    x = saved + step;
    const double plus = probe(work, &plus_pattern);
    x = saved - step;
    const double minus = probe(work, &minus_pattern);
    x = saved;
    if (plus_pattern != minus_pattern) {
      ++result.skipped;
      continue;
    }
    const double numeric = (plus - minus) / (2.0 * step);
    const double a = grad_tensors[t][i];
    const double denom = std::max({std::abs(a), std::abs(numeric), kRelErrorFloor});
    result.max_rel_error = std::max(result.max_rel_error, std::abs(a - numeric) / denom);
    ++result.checked;
  }
  return result;
}

GradCheckInstance RandomGradCheckInstance(uint64_t seed) {
  SynthConfig cfg;
  cfg.n_recordings = 1;
  cfg.min_speakers = 2;
  cfg.max_speakers = 4;
  cfg.dim = 6;
  cfg.spread = 0.6;
  cfg.min_turn = 1.5;
  cfg.max_turn = 4.0;
  cfg.turns_per_speaker = 2;
  cfg.seed = seed;
  const EmbeddingSet set = SynthGenerate(cfg).front();

  std::mt19937_64 rng(seed ^ 0xc0ffeeULL);
  GradCheckInstance inst;
  inst.graph = MakeTrainGraph(BuildLevel0(set, 5), *set.labels);
  inst.params = InitParams(ScorerDims{cfg.dim, 16, 12, 8}, rng());
  std::uniform_real_distribution<double> bias(-0.2, 0.2);
  inst.params.sage_bias = inst.params.sage_bias.unaryExpr([&](double) { return bias(rng); });
  for (auto &b : inst.params.ffn_bias) b = b.unaryExpr([&](double) { return bias(rng); });
  return inst;
}

}  // namespace sharc
