#include "sharc/gnn.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "sharc/parallel.h"

namespace sharc {

namespace {

constexpr int kScoreBlock = 8192;

void FillUniform(Matrix &m, double scale, std::mt19937_64 &rng) {
  std::uniform_real_distribution<double> dist(-scale, scale);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = dist(rng);
}

inline double Relu(double x) { return x > 0.0 ? x : 0.0; }

// P(class 1) under a 2-way softmax.
inline double LinkProb(double l0, double l1) {
  const double d = l0 - l1;
  if (d >= 0.0) {
    const double e = std::exp(-d);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(d));
}

// Runs the head on edges [begin, end) given the projected endpoint terms.
void HeadBlock(const LevelGraph &graph, const ScorerParams &params,
               const Matrix &src_term, const Matrix &dst_term, int begin, int end,
               double *prob, Matrix *h1_out, Matrix *h2_out, Matrix *logit_out) {
  const int rows = end - begin;
  const int h1 = params.dims.hidden1;
  Matrix a1(rows, h1);
  for (int r = 0; r < rows; ++r) {
    const Edge &e = graph.edges[begin + r];
    a1.row(r) = src_term.row(e.src) + dst_term.row(e.dst) +
                params.ffn_bias[0].transpose();
  }
  Matrix a2 = a1.unaryExpr(&Relu) * params.ffn_weight[1].transpose();
  a2.rowwise() += params.ffn_bias[1].transpose();
  Matrix logits = a2.unaryExpr(&Relu) * params.ffn_weight[2].transpose();
  logits.rowwise() += params.ffn_bias[2].transpose();
  for (int r = 0; r < rows; ++r) prob[r] = LinkProb(logits(r, 0), logits(r, 1));
  if (h1_out) {
    h1_out->middleRows(begin, rows) = a1;
    h2_out->middleRows(begin, rows) = a2;
    logit_out->middleRows(begin, rows) = logits;
  }
}

}  // namespace

ScorerParams InitParams(const ScorerDims &dims, uint64_t seed) {
  ScorerParams p = ScorerParams::Zeros(dims);
  std::mt19937_64 rng(seed);
  FillUniform(p.sage_weight, 1.0 / std::sqrt(p.sage_weight.cols()), rng);
  for (auto &w : p.ffn_weight) FillUniform(w, 1.0 / std::sqrt(w.cols()), rng);
  return p;
}

ForwardTrace SageForward(const LevelGraph &graph, const ScorerParams &params) {
  const int n = graph.num_nodes();
  const int width = static_cast<int>(graph.node_features.cols());
  if (width != 2 * params.dims.input) {
    throw Error(ErrorCode::kShapeMismatch,
                "node features have width " + std::to_string(width) +
                    " but the scorer expects 2F = " + std::to_string(2 * params.dims.input));
  }

  ForwardTrace t;
  t.sage_input.resize(n, 2 * width);
  t.sage_input.leftCols(width) = graph.node_features;
  t.neighbor_weight.assign(graph.edges.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    const int b = graph.offsets[i], e = graph.offsets[i + 1];
    double total = 0.0;
    for (int x = b; x < e; ++x) total += graph.edge_similarity[x];
    for (int x = b; x < e; ++x) {
      t.neighbor_weight[x] = total > 0.0 ? graph.edge_similarity[x] / total
                                         : 1.0 / static_cast<double>(e - b);
    }
    auto neigh = t.sage_input.row(i).tail(width);
    neigh.setZero();
    for (int x = b; x < e; ++x) {
      neigh += t.neighbor_weight[x] * graph.node_features.row(graph.edges[x].dst);
    }
  }

  t.pre_activation.noalias() = t.sage_input * params.sage_weight.transpose();
  t.pre_activation.rowwise() += params.sage_bias.transpose();
  t.latent = t.pre_activation.unaryExpr(&Relu);
  return t;
}

std::vector<double> ScorePairs(const ForwardTrace &trace, const LevelGraph &graph,
                               const ScorerParams &params, PairCache *cache) {
  const int latent = params.dims.latent;
  if (trace.latent.rows() != graph.num_nodes() || trace.latent.cols() != latent) {
    throw Error(ErrorCode::kShapeMismatch, "trace does not match graph/params");
  }
  // W1 [h_i ; h_j] = W1_src h_i + W1_dst h_j, so project every node once.
  const Matrix src_term = trace.latent * params.ffn_weight[0].leftCols(latent).transpose();
  const Matrix dst_term = trace.latent * params.ffn_weight[0].rightCols(latent).transpose();

  const int num_edges = graph.num_edges();
  std::vector<double> prob(num_edges);
  if (cache) {
    cache->hidden1_pre.resize(num_edges, params.dims.hidden1);
    cache->hidden2_pre.resize(num_edges, params.dims.hidden2);
    cache->logits.resize(num_edges, 2);
    HeadBlock(graph, params, src_term, dst_term, 0, num_edges, prob.data(),
              &cache->hidden1_pre, &cache->hidden2_pre, &cache->logits);
    return prob;
  }
  const int blocks = (num_edges + kScoreBlock - 1) / kScoreBlock;
  ParallelFor(static_cast<size_t>(blocks), [&](size_t blk) {
    const int begin = static_cast<int>(blk) * kScoreBlock;
    const int end = std::min(num_edges, begin + kScoreBlock);
    HeadBlock(graph, params, src_term, dst_term, begin, end, prob.data() + begin,
              nullptr, nullptr, nullptr);
  });
  return prob;
}

std::vector<double> EdgeWeights(std::span<const double> prob) {
  std::vector<double> w(prob.size());
  for (size_t e = 0; e < prob.size(); ++e) w[e] = 2.0 * prob[e] - 1.0;
  return w;
}

std::vector<double> NodeDensity(std::span<const double> weight, const LevelGraph &graph) {
  if (weight.size() != graph.edges.size()) {
    throw Error(ErrorCode::kShapeMismatch, "edge weights not aligned with graph edges");
  }
  const int n = graph.num_nodes();
  std::vector<double> density(n, 0.0);
  for (int i = 0; i < n; ++i) {
    const int b = graph.offsets[i], e = graph.offsets[i + 1];
    if (b == e) continue;
    double acc = 0.0;
    for (int x = b; x < e; ++x) acc += weight[x] * graph.edge_similarity[x];
    density[i] = acc / static_cast<double>(e - b);
  }
  return density;
}

EdgeScores MakeEdgeScores(std::vector<double> prob, const LevelGraph &graph) {
  EdgeScores s;
  s.edge_weight = EdgeWeights(prob);
  s.density = NodeDensity(s.edge_weight, graph);
  s.linkage_prob = std::move(prob);
  return s;
}

EdgeScores ScoreGraph(const LevelGraph &graph, const ScorerParams &params) {
  ForwardTrace trace = SageForward(graph, params);
  return MakeEdgeScores(ScorePairs(trace, graph, params), graph);
}

}  // namespace sharc
