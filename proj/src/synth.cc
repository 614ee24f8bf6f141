#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

#include "sharc/data.h"

namespace sharc {

namespace {

constexpr int kCentroidRetries = 1000;

Matrix SampleCentroids(int speakers, int dim, double min_angle_deg, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const double max_cos = std::cos(min_angle_deg * std::numbers::pi / 180.0);
  Matrix c(speakers, dim);
  for (int attempt = 0; attempt < kCentroidRetries; ++attempt) {
    for (int s = 0; s < speakers; ++s) {
      for (int d = 0; d < dim; ++d) c(s, d) = normal(rng);
      const double norm = c.row(s).norm();
      if (norm == 0.0) c(s, 0) = 1.0;
      else c.row(s) /= norm;
    }
    bool ok = true;
    for (int a = 0; a < speakers && ok; ++a) {
      for (int b = a + 1; b < speakers && ok; ++b) ok = c.row(a).dot(c.row(b)) <= max_cos;
    }
    if (ok) return c;
  }
  throw Error(ErrorCode::kInfeasible,
              "could not place " + std::to_string(speakers) + " centroids in " +
                  std::to_string(dim) + "-D at >= " + std::to_string(min_angle_deg) +
                  " degrees apart");
}

}  // namespace

std::vector<EmbeddingSet> SynthGenerate(const SynthConfig &cfg) {
  if (cfg.min_speakers < 1 || cfg.max_speakers > 64 || cfg.min_speakers > cfg.max_speakers) {
    throw Error(ErrorCode::kInvalidArgument, "speaker range must lie within [1, 64]");
  }
  if (cfg.dim < 1 || cfg.n_recordings < 0 || cfg.turns_per_speaker < 1) {
    throw Error(ErrorCode::kInvalidArgument, "bad synth dimensions");
  }
  if (!(cfg.spread >= 0.0) || !(cfg.segment_length > 0.0) || !(cfg.segment_shift > 0.0) ||
      !(cfg.min_turn > 0.0) || cfg.max_turn < cfg.min_turn) {
    throw Error(ErrorCode::kInvalidArgument, "bad synth timing or spread");
  }

  std::vector<EmbeddingSet> out;
  out.reserve(cfg.n_recordings);
  for (int r = 0; r < cfg.n_recordings; ++r) {
    std::seed_seq seq{static_cast<uint64_t>(cfg.seed), static_cast<uint64_t>(r), uint64_t{0x5a17}};
    std::mt19937_64 rng(seq);
    std::uniform_int_distribution<int> speaker_count(cfg.min_speakers, cfg.max_speakers);
    const int speakers = speaker_count(rng);
    const Matrix centroids = SampleCentroids(speakers, cfg.dim, cfg.min_angle_deg, rng);

    // Each speaker opens one turn in random order; later turns avoid
    // repeating the previous speaker.
    std::vector<int> turns(speakers);
    std::iota(turns.begin(), turns.end(), 0);
    std::shuffle(turns.begin(), turns.end(), rng);
    std::uniform_int_distribution<int> any_speaker(0, speakers - 1);
    for (int t = speakers; t < speakers * cfg.turns_per_speaker; ++t) {
      int s = any_speaker(rng);
      if (speakers > 1) {
        while (s == turns.back()) s = any_speaker(rng);
      }
      turns.push_back(s);
    }

    std::uniform_real_distribution<double> turn_length(cfg.min_turn, cfg.max_turn);
    std::normal_distribution<double> noise(0.0, cfg.spread / std::sqrt(cfg.dim));
    EmbeddingSet set;
    char id[32];
    std::snprintf(id, sizeof(id), "%04d", r);
    set.recording_id = cfg.id_prefix + id;
    std::vector<int> labels;
    std::vector<Vector> rows;
    double t0 = 0.0;
    for (int spk : turns) {
      const double end = t0 + turn_length(rng);
      for (double onset = t0;; onset += cfg.segment_shift) {
        double dur = std::min(cfg.segment_length, end - onset);
        const bool last = onset + cfg.segment_shift + cfg.segment_length > end + 1e-9;
        if (last) dur = end - onset;
        set.segments.push_back({onset, dur});
        labels.push_back(spk);
        Vector x = centroids.row(spk).transpose();
        if (cfg.spread > 0.0) {
          for (int d = 0; d < cfg.dim; ++d) x[d] += noise(rng);
        }
        rows.push_back(std::move(x));
        if (last) break;
      }
      t0 = end;
    }
    set.embeddings.resize(static_cast<Eigen::Index>(rows.size()), cfg.dim);
    for (size_t i = 0; i < rows.size(); ++i) set.embeddings.row(i) = rows[i].transpose();
    set.labels = std::move(labels);
    out.push_back(std::move(set));
  }
  return out;
}

}  // namespace sharc
