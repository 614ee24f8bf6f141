#include "sharc/eval.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

namespace sharc {

namespace {

using Millis = int64_t;

Millis ToMillis(double seconds) { return std::llround(seconds * 1000.0); }

struct Turn {
  Millis begin;
  Millis end;
  int speaker;
};

std::vector<Turn> ToTurns(std::span<const RttmRecord> records,
                          std::map<std::string, int> &speakers) {
  std::vector<Turn> turns;
  for (const auto &r : records) {
    auto [it, _] = speakers.emplace(r.speaker, static_cast<int>(speakers.size()));
    Millis b = ToMillis(r.onset), e = ToMillis(r.onset + r.duration);
    if (e > b) turns.push_back({b, e, it->second});
  }
  return turns;
}

bool Covered(const std::vector<std::pair<Millis, Millis>> &zones, Millis a, Millis b) {
  auto it = std::upper_bound(zones.begin(), zones.end(), std::make_pair(a, std::numeric_limits<Millis>::max()));
  if (it == zones.begin()) return false;
  --it;
  return it->first <= a && b <= it->second;
}

}  // namespace

double DerStats::Der() const {
  if (scored <= 0.0) return 0.0;
  return 100.0 * (missed + false_alarm + confusion) / scored;
}

DerStats &DerStats::operator+=(const DerStats &o) {
  scored += o.scored;
  missed += o.missed;
  false_alarm += o.false_alarm;
  confusion += o.confusion;
  return *this;
}

std::vector<int> MaxWeightAssignment(const Matrix &weights) {
  const int rows = static_cast<int>(weights.rows());
  const int cols = static_cast<int>(weights.cols());
  const int n = std::max(rows, cols);
  std::vector<int> out(rows, -1);
  if (n == 0) return out;
  const double top = weights.size() > 0 ? weights.maxCoeff() : 0.0;
  // Hungarian method on the padded cost matrix top - w (1-based potentials).
  auto cost = [&](int i, int j) {
    return (i < rows && j < cols) ? top - weights(i, j) : top;
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  for (int j = 1; j <= n; ++j) {
    const int i = p[j] - 1;
    if (i < rows && j - 1 < cols) out[i] = j - 1;
  }
  return out;
}

DerStats ScoreRecording(std::span<const RttmRecord> ref, std::span<const RttmRecord> hyp,
                        const DerOptions &options) {
  if (options.collar < 0.0) throw Error(ErrorCode::kInvalidArgument, "collar must be >= 0");
  std::map<std::string, int> ref_names, hyp_names;
  const std::vector<Turn> ref_turns = ToTurns(ref, ref_names);
  const std::vector<Turn> hyp_turns = ToTurns(hyp, hyp_names);
  if (ref_turns.empty()) throw Error(ErrorCode::kInvalidArgument, "empty reference");

  const Millis collar = ToMillis(options.collar);
  std::set<Millis> cuts;
  std::vector<std::pair<Millis, Millis>> zones;
  for (const auto *turns : {&ref_turns, &hyp_turns}) {
    for (const Turn &t : *turns) {
      cuts.insert(t.begin);
      cuts.insert(t.end);
      if (collar > 0) {
        for (Millis b : {t.begin, t.end}) {
          zones.emplace_back(b - collar, b + collar);
          cuts.insert(b - collar);
          cuts.insert(b + collar);
        }
      }
    }
  }
  std::sort(zones.begin(), zones.end());
  std::vector<std::pair<Millis, Millis>> merged;
  for (const auto &z : zones) {
    if (!merged.empty() && z.first <= merged.back().second) {
      merged.back().second = std::max(merged.back().second, z.second);
    } else {
      merged.push_back(z);
    }
  }

  struct Piece {
    Millis length;
    std::vector<int> ref, hyp;
  };
  std::vector<Piece> pieces;
  const std::vector<Millis> points(cuts.begin(), cuts.end());
  for (size_t k = 0; k + 1 < points.size(); ++k) {
    const Millis a = points[k], b = points[k + 1];
    if (Covered(merged, a, b)) continue;
    Piece piece{b - a, {}, {}};
    for (const Turn &t : ref_turns) {
      if (t.begin <= a && b <= t.end) piece.ref.push_back(t.speaker);
    }
    for (const Turn &t : hyp_turns) {
      if (t.begin <= a && b <= t.end) piece.hyp.push_back(t.speaker);
    }
    for (auto *v : {&piece.ref, &piece.hyp}) {
      std::sort(v->begin(), v->end());
      v->erase(std::unique(v->begin(), v->end()), v->end());
    }
    if (!options.score_overlap && piece.ref.size() >= 2) continue;
    if (piece.ref.empty() && piece.hyp.empty()) continue;
    pieces.push_back(std::move(piece));
  }

  Matrix overlap = Matrix::Zero(static_cast<Eigen::Index>(ref_names.size()),
                                static_cast<Eigen::Index>(hyp_names.size()));
  for (const Piece &p : pieces) {
    for (int r : p.ref) {
      for (int h : p.hyp) overlap(r, h) += static_cast<double>(p.length);
    }
  }
  const std::vector<int> mapping = MaxWeightAssignment(overlap);

  Millis scored = 0, missed = 0, false_alarm = 0, confusion = 0;
  for (const Piece &p : pieces) {
    const Millis nr = static_cast<Millis>(p.ref.size());
    const Millis nh = static_cast<Millis>(p.hyp.size());
    Millis correct = 0;
    for (int r : p.ref) {
      if (mapping[r] >= 0 && std::binary_search(p.hyp.begin(), p.hyp.end(), mapping[r])) ++correct;
    }
    scored += nr * p.length;
    missed += std::max<Millis>(0, nr - nh) * p.length;
    false_alarm += std::max<Millis>(0, nh - nr) * p.length;
    confusion += (std::min(nr, nh) - correct) * p.length;
  }
  return DerStats{scored / 1000.0, missed / 1000.0, false_alarm / 1000.0, confusion / 1000.0};
}

DerReport ScoreDer(std::span<const RttmRecord> ref, std::span<const RttmRecord> hyp,
                   const DerOptions &options) {
  if (ref.empty()) throw Error(ErrorCode::kInvalidArgument, "empty reference");
  std::map<std::string, std::vector<RttmRecord>> by_ref, by_hyp;
  for (const auto &r : ref) by_ref[r.recording_id].push_back(r);
  for (const auto &r : hyp) by_hyp[r.recording_id].push_back(r);
  for (const auto &[id, _] : by_hyp) {
    if (!by_ref.count(id)) {
      throw Error(ErrorCode::kInvalidArgument, "hypothesis recording '" + id +
                                                   "' has no reference");
    }
  }
  DerReport report;
  for (const auto &[id, records] : by_ref) {
    auto it = by_hyp.find(id);
    std::span<const RttmRecord> h;
    if (it != by_hyp.end()) h = it->second;
    DerStats stats = ScoreRecording(records, h, options);
    report.total += stats;
    report.recordings.emplace_back(id, stats);
  }
  return report;
}

std::string FormatDerReport(const DerReport &report, const DerOptions &options) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "# collar=%.3f overlap=%s\n", options.collar,
                options.score_overlap ? "scored" : "ignored");
  out += buf;
  out += "# recording scored_s missed_s false_alarm_s confusion_s der_pct\n";
  auto line = [&](const std::string &id, const DerStats &s) {
    std::snprintf(buf, sizeof(buf), "%s %.3f %.3f %.3f %.3f %.2f\n", id.c_str(), s.scored,
                  s.missed, s.false_alarm, s.confusion, s.Der());
    out += buf;
  };
  for (const auto &[id, s] : report.recordings) line(id, s);
  line("TOTAL", report.total);
  return out;
}

double PairwiseF1(std::span<const int> truth, std::span<const int> pred) {
  if (truth.size() != pred.size()) {
    throw Error(ErrorCode::kShapeMismatch, "partitions differ in length");
  }
  auto pairs = [](int64_t c) { return c * (c - 1) / 2; };
  std::unordered_map<int, int64_t> t_count, p_count;
  std::map<std::pair<int, int>, int64_t> joint;
  for (size_t i = 0; i < truth.size(); ++i) {
    ++t_count[truth[i]];
    ++p_count[pred[i]];
    ++joint[{truth[i], pred[i]}];
  }
  int64_t true_pairs = 0, pred_pairs = 0, both = 0;
  for (const auto &[_, c] : t_count) true_pairs += pairs(c);
  for (const auto &[_, c] : p_count) pred_pairs += pairs(c);
  for (const auto &[_, c] : joint) both += pairs(c);
  if (true_pairs == 0 && pred_pairs == 0) return 1.0;
  if (both == 0) return 0.0;
  const double precision = static_cast<double>(both) / pred_pairs;
  const double recall = static_cast<double>(both) / true_pairs;
  return 2.0 * precision * recall / (precision + recall);
}

}  // namespace sharc
