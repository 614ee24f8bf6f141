// Diarization error rate and pairwise clustering F1.

#ifndef SHARC_EVAL_H_
#define SHARC_EVAL_H_

#include <span>
#include <string>
#include <vector>

#include "sharc/core.h"
#include "sharc/data.h"

namespace sharc {

struct DerOptions {
  double collar = 0.0;        // seconds excised on each side of a boundary
  bool score_overlap = true;  // false drops regions with >= 2 reference speakers
};

// Durations in seconds over the scored region.
struct DerStats {
  double scored = 0.0;  // reference speaker time
  double missed = 0.0;
  double false_alarm = 0.0;
  double confusion = 0.0;

  double Der() const;  // percent
  DerStats &operator+=(const DerStats &o);
};

struct DerReport {
  std::vector<std::pair<std::string, DerStats>> recordings;
  DerStats total;  // time-weighted corpus figure
};

// Scores one recording; all records must share a recording id. Times are
// handled in integer milliseconds. Collars are excised around every segment
// boundary of both reference and hypothesis. Speakers are mapped one-to-one
// by maximum total overlap.
DerStats ScoreRecording(std::span<const RttmRecord> ref, std::span<const RttmRecord> hyp,
                        const DerOptions &options);

// Groups by recording id. A recording absent from the hypothesis counts as all
// missed; a hypothesis-only recording or an empty reference is an error.
DerReport ScoreDer(std::span<const RttmRecord> ref, std::span<const RttmRecord> hyp,
                   const DerOptions &options);

std::string FormatDerReport(const DerReport &report, const DerOptions &options);

// Maximum-weight one-to-one assignment of rows to columns; -1 for unassigned
// rows (only when rows > cols).
std::vector<int> MaxWeightAssignment(const Matrix &weights);

// F1 over unordered pairs, positives = same cluster. Defined as 0 when there
// are no true-positive pairs, except 1 when neither side has a positive pair.
double PairwiseF1(std::span<const int> truth, std::span<const int> pred);

}  // namespace sharc

#endif  // SHARC_EVAL_H_
