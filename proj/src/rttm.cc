#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sharc/data.h"

namespace sharc {

std::string SpeakerName(int label) { return "spk" + std::to_string(label); }

std::vector<RttmRecord> LabelsToRttm(std::span<const int> labels,
                                     std::span<const Segment> segments,
                                     const std::string &recording_id) {
  if (labels.size() != segments.size()) {
    throw Error(ErrorCode::kShapeMismatch, "labels and segments differ in length");
  }
  std::vector<size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return segments[a].onset < segments[b].onset;
  });

  std::vector<RttmRecord> out;
  double prev_cut = -1.0;
  for (size_t r = 0; r < order.size(); ++r) {
    const Segment &seg = segments[order[r]];
    double start = std::max(seg.onset, prev_cut);
    double end = seg.onset + seg.duration;
    if (r + 1 < order.size()) {
      const Segment &next = segments[order[r + 1]];
      if (next.onset < end) {
        const double cut = 0.5 * (next.onset + end);
        end = cut;
        prev_cut = cut;
      } else {
        prev_cut = -1.0;
      }
    }
    if (end <= start) continue;
    const std::string speaker = SpeakerName(labels[order[r]]);
    if (!out.empty() && out.back().speaker == speaker &&
        std::abs(out.back().onset + out.back().duration - start) < 1e-9) {
      out.back().duration = end - out.back().onset;
    } else {
      out.push_back({recording_id, start, end - start, speaker});
    }
  }
  return out;
}

std::string FormatRttm(std::span<const RttmRecord> records) {
  std::string text;
  char buf[64];
  for (const auto &r : records) {
    // Round both ends so abutting turns share one printed boundary.
    const long long begin = std::llround(r.onset * 1000.0);
    const long long end = std::llround((r.onset + r.duration) * 1000.0);
    text += "SPEAKER " + r.recording_id + " 1 ";
    std::snprintf(buf, sizeof(buf), "%lld.%03lld %lld.%03lld", begin / 1000, begin % 1000,
                  (end - begin) / 1000, (end - begin) % 1000);
    text += buf;
    text += " <NA> <NA> " + r.speaker + " <NA> <NA>\n";
  }
  return text;
}

void WriteRttm(std::span<const RttmRecord> records, const std::string &path) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorCode::kIo, "cannot open " + path + " for writing");
  os << FormatRttm(records);
  if (!os) throw Error(ErrorCode::kIo, "write failed for " + path);
}

void WriteRttm(std::span<const int> labels, std::span<const Segment> segments,
               const std::string &recording_id, const std::string &path) {
  WriteRttm(LabelsToRttm(labels, segments, recording_id), path);
}

std::vector<RttmRecord> ParseRttm(const std::string &text) {
  std::vector<RttmRecord> out;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::istringstream in(line);
    std::vector<std::string> tok;
    for (std::string t; in >> t;) tok.push_back(t);
    if (tok.empty() || tok[0][0] == '#' || tok[0] != "SPEAKER") continue;
    auto fail = [&](const std::string &why) {
      return Error(ErrorCode::kParse, "rttm line " + std::to_string(line_no) + ": " + why);
    };
    if (tok.size() < 8) throw fail("expected at least 8 fields");
    RttmRecord r;
    r.recording_id = tok[1];
    try {
      size_t used = 0;
      r.onset = std::stod(tok[3], &used);
      if (used != tok[3].size()) throw fail("bad onset");
      r.duration = std::stod(tok[4], &used);
      if (used != tok[4].size()) throw fail("bad duration");
    } catch (const std::logic_error &) {
      throw fail("bad number");
    }
    if (!std::isfinite(r.onset) || r.onset < 0) throw fail("onset must be >= 0");
    if (!std::isfinite(r.duration) || r.duration <= 0) throw fail("duration must be > 0");
    r.speaker = tok[7];
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RttmRecord> ReadRttm(const std::string &path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot open " + path);
  std::stringstream buf;
  buf << is.rdbuf();
  return ParseRttm(buf.str());
}

}  // namespace sharc
