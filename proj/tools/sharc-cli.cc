// sharc: command-line driver.
//
//   sharc synth     --out DIR [--recordings N --speakers-min A --speakers-max B ...]
//   sharc train     INPUT... --out MODEL [--config FILE --lr --epochs --k ...]
//   sharc infer     INPUT... --model MODEL --out HYP.rttm [--k --p-tau --max-levels]
//   sharc eval      --ref REF.rttm --hyp HYP.rttm [--collar 0.25 --ignore-overlap]
//   sharc gradcheck [--instances 10 --coords 100 --step 1e-5 --seed S]
//
// INPUT is an embedding container (.shrc) or a directory of them.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sharc/cluster.h"
#include "sharc/data.h"
#include "sharc/eval.h"
#include "sharc/gnn.h"
#include "sharc/parallel.h"
#include "sharc/train.h"

namespace fs = std::filesystem;
using namespace sharc;

namespace {

std::vector<std::string> ExpandInputs(const std::vector<std::string> &inputs) {
  std::vector<std::string> files;
  for (const auto &in : inputs) {
    if (fs::is_directory(in)) {
      std::vector<std::string> found;
      for (const auto &entry : fs::directory_iterator(in)) {
        if (entry.path().extension() == ".shrc") found.push_back(entry.path().string());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else if (fs::exists(in)) {
      files.push_back(in);
    } else {
      throw Error(ErrorCode::kIo, "no such file or directory: " + in);
    }
  }
  if (files.empty()) throw Error(ErrorCode::kIo, "no .shrc inputs found");
  return files;
}

// Settings shared by train and infer. A JSON config supplies defaults; any
// flag given on the command line wins.
struct Settings {
  double lr = 0.01;
  int epochs = 500;
  int batch_size = 1;
  int k = 60;
  double p_tau = 0.0;
  int max_levels = 15;
  int latent = 64;
  int hidden1 = 32;
  int hidden2 = 32;
  uint64_t seed = 0;
  bool augment_rotation = false;
};

void ApplyConfigFile(const std::string &path, Settings &s, const CLI::App &cmd) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::kIo, "cannot open config " + path);
  nlohmann::json j;
  try {
    is >> j;
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::kParse, path + ": expected a JSON object");
  static const std::vector<std::string> known = {"lr", "epochs", "batch_size", "k", "p_tau",
                                                 "M", "dims", "seed", "augment_rotation"};
  for (const auto &[key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw Error(ErrorCode::kParse, path + ": unknown key '" + key + "'");
    }
  }
  auto given = [&cmd](const std::string &flag) {
    try {
      return cmd.get_option(flag)->count() > 0;
    } catch (const CLI::OptionNotFound &) {
      return false;
    }
  };
  try {
    if (j.contains("lr") && !given("--lr")) s.lr = j["lr"].get<double>();
    if (j.contains("epochs") && !given("--epochs")) s.epochs = j["epochs"].get<int>();
    if (j.contains("batch_size") && !given("--batch-size")) s.batch_size = j["batch_size"].get<int>();
    if (j.contains("k") && !given("--k")) s.k = j["k"].get<int>();
    if (j.contains("p_tau") && !given("--p-tau")) s.p_tau = j["p_tau"].get<double>();
    if (j.contains("M") && !given("--max-levels")) s.max_levels = j["M"].get<int>();
    if (j.contains("seed") && !given("--seed")) s.seed = j["seed"].get<uint64_t>();
    if (j.contains("augment_rotation") && !given("--augment-rotation")) {
      s.augment_rotation = j["augment_rotation"].get<bool>();
    }
    if (j.contains("dims")) {
      const auto &d = j["dims"];
      if (!d.is_array() || d.size() != 3) {
        throw Error(ErrorCode::kParse, path + ": dims must be [latent, hidden1, hidden2]");
      }
      if (!given("--latent")) s.latent = d[0].get<int>();
      if (!given("--hidden1")) s.hidden1 = d[1].get<int>();
      if (!given("--hidden2")) s.hidden2 = d[2].get<int>();
    }
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kParse, path + ": " + e.what());
  }
}

int RunSynth(const SynthConfig &cfg, const std::string &out_dir) {
  fs::create_directories(out_dir);
  std::vector<EmbeddingSet> sets = SynthGenerate(cfg);
  std::vector<RttmRecord> ref;
  for (const auto &set : sets) {
    WriteEmbeddings(set, (fs::path(out_dir) / (set.recording_id + ".shrc")).string());
    auto records = LabelsToRttm(*set.labels, set.segments, set.recording_id);
    ref.insert(ref.end(), records.begin(), records.end());
  }
  WriteRttm(ref, (fs::path(out_dir) / "ref.rttm").string());
  std::printf("wrote %zu recordings to %s\n", sets.size(), out_dir.c_str());
  return 0;
}

int RunTrain(const std::vector<std::string> &inputs, const Settings &s,
             const std::string &model_path, const std::string &log_path) {
  std::vector<EmbeddingSet> sets;
  for (const auto &f : ExpandInputs(inputs)) sets.push_back(ReadEmbeddings(f));
  TrainConfig cfg;
  cfg.learning_rate = s.lr;
  cfg.epochs = s.epochs;
  cfg.batch_size = s.batch_size;
  cfg.k = s.k;
  cfg.seed = s.seed;
  cfg.dims = ScorerDims{0, s.latent, s.hidden1, s.hidden2};
  cfg.augment_rotation = s.augment_rotation;

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw Error(ErrorCode::kIo, "cannot open " + log_path);
  }
  TrainResult result = Train(sets, cfg, [&](const EpochStats &e) {
    nlohmann::json rec = {{"epoch", e.epoch}, {"L", e.loss}, {"L_conn", e.conn}, {"L_den", e.den}};
    if (log.is_open()) log << rec.dump() << '\n' << std::flush;
    std::fprintf(stderr, "epoch %d L=%.6f L_conn=%.6f L_den=%.6f\n", e.epoch, e.loss, e.conn,
                 e.den);
  });
  SaveParams(result.params, model_path);
  std::printf("saved %s (%zu recordings, %d epochs, final L=%.6f)\n", model_path.c_str(),
              sets.size(), s.epochs, result.history.back().loss);
  return 0;
}

int RunInfer(const std::vector<std::string> &inputs, const Settings &s,
             const std::string &model_path, const std::string &out_path, bool use_sim) {
  const ScorerParams params = LoadParams(model_path);
  InferOptions opt{s.k, s.p_tau, s.max_levels};
  std::vector<RttmRecord> hyp;
  for (const auto &file : ExpandInputs(inputs)) {
    EmbeddingSet set = ReadEmbeddings(file);
    if (set.dim() != params.dims.input) {
      throw Error(ErrorCode::kIncompatibleCheckpoint,
                  file + ": embedding dim " + std::to_string(set.dim()) +
                      " but model expects " + std::to_string(params.dims.input));
    }
    if (set.segments.empty()) {
      throw Error(ErrorCode::kInvalidArgument, file + ": no segment sidecar, cannot write RTTM");
    }
    Hierarchy h;
    if (use_sim) {
      SimilarityMatrix sim = ReadSimilarity(SiblingPath(file, ".sim"));
      h = SharcInfer(set, GnnScorer(params), opt, &sim);
    } else {
      h = SharcInfer(set, params, opt);
    }
    const int clusters = h.final_labels.empty()
                             ? 0
                             : *std::max_element(h.final_labels.begin(), h.final_labels.end()) + 1;
    std::fprintf(stderr, "%s: N=%d clusters=%d depth=%d%s\n", set.recording_id.c_str(),
                 set.size(), clusters, h.MergeDepth(), h.hit_level_cap ? " (level cap)" : "");
    auto records = LabelsToRttm(h.final_labels, set.segments, set.recording_id);
    hyp.insert(hyp.end(), records.begin(), records.end());
  }
  WriteRttm(hyp, out_path);
  return 0;
}

int RunEval(const std::string &ref_path, const std::string &hyp_path, double collar,
            bool ignore_overlap, const std::string &out_path) {
  DerOptions opt{collar, !ignore_overlap};
  const DerReport report = ScoreDer(ReadRttm(ref_path), ReadRttm(hyp_path), opt);
  const std::string text = FormatDerReport(report, opt);
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream os(out_path);
    if (!os) throw Error(ErrorCode::kIo, "cannot open " + out_path);
    os << text;
  }
  return 0;
}

int RunGradcheck(int instances, int coords, double step, double tolerance, uint64_t seed) {
  double worst = 0.0;
  int checked = 0, skipped = 0;
  for (int i = 0; i < instances; ++i) {
    const GradCheckInstance inst = RandomGradCheckInstance(seed + static_cast<uint64_t>(i));
    const GradCheckResult r = GradCheck(inst.params, inst.graph, coords, step, seed * 7919 + i);
    worst = std::max(worst, r.max_rel_error);
    checked += r.checked;
    skipped += r.skipped;
  }
  std::printf("max relative error %.3e over %d coordinates (%d skipped at kinks)\n", worst,
              checked, skipped);
  return worst < tolerance ? 0 : 1;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Supervised hierarchical graph clustering of speaker embeddings"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (0 = all cores)");

  Settings s;
  std::vector<std::string> inputs;
  std::string config_path, model_path, out_path, log_path;

  auto add_model_flags = [&](CLI::App *cmd) {
    cmd->add_option("--config", config_path, "JSON config (lr, epochs, k, p_tau, M, dims, seed)");
    cmd->add_option("--k", s.k, "Nearest neighbours per node")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", s.seed, "Random seed");
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  };

  SynthConfig synth;
  std::string synth_out;
  CLI::App *synth_cmd = app.add_subcommand("synth", "Generate labeled synthetic recordings");
  synth_cmd->add_option("--out", synth_out, "Output directory")->required();
  synth_cmd->add_option("--recordings", synth.n_recordings)->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--speakers-min", synth.min_speakers);
  synth_cmd->add_option("--speakers-max", synth.max_speakers);
  synth_cmd->add_option("--dim", synth.dim);
  synth_cmd->add_option("--spread", synth.spread, "Expected norm of the noise vector");
  synth_cmd->add_option("--turn-min", synth.min_turn, "Seconds");
  synth_cmd->add_option("--turn-max", synth.max_turn, "Seconds");
  synth_cmd->add_option("--turns-per-speaker", synth.turns_per_speaker);
  synth_cmd->add_option("--min-angle", synth.min_angle_deg, "Degrees between centroids");
  synth_cmd->add_option("--segment-length", synth.segment_length);
  synth_cmd->add_option("--segment-shift", synth.segment_shift);
  synth_cmd->add_option("--prefix", synth.id_prefix, "Recording id prefix");
  synth_cmd->add_option("--seed", synth.seed);
  synth_cmd->add_option("--threads", threads);

  CLI::App *train_cmd = app.add_subcommand("train", "Train the edge scorer");
  train_cmd->add_option("inputs", inputs, "Labeled .shrc files or directories")->required();
  train_cmd->add_option("--out", model_path, "Checkpoint to write")->required();
  train_cmd->add_option("--log", log_path, "Per-epoch JSON lines log");
  train_cmd->add_option("--lr", s.lr)->check(CLI::NonNegativeNumber);
  train_cmd->add_option("--epochs", s.epochs)->check(CLI::PositiveNumber);
  train_cmd->add_option("--batch-size", s.batch_size)->check(CLI::PositiveNumber);
  train_cmd->add_option("--latent", s.latent);
  train_cmd->add_option("--hidden1", s.hidden1);
  train_cmd->add_option("--hidden2", s.hidden2);
  train_cmd->add_flag("--augment-rotation", s.augment_rotation,
                      "Randomly rotate each recording's embedding space every step");
  add_model_flags(train_cmd);

  bool use_sim = false;
  CLI::App *infer_cmd = app.add_subcommand("infer", "Cluster recordings and write RTTM");
  infer_cmd->add_option("inputs", inputs, ".shrc files or directories")->required();
  infer_cmd->add_option("--model", model_path, "Checkpoint")->required();
  infer_cmd->add_option("--out", out_path, "Hypothesis RTTM")->required();
  infer_cmd->add_option("--p-tau", s.p_tau, "Linkage probability threshold");
  infer_cmd->add_option("--max-levels", s.max_levels, "Maximum number of levels M")
      ->check(CLI::PositiveNumber);
  infer_cmd->add_flag("--precomputed-sim", use_sim,
                      "Read level-0 similarities from <stem>.sim next to each input");
  add_model_flags(infer_cmd);

  std::string ref_path, hyp_path;
  double collar = 0.0;
  bool ignore_overlap = false;
  CLI::App *eval_cmd = app.add_subcommand("eval", "Diarization error rate");
  eval_cmd->add_option("--ref", ref_path)->required();
  eval_cmd->add_option("--hyp", hyp_path)->required();
  eval_cmd->add_option("--collar", collar, "Seconds excised around boundaries")
      ->check(CLI::NonNegativeNumber);
  eval_cmd->add_flag("--ignore-overlap", ignore_overlap,
                     "Drop regions with two or more reference speakers");
  eval_cmd->add_option("--out", out_path, "Report file (default stdout)");
  eval_cmd->add_option("--threads", threads);

  int gc_instances = 10, gc_coords = 100;
  double gc_step = 1e-5, gc_tol = 1e-4;
  uint64_t gc_seed = 0;
  CLI::App *gc_cmd = app.add_subcommand("gradcheck", "Check analytic gradients");
  gc_cmd->add_option("--instances", gc_instances)->check(CLI::PositiveNumber);
  gc_cmd->add_option("--coords", gc_coords, "Coordinates per instance")->check(CLI::PositiveNumber);
  gc_cmd->add_option("--step", gc_step);
  gc_cmd->add_option("--tolerance", gc_tol);
  gc_cmd->add_option("--seed", gc_seed);
  gc_cmd->add_option("--threads", threads);

  CLI11_PARSE(app, argc, argv);

  try {
    SetNumThreads(threads);
    if (*synth_cmd) return RunSynth(synth, synth_out);
    if (*gc_cmd) return RunGradcheck(gc_instances, gc_coords, gc_step, gc_tol, gc_seed);
    if (*eval_cmd) return RunEval(ref_path, hyp_path, collar, ignore_overlap, out_path);
    CLI::App *cmd = *train_cmd ? train_cmd : infer_cmd;
    if (!config_path.empty()) ApplyConfigFile(config_path, s, *cmd);
    if (*train_cmd) return RunTrain(inputs, s, model_path, log_path);
    return RunInfer(inputs, s, model_path, out_path, use_sim);
  } catch (const Error &e) {
    std::fprintf(stderr, "error [%s]: %s\n", ErrorCodeName(e.code()), e.what());
    return 2;
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
