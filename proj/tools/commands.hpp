#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ipop/pdip.hpp"
#include "ipop/ranker.hpp"
#include "ipop/synthgen.hpp"

namespace ipop::cli {

struct SynthOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  SynthConfig synth;
};

struct MineOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string posts;
  std::string features;  // optional; restricts mining to posts with vectors
  MinerConfig miner;
};

struct TrainOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string pairs;
  std::string features;
  TrainConfig train;
  std::vector<int> hidden = {64, 32};
  double val_fraction = 0.1;
};

struct EvalOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string checkpoint;
  std::string pairs;
  std::string features;
};

struct ScoreOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string checkpoint;
  std::string features;
  double rescale_max = 0.0;  // 0 leaves scores untouched
  int histogram_bins = 20;
};

struct AblateOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string pairs;
  std::string features;
  TrainConfig train;
  std::vector<int> hidden = {64, 32};
  double val_fraction = 0.1;
  double test_fraction = 0.2;
  std::vector<double> levels = {0.0, 0.1, 0.2, 0.3, 0.4};
};

struct StatsOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string posts;
};

struct AuditOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string posts;
  std::string pairs;
  std::string features;
  MinerConfig miner;
};

struct BaselineOptions {
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  std::string posts;
  std::string pairs;
  std::string features;
  std::string nonvisual;
  TrainConfig train;
  double val_fraction = 0.1;
  double test_fraction = 0.2;
};

// Each command writes its outputs plus `<command>.manifest.json` into out_dir
// and returns a process exit code. Failures throw.
int run_synth(const SynthOptions& o);
int run_mine(const MineOptions& o);
int run_train(const TrainOptions& o);
int run_eval(const EvalOptions& o);
int run_score(const ScoreOptions& o);
int run_ablate(const AblateOptions& o);
int run_stats(const StatsOptions& o);
int run_audit(const AuditOptions& o);
int run_baseline(const BaselineOptions& o);

/// Re-executes the command recorded in a manifest, optionally redirecting its
/// outputs.
int run_manifest(const std::filesystem::path& manifest, const std::optional<std::string>& out_dir);

/// FNV-1a 64 of the file's bytes, as 16 hex digits.
std::string file_digest(const std::filesystem::path& path);

/// Full command-line entry point; catches errors and reports them on stderr.
int main_entry(int argc, const char* const* argv);
int main_entry(const std::vector<std::string>& args);

}  // namespace ipop::cli
