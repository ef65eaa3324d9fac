#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hnsim/evolve.hpp"
#include "hnsim/fitting.hpp"
#include "hnsim/model.hpp"

namespace hnsim {

struct TimeGrid {
  std::string kind = "log";  ///< log | linear | list
  double t_min = 0.1;
  double t_max = 1000.0;
  int n = 41;
  bool include_zero = true;
  std::vector<double> values;  ///< kind == list
  std::vector<double> build() const;
};

struct RunConfig {
  double dt = 0.05;
  int M = 15;
  TimeGrid times;
  std::string initial_state = "density_wave";  ///< density_wave | mixed_filling
};

struct EnsembleConfig {
  int n_samples = 1;
  std::uint64_t base_seed = 1;
  std::string theta_mode = "sampled";  ///< sampled | explicit
  std::vector<double> thetas;
};

struct ObservableConfig {
  bool nj = true;
  bool nk = true;
  bool corr = true;
  std::vector<int> ells;
};

struct SweepConfig {
  std::vector<double> W;
  std::vector<int> L;
  double threshold = 1e-10;
};

struct ScanConfig {
  std::string method = "krylov";  ///< krylov | freefermion (V = 0 only)
  std::vector<int> ells;          ///< empty: 1 .. L-1
  bool keep_edges = false;
};

struct SingleParticleConfig {
  int j0 = -1;                    ///< -1: 3L/4
  std::vector<double> W;          ///< empty: model W
  double fit_t_min = 10.0;        ///< velocity fitted on t >= fit_t_min
};

struct QppConfig {
  std::vector<int> ells;
  bool time_dependent_weights = true;
  bool factor2 = true;
};

struct FitConfig {
  std::string kind = "ceff";      ///< ceff | relaxation
  std::string input;              ///< CSV produced by another subcommand
  int m = 0;                      ///< momentum label for relaxation fits
  bool keep_edges = false;
};

/// Everything a run needs; reproducible from this plus the seeds it names.
struct ExperimentConfig {
  ModelParams model;
  RunConfig run;
  EnsembleConfig ensemble;
  ObservableConfig observables;
  SweepConfig sweep;
  ScanConfig scan;
  SingleParticleConfig single_particle;
  QppConfig qpp;
  FitConfig fit;
  std::string output_dir = "out";
  int threads = 0;  ///< 0: OpenMP default
};

/// Strict parse: unknown keys and ill-typed values throw ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

/// Per-sample seed base_seed + index (independent of scheduling).
std::uint64_t sample_seed(const EnsembleConfig& e, int index);
/// theta of sample `index`: explicit list entry, or uniform in [0, 2 pi)
/// drawn from sample_seed.
double sample_theta(const EnsembleConfig& e, int index);

/// One CSV row in long format.
struct LongRow {
  int sample;
  double t;
  std::string key;
  int index;
  double value;
};

struct AveragedRow {
  double t;
  std::string key;
  int index;
  double mean;
  double stderr_;
  int n;
};

/// Mean and standard error per (key, t, index) cell, ordered by key, t, index.
std::vector<AveragedRow> average_rows(const std::vector<LongRow>& rows);

void write_long_csv(const std::string& path, const std::vector<LongRow>& rows);
void write_averaged_csv(const std::string& path, const std::vector<AveragedRow>& rows);
std::vector<LongRow> read_long_csv(const std::string& path);
std::vector<AveragedRow> read_averaged_csv(const std::string& path);

/// Averages long-format files (every (file, sample) pair is one member).
/// Throws ConfigError on a header mismatch.
std::vector<AveragedRow> average_files(const std::vector<std::string>& paths);

/// Runs one subcommand (evolve | spectrum | scan-entanglement |
/// single-particle | qpp | fit), writing its files and manifest.json into
/// cfg.output_dir. Returns the list of files written.
std::vector<std::string> run_experiment(const std::string& command, const ExperimentConfig& cfg);

/// Ensemble of trajectories for `evolve`; samples run concurrently.
std::vector<TrajectoryRecord> run_evolve_samples(const ExperimentConfig& cfg);

}  // namespace hnsim
