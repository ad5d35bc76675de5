#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "loggas/common.hpp"
#include "loggas/potential.hpp"

namespace loggas {

struct PotentialConfig {
  std::string kind = "harmonic";  // harmonic | landau_ginzburg | polynomial
  double scale = 1.0;
  double lambda = 1.0;
  std::vector<double> coeffs;  // ascending, polynomial only
};

struct InitConfig {
  std::string kind = "equilibrium";  // equilibrium | semicircle | user | mcmc
  double radius = 0.0;               // semicircle
  std::vector<double> points;        // user
  std::size_t sweeps = 2000;         // mcmc
};

enum class Pipeline { Equilibrium, Hydro, Ensemble, Fluctuations, Operators, All };

struct ExperimentConfig {
  PotentialConfig potential;
  double beta = 2.0;
  std::vector<std::size_t> n_list{32};
  std::size_t replicas = 10;
  double T = 1.0;
  std::size_t checkpoints = 10;
  InitConfig init;
  std::vector<std::string> phi{"x^2", "Im f(0+0.5i)"};
  std::vector<cplx> z_probes{{0.0, 0.3}, {0.5, 0.4}, {-0.8, 0.3}, {1.0, 0.5}, {2.2, 0.5}};
  std::vector<double> thetas{0.25, 0.5, 1.0};
  double b_max = 0.5;
  double gap_factor = 0.1;
  std::size_t hydro_particles = 256;
  std::uint64_t seed = 1;
  std::string output_dir = "loggas_out";
  Pipeline pipeline = Pipeline::All;

  Potential make_potential() const;
};

struct ConfigIssue {
  std::string path;  // JSON pointer of the offending field
  std::string message;
  std::string hint;
};

// Parses JSON (comments allowed). Issues are appended; the returned config is meaningful
// only when no issue was reported.
ExperimentConfig parse_config(const std::string& text, std::vector<ConfigIssue>& issues);
ExperimentConfig load_config(const std::string& path, std::vector<ConfigIssue>& issues);
nlohmann::ordered_json config_to_json(const ExperimentConfig& cfg);
std::string pipeline_name(Pipeline p);
// Commented template with every field at its default.
std::string config_template();

// Lower-case hex SHA-1 of "blob <size>\0<content>", as git names file contents.
std::string content_hash(const std::string& content);
// Hash of the config without output_dir, as recorded in manifest.json.
std::string config_hash(const ExperimentConfig& cfg);

struct RunOptions {
  int jobs = 1;
  std::ostream* log = nullptr;
};

enum ExitCode : int { kExitOk = 0, kExitValidation = 2, kExitSolver = 3, kExitGate = 4 };

struct RunResult {
  int exit_code = kExitOk;
  std::string message;
  std::vector<std::string> files;  // written, relative to the output directory
};

// Runs the selected pipelines into cfg.output_dir. Writes manifest.json and summary.json; on a
// solver error writes FAILED with the message instead of the summary.
RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt = {});

}  // namespace loggas
