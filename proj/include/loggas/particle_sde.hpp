#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "loggas/common.hpp"
#include "loggas/potential.hpp"

namespace loggas {

using Rng = std::mt19937_64;

// Particle positions at one time. simulate() keeps them strictly increasing; step()
// only requires distinct positions and preserves labels.
struct ParticleState {
  std::vector<double> lambdas;
  double time = 0.0;
  double beta = 2.0;
  Potential pot = Potential::harmonic();

  std::size_t size() const { return lambdas.size(); }
};

// -V'(l_i) + (beta/2N) sum_{j != i} 1/(l_i - l_j). Throws Collision on coincident positions.
std::vector<double> drift(const ParticleState& s);

struct StepStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  int max_depth = 0;
  double min_dt = 0.0;
  double max_dt = 0.0;
  double sum_dt = 0.0;
  double sup_abs = 0.0;  // running sup of max_i |l_i| over accepted sub-steps

  void record(double dt, const std::vector<double>& l);
  double mean_dt() const { return accepted ? sum_dt / static_cast<double>(accepted) : 0.0; }
};

struct StepOptions {
  double gap_safety = 3.0;  // reject when a gap falls below min(gap_safety * sqrt(dt/N), half the old gap)
  int max_halvings = 40;
};

// Advances by dt with Brownian increments sqrt(dt) * gauss[i] (one per label). A rejected
// proposal is refined by Brownian-bridge halving, so the path law is unchanged; the extra
// midpoint normals come from rng. Throws Stiffness once a sub-step is max_halvings halvings below the
// gap scale N g_min^2 of the current state.
ParticleState step(const ParticleState& s, double dt, const std::vector<double>& gauss, Rng& rng,
                   StepStats* stats = nullptr, const StepOptions& opt = {});

// Hook invoked after each accepted sub-step: (state before, dt, Brownian increments, state after).
using StepObserver =
    std::function<void(const ParticleState&, double, const std::vector<double>&, const ParticleState&)>;

enum class InitKind { Quantiles, User, Mcmc };

struct InitSpec {
  InitKind kind = InitKind::Quantiles;
  DensityGrid rho0;                 // Quantiles: density whose midpoint quantiles are used
  std::vector<double> user_points;  // User
  std::size_t mcmc_sweeps = 2000;   // Mcmc
};

struct SimulationConfig {
  std::size_t n_particles = 64;
  double beta = 2.0;
  Potential pot = Potential::harmonic();
  double t_final = 1.0;
  std::size_t n_checkpoints = 10;
  InitSpec init;
  double gap_factor = 0.1;  // base dt = min(T/2000, gap_factor * min initial gap^2)
  double dt_max = 0.0;      // optional further cap (0 = none)
  StepOptions step;
  bool record_states = true;
  std::vector<std::function<double(double)>> observables;  // (1/N) sum phi(l_i) at checkpoints
};

struct TrajectoryRecord {
  std::vector<double> times;                        // 0, ..., T
  std::vector<std::vector<double>> states;          // sorted positions per checkpoint (if recorded)
  std::vector<std::vector<double>> observables;     // [checkpoint][observable]
  std::uint64_t seed = 0;
  StepStats stats;
  std::size_t ordering_violations = 0;              // accepted sub-steps that broke the order (must stay 0)
};

// Derived per-replica seed; replica k can be regenerated in isolation.
std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica);
Rng make_rng(std::uint64_t seed);

std::vector<double> initial_positions(const SimulationConfig& cfg, Rng& rng);

TrajectoryRecord simulate(const SimulationConfig& cfg, std::uint64_t seed, const StepObserver& observer = nullptr);

// Replicas 0..m-1 with seeds replica_seed(master, k), run on `jobs` workers.
std::vector<TrajectoryRecord> simulate_ensemble(const SimulationConfig& cfg, std::uint64_t master_seed,
                                                std::size_t m, int jobs);

double observable(const ParticleState& s, const std::function<double(double)>& phi);
double observable(const std::vector<double>& lambdas, const std::function<double(double)>& phi);

// Metropolis sampler of the Gibbs measure exp(-2N sum V) prod_{i<j} |l_i - l_j|^beta.
struct McmcStats {
  double acceptance = 0.0;
};
std::vector<double> sample_gibbs(std::size_t n, double beta, const Potential& pot, std::size_t sweeps, Rng& rng,
                                 const std::vector<double>& start = {}, McmcStats* stats = nullptr);

struct Proportion {
  double p = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  std::size_t hits = 0;
  std::size_t total = 0;
};
// Wilson score interval at normal quantile z.
Proportion wilson_interval(std::size_t hits, std::size_t total, double z = 1.96);

struct ExcursionRow {
  std::size_t n = 0;
  Proportion fraction;
};
// P[sup_t max_i |l_i| > R] per ensemble; all ensembles must share physical parameters.
std::vector<ExcursionRow> support_excursion_stats(const std::vector<std::vector<TrajectoryRecord>>& ensembles,
                                                  const std::vector<std::size_t>& ns, double R);

// Itô bookkeeping for <X^N, phi>: accumulates the generator integral and the martingale part
// along accepted sub-steps (left-point rule). Residual = increment - generator - martingale.
class ItoTracker {
 public:
  ItoTracker(std::function<double(double)> phi, std::function<double(double)> dphi,
             std::function<double(double)> d2phi);
  StepObserver observer();
  double generator_integral() const { return gen_; }
  double martingale() const { return mart_; }
  // (1/N) sum phi'(-V') + (beta/4N^2) sum_{i!=j} (phi'_i - phi'_j)/(l_i - l_j) + (1/2N^2) sum phi''
  double generator(const ParticleState& s) const;

 private:
  std::function<double(double)> phi_, dphi_, d2phi_;
  double gen_ = 0.0;
  double mart_ = 0.0;
};

}  // namespace loggas
