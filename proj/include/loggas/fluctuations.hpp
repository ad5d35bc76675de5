#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "loggas/generators.hpp"
#include "loggas/hydrodynamic.hpp"
#include "loggas/measure_path.hpp"
#include "loggas/particle_sde.hpp"
#include "loggas/test_functions.hpp"

namespace loggas {

// Limit law of <Y_T, f_T> given Y_0: Gaussian with these moments, shifted by <Y_0, f_0>.
struct GaussPrediction {
  double mean = 0.0;
  double variance = 0.0;
  double beta = 2.0;
  double T = 0.0;
  TestEvolution f_path;  // f_s on [0, T]

  // f_0 paired with an initial configuration: N (<X^N_0, f_0> - <X_0, f_0>).
  double initial_term(const std::vector<double>& lambdas0, const MeasurePath& limit) const;
};

// mean = (1/2)(1 - beta/2) int <X_s, f''_s> ds, variance = int <X_s, (f'_s)^2> ds, trapezoid over
// the evolution outputs. `limit` must be an asymptotic-mode path of X.
GaussPrediction gaussian_predictor(const TestFunction& f_T, const MeasurePath& limit, const Potential& pot,
                                   double beta, double T, TestEvolutionOptions opt = {});
GaussPrediction gaussian_predictor(const TestFunction& f_T, const HydroSolution& hydro, const Potential& pot,
                                   double beta, double T, TestEvolutionOptions opt = {});

struct FluctuationSample {
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // [checkpoint][phi] of N(<X^N_t, phi> - <X_t, phi>)
  std::vector<double> initial;              // positions at t = 0
  double sup_abs = 0.0;                     // sup over accepted sub-steps of max_i |l_i|
};

// M replicas of cfg with seeds replica_seed(master, k); cfg.observables is replaced by the panel.
std::vector<FluctuationSample> fluctuation_samples(const SimulationConfig& cfg, const std::vector<TestFunction>& panel,
                                                   const MeasurePath& limit, std::size_t M, std::uint64_t master_seed,
                                                   int jobs = 1);

// Column j of checkpoint k across replicas.
std::vector<double> sample_column(const std::vector<FluctuationSample>& s, std::size_t k, std::size_t j);

// CSV rows replica,time,phi_id,value with round-trip precision.
void write_samples_csv(std::ostream& os, const std::vector<FluctuationSample>& s, const std::vector<std::string>& ids);
// Full record (seeds, initial positions) for caching; read_samples returns empty on a missing
// or malformed file.
void save_samples(const std::string& path, const std::vector<FluctuationSample>& s);
std::vector<FluctuationSample> load_samples(const std::string& path);

struct AndersonDarling {
  double a2 = 0.0;       // raw statistic with estimated mean and variance
  double a2_star = 0.0;  // small-sample corrected
  double p_value = 0.0;
};
AndersonDarling anderson_darling(std::vector<double> x);

struct CfRow {
  double theta = 0.0;
  cplx empirical;
  cplx predicted;
  double se = 0.0;  // combined standard error of the empirical CF
  bool pass = false;
};

struct CfReport {
  AndersonDarling ad;
  bool normal = false;  // p >= 0.01
  std::vector<CfRow> rows;
  bool cf_match = false;
  bool power_warning = false;  // fewer than 500 samples
  bool pass() const { return normal && cf_match; }
};

// y0: per-replica initial terms (empty means Y_0 = 0). The predicted CF is
// mean_r exp(i theta y0_r) * exp(i theta mean - theta^2 variance / 2).
CfReport normality_and_cf_test(const std::vector<double>& samples, const GaussPrediction& pred,
                               const std::vector<double>& y0, const std::vector<double>& thetas,
                               double se_multiple = 3.0);
CfReport normality_and_cf_test(const std::vector<double>& samples, double mean, double variance,
                               const std::vector<double>& y0, const std::vector<double>& thetas,
                               double se_multiple = 3.0);

enum class Functional { Linear, Square };

struct ResidualStats {
  double mean = 0.0;
  double se = 0.0;
  std::vector<double> values;
  bool consistent(double k = 3.0) const { return std::fabs(mean) <= k * se; }
};

// Martingale residual per trajectory, time integrals by the trapezoid rule over the recorded
// checkpoints (states required, at least 50 intervals recommended).
//   Linear: N(<X^N_T,phi> - <X^N_0,phi> - int Gen^N ds)
//   Square: Y_T^2 - Y_0^2 - int [2 Y_s N(Gen^N - d/ds <X_s,phi>) + <X^N_s, phi'^2>] ds
// flip_integrand reverses the sign of the integral (negative control).
ResidualStats martingale_residual(const std::vector<TrajectoryRecord>& traj, const TestFunction& phi,
                                  const MeasurePath& limit, const Potential& pot, double beta, Functional F,
                                  bool flip_integrand = false);

struct LogLogFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
};
LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingRow {
  std::size_t n = 0;
  cplx z;
  double value = 0.0;  // E|N (M^N_t - M_t)(z)|^2
  double se = 0.0;
};

struct ScalingReport {
  std::vector<ScalingRow> rows;
  std::vector<double> n_exponent;  // per z
  LogLogFit b_fit;                 // at the largest N over the z list
};

// ensembles[e] simulated with n = ns[e]; checkpoint index k of every trajectory is used.
ScalingReport fundamental_scaling_probe(const std::vector<std::vector<TrajectoryRecord>>& ensembles,
                                        const std::vector<std::size_t>& ns, const std::vector<cplx>& zs,
                                        const MeasurePath& limit, std::size_t k);

}  // namespace loggas
