#pragma once

#include <functional>
#include <vector>

#include "loggas/common.hpp"
#include "loggas/equilibrium.hpp"
#include "loggas/potential.hpp"
#include "loggas/test_functions.hpp"

namespace loggas {

// Finite signed combination of point masses sum_k w_k delta_{x_k}.
struct AtomicMeasure {
  std::vector<double> x;
  std::vector<double> w;

  static AtomicMeasure uniform(const std::vector<double>& points);
  double mass() const;
  double integrate(const std::function<double(double)>& phi) const;
  cplx stieltjes(cplx z) const;
  cplx stieltjes_deriv(cplx z) const;
};

struct ParticleHydroOptions {
  std::size_t n_det = 256;
  bool richardson = true;  // also run 2 n_det particles and report 2 X_{2n} - X_n
  std::size_t n_checkpoints = 10;
  double dt_factor = 0.25;  // dt <= dt_factor * n * (min gap)^2 / beta
  std::size_t kde_points = 401;
  int max_halvings = 40;
};

// Geometry of the Stieltjes-field grid: uniform in a and b, b from 0; the box
// |a| < a_box, b < b_box around the support is excluded.
struct PdeGrid {
  std::vector<double> a;
  std::vector<double> b;
  double a_box = 0.0;
  double b_box = 0.0;
  std::vector<char> active;  // a-major like StripField

  std::size_t na() const { return a.size(); }
  std::size_t nb() const { return b.size(); }
  double h() const { return a[1] - a[0]; }
  bool is_active(std::size_t i, std::size_t j) const { return active[i * b.size() + j] != 0; }
};

struct StieltjesPdeOptions {
  double support_radius = 1.5;  // bound on |x| over the support for all t in [0,T]
  double h = 0.025;
  double half_width = 0.0;  // 0 selects max(2.5, 1.8 * support_radius)
  double box_margin = 0.3;
  double box_height = 0.2;
  double cfl = 0.5;
  int multipole_terms = 24;
  std::size_t n_checkpoints = 10;
};

enum class HydroMethod { Particle, StieltjesPde };

struct HydroSolution {
  HydroMethod method = HydroMethod::Particle;
  double beta = 2.0;
  std::vector<double> times;

  // particle method
  std::vector<std::vector<double>> particles;  // n_det system per checkpoint
  std::vector<std::vector<double>> companion;  // 2 n_det system (empty without Richardson)
  std::vector<DensityGrid> densities;          // kernel density estimates

  // Stieltjes-field method
  PdeGrid grid;
  std::vector<StripField> stieltjes_fields;  // M_t on the grid (inactive cells hold 0)
  std::vector<std::vector<double>> moments;  // m_0.. per checkpoint

  // Richardson-combined measure when available, plain particles otherwise.
  AtomicMeasure measure(std::size_t k) const;
  double weak(std::size_t k, const std::function<double(double)>& phi) const;
  cplx stieltjes(std::size_t k, cplx z) const;
};

using QuantileFunction = std::function<std::vector<double>(std::size_t)>;

HydroSolution evolve_density_particle(const QuantileFunction& initial, const Potential& pot, double beta, double T,
                                      const ParticleHydroOptions& opt = {});
HydroSolution evolve_density_particle(const DensityGrid& rho0, const Potential& pot, double beta, double T,
                                      const ParticleHydroOptions& opt = {});
HydroSolution evolve_density_particle(const EquilibriumMeasure& eq, double T, const ParticleHydroOptions& opt = {});

// Deterministic RK4 integration of the noise-free particle system to time dt (with gap backoff).
std::vector<double> advance_particles(std::vector<double> x, const Potential& pot, double beta, double T,
                                      double dt_factor = 0.25, int max_halvings = 40);

// Gaussian KDE, Silverman bandwidth clipped below by two grid steps.
DensityGrid kde(const std::vector<double>& points, std::size_t n_grid);
double silverman_bandwidth(const std::vector<double>& points);

// Weak right-hand side -<rho, V' phi'> + (beta/4) <<(phi'(x) - phi'(y))/(x - y), rho rho>>.
double weak_rhs(const DensityGrid& rho, const Potential& pot, double beta, const TestFunction& phi,
                std::size_t n_quad = 2000);
double weak_rhs(const AtomicMeasure& mu, const Potential& pot, double beta, const TestFunction& phi);
// Max over the panel of |weak_rhs|; default panel uses R = 1.5 * edge + 1 of rho's support.
double stationarity_residual(const DensityGrid& rho, const Potential& pot, double beta,
                             const std::vector<TestFunction>& panel = {});

// Evolves M_t on the grid for polynomial V; M0 must accept any z off the support
// (real z outside the support included).
HydroSolution evolve_stieltjes_pde(const std::function<cplx(cplx)>& M0, const Potential& pot, double beta, double T,
                                   const StieltjesPdeOptions& opt = {});

// Bicubic interpolation of the k-th field; throws Range near the excluded box.
cplx pde_field_at(const HydroSolution& sol, std::size_t k, cplx z);

}  // namespace loggas
