#pragma once

#include <vector>

#include "loggas/common.hpp"
#include "loggas/measure_path.hpp"
#include "loggas/potential.hpp"
#include "loggas/stieltjes.hpp"
#include "loggas/test_functions.hpp"

namespace loggas {

// Physical time t runs forward; the dual objects are integrated backward from t = T,
// so along every characteristic b grows as t decreases.

struct CharSample {
  double t = 0.0;
  double a = 0.0;
  double b = 0.0;
  cplx c;        // coefficient carried along the path
  cplx c_tilde;  // real-part-only multiplier variant (full characteristics)
};

struct CharPath {
  cplx z_T;
  cplx c_T;
  int kappa = 0;
  bool killed = false;               // b fell below the floor
  double max_im_velocity = -1e300;   // sup of Im dZ/dt along the path (must stay <= 0 for V = 0)
  double min_re_ctilde_rate = 1e300; // inf of Re(d c~/dt)/c~ (contraction direction when >= 0)
  std::vector<CharSample> samples;   // ascending in t, last sample at t = T
};

struct CharOptions {
  std::size_t n_steps = 400;
  double b_floor = 1e-6;
};

// Closed family f_t = Re/Im of C_t/(x - Z_t) for V(x) = curvature x^2/2 (curvature 0 is V = 0):
// dZ/dt = -curvature Z - (beta/4) S(Z), dC/dt = -(curvature + (beta/4) S'(Z)) C.
CharPath characteristics_v0(cplx z_T, cplx c_T, const MeasurePath& path, double beta, double T,
                            const CharOptions& opt = {}, double curvature = 0.0);

// (a,b) characteristics of the order-kappa transport with the truncated Taylor velocity
// lambda = (beta/4) S + V'(a) - V'''(a) b^2/2 + i V''(a) b, and the point-mass weight c with
// dc/dt = nu c, nu = (1+kappa) Im(lambda)/b - V''(a) - i b V'''(a) - (beta/4) S'.
// For V = 0, (2/(1+kappa)!) b^{1+kappa} c equals the C of characteristics_v0.
CharPath characteristics_full(cplx z_T, cplx c_T, int kappa, const MeasurePath& path, const Potential& pot,
                              double beta, double T, const CharOptions& opt = {});

// Sup over sample pairs t <= t' of b_t^2 - (b_{t'}^2 + beta (t'-t)) e^{2 L (t'-t)}, L >= sup V''
// along the path (L = 0 for V = 0). Non-positive when the bound holds.
double char_bound_excess(const CharPath& p, double beta, double curvature_bound = 0.0);
// True when b is non-increasing in t on the samples.
bool char_b_monotone(const CharPath& p);

// Strip geometry and coefficients shared by the operators below.
struct StripContext {
  int kappa = 0;
  double beta = 2.0;
  double R = 3.0;  // cut-off radius of chi_R
  const MeasurePath* path = nullptr;
  const Potential* pot = nullptr;
};

// lambda(z) at time t and the multiplicative factor nu(z) of the divergence-form equation
// d h/d tau = -div(lambda h) - nu h, tau = T - t.
cplx transport_velocity(const StripContext& ctx, double t, cplx z);
cplx transport_nu(const StripContext& ctx, double t, cplx z);

// -div(lambda h) - nu h with upwind-biased differences (order 1 or 2) chosen by the sign of the
// local velocity. Zero inflow from outside the grid; the cell below b_min sees h(a, b_min).
StripField apply_transport(const StripField& h, double t, const StripContext& ctx, int order = 2);

struct OperatorImage {
  StripField image;
  double norm = 0.0;                 // empirical operator norm (max column mass)
  std::vector<double> column_a;      // source positions probed for the norm
  std::vector<double> column_mass;   // L1 mass of the image per probed column (max over b)
};

// Image K^{kappa'}(chi_R g3) of the cubic Taylor remainder term, g3 the real function
// (2/(1+kappa)!) int int b^{1+kappa} Im[h (x-a)^3 W_a(x-a)/(x-z)^2] chi_R(x). norm_columns > 0
// also probes that many source columns per b row for the L1 -> L1 norm.
OperatorImage apply_nonlocal_g3(const StripField& h, int kappa, int target_kappa, const Potential& pot, double R,
                                std::size_t norm_columns = 0);

// Off-support image K^{kappa'}(chi_R g) with g = (2/(1+kappa)!) int int b^{1+kappa} Im[h V'(x)/(x-z)^2] chi_R(x).
// h must vanish for |a| < 2R.
OperatorImage apply_ext(const StripField& h, int kappa, int target_kappa, const Potential& pot, double R,
                        std::size_t norm_columns = 0);

// Values of h on the strip edges: top row b = b_max and the columns a = a_min, a = a_max.
struct BoundaryTrace {
  std::vector<cplx> top;
  std::vector<cplx> left;
  std::vector<cplx> right;

  static BoundaryTrace of(const StripField& h);
};

// Outflow boundary terms reinjected through K^{kappa'}; geometry taken from `grid`. norm is
// the image L1 mass divided by the sup of the trace.
OperatorImage boundary_kernels(const BoundaryTrace& trace, const StripField& grid, int target_kappa, double t,
                               const StripContext& ctx);

enum class TransportScheme { Upwind, SemiLagrangian };

struct EvolveHOptions {
  TransportScheme scheme = TransportScheme::SemiLagrangian;
  std::size_t n_steps = 100;  // Lie steps (upwind substeps further for CFL)
  std::size_t n_out = 1;      // evenly spaced outputs after the terminal one
  bool nonlocal = true;
  bool boundary = true;
  double cfl = 0.9;
  bool cubic = true;  // semi-Lagrangian interpolation: cubic in (a, log b), else bilinear
  double R = 0.0;     // 0: 1.5 * support bound + 1
};

struct HEvolution {
  std::vector<double> times;         // descending from T to 0
  std::vector<StripField> h;
  std::vector<double> offset;        // additive constant of f_t = C h_t + offset
  std::vector<double> transport_l1;  // L1 norm ratio of each transport substep
  std::vector<double> transport_linf;
  std::size_t substeps = 0;
};

HEvolution evolve_h(const StripField& h_T, int kappa, const MeasurePath& path, const Potential& pot, double beta,
                    double T, const EvolveHOptions& opt = {});

// f_t(x) = C^kappa h_t(x) + offset_t.
double evaluate_dual(const HEvolution& ev, std::size_t k, int kappa, double x);

struct TestEvolutionOptions {
  double L = 0.0;   // half width of the x grid; 0: 3R
  double dx = 0.005;
  std::size_t n_steps = 200;
  std::size_t n_out = 1;
  double R = 0.0;   // 0: 1.5 * support bound + 1
};

// f on a uniform grid with 4th-order derivatives and cubic interpolation.
struct TestEvolution {
  std::vector<double> times;  // ascending, times.back() = T
  std::vector<double> x;
  std::vector<std::vector<double>> f;

  double value(std::size_t k, double y) const;
  double d1(std::size_t k, double y) const;
  double d2(std::size_t k, double y) const;
  // Batched versions; derivatives are differenced once per call.
  std::vector<double> values(std::size_t k, const std::vector<double>& ys) const;
  std::vector<double> d1(std::size_t k, const std::vector<double>& ys) const;
  std::vector<double> d2(std::size_t k, const std::vector<double>& ys) const;
};

// Backward evolution of d f/dt = V' f' - (beta/4) int (f'(x) - f'(y))/(x - y) S_t(dy) from f_T,
// S = X^N + X or 2X per the path mode. Strang splitting: the V' f' transport exactly along its
// flow with cubic interpolation, the nonlocal part by RK4.
TestEvolution evolve_test_function(const TestFunction& f_T, const MeasurePath& path, const Potential& pot,
                                   double beta, double T, const TestEvolutionOptions& opt = {});

// d f/d(T - t) = -V' f' + (beta/4) int (f'(x) - f'(y))/(x - y) S_t(dy) on the grid of f.
std::vector<double> dual_generator(const std::vector<double>& x, const std::vector<double>& f, double t,
                                   const MeasurePath& path, const Potential& pot, double beta);

}  // namespace loggas
