#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "loggas/common.hpp"

namespace loggas {

// Order kappa decomposition on the strip 0 < Im z < b_max. rho switches to the
// exponentially weighted family h(a,b) = e^{-b/rho} H(a).
struct DecompositionSpec {
  int kappa = 0;
  double b_max = 0.5;
  std::optional<double> rho;
};

inline constexpr int kMaxKappa = 5;
void validate(const DecompositionSpec& spec);

// Normalized empirical transform (1/N) sum 1/(x_i - z).
cplx stieltjes_points(const std::vector<double>& points, cplx z);
cplx stieltjes_points_sum(const std::vector<double>& points, cplx z);
cplx stieltjes_points_deriv(const std::vector<double>& points, cplx z);

// Product integration of the piecewise linear density against 1/(x-z).
cplx stieltjes_density(const DensityGrid& rho, cplx z);
cplx stieltjes_density_deriv(const DensityGrid& rho, cplx z);

// (1/pi) p.v. int f(y)/(x-y) dy of the piecewise linear interpolant, on the grid of f.
DensityGrid hilbert_transform(const DensityGrid& f);

// p.v. int_lo^hi f(y)/(x-y) dy by symmetric pairs around x; no 1/pi factor.
double principal_value(const std::function<double(double)>& f, double x, double lo, double hi, int n_nodes = 400);

struct PlemeljResult {
  double density = 0.0;  // lim Im M(x+ib)/pi
  double pv = 0.0;       // lim Re M(x+ib)
  bool extrapolable = true;
};

// Polynomial extrapolation of samples M(x+ib_k) to b = 0; b strictly decreasing, at least 3 values.
// Flags an atom when b*M does not extrapolate to 0.
PlemeljResult plemelj_extract(const std::vector<double>& b, const std::vector<cplx>& M);

// int_0^bmax b^n e^{-b sigma} db
double b_power_integral(int n, double b_max, double sigma);

// Fourier multiplier of the decomposition kernel at angular frequency s.
double kernel_multiplier(const DecompositionSpec& spec, double s);

// Applies the kernel on the real line to samples with spacing dx. Periodic images of the
// slowly decaying tail are subtracted, so the result approximates the whole-line kernel.
std::vector<double> kernel_apply_line(const DecompositionSpec& spec, const std::vector<double>& f, double dx,
                                      std::size_t pad_factor = 4);

// h(a,b) = K(f)(a), constant in b, on the grid of f. edge_warning is set when f does not decay at the edges.
StripField kernel_apply(const DecompositionSpec& spec, const DensityGrid& f, const std::vector<double>& b_grid,
                        bool* edge_warning = nullptr);

// Quadrature weights w_j with sum_j w_j G(b_j) ~ int_0^{b_max} b^p G(b) db, for G smooth down to b = 0.
std::vector<double> b_quadrature_weights(const std::vector<double>& b, double p);

// C^kappa h (x) = 2 int da int_0^bmax db b^{1+kappa}/(1+kappa)! Im[h(a,b)/(x-a-ib)]
double reconstruct(const DecompositionSpec& spec, const StripField& h, double x);
std::vector<double> reconstruct(const DecompositionSpec& spec, const StripField& h, const std::vector<double>& xs,
                                int jobs = 1);

// Exponentially weighted decomposition of Im 1/(x - z_T), rho = b_T / c0 by default.
inline constexpr double kDefaultRhoConstant = 4.0;
StripField rho_family(cplx z_T, const DecompositionSpec& spec, const std::vector<double>& a_grid,
                      const std::vector<double>& b_grid);

struct StripNorms {
  double l1 = 0.0;
  double linf = 0.0;
  double log_l1 = 0.0;  // int |h| ln(1/b)
};
StripNorms strip_norms(const StripField& h);

// Cell widths in b for strip quadrature (midpoint faces, bottom cell extends to 0).
std::vector<double> b_cell_widths(const std::vector<double>& b);

// Bilinear interpolation in (a, log b); outside the grid the nearest edge value is used.
cplx strip_interpolate(const StripField& f, double a, double b);

}  // namespace loggas
