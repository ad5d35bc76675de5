#pragma once

#include <vector>

#include "loggas/common.hpp"
#include "loggas/potential.hpp"

namespace loggas {

// One-cut equilibrium density in the form
//   rho(x) = sqrt(1 - t^2) * sum_k coeff[k] U_k(t),  x = center + radius * t.
struct EquilibriumMeasure {
  double a_minus = 0.0;
  double a_plus = 0.0;
  double center = 0.0;
  double radius = 1.0;
  double beta = 2.0;
  Potential pot = Potential::harmonic();
  std::vector<double> q;      // Chebyshev T coefficients of (2/beta) V'(center + radius t)
  std::vector<double> coeff;  // U coefficients of the density, coeff[k] = q[k+1]/pi
  DensityGrid density;
  double residual = 0.0;
  int n_cheb = 64;
  int newton_iterations = 0;

  double density_at(double x) const;
  double edge() const;  // max(|a_minus|, |a_plus|)
};

EquilibriumMeasure solve_cut_equation(const Potential& pot, double beta, int n_cheb = 64,
                                      std::size_t n_grid = 2001);

// Sup over interior collocation points of |p.v. int rho(x)/(x-y) dx + (2/beta) V'(y)|.
double cut_equation_residual(const EquilibriumMeasure& eqm, int n_points = 199);

// Quadrature in theta; real z is allowed only off the support.
cplx equilibrium_stieltjes(const EquilibriumMeasure& eqm, cplx z);
// Closed form from the Chebyshev representation; also returns the derivative.
cplx equilibrium_stieltjes_exact(const EquilibriumMeasure& eqm, cplx z, cplx* deriv = nullptr);

struct BoundaryValues {
  cplx plus;   // M(x + i0)
  cplx minus;  // M(x - i0)
};
BoundaryValues equilibrium_boundary_values(const EquilibriumMeasure& eqm, double x);

// Midpoint quantiles F^{-1}((i - 1/2)/n).
std::vector<double> equilibrium_quantiles(const EquilibriumMeasure& eqm, std::size_t n);
// Same for a density grid (trapezoid CDF with linear inversion).
std::vector<double> density_quantiles(const DensityGrid& rho, std::size_t n);

}  // namespace loggas
