#pragma once

#include <memory>
#include <vector>

#include "loggas/common.hpp"
#include "loggas/equilibrium.hpp"
#include "loggas/hydrodynamic.hpp"

namespace loggas {

// FiniteN drives the dual dynamics with X^N + X, Asymptotic with 2 X.
enum class PathMode { FiniteN, Asymptotic };

// One time slice of a measure, with its Stieltjes transform and a quadrature rule.
class MeasureSnapshot {
 public:
  static MeasureSnapshot equilibrium(const EquilibriumMeasure& eq, std::size_t n_quad = 160);
  static MeasureSnapshot density(const DensityGrid& rho, std::size_t n_quad = 512);
  static MeasureSnapshot atomic(AtomicMeasure mu);
  static MeasureSnapshot points(const std::vector<double>& x);
  static MeasureSnapshot zero();

  cplx stieltjes(cplx z) const;
  cplx stieltjes_deriv(cplx z) const;
  const AtomicMeasure& nodes() const { return nodes_; }
  double mass() const { return mass_; }
  double support_bound() const { return support_; }  // max |x| over the support

 private:
  enum class Kind { Equilibrium, Density, Atomic, Zero };
  Kind kind_ = Kind::Zero;
  std::shared_ptr<const EquilibriumMeasure> eq_;
  std::shared_ptr<const DensityGrid> rho_;
  AtomicMeasure nodes_;
  double mass_ = 0.0;
  double support_ = 0.0;
};

// Piecewise-linear-in-time measure path. S(t,z) is the transform of the driving measure
// (X^N + X or 2 X, total mass 2), linearly interpolated between checkpoints.
class MeasurePath {
 public:
  MeasurePath() = default;
  MeasurePath(std::vector<double> times, std::vector<MeasureSnapshot> limit, PathMode mode = PathMode::Asymptotic);
  MeasurePath(std::vector<double> times, std::vector<MeasureSnapshot> limit, std::vector<MeasureSnapshot> empirical);

  static MeasurePath stationary(const EquilibriumMeasure& eq);
  static MeasurePath zero();
  static MeasurePath from_hydro(const HydroSolution& sol);

  PathMode mode() const { return mode_; }
  const std::vector<double>& times() const { return times_; }

  cplx S(double t, cplx z) const;
  cplx dS(double t, cplx z) const;
  cplx limit_stieltjes(double t, cplx z) const;  // M_t
  // Quadrature for the driving measure (mass 2) or the limit X_t (mass 1) at time t.
  AtomicMeasure driving_nodes(double t) const;
  AtomicMeasure limit_nodes(double t) const;
  double driving_mass() const;
  double support_bound() const;

 private:
  struct Weights {
    std::size_t k0, k1;
    double w0, w1;
  };
  Weights locate(double t) const;
  cplx combine(double t, cplx z, bool deriv) const;

  std::vector<double> times_;
  std::vector<MeasureSnapshot> limit_;
  std::vector<MeasureSnapshot> empirical_;
  PathMode mode_ = PathMode::Asymptotic;
};

}  // namespace loggas
