#include "loggas/measure_path.hpp"

#include <algorithm>
#include <cmath>

#include "loggas/stieltjes.hpp"

namespace loggas {

MeasureSnapshot MeasureSnapshot::equilibrium(const EquilibriumMeasure& eq, std::size_t n_quad) {
  MeasureSnapshot s;
  s.kind_ = Kind::Equilibrium;
  s.eq_ = std::make_shared<EquilibriumMeasure>(eq);
  s.mass_ = 1.0;
  s.support_ = eq.edge();
  // Gauss rule for the weight sqrt(1 - t^2): exact for the U-series density times polynomials
  double np1 = static_cast<double>(n_quad + 1);
  for (std::size_t j = 1; j <= n_quad; ++j) {
    double th = kPi * static_cast<double>(j) / np1;
    double t = std::cos(th), st = std::sin(th);
    double x = eq.center + eq.radius * t;
    double poly = eq.density_at(x) / st;
    s.nodes_.x.push_back(x);
    s.nodes_.w.push_back(eq.radius * kPi / np1 * st * st * poly);
  }
  return s;
}

MeasureSnapshot MeasureSnapshot::density(const DensityGrid& rho, std::size_t n_quad) {
  MeasureSnapshot s;
  s.kind_ = Kind::Density;
  s.rho_ = std::make_shared<DensityGrid>(rho);
  s.mass_ = rho.mass();
  s.nodes_.x = density_quantiles(rho, n_quad);
  s.nodes_.w.assign(n_quad, s.mass_ / static_cast<double>(n_quad));
  for (std::size_t i = 0; i < rho.size(); ++i)
    if (rho.rho[i] > 0.0) s.support_ = std::max(s.support_, std::fabs(rho.x[i]));
  return s;
}

MeasureSnapshot MeasureSnapshot::atomic(AtomicMeasure mu) {
  MeasureSnapshot s;
  s.kind_ = Kind::Atomic;
  s.mass_ = mu.mass();
  for (double x : mu.x) s.support_ = std::max(s.support_, std::fabs(x));
  s.nodes_ = std::move(mu);
  return s;
}

MeasureSnapshot MeasureSnapshot::points(const std::vector<double>& x) { return atomic(AtomicMeasure::uniform(x)); }

MeasureSnapshot MeasureSnapshot::zero() { return MeasureSnapshot(); }

cplx MeasureSnapshot::stieltjes(cplx z) const {
  switch (kind_) {
    case Kind::Equilibrium:
      return equilibrium_stieltjes_exact(*eq_, z);
    case Kind::Density:
      return stieltjes_density(*rho_, z);
    case Kind::Atomic:
      return nodes_.stieltjes(z);
    case Kind::Zero:
      break;
  }
  return {0.0, 0.0};
}

cplx MeasureSnapshot::stieltjes_deriv(cplx z) const {
  switch (kind_) {
    case Kind::Equilibrium: {
      cplx d;
      equilibrium_stieltjes_exact(*eq_, z, &d);
      return d;
    }
    case Kind::Density:
      return stieltjes_density_deriv(*rho_, z);
    case Kind::Atomic:
      return nodes_.stieltjes_deriv(z);
    case Kind::Zero:
      break;
  }
  return {0.0, 0.0};
}

MeasurePath::MeasurePath(std::vector<double> times, std::vector<MeasureSnapshot> limit, PathMode mode)
    : times_(std::move(times)), limit_(std::move(limit)), mode_(mode) {
  if (times_.empty() || times_.size() != limit_.size()) throw Error(ErrorKind::Input, "measure path needs one snapshot per time");
  if (!std::is_sorted(times_.begin(), times_.end())) throw Error(ErrorKind::Input, "path times must be increasing");
  if (mode_ == PathMode::FiniteN) throw Error(ErrorKind::Input, "finite-N paths need empirical snapshots");
}

MeasurePath::MeasurePath(std::vector<double> times, std::vector<MeasureSnapshot> limit,
                         std::vector<MeasureSnapshot> empirical)
    : times_(std::move(times)), limit_(std::move(limit)), empirical_(std::move(empirical)), mode_(PathMode::FiniteN) {
  if (times_.empty() || times_.size() != limit_.size() || times_.size() != empirical_.size())
    throw Error(ErrorKind::Input, "measure path needs one snapshot per time");
  if (!std::is_sorted(times_.begin(), times_.end())) throw Error(ErrorKind::Input, "path times must be increasing");
}

MeasurePath MeasurePath::stationary(const EquilibriumMeasure& eq) {
  return MeasurePath({0.0}, {MeasureSnapshot::equilibrium(eq)});
}

MeasurePath MeasurePath::zero() { return MeasurePath({0.0}, {MeasureSnapshot::zero()}); }

MeasurePath MeasurePath::from_hydro(const HydroSolution& sol) {
  std::vector<MeasureSnapshot> snaps;
  for (std::size_t k = 0; k < sol.times.size(); ++k) snaps.push_back(MeasureSnapshot::atomic(sol.measure(k)));
  return MeasurePath(sol.times, std::move(snaps));
}

MeasurePath::Weights MeasurePath::locate(double t) const {
  if (times_.size() == 1 || t <= times_.front()) return {0, 0, 1.0, 0.0};
  if (t >= times_.back()) return {times_.size() - 1, times_.size() - 1, 1.0, 0.0};
  std::size_t k = static_cast<std::size_t>(std::upper_bound(times_.begin(), times_.end(), t) - times_.begin()) - 1;
  double th = (t - times_[k]) / (times_[k + 1] - times_[k]);
  return {k, k + 1, 1.0 - th, th};
}

cplx MeasurePath::combine(double t, cplx z, bool deriv) const {
  auto w = locate(t);
  auto eval = [&](const MeasureSnapshot& s) { return deriv ? s.stieltjes_deriv(z) : s.stieltjes(z); };
  auto slice = [&](std::size_t k) {
    if (mode_ == PathMode::FiniteN) return eval(limit_[k]) + eval(empirical_[k]);
    return 2.0 * eval(limit_[k]);
  };
  cplx v = w.w0 * slice(w.k0);
  if (w.w1 > 0.0) v += w.w1 * slice(w.k1);
  return v;
}

cplx MeasurePath::S(double t, cplx z) const { return combine(t, z, false); }
cplx MeasurePath::dS(double t, cplx z) const { return combine(t, z, true); }

cplx MeasurePath::limit_stieltjes(double t, cplx z) const {
  auto w = locate(t);
  cplx v = w.w0 * limit_[w.k0].stieltjes(z);
  if (w.w1 > 0.0) v += w.w1 * limit_[w.k1].stieltjes(z);
  return v;
}

namespace {
void append_scaled(AtomicMeasure& out, const AtomicMeasure& in, double s) {
  for (std::size_t i = 0; i < in.x.size(); ++i) {
    out.x.push_back(in.x[i]);
    out.w.push_back(s * in.w[i]);
  }
}
}  // namespace

AtomicMeasure MeasurePath::limit_nodes(double t) const {
  auto w = locate(t);
  AtomicMeasure m;
  append_scaled(m, limit_[w.k0].nodes(), w.w0);
  if (w.w1 > 0.0) append_scaled(m, limit_[w.k1].nodes(), w.w1);
  return m;
}

AtomicMeasure MeasurePath::driving_nodes(double t) const {
  auto w = locate(t);
  AtomicMeasure m;
  auto slice = [&](std::size_t k, double s) {
    if (mode_ == PathMode::FiniteN) {
      append_scaled(m, limit_[k].nodes(), s);
      append_scaled(m, empirical_[k].nodes(), s);
    } else {
      append_scaled(m, limit_[k].nodes(), 2.0 * s);
    }
  };
  slice(w.k0, w.w0);
  if (w.w1 > 0.0) slice(w.k1, w.w1);
  return m;
}

double MeasurePath::driving_mass() const {
  double m = limit_.front().mass();
  return mode_ == PathMode::FiniteN ? m + empirical_.front().mass() : 2.0 * m;
}

double MeasurePath::support_bound() const {
  double s = 0.0;
  for (auto& m : limit_) s = std::max(s, m.support_bound());
  for (auto& m : empirical_) s = std::max(s, m.support_bound());
  return s;
}

}  // namespace loggas
