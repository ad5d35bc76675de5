#include "loggas/potential.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace loggas {

namespace {

double falling(int n, int k) {
  double r = 1.0;
  for (int j = 0; j < k; ++j) r *= static_cast<double>(n - j);
  return r;
}

double factorial(int n) { return falling(n, n); }

}  // namespace

Potential Potential::harmonic(double scale) {
  if (!(scale > 0.0)) throw Error(ErrorKind::Range, "harmonic scale must be > 0");
  Potential p;
  p.kind_ = PotentialKind::Harmonic;
  p.coeffs_ = {0.0, 0.0, 0.5 * scale};
  p.param_ = scale;
  return p;
}

Potential Potential::landau_ginzburg(double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorKind::Range, "landau_ginzburg lambda must be >= 0");
  Potential p;
  p.kind_ = PotentialKind::LandauGinzburg;
  p.coeffs_ = {0.0, 0.0, 0.5, 0.0, 0.25 * lambda};
  p.param_ = lambda;
  return p;
}

Potential Potential::polynomial(std::vector<double> coefficients) {
  if (coefficients.empty()) throw Error(ErrorKind::Input, "polynomial potential needs coefficients");
  for (double c : coefficients)
    if (!std::isfinite(c)) throw Error(ErrorKind::Input, "polynomial coefficient is not finite");
  Potential p;
  p.kind_ = PotentialKind::Polynomial;
  p.coeffs_ = std::move(coefficients);
  return p;
}

Potential Potential::callback(Callback fn, std::string label) {
  if (!fn) throw Error(ErrorKind::Input, "callback potential needs a function");
  Potential p;
  p.kind_ = PotentialKind::Callback;
  p.cb_ = std::move(fn);
  p.label_ = std::move(label);
  return p;
}

int Potential::degree() const {
  if (!is_polynomial()) return -1;
  int d = static_cast<int>(coeffs_.size()) - 1;
  while (d > 0 && coeffs_[static_cast<std::size_t>(d)] == 0.0) --d;
  return d;
}

std::string Potential::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case PotentialKind::Harmonic: os << "harmonic(scale=" << param_ << ")"; break;
    case PotentialKind::LandauGinzburg: os << "landau_ginzburg(lambda=" << param_ << ")"; break;
    case PotentialKind::Polynomial: {
      os << "polynomial[";
      for (std::size_t i = 0; i < coeffs_.size(); ++i) os << (i ? "," : "") << coeffs_[i];
      os << "]";
      break;
    }
    case PotentialKind::Callback: os << label_; break;
  }
  return os.str();
}

std::vector<double> Potential::derivatives(double x, int max_order) const {
  if (max_order > kMaxDerivativeOrder) throw Error(ErrorKind::Unsupported, "derivative order above 11 requested");
  if (max_order < 0) throw Error(ErrorKind::Input, "negative derivative order");
  std::vector<double> out(static_cast<std::size_t>(max_order) + 1, 0.0);
  if (kind_ == PotentialKind::Callback) {
    cb_(x, max_order, out.data());
    return out;
  }
  int n = static_cast<int>(coeffs_.size());
  for (int k = 0; k <= max_order; ++k) {
    // Horner on the k-th derivative polynomial
    double s = 0.0;
    for (int j = n - 1; j >= k; --j) s = s * x + coeffs_[static_cast<std::size_t>(j)] * falling(j, k);
    out[static_cast<std::size_t>(k)] = s;
  }
  return out;
}

double Potential::d(int order, double x) const {
  if (order > kMaxDerivativeOrder) throw Error(ErrorKind::Unsupported, "derivative order above 11 requested");
  if (kind_ == PotentialKind::Callback) return derivatives(x, order)[static_cast<std::size_t>(order)];
  int n = static_cast<int>(coeffs_.size());
  double s = 0.0;
  for (int j = n - 1; j >= order; --j) s = s * x + coeffs_[static_cast<std::size_t>(j)] * falling(j, order);
  return s;
}

bool Potential::confining() const {
  if (!is_polynomial()) return true;  // growth of callbacks is the caller's responsibility
  int d = degree();
  return d >= 2 && d % 2 == 0 && coeffs_[static_cast<std::size_t>(d)] > 0.0;
}

ConvexityReport convexity_check(const Potential& pot, double lo, double hi, int n_grid) {
  if (n_grid < 2) throw Error(ErrorKind::Input, "convexity_check needs n_grid >= 2");
  ConvexityReport r;
  r.min_second_derivative = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n_grid; ++i) {
    double x = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_grid - 1);
    double v2 = pot.d2(x);
    if (v2 < r.min_second_derivative) {
      r.min_second_derivative = v2;
      r.argmin = x;
    }
  }
  r.convex = r.min_second_derivative >= -kTolConvex;
  return r;
}

double taylor_remainder_W(const Potential& pot, double a, double u) {
  // The difference quotient loses about eps |V'| / u^3 to cancellation, so small offsets use the
  // series sum_{k>=3} V^{(k+1)}(a) u^{k-3} / k!, exact for polynomials of degree <= 11.
  if (std::fabs(u) < 0.25) {
    auto dv = pot.derivatives(a, kMaxDerivativeOrder);
    double s = 0.0, p = 1.0;
    for (int k = 3; k + 1 <= kMaxDerivativeOrder; ++k) {
      s += dv[static_cast<std::size_t>(k + 1)] * p / factorial(k);
      p *= u;
    }
    return s;
  }
  auto dv = pot.derivatives(a, 3);
  double v1u = pot.d1(a + u);
  return (v1u - dv[1] - dv[2] * u - 0.5 * dv[3] * u * u) / (u * u * u);
}

}  // namespace loggas
