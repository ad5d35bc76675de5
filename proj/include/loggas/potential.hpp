#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "loggas/common.hpp"

namespace loggas {

inline constexpr int kMaxDerivativeOrder = 11;

enum class PotentialKind { Polynomial, Harmonic, LandauGinzburg, Callback };

// Confining potential. Shipped kinds are stored as exact polynomials (ascending coefficients).
// The callback kind must fill out[0..max_order] with V and its derivatives itself.
class Potential {
 public:
  using Callback = std::function<void(double x, int max_order, double* out)>;

  static Potential harmonic(double scale = 1.0);
  static Potential landau_ginzburg(double lambda);
  static Potential polynomial(std::vector<double> coefficients);
  static Potential callback(Callback fn, std::string label = "callback");

  PotentialKind kind() const { return kind_; }
  const std::vector<double>& coefficients() const { return coeffs_; }
  double parameter() const { return param_; }
  bool is_polynomial() const { return kind_ != PotentialKind::Callback; }
  int degree() const;
  std::string describe() const;

  // (V(x), V'(x), ..., V^{(max_order)}(x)); max_order > 11 throws Unsupported.
  std::vector<double> derivatives(double x, int max_order) const;
  double d(int order, double x) const;
  double value(double x) const { return d(0, x); }
  double d1(double x) const { return d(1, x); }
  double d2(double x) const { return d(2, x); }
  double d3(double x) const { return d(3, x); }

  // Leading coefficient of even degree and positive.
  bool confining() const;

 private:
  PotentialKind kind_ = PotentialKind::Polynomial;
  std::vector<double> coeffs_;
  double param_ = 0.0;
  Callback cb_;
  std::string label_;
};

struct ConvexityReport {
  bool convex = false;
  double min_second_derivative = 0.0;
  double argmin = 0.0;
};

inline constexpr double kTolConvex = 1e-12;

ConvexityReport convexity_check(const Potential& pot, double lo, double hi, int n_grid);

// W_a(u) with V'(a+u) = V'(a) + V''(a)u + V'''(a)u^2/2 + u^3 W_a(u).
double taylor_remainder_W(const Potential& pot, double a, double u);

}  // namespace loggas
