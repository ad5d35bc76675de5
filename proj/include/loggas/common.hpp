#pragma once

#include <complex>
#include <cstdint>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace loggas {

using cplx = std::complex<double>;
inline constexpr double kPi = 3.14159265358979323846;

enum class ErrorKind {
  Input,        // malformed arguments
  Range,        // parameter outside admissible range
  Unsupported,  // requested feature not available for this input
  OnAxis,       // Stieltjes evaluation with Im z = 0
  Solver,       // iterative solver failed
  Stiffness,    // step halving exhausted
  Instability,  // loss of a structural property (Herglotz, positivity)
  Collision,    // coincident particles
  Support       // input violates a support condition
};

const char* error_kind_name(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// Density sampled on a uniform grid. Values outside [x.front(), x.back()] are 0.
struct DensityGrid {
  std::vector<double> x;
  std::vector<double> rho;
  double support_lo = 0.0;
  double support_hi = 0.0;

  static DensityGrid sample(double lo, double hi, std::size_t n, const std::function<double(double)>& f);
  std::size_t size() const { return x.size(); }
  double dx() const { return x.size() > 1 ? x[1] - x[0] : 0.0; }
  double mass() const;
  double operator()(double y) const;  // linear interpolation
  double integrate(const std::function<double(double)>& phi) const;
};

// Complex field on a rectangle of the upper half strip. Storage is a-major:
// value(i, j) sits at v[i * b.size() + j].
struct StripField {
  std::vector<double> a;
  std::vector<double> b;
  std::vector<cplx> v;
  bool conjugate_symmetric = true;

  StripField() = default;
  StripField(std::vector<double> a_grid, std::vector<double> b_grid, bool conj_sym = true);

  std::size_t na() const { return a.size(); }
  std::size_t nb() const { return b.size(); }
  cplx& at(std::size_t i, std::size_t j) { return v[i * b.size() + j]; }
  const cplx& at(std::size_t i, std::size_t j) const { return v[i * b.size() + j]; }
  double da() const { return a.size() > 1 ? a[1] - a[0] : 0.0; }
  bool same_grid(const StripField& o) const { return a == o.a && b == o.b; }
  StripField zeros_like() const;
  double b_max() const { return b.empty() ? 0.0 : b.back(); }
};

// Geometric b grid, ascending, from b_min up to exactly b_max.
std::vector<double> log_b_grid(double b_min, double b_max, double ratio);
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

// Smooth cut-off equal to 1 on [-R,R] and vanishing outside [-3R/2,3R/2].
double chi_window(double x, double R);
double chi_window_deriv(double x, double R);
double chi_window_deriv2(double x, double R);

// Runs body(i) for i in [0,n) on up to `jobs` threads. jobs <= 0 means hardware concurrency.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body);
int default_jobs();

// Stateless 64-bit mixer used for seed derivation.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace loggas
