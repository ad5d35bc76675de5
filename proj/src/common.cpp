#include "loggas/common.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace loggas {

const char* error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input: return "input";
    case ErrorKind::Range: return "range";
    case ErrorKind::Unsupported: return "unsupported";
    case ErrorKind::OnAxis: return "on-axis";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Stiffness: return "stiffness";
    case ErrorKind::Instability: return "instability";
    case ErrorKind::Collision: return "collision";
    case ErrorKind::Support: return "support";
  }
  return "unknown";
}

DensityGrid DensityGrid::sample(double lo, double hi, std::size_t n, const std::function<double(double)>& f) {
  if (n < 2 || !(hi > lo)) throw Error(ErrorKind::Input, "DensityGrid::sample needs n >= 2 and hi > lo");
  DensityGrid g;
  g.x = uniform_grid(lo, hi, n);
  g.rho.resize(n);
  for (std::size_t i = 0; i < n; ++i) g.rho[i] = f(g.x[i]);
  g.support_lo = lo;
  g.support_hi = hi;
  return g;
}

double DensityGrid::mass() const {
  if (x.size() < 2) return 0.0;
  double s = 0.5 * (rho.front() + rho.back());
  for (std::size_t i = 1; i + 1 < rho.size(); ++i) s += rho[i];
  return s * dx();
}

double DensityGrid::operator()(double y) const {
  if (x.size() < 2 || y < x.front() || y > x.back()) return 0.0;
  double h = dx();
  double u = (y - x.front()) / h;
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(u), x.size() - 2);
  double t = u - static_cast<double>(i);
  return (1.0 - t) * rho[i] + t * rho[i + 1];
}

double DensityGrid::integrate(const std::function<double(double)>& phi) const {
  if (x.size() < 2) return 0.0;
  double s = 0.5 * (rho.front() * phi(x.front()) + rho.back() * phi(x.back()));
  for (std::size_t i = 1; i + 1 < rho.size(); ++i) s += rho[i] * phi(x[i]);
  return s * dx();
}

StripField::StripField(std::vector<double> a_grid, std::vector<double> b_grid, bool conj_sym)
    : a(std::move(a_grid)), b(std::move(b_grid)), v(a.size() * b.size(), cplx(0.0, 0.0)), conjugate_symmetric(conj_sym) {}

StripField StripField::zeros_like() const { return StripField(a, b, conjugate_symmetric); }

std::vector<double> log_b_grid(double b_min, double b_max, double ratio) {
  if (!(b_min > 0.0) || !(b_max > b_min) || !(ratio > 1.0))
    throw Error(ErrorKind::Input, "log_b_grid needs 0 < b_min < b_max and ratio > 1");
  std::size_t n = static_cast<std::size_t>(std::ceil(std::log(b_max / b_min) / std::log(ratio))) + 1;
  std::vector<double> g(n);
  double r = std::pow(b_max / b_min, 1.0 / static_cast<double>(n - 1));
  for (std::size_t j = 0; j < n; ++j) g[j] = b_min * std::pow(r, static_cast<double>(j));
  g.back() = b_max;
  return g;
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  std::vector<double> g(n);
  if (n == 1) {
    g[0] = lo;
    return g;
  }
  double h = (hi - lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) g[i] = lo + h * static_cast<double>(i);
  return g;
}

namespace {

double psi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
double dpsi(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }
double d2psi(double s) { return s > 0.0 ? std::exp(-1.0 / s) * (1.0 - 2.0 * s) / (s * s * s * s) : 0.0; }

}  // namespace

// Smooth step built from exp(-1/s): A/(A+B) with A = psi(1-u), B = psi(u).
double chi_window(double x, double R) {
  double ax = std::fabs(x);
  if (ax <= R) return 1.0;
  if (ax >= 1.5 * R) return 0.0;
  double u = (ax - R) / (0.5 * R);
  double A = psi(1.0 - u), B = psi(u);
  return A / (A + B);
}

double chi_window_deriv(double x, double R) {
  double ax = std::fabs(x);
  if (ax <= R || ax >= 1.5 * R) return 0.0;
  double u = (ax - R) / (0.5 * R);
  double A = psi(1.0 - u), B = psi(u);
  double dA = -dpsi(1.0 - u), dB = dpsi(u);
  double dchi_du = (dA * B - A * dB) / ((A + B) * (A + B));
  double s = x > 0 ? 1.0 : -1.0;
  return s * dchi_du / (0.5 * R);
}

double chi_window_deriv2(double x, double R) {
  double ax = std::fabs(x);
  if (ax <= R || ax >= 1.5 * R) return 0.0;
  double u = (ax - R) / (0.5 * R);
  double A = psi(1.0 - u), B = psi(u);
  double dA = -dpsi(1.0 - u), dB = dpsi(u);
  double d2A = d2psi(1.0 - u), d2B = d2psi(u);
  double S = A + B;
  double num1 = dA * B - A * dB;
  double d2chi = ((d2A * B - A * d2B) * S - 2.0 * num1 * (dA + dB)) / (S * S * S);
  return d2chi / (0.25 * R * R);
}

int default_jobs() {
  unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  if (jobs <= 0) jobs = default_jobs();
  std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
  if (nt <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    pool.emplace_back([&]() {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= n || failed.load()) return;
        try {
          body(i);
        } catch (...) {
          bool expected = false;
          if (failed.compare_exchange_strong(expected, true)) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace loggas
