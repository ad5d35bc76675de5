#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "loggas/equilibrium.hpp"
#include "loggas/hydrodynamic.hpp"
#include "loggas/particle_sde.hpp"

using namespace loggas;

namespace {

// Stieltjes transform of the semicircle of radius r, valid off [-r, r] including the real axis.
cplx semicircle_m(cplx z, double r) { return 2.0 / (r * r) * (-z + std::sqrt(z - r) * std::sqrt(z + r)); }

// Free evolution in V = x^2/2 keeps the semicircle shape; m2(t) = beta/4 + (m2(0) - beta/4) e^{-2t}.
double ou_radius(double r0, double beta, double t) {
  double m2 = beta / 4 + (r0 * r0 / 4 - beta / 4) * std::exp(-2 * t);
  return 2 * std::sqrt(m2);
}

std::vector<double> semicircle_quantiles(double r, std::size_t n) {
  auto g = DensityGrid::sample(-r, r, 4001, [r](double x) {
    return std::fabs(x) < r ? 2.0 / (kPi * r * r) * std::sqrt(r * r - x * x) : 0.0;
  });
  return density_quantiles(g, n);
}

double w1_to_semicircle(const std::vector<double>& x, double r) {
  auto q = semicircle_quantiles(r, x.size());
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += std::fabs(x[k] - q[k]);
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("semicircle oracle for the free transform") {
  CHECK(std::abs(semicircle_m(cplx(0, 2), std::sqrt(2.0)) - cplx(0, 0.449489742783178)) < 1e-12);
  CHECK(std::abs(semicircle_m(cplx(3, 0), 1.0) - cplx(-0.343145750507620, 0)) < 1e-12);
}

TEST_CASE("weak right-hand side oracles") {
  auto pot = Potential::harmonic();
  auto unit = DensityGrid::sample(-1, 1, 4001, [](double x) { return 2.0 / kPi * std::sqrt(std::max(0.0, 1 - x * x)); });
  TestFunction sq{"x^2", [](double x) { return x * x; }, [](double x) { return 2 * x; }, [](double) { return 2.0; }};
  // -2 m2 + beta/2 with m2 = 1/4
  CHECK(weak_rhs(unit, pot, 2.0, sq) == doctest::Approx(0.5).epsilon(1e-4));
  auto eq = solve_cut_equation(pot, 2.0);
  CHECK(std::fabs(weak_rhs(eq.density, pot, 2.0, sq)) < 1e-4);
  CHECK(stationarity_residual(eq.density, pot, 2.0) < 1e-4);
  auto quartic = solve_cut_equation(Potential::polynomial({0, 0, 0.5, 0, 0.25}), 2.0);
  CHECK(stationarity_residual(quartic.density, quartic.pot, 2.0) < 1e-4);
  // the same functional on the atomic side
  auto mu = AtomicMeasure::uniform(equilibrium_quantiles(eq, 2000));
  CHECK(std::fabs(weak_rhs(mu, pot, 2.0, sq)) < 1e-3);
}

TEST_CASE("particle method keeps the equilibrium stationary") {
  auto eq = solve_cut_equation(Potential::landau_ginzburg(1.0), 2.0);
  ParticleHydroOptions opt;
  opt.n_det = 128;
  opt.n_checkpoints = 4;
  auto sol = evolve_density_particle(eq, 1.0, opt);
  auto sq = [](double x) { return x * x; };
  double m2_eq = eq.density.integrate(sq);
  auto mu = sol.measure(sol.times.size() - 1);
  CHECK(mu.mass() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(mu.integrate(sq) - m2_eq) < 1e-4);
  cplx z(0.3, 0.5);
  CHECK(std::abs(mu.stieltjes(z) - equilibrium_stieltjes_exact(eq, z)) < 1e-3);
  // Richardson beats the plain n-particle system
  double plain = std::fabs(observable(sol.particles.back(), sq) - m2_eq);
  CHECK(std::fabs(mu.integrate(sq) - m2_eq) < plain);
}

TEST_CASE("relaxation of a widened semicircle") {
  double beta = 2.0, r0 = 2 * std::sqrt(2.0);
  ParticleHydroOptions opt;
  opt.n_det = 200;
  opt.n_checkpoints = 8;
  auto sol = evolve_density_particle([&](std::size_t n) { return semicircle_quantiles(r0, n); },
                                     Potential::harmonic(), beta, 2.0, opt);
  double prev = 1e9;
  for (std::size_t k = 0; k < sol.times.size(); ++k) {
    double w = w1_to_semicircle(sol.companion[k], std::sqrt(beta));
    CHECK(w < prev);
    prev = w;
    double r = ou_radius(r0, beta, sol.times[k]);
    auto mu = sol.measure(k);
    CHECK(std::fabs(mu.integrate([](double x) { return x * x; }) - r * r / 4) < 2e-4);
    CHECK(std::abs(mu.stieltjes(cplx(0.5, 0.4)) - semicircle_m(cplx(0.5, 0.4), r)) < 2e-3);
  }
  CHECK(prev < 0.03);
  CHECK(sol.densities.back().mass() == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("vanishing interaction contracts like exp(-t)") {
  auto x0 = semicircle_quantiles(1.0, 64);
  auto x = advance_particles(x0, Potential::harmonic(), 1e-6, 1.0);
  for (std::size_t k = 0; k < x.size(); ++k) CHECK(x[k] == doctest::Approx(x0[k] * std::exp(-1.0)).epsilon(1e-6));
}

TEST_CASE("moment ODE and semigroup property") {
  double beta = 1.0;
  auto init = [](std::size_t n) {
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = 0.5 + 2.0 * (static_cast<double>(k) + 0.5) / static_cast<double>(n);
    return x;
  };
  ParticleHydroOptions opt;
  opt.n_det = 128;
  opt.n_checkpoints = 2;
  auto sol = evolve_density_particle(init, Potential::harmonic(), beta, 1.0, opt);
  auto mu0 = sol.measure(0), mu1 = sol.measure(2);
  auto id = [](double x) { return x; };
  auto sq = [](double x) { return x * x; };
  double m1_0 = mu0.integrate(id), m2_0 = mu0.integrate(sq);
  CHECK(mu1.integrate(id) == doctest::Approx(m1_0 * std::exp(-1.0)).epsilon(1e-8));
  // d m2 = -2 m2 + beta/2 (the n-particle system has beta (n-1)/(2n); Richardson removes the 1/n)
  double m2_1 = beta / 4 + (m2_0 - beta / 4) * std::exp(-2.0);
  CHECK(std::fabs(mu1.integrate(sq) - m2_1) < 1e-5);
  // running 0 -> 0.5 -> 1 equals the checkpointed run
  auto half = advance_particles(sol.particles[0], Potential::harmonic(), beta, 0.5);
  auto full = advance_particles(half, Potential::harmonic(), beta, 0.5);
  for (std::size_t k = 0; k < full.size(); k += 16) CHECK(full[k] == doctest::Approx(sol.particles[2][k]).epsilon(1e-7));
}

TEST_CASE("Stieltjes-field PDE") {
  double beta = 2.0;
  const std::vector<cplx> probes{{0, 0.3}, {0.5, 0.4}, {-0.8, 0.3}, {1, 1}, {2.2, 0.5}};
  SUBCASE("equilibrium is stationary") {
    double r = std::sqrt(beta);
    StieltjesPdeOptions opt;
    opt.support_radius = r;
    opt.n_checkpoints = 2;
    auto sol = evolve_stieltjes_pde([&](cplx z) { return semicircle_m(z, r); }, Potential::harmonic(), beta, 0.5, opt);
    for (auto z : probes) CHECK(std::abs(sol.stieltjes(2, z) - semicircle_m(z, r)) < 1e-3);
    CHECK(sol.moments.back()[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(sol.moments.back()[2] == doctest::Approx(0.5).epsilon(1e-5));
  }
  SUBCASE("relaxation agrees with the particle method and the exact flow") {
    double r0 = 2 * std::sqrt(2.0), T = 0.5;
    StieltjesPdeOptions opt;
    opt.support_radius = r0;
    opt.n_checkpoints = 1;
    auto pde = evolve_stieltjes_pde([&](cplx z) { return semicircle_m(z, r0); }, Potential::harmonic(), beta, T, opt);
    ParticleHydroOptions popt;
    popt.n_det = 200;
    popt.n_checkpoints = 1;
    auto part = evolve_density_particle([&](std::size_t n) { return semicircle_quantiles(r0, n); },
                                        Potential::harmonic(), beta, T, popt);
    double r = ou_radius(r0, beta, T);
    for (auto z : probes) {
      cplx exact = semicircle_m(z, r);
      CHECK(std::abs(pde.stieltjes(1, z) - exact) < 1e-3);
      CHECK(std::abs(pde.stieltjes(1, z) - part.stieltjes(1, z)) < 1e-2);
    }
    CHECK(pde.moments.back()[2] == doctest::Approx(r * r / 4).epsilon(1e-4));
  }
  SUBCASE("quartic equilibrium") {
    auto eq = solve_cut_equation(Potential::polynomial({0, 0, 0.5, 0, 0.25}), beta);
    StieltjesPdeOptions opt;
    opt.support_radius = eq.radius;
    opt.n_checkpoints = 1;
    auto sol = evolve_stieltjes_pde([&](cplx z) { return equilibrium_stieltjes_exact(eq, z); }, eq.pot, beta, 0.25, opt);
    for (auto z : probes) CHECK(std::abs(sol.stieltjes(1, z) - equilibrium_stieltjes_exact(eq, z)) < 1e-3);
  }
  SUBCASE("input checks") {
    CHECK_THROWS_AS(pde_field_at(evolve_stieltjes_pde([](cplx z) { return semicircle_m(z, 1.0); },
                                                      Potential::harmonic(), 1.0, 0.0, StieltjesPdeOptions{}),
                                 0, cplx(0, 0.05)),
                    Error);
  }
}
