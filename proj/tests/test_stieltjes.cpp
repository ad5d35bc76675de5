#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "loggas/stieltjes.hpp"

using namespace loggas;

namespace {

DensityGrid semicircle(std::size_t n = 20001) {
  double r = std::sqrt(2.0);
  return DensityGrid::sample(-r, r, n, [](double x) { return std::sqrt(std::max(2.0 - x * x, 0.0)) / kPi; });
}

cplx semicircle_M(cplx z) {
  cplx s = std::sqrt(z - std::sqrt(2.0)) * std::sqrt(z + std::sqrt(2.0));
  return -z + s;
}

}  // namespace

TEST_CASE("point transforms") {
  CHECK(std::abs(stieltjes_points({0.0}, cplx(0, 1)) - cplx(0, 1)) < 1e-15);
  CHECK(std::abs(stieltjes_points({1.0, -1.0}, cplx(0, 2)) - cplx(0, 0.4)) < 1e-15);
  std::vector<double> pts = {-1.2, -0.3, 0.05, 0.8, 2.4};
  for (double b : {0.01, 0.3, 2.0}) {
    cplx m = stieltjes_points(pts, cplx(0.1, b));
    CHECK(std::abs(m) <= 1.0 / b);
    CHECK(m.imag() > 0);
  }
  CHECK_THROWS_AS(stieltjes_points(pts, cplx(0.3, 0.0)), Error);
  CHECK(std::abs(stieltjes_points_sum(pts, cplx(0, 1)) - 5.0 * stieltjes_points(pts, cplx(0, 1))) < 1e-14);
}

TEST_CASE("density transforms") {
  auto sc = semicircle();
  CHECK(sc.mass() == doctest::Approx(1.0).epsilon(1e-5));
  cplx m = stieltjes_density(sc, cplx(0, 2));
  CHECK(std::abs(m - cplx(0, 0.449489742783178)) < 1e-6);
  CHECK(stieltjes_density(sc, cplx(0, 1)).imag() > 0);
  auto uni = DensityGrid::sample(-1, 1, 2001, [](double) { return 0.5; });
  cplx u = stieltjes_density(uni, cplx(0, 1));
  CHECK(std::abs(u - cplx(0, kPi / 4)) < 1e-12);
  CHECK_THROWS_AS(stieltjes_density(sc, cplx(0.2, 0.0)), Error);
}

TEST_CASE("Herglotz-type bounds and symmetry for densities") {
  auto sc = semicircle(4001);
  for (cplx z : {cplx(0.3, 0.2), cplx(-1.0, 0.05), cplx(2.0, 0.5)}) {
    cplx m = stieltjes_density(sc, z);
    CHECK(std::abs(m) <= 1.0 / z.imag());
    CHECK(m.imag() > 0);
    cplx mc = stieltjes_density(sc, std::conj(z));
    CHECK(std::abs(mc - std::conj(m)) < 1e-13);
    cplx d = stieltjes_density_deriv(sc, z);
    CHECK(std::abs(d) <= m.imag() / z.imag() * (1 + 1e-9));
    double h = 1e-5;
    cplx fd = (stieltjes_density(sc, z + h) - stieltjes_density(sc, z - h)) / (2 * h);
    CHECK(std::abs(fd - d) < 1e-6);
    CHECK(std::abs(m - semicircle_M(z)) < 2e-4);
  }
}

TEST_CASE("Hilbert transform of the semicircle") {
  auto sc = DensityGrid::sample(-6, 6, 6001, [](double x) { return std::sqrt(std::max(2.0 - x * x, 0.0)) / kPi; });
  auto H = hilbert_transform(sc);
  double worst = 0.0;
  for (std::size_t i = 0; i < sc.size(); ++i)
    if (std::fabs(sc.x[i]) < 1.3) worst = std::max(worst, std::fabs(H.rho[i] - sc.x[i] / kPi));
  CHECK(worst < 2e-3);
}

TEST_CASE("Hilbert transform parity and agreement with symmetric-pair quadrature") {
  auto g = DensityGrid::sample(-10, 10, 2001, [](double x) { return std::exp(-x * x); });
  auto H = hilbert_transform(g);
  double worst = 0.0, odd = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    odd = std::max(odd, std::fabs(H.rho[i] + H.rho[g.size() - 1 - i]));
    if (std::fabs(g.x[i]) < 4.0) {
      double pv = principal_value([](double y) { return std::exp(-y * y); }, g.x[i], -10, 10, 800) / kPi;
      worst = std::max(worst, std::fabs(pv - H.rho[i]));
    }
  }
  CHECK(odd < 1e-12);
  CHECK(worst < 1e-4);
}

TEST_CASE("Plemelj extraction") {
  std::vector<double> b = {0.1, 0.05, 0.025};
  std::vector<cplx> M;
  for (double bb : b) M.push_back(semicircle_M(cplx(0.0, bb)));
  auto r = plemelj_extract(b, M);
  CHECK(r.density == doctest::Approx(std::sqrt(2.0) / kPi).epsilon(1e-4));
  CHECK(std::fabs(r.pv) < 1e-12);
  CHECK(r.extrapolable);
  M.clear();
  for (double bb : b) M.push_back(semicircle_M(cplx(3.0, bb)));
  r = plemelj_extract(b, M);
  CHECK(std::fabs(r.density) < 1e-4);
  CHECK(r.pv == doctest::Approx(-3.0 + std::sqrt(7.0)).epsilon(1e-4));
  M.clear();
  for (double bb : b) M.push_back(stieltjes_points({0.0}, cplx(0.0, bb)));
  CHECK_FALSE(plemelj_extract(b, M).extrapolable);
  CHECK_THROWS_AS(plemelj_extract({0.1, 0.2, 0.05}, M), Error);
  CHECK_THROWS_AS(plemelj_extract({0.1, 0.05}, {M[0], M[1]}), Error);
}

TEST_CASE("Plemelj difference and sum identities") {
  // int phi(y) [1/(y - x - ib) - 1/(y - x + ib)] dy -> 2 pi i phi(x); the sum -> -2 p.v. int phi/(x-y)
  auto phi = DensityGrid::sample(-8, 8, 16001, [](double y) { return std::exp(-y * y / 2) * (1 + 0.3 * y); });
  double x = 0.4;
  double exact_pv = principal_value([](double y) { return std::exp(-y * y / 2) * (1 + 0.3 * y); }, x, -8, 8, 1600);
  double prev_err = 1e9;
  for (double b : {0.08, 0.04, 0.02}) {
    cplx up = stieltjes_density(phi, cplx(x, b)), dn = stieltjes_density(phi, cplx(x, -b));
    double err_diff = std::abs((up - dn) - cplx(0, 2 * kPi * phi(x)));
    double err_sum = std::fabs((up + dn).real() + 2.0 * exact_pv);
    CHECK(err_diff < 10 * b);
    CHECK(err_sum < 10 * b);
    CHECK(err_diff < prev_err);
    prev_err = err_diff;
  }
}

TEST_CASE("b power integral") {
  CHECK(b_power_integral(1, 0.5, 0.0) == doctest::Approx(0.125));
  double s = 3.0, B = 0.5;
  double closed = (1 - std::exp(-B * s) * (1 + B * s)) / (s * s);
  CHECK(b_power_integral(1, B, s) == doctest::Approx(closed).epsilon(1e-13));
  CHECK(b_power_integral(2, B, 1e-6) == doctest::Approx(B * B * B / 3).epsilon(1e-5));
}

TEST_CASE("kernel with large b_max acts as -f''/(2 pi)") {
  DecompositionSpec spec{0, 1e3, std::nullopt};
  auto f = DensityGrid::sample(-12, 12, 1201, [](double x) { return std::exp(-x * x / 2); });
  auto h = kernel_apply(spec, f, {0.5});
  double worst = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double a = f.x[i];
    double expect = (1 - a * a) * std::exp(-a * a / 2) / (2 * kPi);
    worst = std::max(worst, std::fabs(h.at(i, 0).real() - expect));
  }
  CHECK(worst < 1e-5);
}

TEST_CASE("kernel at b_max = 1/2 against direct Fourier division") {
  DecompositionSpec spec{0, 0.5, std::nullopt};
  auto f = DensityGrid::sample(-20, 20, 4001, [](double x) { return std::exp(-x * x / 2); });
  bool warn = true;
  auto h = kernel_apply(spec, f, {0.01, 0.5}, &warn);
  CHECK_FALSE(warn);
  // frozen values of (1/2pi) int fhat(s) K(s) e^{isa} ds by adaptive quadrature
  const double a_ref[] = {0.0, 0.5, 1.0, 2.0, 3.0};
  const double h_ref[] = {1.681637186923557, 1.4296530208873426, 0.8636356481771735, 0.049577384237599845,
                          -0.05181263001111683};
  for (int k = 0; k < 5; ++k) {
    std::size_t i = static_cast<std::size_t>(std::lround((a_ref[k] + 20) / 0.01));
    CHECK(std::fabs(h.at(i, 0).real() - h_ref[k]) < 1e-6);
    CHECK(h.at(i, 1) == h.at(i, 0));
  }
}

TEST_CASE("odd order kernel keeps parity") {
  DecompositionSpec spec{1, 0.5, std::nullopt};
  auto f = DensityGrid::sample(-12, 12, 1201, [](double x) { return std::exp(-x * x / 2); });
  auto h = kernel_apply(spec, f, {0.5});
  double odd = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) odd = std::max(odd, std::fabs(h.at(i, 0).real() - h.at(f.size() - 1 - i, 0).real()));
  CHECK(odd < 1e-9);
  bool warn = false;
  auto g = DensityGrid::sample(-3, 3, 301, [](double x) { return std::exp(-x * x / 8); });
  kernel_apply(spec, g, {0.5}, &warn);
  CHECK(warn);
}

TEST_CASE("zero field reconstructs to zero") {
  StripField h(uniform_grid(-2, 2, 41), log_b_grid(1e-3, 0.5, 1.25));
  CHECK(reconstruct(DecompositionSpec{}, h, 0.3) == 0.0);
}

TEST_CASE("b quadrature weights integrate smooth functions") {
  auto b = log_b_grid(1e-3, 0.5, 1.25);
  for (double p : {1.0, 2.0, 4.0}) {
    auto w = b_quadrature_weights(b, p);
    double s = 0.0;
    for (std::size_t j = 0; j < b.size(); ++j) s += w[j] * std::cos(3 * b[j]);
    // int_0^0.5 b^p cos(3b) db
    double ref = 0.0;
    int n = 20000;
    for (int k = 0; k < n; ++k) {
      double t = 0.5 * (k + 0.5) / n;
      ref += std::pow(t, p) * std::cos(3 * t) * 0.5 / n;
    }
    CHECK(s == doctest::Approx(ref).epsilon(1e-4));
    auto wf = b_quadrature_weights(log_b_grid(1e-3, 0.5, 1.05), p);
    auto bf = log_b_grid(1e-3, 0.5, 1.05);
    double sf = 0.0;
    for (std::size_t j = 0; j < bf.size(); ++j) sf += wf[j] * std::cos(3 * bf[j]);
    CHECK(std::fabs(sf - ref) < 0.01 * std::fabs(s - ref));
  }
}

TEST_CASE("decomposition round trip for kappa = 0..3") {
  auto b = log_b_grid(1e-3, 0.5, 1.25);
  std::vector<double> xs;
  for (double x = -5.0; x <= 5.0 + 1e-12; x += 0.25) xs.push_back(x);
  auto gauss = [](double x) { return std::exp(-x * x / 2); };
  auto algebraic = [](double x) { return chi_window(x, 8.0) / ((1 + x * x) * (1 + x * x)); };
  for (int kappa = 0; kappa <= 3; ++kappa) {
    DecompositionSpec spec{kappa, 0.5, std::nullopt};
    for (int which = 0; which < 2; ++which) {
      std::function<double(double)> f = which == 0 ? std::function<double(double)>(gauss) : algebraic;
      auto fg = DensityGrid::sample(-16, 16, 1601, f);
      auto h = kernel_apply(spec, fg, b);
      auto back = reconstruct(spec, h, xs);
      double worst = 0.0;
      for (std::size_t m = 0; m < xs.size(); ++m) worst = std::max(worst, std::fabs(back[m] - f(xs[m])));
      INFO("kappa = " << kappa << " family " << which);
      CHECK(worst < 1e-3);
    }
  }
}

TEST_CASE("exponentially weighted family") {
  auto a = uniform_grid(-4, 4, 6401);
  auto b = log_b_grid(1e-3, 0.5, 1.1);
  std::vector<double> bTs = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> l1s, logs;
  for (double bT : bTs) {
    cplx zT(0.3, bT);
    DecompositionSpec spec{0, 0.5, std::nullopt};
    auto h = rho_family(zT, spec, a, b);
    // H is a positive multiple of a Poisson-like bump
    double minv = 0.0;
    for (auto& v : h.v) minv = std::min(minv, v.real());
    double peak = 0.0;
    for (auto& v : h.v) peak = std::max(peak, v.real());
    CHECK(minv > -1e-6 * peak);
    auto n = strip_norms(h);
    l1s.push_back(n.l1);
    logs.push_back(n.log_l1);
    std::vector<double> xs = {-1.0, 0.0, 0.3, 0.5, 1.5};
    auto back = reconstruct(spec, h, xs);
    for (std::size_t m = 0; m < xs.size(); ++m) {
      double target = (1.0 / (xs[m] - zT)).imag();
      INFO("bT = " << bT << " x = " << xs[m]);
      CHECK(std::fabs(back[m] - target) < 1e-3 * std::max(1.0, std::fabs(target)));
    }
  }
  // L1 norm grows like 1/bT (kappa = 0)
  double slope = std::log(l1s.back() / l1s.front()) / std::log(bTs.front() / bTs.back());
  CHECK(slope == doctest::Approx(1.0).epsilon(0.1));
  // weighted norm grows faster by a log factor
  for (std::size_t k = 0; k + 1 < bTs.size(); ++k) CHECK(logs[k + 1] / l1s[k + 1] > logs[k] / l1s[k]);
  CHECK_THROWS_AS(rho_family(cplx(0, 0.7), DecompositionSpec{}, a, b), Error);
}

TEST_CASE("decomposition parameter validation") {
  CHECK_THROWS_AS(validate(DecompositionSpec{6, 0.5, std::nullopt}), Error);
  CHECK_THROWS_AS(validate(DecompositionSpec{-1, 0.5, std::nullopt}), Error);
  CHECK_THROWS_AS(validate(DecompositionSpec{0, 0.0, std::nullopt}), Error);
  CHECK_THROWS_AS(validate(DecompositionSpec{0, 0.5, 0.8}), Error);
  CHECK_NOTHROW(validate(DecompositionSpec{5, 0.5, 0.1}));
}

TEST_CASE("strip interpolation") {
  StripField f(uniform_grid(0, 1, 11), log_b_grid(0.01, 1.0, 1.5));
  for (std::size_t i = 0; i < f.na(); ++i)
    for (std::size_t j = 0; j < f.nb(); ++j) f.at(i, j) = cplx(2 * f.a[i] + std::log(f.b[j]), 1.0);
  cplx v = strip_interpolate(f, 0.37, 0.05);
  CHECK(v.real() == doctest::Approx(0.74 + std::log(0.05)).epsilon(1e-12));
  CHECK(strip_interpolate(f, 5.0, 10.0).real() == doctest::Approx(2.0));
}
