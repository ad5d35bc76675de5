#include "loggas/equilibrium.hpp"

#include <algorithm>
#include <cmath>

namespace loggas {

namespace {

std::vector<double> chebyshev_coefficients(const Potential& pot, double beta, double c, double r, int n) {
  std::vector<double> q(static_cast<std::size_t>(n), 0.0);
  std::vector<double> fv(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double t = std::cos(kPi * (j + 0.5) / n);
    fv[static_cast<std::size_t>(j)] = (2.0 / beta) * pot.d1(c + r * t);
  }
  for (int m = 0; m < n; ++m) {
    double s = 0.0;
    for (int j = 0; j < n; ++j) s += fv[static_cast<std::size_t>(j)] * std::cos(m * kPi * (j + 0.5) / n);
    q[static_cast<std::size_t>(m)] = (m == 0 ? 1.0 : 2.0) * s / n;
  }
  return q;
}

// sum_k c_k U_k(t) by Clenshaw
double clenshaw_u(const std::vector<double>& c, double t) {
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t k = c.size(); k-- > 0;) {
    double b0 = c[k] + 2.0 * t * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return b1;
}

}  // namespace

double EquilibriumMeasure::density_at(double x) const {
  double t = (x - center) / radius;
  if (t <= -1.0 || t >= 1.0) return 0.0;
  return std::sqrt(1.0 - t * t) * clenshaw_u(coeff, t);
}

double EquilibriumMeasure::edge() const { return std::max(std::fabs(a_minus), std::fabs(a_plus)); }

EquilibriumMeasure solve_cut_equation(const Potential& pot, double beta, int n_cheb, std::size_t n_grid) {
  if (!(beta >= 1.0)) throw Error(ErrorKind::Range, "beta must be >= 1");
  if (n_cheb < 4) throw Error(ErrorKind::Input, "n_cheb must be >= 4");
  auto F = [&](double c, double r, double out[2]) {
    auto q = chebyshev_coefficients(pot, beta, c, r, n_cheb);
    out[0] = q[0];
    out[1] = 0.5 * r * q[1] - 1.0;
  };
  double v2 = pot.d2(0.0);
  double c = 0.0, r = v2 > 0.0 ? std::sqrt(beta / v2) : 1.0;
  double f[2];
  F(c, r, f);
  int it = 0;
  for (; it < 100; ++it) {
    double norm = std::hypot(f[0], f[1]);
    if (norm < 1e-14) break;
    double hc = 1e-7 * std::max(1.0, r), hr = 1e-7 * std::max(1.0, r);
    double fc[2], fr[2];
    F(c + hc, r, fc);
    F(c, r + hr, fr);
    double J00 = (fc[0] - f[0]) / hc, J01 = (fr[0] - f[0]) / hr;
    double J10 = (fc[1] - f[1]) / hc, J11 = (fr[1] - f[1]) / hr;
    double det = J00 * J11 - J01 * J10;
    if (!std::isfinite(det) || det == 0.0) throw Error(ErrorKind::Solver, "singular Jacobian in endpoint Newton");
    double dc = -(J11 * f[0] - J01 * f[1]) / det;
    double dr = -(-J10 * f[0] + J00 * f[1]) / det;
    double step = 1.0;
    for (int k = 0; k < 30; ++k) {
      double cn = c + step * dc, rn = r + step * dr;
      if (rn > 0.0) {
        double fn[2];
        F(cn, rn, fn);
        if (std::hypot(fn[0], fn[1]) < norm) {
          c = cn;
          r = rn;
          f[0] = fn[0];
          f[1] = fn[1];
          break;
        }
      }
      step *= 0.5;
      if (k == 29) {
        c += step * dc;
        r = std::max(r + step * dr, 0.5 * r);
        F(c, r, f);
      }
    }
  }
  if (std::hypot(f[0], f[1]) >= 1e-10)
    throw Error(ErrorKind::Solver,
                "endpoint Newton did not converge, last residual " + std::to_string(std::hypot(f[0], f[1])));

  EquilibriumMeasure e;
  e.center = c;
  e.radius = r;
  e.a_minus = c - r;
  e.a_plus = c + r;
  e.beta = beta;
  e.pot = pot;
  e.n_cheb = n_cheb;
  e.newton_iterations = it;
  e.q = chebyshev_coefficients(pot, beta, c, r, n_cheb);
  e.coeff.assign(e.q.begin() + 1, e.q.end());
  for (double& v : e.coeff) v /= kPi;
  // trim coefficients that are zero to rounding
  double qmax = 0.0;
  for (double v : e.coeff) qmax = std::max(qmax, std::fabs(v));
  while (e.coeff.size() > 1 && std::fabs(e.coeff.back()) < 1e-15 * qmax) e.coeff.pop_back();
  while (e.q.size() > e.coeff.size() + 1) e.q.pop_back();

  e.density = DensityGrid::sample(e.a_minus, e.a_plus, n_grid, [&](double x) { return e.density_at(x); });
  double peak = 0.0, low = 0.0;
  for (double v : e.density.rho) {
    peak = std::max(peak, v);
    low = std::min(low, v);
  }
  if (low < -1e-10 * std::max(peak, 1.0))
    throw Error(ErrorKind::Solver, "negative equilibrium density: multi-cut regime suspected");
  for (double& v : e.density.rho) v = std::max(v, 0.0);
  e.residual = cut_equation_residual(e);
  return e;
}

double cut_equation_residual(const EquilibriumMeasure& eqm, int n_points) {
  // Gauss-Chebyshev of the second kind, exact for the polynomial part
  int n = 2 * std::max<int>(eqm.n_cheb, static_cast<int>(eqm.coeff.size()) + 4);
  std::vector<double> s(static_cast<std::size_t>(n)), w(static_cast<std::size_t>(n)), g(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    double th = k * kPi / (n + 1);
    s[static_cast<std::size_t>(k - 1)] = std::cos(th);
    w[static_cast<std::size_t>(k - 1)] = kPi / (n + 1) * std::sin(th) * std::sin(th);
    g[static_cast<std::size_t>(k - 1)] = clenshaw_u(eqm.coeff, std::cos(th));
  }
  double worst = 0.0;
  for (int i = 1; i <= n_points; ++i) {
    // interior collocation points avoiding the soft edges
    double t = std::cos(kPi * (i - 0.5) / n_points) * 0.98;
    double gt = clenshaw_u(eqm.coeff, t);
    double h = 1e-6;
    double dgt = (clenshaw_u(eqm.coeff, t + h) - clenshaw_u(eqm.coeff, t - h)) / (2 * h);
    double sum = 0.0;
    for (int k = 0; k < n; ++k) {
      double ds = s[static_cast<std::size_t>(k)] - t;
      double ratio = std::fabs(ds) < 1e-12 ? dgt : (g[static_cast<std::size_t>(k)] - gt) / ds;
      sum += w[static_cast<std::size_t>(k)] * ratio;
    }
    double pv = sum - kPi * t * gt;  // p.v. int rho(x)/(x - y) dx
    double y = eqm.center + eqm.radius * t;
    worst = std::max(worst, std::fabs(pv + (2.0 / eqm.beta) * eqm.pot.d1(y)));
  }
  return worst;
}

cplx equilibrium_stieltjes(const EquilibriumMeasure& eqm, cplx z) {
  double b = z.imag();
  if (b == 0.0 && z.real() >= eqm.a_minus && z.real() <= eqm.a_plus)
    throw Error(ErrorKind::OnAxis, "z lies on the support; use equilibrium_boundary_values");
  double dist = std::fabs(b);
  if (dist == 0.0) dist = std::min(std::fabs(z.real() - eqm.a_minus), std::fabs(z.real() - eqm.a_plus));
  int n = std::max(256, static_cast<int>(std::ceil(50.0 * eqm.radius / dist)));
  cplx s(0.0, 0.0);
  for (int j = 0; j < n; ++j) {
    double th = kPi * (j + 0.5) / n;
    double t = std::cos(th), st = std::sin(th);
    double rho = st * clenshaw_u(eqm.coeff, t);
    s += rho * eqm.radius * st / (eqm.center + eqm.radius * t - z);
  }
  return s * (kPi / n);
}

cplx equilibrium_stieltjes_exact(const EquilibriumMeasure& eqm, cplx z, cplx* deriv) {
  cplx w = (z - eqm.center) / eqm.radius;
  cplx sq = std::sqrt(w - 1.0) * std::sqrt(w + 1.0);
  cplx xi = w - sq;
  double sign = -1.0;
  if (std::abs(xi) > 1.0) {
    xi = w + sq;
    sign = 1.0;
  }
  cplx M(0.0, 0.0), dM(0.0, 0.0), p(1.0, 0.0);
  for (std::size_t m = 1; m < eqm.q.size(); ++m) {
    dM -= static_cast<double>(m) * eqm.q[m] * p;
    p *= xi;
    M -= eqm.q[m] * p;
  }
  if (deriv) *deriv = dM * (sign * xi / sq) / eqm.radius;
  return M;
}

BoundaryValues equilibrium_boundary_values(const EquilibriumMeasure& eqm, double x) {
  BoundaryValues bv;
  if (x <= eqm.a_minus || x >= eqm.a_plus) {
    cplx m = equilibrium_stieltjes(eqm, cplx(x, 0.0));
    bv.plus = bv.minus = m;
    return bv;
  }
  double pv = -(2.0 / eqm.beta) * eqm.pot.d1(x);
  double im = kPi * eqm.density_at(x);
  bv.plus = cplx(pv, im);
  bv.minus = cplx(pv, -im);
  return bv;
}

std::vector<double> equilibrium_quantiles(const EquilibriumMeasure& eqm, std::size_t n) {
  // CDF in theta: x = c - r cos(phi), phi in [0, pi], density element rho r sin(phi) dphi
  const std::size_t m = 20000;
  std::vector<double> phi(m + 1), cdf(m + 1, 0.0);
  auto integrand = [&](double p) {
    double t = -std::cos(p), st = std::sin(p);
    return st * clenshaw_u(eqm.coeff, t) * eqm.radius * st;
  };
  for (std::size_t k = 0; k <= m; ++k) phi[k] = kPi * static_cast<double>(k) / m;
  for (std::size_t k = 0; k < m; ++k) {
    // Simpson on each cell
    double a = phi[k], b = phi[k + 1];
    cdf[k + 1] = cdf[k] + (b - a) / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + b)) + integrand(b));
  }
  double total = cdf[m];
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double target = (static_cast<double>(i) + 0.5) / static_cast<double>(n) * total;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1, m);
    double p = phi[k - 1] + (target - cdf[k - 1]) / (cdf[k] - cdf[k - 1]) * (phi[k] - phi[k - 1]);
    // Newton polish on the local cell
    for (int iter = 0; iter < 3; ++iter) {
      double a = phi[k - 1];
      double val = cdf[k - 1] + (p - a) / 6.0 * (integrand(a) + 4.0 * integrand(0.5 * (a + p)) + integrand(p));
      double d = integrand(p);
      if (d <= 0.0) break;
      p -= (val - target) / d;
      p = std::clamp(p, phi[k - 1], phi[k]);
    }
    out[i] = eqm.center - eqm.radius * std::cos(p);
  }
  return out;
}

std::vector<double> density_quantiles(const DensityGrid& rho, std::size_t n) {
  std::size_t m = rho.size();
  if (m < 2) throw Error(ErrorKind::Input, "density_quantiles needs a grid");
  std::vector<double> cdf(m, 0.0);
  double h = rho.dx();
  for (std::size_t k = 1; k < m; ++k) cdf[k] = cdf[k - 1] + 0.5 * h * (rho.rho[k - 1] + rho.rho[k]);
  double total = cdf.back();
  if (!(total > 0.0)) throw Error(ErrorKind::Input, "density has no mass");
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    double target = (static_cast<double>(i) + 0.5) / static_cast<double>(n) * total;
    auto it = std::lower_bound(cdf.begin(), cdf.end(), target);
    std::size_t k = std::clamp<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), 1, m - 1);
    // invert the quadratic CDF of the linear density on the cell
    double r0 = rho.rho[k - 1], r1 = rho.rho[k];
    double need = target - cdf[k - 1];
    double slope = (r1 - r0) / h;
    double u;
    if (std::fabs(slope) < 1e-14) {
      u = r0 > 0 ? need / r0 : 0.5 * h;
    } else {
      double disc = std::max(r0 * r0 + 2.0 * slope * need, 0.0);
      u = (-r0 + std::sqrt(disc)) / slope;
    }
    out[i] = rho.x[k - 1] + std::clamp(u, 0.0, h);
  }
  return out;
}

}  // namespace loggas
