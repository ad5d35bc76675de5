#include "loggas/hydrodynamic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "loggas/particle_sde.hpp"

namespace loggas {

AtomicMeasure AtomicMeasure::uniform(const std::vector<double>& points) {
  AtomicMeasure m;
  m.x = points;
  m.w.assign(points.size(), points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size()));
  return m;
}

double AtomicMeasure::mass() const {
  double s = 0.0;
  for (double v : w) s += v;
  return s;
}

double AtomicMeasure::integrate(const std::function<double(double)>& phi) const {
  double s = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] * phi(x[k]);
  return s;
}

cplx AtomicMeasure::stieltjes(cplx z) const {
  if (z.imag() == 0.0) throw Error(ErrorKind::OnAxis, "Stieltjes transform evaluated on the real axis");
  cplx s(0.0, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) s += w[k] / (x[k] - z);
  return s;
}

cplx AtomicMeasure::stieltjes_deriv(cplx z) const {
  if (z.imag() == 0.0) throw Error(ErrorKind::OnAxis, "Stieltjes transform evaluated on the real axis");
  cplx s(0.0, 0.0);
  for (std::size_t k = 0; k < x.size(); ++k) {
    cplx d = x[k] - z;
    s += w[k] / (d * d);
  }
  return s;
}

AtomicMeasure HydroSolution::measure(std::size_t k) const {
  if (method != HydroMethod::Particle) throw Error(ErrorKind::Unsupported, "measure() needs a particle solution");
  if (k >= particles.size()) throw Error(ErrorKind::Range, "checkpoint index out of range");
  AtomicMeasure m = AtomicMeasure::uniform(particles[k]);
  if (companion.empty()) return m;
  // 2 X_{2n} - X_n removes the O(1/n) bias of the deterministic system
  for (auto& w : m.w) w = -w;
  double w2 = 2.0 / static_cast<double>(companion[k].size());
  for (double x : companion[k]) {
    m.x.push_back(x);
    m.w.push_back(w2);
  }
  return m;
}

double HydroSolution::weak(std::size_t k, const std::function<double(double)>& phi) const {
  if (method == HydroMethod::Particle) return measure(k).integrate(phi);
  throw Error(ErrorKind::Unsupported, "weak() needs a particle solution");
}

cplx HydroSolution::stieltjes(std::size_t k, cplx z) const {
  if (method == HydroMethod::Particle) return measure(k).stieltjes(z);
  return pde_field_at(*this, k, z);
}

// ---------------------------------------------------------------- particle method

namespace {

std::vector<double> det_drift(const std::vector<double>& x, const Potential& pot, double beta) {
  ParticleState s;
  s.lambdas = x;
  s.beta = beta;
  s.pot = pot;
  return drift(s);
}

double min_gap_sorted(const std::vector<double>& x) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < x.size(); ++k) g = std::min(g, x[k + 1] - x[k]);
  return g;
}

bool gaps_ok(const std::vector<double>& old, const std::vector<double>& nw) {
  for (std::size_t k = 0; k + 1 < nw.size(); ++k) {
    double g = nw[k + 1] - nw[k];
    if (!std::isfinite(g) || !(g > 0.5 * (old[k + 1] - old[k]))) return false;
  }
  return true;
}

std::vector<double> rk4(const std::vector<double>& x, double dt, const Potential& pot, double beta) {
  std::size_t n = x.size();
  auto k1 = det_drift(x, pot, beta);
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * dt * k1[i];
  auto k2 = det_drift(y, pot, beta);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + 0.5 * dt * k2[i];
  auto k3 = det_drift(y, pot, beta);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + dt * k3[i];
  auto k4 = det_drift(y, pot, beta);
  for (std::size_t i = 0; i < n; ++i) y[i] = x[i] + dt / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
  return y;
}

}  // namespace

std::vector<double> advance_particles(std::vector<double> x, const Potential& pot, double beta, double T,
                                      double dt_factor, int max_halvings) {
  std::sort(x.begin(), x.end());
  double t = 0.0;
  double n = static_cast<double>(x.size());
  if (x.size() < 2) dt_factor = 0.0;
  while (t < T) {
    double dt = T / 200.0;
    if (dt_factor > 0.0 && beta > 0.0) dt = std::min(dt, dt_factor * n * std::pow(min_gap_sorted(x), 2) / beta);
    // keep the explicit step inside the stability range of the confinement term as well
    double curv = 0.0;
    for (double v : x) curv = std::max(curv, std::fabs(pot.d2(v)));
    if (curv > 0.0) dt = std::min(dt, 0.5 / curv);
    dt = std::min(dt, T - t);
    if (T - t - dt < 1e-12 * T) dt = T - t;
    std::vector<double> y;
    int halvings = 0;
    for (;;) {
      y = rk4(x, dt, pot, beta);
      if (gaps_ok(x, y)) break;
      if (++halvings > max_halvings) throw Error(ErrorKind::Stiffness, "deterministic particle step collapsed");
      dt *= 0.5;
    }
    x = std::move(y);
    t = (dt == T - t) ? T : t + dt;
  }
  return x;
}

double silverman_bandwidth(const std::vector<double>& points) {
  std::size_t n = points.size();
  if (n < 2) return 1.0;
  double m = 0.0;
  for (double v : points) m += v;
  m /= static_cast<double>(n);
  double s2 = 0.0;
  for (double v : points) s2 += (v - m) * (v - m);
  double sd = std::sqrt(s2 / static_cast<double>(n - 1));
  return 1.06 * sd * std::pow(static_cast<double>(n), -0.2);
}

DensityGrid kde(const std::vector<double>& points, std::size_t n_grid) {
  if (points.empty() || n_grid < 2) throw Error(ErrorKind::Input, "kde needs points and a grid");
  auto [lo_it, hi_it] = std::minmax_element(points.begin(), points.end());
  double h = silverman_bandwidth(points);
  double lo = *lo_it - 4.0 * h, hi = *hi_it + 4.0 * h;
  double step = (hi - lo) / static_cast<double>(n_grid - 1);
  h = std::max(h, 2.0 * step);
  lo = *lo_it - 4.0 * h;
  hi = *hi_it + 4.0 * h;
  double inv = 1.0 / (static_cast<double>(points.size()) * h * std::sqrt(2.0 * kPi));
  auto g = DensityGrid::sample(lo, hi, n_grid, [&](double x) {
    double s = 0.0;
    for (double p : points) {
      double u = (x - p) / h;
      if (std::fabs(u) < 8.0) s += std::exp(-0.5 * u * u);
    }
    return s * inv;
  });
  g.support_lo = *lo_it;
  g.support_hi = *hi_it;
  return g;
}

HydroSolution evolve_density_particle(const QuantileFunction& initial, const Potential& pot, double beta, double T,
                                      const ParticleHydroOptions& opt) {
  if (opt.n_det < 2) throw Error(ErrorKind::Input, "n_det must be at least 2");
  if (!(T >= 0.0)) throw Error(ErrorKind::Input, "T must be non-negative");
  if (opt.n_checkpoints == 0) throw Error(ErrorKind::Input, "n_checkpoints must be positive");
  HydroSolution sol;
  sol.method = HydroMethod::Particle;
  sol.beta = beta;
  std::vector<double> x = initial(opt.n_det), x2;
  std::sort(x.begin(), x.end());
  if (opt.richardson) {
    x2 = initial(2 * opt.n_det);
    std::sort(x2.begin(), x2.end());
  }
  for (std::size_t k = 0; k <= opt.n_checkpoints; ++k) {
    double t = T * static_cast<double>(k) / static_cast<double>(opt.n_checkpoints);
    if (k > 0) {
      double dt = t - sol.times.back();
      x = advance_particles(std::move(x), pot, beta, dt, opt.dt_factor, opt.max_halvings);
      if (opt.richardson) x2 = advance_particles(std::move(x2), pot, beta, dt, opt.dt_factor, opt.max_halvings);
    }
    sol.times.push_back(t);
    sol.particles.push_back(x);
    if (opt.richardson) sol.companion.push_back(x2);
    sol.densities.push_back(kde(opt.richardson ? x2 : x, opt.kde_points));
  }
  return sol;
}

HydroSolution evolve_density_particle(const DensityGrid& rho0, const Potential& pot, double beta, double T,
                                      const ParticleHydroOptions& opt) {
  return evolve_density_particle([&](std::size_t n) { return density_quantiles(rho0, n); }, pot, beta, T, opt);
}

HydroSolution evolve_density_particle(const EquilibriumMeasure& eq, double T, const ParticleHydroOptions& opt) {
  return evolve_density_particle([&](std::size_t n) { return equilibrium_quantiles(eq, n); }, eq.pot, eq.beta, T,
                                 opt);
}

// ---------------------------------------------------------------- weak form

namespace {

double weak_rhs_nodes(const std::vector<double>& x, const std::vector<double>& w, const Potential& pot, double beta,
                      const TestFunction& phi) {
  std::size_t n = x.size();
  std::vector<double> d1(n), d2(n);
  double transport = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    d1[k] = phi.d1(x[k]);
    d2[k] = phi.d2(x[k]);
    transport -= w[k] * pot.d1(x[k]) * d1[k];
  }
  double inter = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    inter += w[k] * w[k] * d2[k];
    double s = 0.0;
    for (std::size_t l = k + 1; l < n; ++l) {
      double dx = x[k] - x[l];
      s += w[l] * (dx != 0.0 ? (d1[k] - d1[l]) / dx : 0.5 * (d2[k] + d2[l]));
    }
    inter += 2.0 * w[k] * s;
  }
  return transport + 0.25 * beta * inter;
}

}  // namespace

double weak_rhs(const DensityGrid& rho, const Potential& pot, double beta, const TestFunction& phi,
                std::size_t n_quad) {
  auto x = density_quantiles(rho, n_quad);
  double m = rho.mass();
  std::vector<double> w(n_quad, m / static_cast<double>(n_quad));
  return weak_rhs_nodes(x, w, pot, beta, phi);
}

double weak_rhs(const AtomicMeasure& mu, const Potential& pot, double beta, const TestFunction& phi) {
  return weak_rhs_nodes(mu.x, mu.w, pot, beta, phi);
}

double stationarity_residual(const DensityGrid& rho, const Potential& pot, double beta,
                             const std::vector<TestFunction>& panel_in) {
  std::vector<TestFunction> panel = panel_in;
  if (panel.empty()) {
    double lo = rho.x.front(), hi = rho.x.back();
    for (std::size_t i = 0; i < rho.size(); ++i)
      if (rho.rho[i] > 0.0) {
        lo = rho.x[i];
        break;
      }
    for (std::size_t i = rho.size(); i-- > 0;)
      if (rho.rho[i] > 0.0) {
        hi = rho.x[i];
        break;
      }
    double edge = std::max(std::fabs(lo), std::fabs(hi));
    panel = default_panel(1.5 * edge + 1.0);
  }
  // quadrature nodes shared across the panel
  auto x = density_quantiles(rho, 2000);
  std::vector<double> w(x.size(), rho.mass() / static_cast<double>(x.size()));
  double worst = 0.0;
  for (auto& phi : panel) worst = std::max(worst, std::fabs(weak_rhs_nodes(x, w, pot, beta, phi)));
  return worst;
}

// ---------------------------------------------------------------- Stieltjes-field PDE

namespace {

cplx horner(const std::vector<double>& c, cplx z) {
  cplx s(0.0, 0.0);
  for (std::size_t k = c.size(); k-- > 0;) s = s * z + c[k];
  return s;
}

struct PdeSolver {
  PdeGrid g;
  double beta;
  std::vector<double> dv;   // V' coefficients
  std::vector<double> d2v;  // V'' coefficients
  int K;
  std::size_t iL = 0, iR = 0, jc = 0;
  std::vector<double> mom;
  const std::vector<cplx>* cur = nullptr;

  std::size_t idx(std::size_t i, std::size_t j) const { return i * g.nb() + j; }

  cplx multipole(cplx z) const {
    cplx s(0.0, 0.0), inv = 1.0 / z, p = inv;
    for (int k = 0; k <= K; ++k) {
      s -= mom[static_cast<std::size_t>(k)] * p;
      p *= inv;
    }
    return s;
  }

  // value at integer offsets; false when the point lies in the excluded box
  bool value(long i, long j, cplx& out) const {
    if (j < 0) {
      if (!value(i, -j, out)) return false;
      out = std::conj(out);
      return true;
    }
    long na = static_cast<long>(g.na()), nb = static_cast<long>(g.nb());
    if (i < 0 || i >= na || j >= nb) {
      double h = g.h();
      cplx z(g.a[0] + static_cast<double>(i) * h, static_cast<double>(j) * h);
      out = multipole(z);
      return true;
    }
    if (!g.is_active(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) return false;
    out = (*cur)[idx(static_cast<std::size_t>(i), static_cast<std::size_t>(j))];
    return true;
  }

  // upwind-biased derivative along one axis; di,dj is the unit step
  cplx deriv(long i, long j, long di, long dj, double v) const {
    double h = g.h();
    long s = v >= 0.0 ? 1 : -1;  // information comes from the +s side
    cplx fm1, f0, f1, f2;
    value(i, j, f0);
    bool has_m1 = value(i - s * di, j - s * dj, fm1);
    bool has_1 = value(i + s * di, j + s * dj, f1);
    bool has_2 = value(i + 2 * s * di, j + 2 * s * dj, f2);
    double sg = static_cast<double>(s);
    if (has_m1 && has_1 && has_2) return sg * (-2.0 * fm1 - 3.0 * f0 + 6.0 * f1 - f2) / (6.0 * h);
    if (has_1 && has_2) return sg * (-3.0 * f0 + 4.0 * f1 - f2) / (2.0 * h);
    if (has_1) return sg * (f1 - f0) / h;
    if (has_m1) return sg * (f0 - fm1) / h;
    return {0.0, 0.0};
  }

  void compute_moments(const std::vector<cplx>& M) {
    std::size_t nm = static_cast<std::size_t>(K) + 1;
    std::vector<cplx> I(nm, cplx(0.0, 0.0));
    double h = g.h();
    auto simpson_w = [](std::size_t k, std::size_t n) {  // n intervals, even
      if (k == 0 || k == n) return 1.0 / 3.0;
      return (k % 2) ? 4.0 / 3.0 : 2.0 / 3.0;
    };
    auto add = [&](cplx z, cplx val, cplx dz_weight) {
      cplx p(1.0, 0.0);
      for (std::size_t m = 0; m < nm; ++m) {
        I[m] += dz_weight * p * val;
        p *= z;
      }
    };
    // right edge upward, top edge leftward, left edge downward
    for (std::size_t j = 0; j <= jc; ++j)
      add(cplx(g.a[iR], g.b[j]), M[idx(iR, j)], cplx(0.0, h * simpson_w(j, jc)));
    std::size_t nt = iR - iL;
    for (std::size_t k = 0; k <= nt; ++k) {
      std::size_t i = iR - k;
      add(cplx(g.a[i], g.b[jc]), M[idx(i, jc)], cplx(-h * simpson_w(k, nt), 0.0));
    }
    for (std::size_t k = 0; k <= jc; ++k) {
      std::size_t j = jc - k;
      add(cplx(g.a[iL], g.b[j]), M[idx(iL, j)], cplx(0.0, -h * simpson_w(k, jc)));
    }
    mom.resize(nm);
    for (std::size_t m = 0; m < nm; ++m) mom[m] = -I[m].imag() / kPi;
  }

  cplx nonlocal_deriv(cplx z) const {
    // T'(z) = sum_k p_k sum_{j<k} m_j (k-1-j) z^{k-2-j}, V'(x) = sum_k p_k x^k
    cplx s(0.0, 0.0);
    for (std::size_t k = 2; k < dv.size(); ++k) {
      if (dv[k] == 0.0) continue;
      for (std::size_t j = 0; j + 2 <= k; ++j)
        s += dv[k] * mom[j] * static_cast<double>(k - 1 - j) * std::pow(z, static_cast<int>(k - 2 - j));
    }
    return s;
  }

  double rhs(const std::vector<cplx>& M, std::vector<cplx>& out) {
    cur = &M;
    compute_moments(M);
    out.assign(M.size(), cplx(0.0, 0.0));
    double vmax = 0.0;
    for (std::size_t i = 0; i < g.na(); ++i)
      for (std::size_t j = 0; j < g.nb(); ++j) {
        if (!g.is_active(i, j)) continue;
        cplx z(g.a[i], g.b[j]);
        cplx m = M[idx(i, j)];
        cplx lam = 0.5 * beta * m + horner(dv, z);
        double va = lam.real(), vb = j == 0 ? 0.0 : lam.imag();
        long li = static_cast<long>(i), lj = static_cast<long>(j);
        cplx r = va * deriv(li, lj, 1, 0, va) + horner(d2v, z) * m + nonlocal_deriv(z);
        if (j > 0) r += vb * deriv(li, lj, 0, 1, vb);
        if (j == 0) r = cplx(r.real(), 0.0);
        out[idx(i, j)] = r;
        vmax = std::max(vmax, std::fabs(va) + std::fabs(vb));
      }
    return vmax;
  }

  void check_herglotz(const std::vector<cplx>& M, double t) const {
    for (std::size_t i = 0; i < g.na(); ++i)
      for (std::size_t j = 1; j < g.nb(); ++j)
        if (g.is_active(i, j) && !(M[idx(i, j)].imag() > 0.0))
          throw Error(ErrorKind::Instability, "Herglotz property lost at a = " + std::to_string(g.a[i]) +
                                                   ", b = " + std::to_string(g.b[j]) + ", t = " + std::to_string(t));
  }
};

}  // namespace

HydroSolution evolve_stieltjes_pde(const std::function<cplx(cplx)>& M0, const Potential& pot, double beta, double T,
                                   const StieltjesPdeOptions& opt) {
  if (!pot.is_polynomial()) throw Error(ErrorKind::Unsupported, "the Stieltjes-field PDE needs a polynomial potential");
  if (!(opt.h > 0.0) || opt.n_checkpoints == 0) throw Error(ErrorKind::Input, "invalid PDE options");
  PdeSolver S;
  S.beta = beta;
  S.K = opt.multipole_terms;
  const auto& c = pot.coefficients();
  for (std::size_t k = 1; k < c.size(); ++k) S.dv.push_back(static_cast<double>(k) * c[k]);
  for (std::size_t k = 1; k < S.dv.size(); ++k) S.d2v.push_back(static_cast<double>(k) * S.dv[k]);
  if (S.dv.empty()) S.dv.push_back(0.0);
  if (S.d2v.empty()) S.d2v.push_back(0.0);

  double A = opt.half_width > 0.0 ? opt.half_width : std::max(2.5, 1.8 * opt.support_radius);
  long half = static_cast<long>(std::ceil(A / opt.h));
  double h = A / static_cast<double>(half);
  PdeGrid& g = S.g;
  g.a = uniform_grid(-A, A, static_cast<std::size_t>(2 * half + 1));
  g.b = uniform_grid(0.0, A, static_cast<std::size_t>(half + 1));
  g.a_box = opt.support_radius + opt.box_margin;
  g.b_box = opt.box_height;
  if (g.a_box >= 0.8 * A) throw Error(ErrorKind::Range, "support too wide for the PDE window");
  g.active.assign(g.na() * g.nb(), 1);
  for (std::size_t i = 0; i < g.na(); ++i)
    for (std::size_t j = 0; j < g.nb(); ++j)
      if (std::fabs(g.a[i]) < g.a_box && g.b[j] < g.b_box) g.active[i * g.nb() + j] = 0;
  // contour halfway between the box and the outer edge; even interval counts for Simpson
  std::size_t ic = static_cast<std::size_t>(std::lround((0.5 * (g.a_box + A) + A) / h));
  S.iR = std::min(ic, g.na() - 3);
  S.iL = g.na() - 1 - S.iR;
  std::size_t jc = static_cast<std::size_t>(std::lround(0.5 * (g.b_box + A) / h));
  if (jc % 2) --jc;
  S.jc = jc;

  std::vector<cplx> M(g.na() * g.nb(), cplx(0.0, 0.0));
  for (std::size_t i = 0; i < g.na(); ++i)
    for (std::size_t j = 0; j < g.nb(); ++j) {
      if (!g.is_active(i, j)) continue;
      cplx v = M0(cplx(g.a[i], g.b[j]));
      M[S.idx(i, j)] = j == 0 ? cplx(v.real(), 0.0) : v;
    }
  S.check_herglotz(M, 0.0);

  HydroSolution sol;
  sol.method = HydroMethod::StieltjesPde;
  sol.beta = beta;
  auto store = [&](double t) {
    StripField f(g.a, g.b, true);
    f.v = M;
    sol.times.push_back(t);
    sol.stieltjes_fields.push_back(std::move(f));
    S.compute_moments(M);
    sol.moments.push_back(S.mom);
  };
  sol.grid = g;
  store(0.0);

  std::vector<cplx> L(M.size()), u1(M.size()), u2(M.size());
  double t = 0.0;
  for (std::size_t k = 1; k <= opt.n_checkpoints; ++k) {
    double target = T * static_cast<double>(k) / static_cast<double>(opt.n_checkpoints);
    while (t < target) {
      double vmax = S.rhs(M, L);
      double dt = opt.cfl * h / std::max(vmax, 1e-12);
      dt = std::min(dt, target - t);
      if (target - t - dt < 1e-12 * std::max(T, 1.0)) dt = target - t;
      for (std::size_t q = 0; q < M.size(); ++q) u1[q] = M[q] + dt * L[q];
      S.rhs(u1, L);
      for (std::size_t q = 0; q < M.size(); ++q) u2[q] = 0.75 * M[q] + 0.25 * (u1[q] + dt * L[q]);
      S.rhs(u2, L);
      for (std::size_t q = 0; q < M.size(); ++q) M[q] = M[q] / 3.0 + 2.0 / 3.0 * (u2[q] + dt * L[q]);
      t = (dt == target - t) ? target : t + dt;
      S.check_herglotz(M, t);
    }
    store(target);
  }
  return sol;
}

cplx pde_field_at(const HydroSolution& sol, std::size_t k, cplx z) {
  if (sol.method != HydroMethod::StieltjesPde) throw Error(ErrorKind::Unsupported, "not a Stieltjes-field solution");
  if (k >= sol.stieltjes_fields.size()) throw Error(ErrorKind::Range, "checkpoint index out of range");
  const auto& g = sol.grid;
  const auto& f = sol.stieltjes_fields[k];
  bool lower = z.imag() < 0.0;
  if (lower) z = std::conj(z);
  double h = g.h();
  double ua = (z.real() - g.a[0]) / h, ub = z.imag() / h;
  long i0 = static_cast<long>(std::floor(ua)) - 1, j0 = static_cast<long>(std::floor(ub)) - 1;
  long na = static_cast<long>(g.na()), nb = static_cast<long>(g.nb());
  if (i0 < 0 || i0 + 3 >= na || j0 + 3 >= nb) throw Error(ErrorKind::Range, "point outside the PDE window");
  double ta = ua - static_cast<double>(i0), tb = ub - static_cast<double>(j0);
  auto lag = [](double t, double* w) {  // cubic Lagrange on nodes 0..3
    w[0] = -(t - 1) * (t - 2) * (t - 3) / 6.0;
    w[1] = t * (t - 2) * (t - 3) / 2.0;
    w[2] = -t * (t - 1) * (t - 3) / 2.0;
    w[3] = t * (t - 1) * (t - 2) / 6.0;
  };
  double wa[4], wb[4];
  lag(ta, wa);
  lag(tb, wb);
  cplx s(0.0, 0.0);
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      long i = i0 + p, j = j0 + q;
      long jj = j < 0 ? -j : j;
      if (!g.is_active(static_cast<std::size_t>(i), static_cast<std::size_t>(jj)))
        throw Error(ErrorKind::Range, "point too close to the excluded box");
      cplx v = f.at(static_cast<std::size_t>(i), static_cast<std::size_t>(jj));
      s += wa[p] * wb[q] * (j < 0 ? std::conj(v) : v);
    }
  return lower ? std::conj(s) : s;
}

}  // namespace loggas
