#include "loggas/generators.hpp"

#include <algorithm>
#include <cmath>

#include "loggas/fft.hpp"

namespace loggas {

namespace {

double c_norm(int kappa) { return 2.0 / std::tgamma(static_cast<double>(kappa) + 2.0); }

double default_R(const MeasurePath& path, double R) { return R > 0.0 ? R : 1.5 * path.support_bound() + 1.0; }

// out[m] = sum_i s[i] k((m - i) da), m = 0..n-1, by zero-padded FFT convolution.
std::vector<cplx> row_convolution(const std::vector<cplx>& s, double da, const std::function<cplx(double)>& k) {
  std::size_t n = s.size();
  std::size_t P = next_pow2(2 * n);
  std::vector<cplx> A(P, cplx(0.0, 0.0)), B(P, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) A[i] = s[i];
  for (std::size_t q = 0; q < n; ++q) {
    B[q] = k(static_cast<double>(q) * da);
    if (q > 0) B[P - q] = k(-static_cast<double>(q) * da);
  }
  fft_inplace(A, true);
  fft_inplace(B, true);
  for (std::size_t q = 0; q < P; ++q) A[q] *= B[q];
  fft_inplace(A, false);
  std::vector<cplx> out(n);
  double inv = 1.0 / static_cast<double>(P);
  for (std::size_t m = 0; m < n; ++m) out[m] = A[m] * inv;
  return out;
}

std::vector<double> trapezoid_weights(std::size_t n, double da) {
  std::vector<double> w(n, da);
  if (n > 0) w.front() = w.back() = 0.5 * da;
  return w;
}

StripField constant_in_b(const StripField& grid, const std::vector<double>& line) {
  StripField f(grid.a, grid.b, true);
  for (std::size_t i = 0; i < f.na(); ++i)
    for (std::size_t j = 0; j < f.nb(); ++j) f.at(i, j) = line[i];
  return f;
}

std::vector<double> apply_K(int kappa, double b_max, const std::vector<double>& g, double da) {
  DecompositionSpec spec;
  spec.kappa = kappa;
  spec.b_max = b_max;
  return kernel_apply_line(spec, g, da);
}

double line_l1(const std::vector<double>& v, double da, double b_max) {
  double s = 0.0;
  for (double x : v) s += std::fabs(x);
  return s * da * b_max;
}

// Builds g(x) = chi_R(x) mult(x) c_kappa sum_j wq_j Im[sum_i da h_ij kern_j(x - a_i, a_i)] for a
// kernel that factorizes as coeff(a) * kern(u; b). terms lists (coeff, kernel) pairs.
struct KernelTerm {
  std::function<double(double)> coeff;
  std::function<cplx(double, double)> kern;  // (u, b)
};

std::vector<double> strip_to_line(const StripField& h, int kappa, double R, const std::vector<KernelTerm>& terms,
                                  const std::function<double(double)>& mult) {
  std::size_t na = h.na();
  double da = h.da();
  auto wa = trapezoid_weights(na, da);
  auto wq = b_quadrature_weights(h.b, 1.0 + kappa);
  std::vector<double> g(na, 0.0);
  for (const auto& term : terms) {
    std::vector<double> ca(na);
    for (std::size_t i = 0; i < na; ++i) ca[i] = term.coeff(h.a[i]);
    for (std::size_t j = 0; j < h.nb(); ++j) {
      std::vector<cplx> s(na);
      bool any = false;
      for (std::size_t i = 0; i < na; ++i) {
        s[i] = wa[i] * ca[i] * h.at(i, j);
        any = any || s[i] != cplx(0.0, 0.0);
      }
      if (!any) continue;
      double bj = h.b[j];
      auto conv = row_convolution(s, da, [&](double u) { return term.kern(u, bj); });
      for (std::size_t m = 0; m < na; ++m) g[m] += wq[j] * conv[m].imag();
    }
  }
  double c = c_norm(kappa);
  for (std::size_t m = 0; m < na; ++m) g[m] *= c * chi_window(h.a[m], R) * mult(h.a[m]);
  return g;
}

std::vector<KernelTerm> remainder_terms(const Potential& pot) {
  std::vector<KernelTerm> terms;
  if (!pot.is_polynomial()) return terms;
  int deg = pot.degree();
  // (x-a)^3 W_a(x-a) = sum_{k>=3} V^{(k+1)}(a) (x-a)^k / k!
  for (int k = 3; k + 1 <= deg; ++k) {
    double fact = std::tgamma(static_cast<double>(k) + 1.0);
    terms.push_back({[&pot, k, fact](double a) { return pot.d(k + 1, a) / fact; },
                     [k](double u, double b) { return std::pow(u, k) / std::pow(cplx(u, -b), 2); }});
  }
  return terms;
}

// Direct sum for potentials given by callback.
std::vector<double> remainder_line_direct(const StripField& h, int kappa, const Potential& pot, double R) {
  std::size_t na = h.na();
  auto wa = trapezoid_weights(na, h.da());
  auto wq = b_quadrature_weights(h.b, 1.0 + kappa);
  std::vector<double> g(na, 0.0);
  for (std::size_t m = 0; m < na; ++m) {
    double x = h.a[m];
    double chi = chi_window(x, R);
    if (chi == 0.0) continue;
    double s = 0.0;
    for (std::size_t i = 0; i < na; ++i) {
      double u = x - h.a[i];
      double w3 = u * u * u * taylor_remainder_W(pot, h.a[i], u);
      for (std::size_t j = 0; j < h.nb(); ++j) {
        cplx v = h.at(i, j);
        if (v == cplx(0.0, 0.0)) continue;
        s += wa[i] * wq[j] * (v * w3 / std::pow(cplx(u, -h.b[j]), 2)).imag();
      }
    }
    g[m] = c_norm(kappa) * chi * s;
  }
  return g;
}

std::vector<double> remainder_line(const StripField& h, int kappa, const Potential& pot, double R) {
  if (!pot.is_polynomial()) return remainder_line_direct(h, kappa, pot, R);
  auto terms = remainder_terms(pot);
  if (terms.empty()) return std::vector<double>(h.na(), 0.0);
  return strip_to_line(h, kappa, R, terms, [](double) { return 1.0; });
}

std::vector<double> ext_line(const StripField& h, int kappa, const Potential& pot, double R) {
  std::vector<KernelTerm> terms{{[](double) { return 1.0; }, [](double u, double b) { return 1.0 / std::pow(cplx(u, -b), 2); }}};
  return strip_to_line(h, kappa, R, terms, [&pot](double x) { return pot.d1(x); });
}

// Probes unit-mass sources (a_s, b_j) of an operator whose line image is line_of(h).
void probe_columns(OperatorImage& out, const StripField& h, int target_kappa, std::size_t n_columns,
                   const std::function<bool(double)>& admissible,
                   const std::function<std::vector<double>(const StripField&)>& line_of) {
  std::size_t na = h.na();
  double da = h.da();
  double b_max = h.b.back();
  StripField unit(h.a, h.b, true);
  std::size_t stride = std::max<std::size_t>(1, na / std::max<std::size_t>(1, n_columns));
  auto wa = trapezoid_weights(na, da);
  auto wb = b_cell_widths(h.b);
  for (std::size_t i = 0; i < na; i += stride) {
    if (!admissible(h.a[i])) continue;
    double best = 0.0;
    for (std::size_t j = 0; j < h.nb(); ++j) {
      // unit mass in cell (i, j) under the quadrature used by strip_to_line
      std::fill(unit.v.begin(), unit.v.end(), cplx(0.0, 0.0));
      unit.at(i, j) = 1.0 / (wa[i] * wb[j]);
      auto img = apply_K(target_kappa, b_max, line_of(unit), da);
      best = std::max(best, line_l1(img, da, b_max));
    }
    out.column_a.push_back(h.a[i]);
    out.column_mass.push_back(best);
    out.norm = std::max(out.norm, best);
  }
}

}  // namespace

// ---------------------------------------------------------------- characteristics

CharPath characteristics_v0(cplx z_T, cplx c_T, const MeasurePath& path, double beta, double T,
                            const CharOptions& opt, double curvature) {
  if (!(z_T.imag() > 0.0)) throw Error(ErrorKind::Input, "characteristics need Im z_T > 0");
  if (opt.n_steps == 0 || !(T >= 0.0)) throw Error(ErrorKind::Input, "invalid characteristic options");
  CharPath p;
  p.z_T = z_T;
  p.c_T = c_T;
  auto rhs = [&](double t, cplx Z, cplx C, cplx& dZ, cplx& dC) {
    dZ = -curvature * Z - 0.25 * beta * path.S(t, Z);
    dC = -(curvature + 0.25 * beta * path.dS(t, Z)) * C;
  };
  double h = -T / static_cast<double>(opt.n_steps);
  cplx Z = z_T, C = c_T;
  double t = T;
  std::vector<CharSample> rev{{t, Z.real(), Z.imag(), C, C}};
  for (std::size_t n = 0; n < opt.n_steps; ++n) {
    cplx k1z, k1c, k2z, k2c, k3z, k3c, k4z, k4c;
    rhs(t, Z, C, k1z, k1c);
    p.max_im_velocity = std::max(p.max_im_velocity, k1z.imag());
    rhs(t + 0.5 * h, Z + 0.5 * h * k1z, C + 0.5 * h * k1c, k2z, k2c);
    rhs(t + 0.5 * h, Z + 0.5 * h * k2z, C + 0.5 * h * k2c, k3z, k3c);
    rhs(t + h, Z + h * k3z, C + h * k3c, k4z, k4c);
    Z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    C += h / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
    t = (n + 1 == opt.n_steps) ? 0.0 : t + h;
    if (!(Z.imag() > opt.b_floor)) {
      p.killed = true;
      break;
    }
    rev.push_back({t, Z.real(), Z.imag(), C, C});
  }
  p.samples.assign(rev.rbegin(), rev.rend());
  return p;
}

cplx transport_velocity(const StripContext& ctx, double t, cplx z) {
  double a = z.real(), b = z.imag();
  const Potential& V = *ctx.pot;
  cplx S = ctx.path->S(t, z);
  return 0.25 * ctx.beta * S + cplx(V.d1(a) - 0.5 * V.d3(a) * b * b, V.d2(a) * b);
}

namespace {
cplx mu_factor(const StripContext& ctx, double t, cplx z) {
  double a = z.real(), b = z.imag();
  const Potential& V = *ctx.pot;
  return cplx(V.d2(a), b * V.d3(a)) + 0.25 * ctx.beta * ctx.path->dS(t, z);
}
}  // namespace

cplx transport_nu(const StripContext& ctx, double t, cplx z) {
  cplx lam = transport_velocity(ctx, t, z);
  return (1.0 + ctx.kappa) * lam.imag() / z.imag() - mu_factor(ctx, t, z);
}

CharPath characteristics_full(cplx z_T, cplx c_T, int kappa, const MeasurePath& path, const Potential& pot,
                              double beta, double T, const CharOptions& opt) {
  if (!(z_T.imag() > 0.0)) throw Error(ErrorKind::Input, "characteristics need Im z_T > 0");
  if (opt.n_steps == 0 || !(T >= 0.0)) throw Error(ErrorKind::Input, "invalid characteristic options");
  StripContext ctx;
  ctx.kappa = kappa;
  ctx.beta = beta;
  ctx.path = &path;
  ctx.pot = &pot;
  CharPath p;
  p.z_T = z_T;
  p.c_T = c_T;
  p.kappa = kappa;
  // state (z, c, c~); in physical time dz/dt = -lambda, dc/dt = nu c, dc~/dt = Re(nu) c~
  struct St {
    cplx z, c, ct;
  };
  auto rhs = [&](double t, const St& s) {
    cplx lam = transport_velocity(ctx, t, s.z);
    cplx nu = transport_nu(ctx, t, s.z);
    return St{-lam, nu * s.c, nu.real() * s.ct};
  };
  auto axpy = [](const St& s, double h, const St& k) { return St{s.z + h * k.z, s.c + h * k.c, s.ct + h * k.ct}; };
  double h = -T / static_cast<double>(opt.n_steps);
  St s{z_T, c_T, c_T};
  double t = T;
  std::vector<CharSample> rev{{t, z_T.real(), z_T.imag(), c_T, c_T}};
  for (std::size_t n = 0; n < opt.n_steps; ++n) {
    St k1 = rhs(t, s);
    p.max_im_velocity = std::max(p.max_im_velocity, k1.z.imag());
    p.min_re_ctilde_rate = std::min(p.min_re_ctilde_rate, transport_nu(ctx, t, s.z).real());
    St k2 = rhs(t + 0.5 * h, axpy(s, 0.5 * h, k1));
    St k3 = rhs(t + 0.5 * h, axpy(s, 0.5 * h, k2));
    St k4 = rhs(t + h, axpy(s, h, k3));
    s = St{s.z + h / 6.0 * (k1.z + 2.0 * k2.z + 2.0 * k3.z + k4.z),
           s.c + h / 6.0 * (k1.c + 2.0 * k2.c + 2.0 * k3.c + k4.c),
           s.ct + h / 6.0 * (k1.ct + 2.0 * k2.ct + 2.0 * k3.ct + k4.ct)};
    t = (n + 1 == opt.n_steps) ? 0.0 : t + h;
    if (!(s.z.imag() > opt.b_floor)) {
      p.killed = true;
      break;
    }
    rev.push_back({t, s.z.real(), s.z.imag(), s.c, s.ct});
  }
  p.samples.assign(rev.rbegin(), rev.rend());
  return p;
}

double char_bound_excess(const CharPath& p, double beta, double L) {
  double worst = -1e300;
  const auto& s = p.samples;
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t k = i + 1; k < s.size(); ++k) {
      double dt = s[k].t - s[i].t;
      double bound = (s[k].b * s[k].b + beta * dt) * std::exp(2.0 * L * dt);
      worst = std::max(worst, s[i].b * s[i].b - bound);
    }
  return worst;
}

bool char_b_monotone(const CharPath& p) {
  for (std::size_t i = 0; i + 1 < p.samples.size(); ++i)
    if (p.samples[i + 1].b > p.samples[i].b) return false;
  return true;
}

// ---------------------------------------------------------------- strip operators

StripField apply_transport(const StripField& h, double t, const StripContext& ctx, int order) {
  std::size_t na = h.na(), nb = h.nb();
  StripField out(h.a, h.b, true);
  if (na < 3 || nb < 3) throw Error(ErrorKind::Input, "apply_transport needs at least a 3 x 3 grid");
  double da = h.da();
  std::vector<cplx> lam(na * nb), F1(na * nb), F2(na * nb);
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      cplx l = transport_velocity(ctx, t, cplx(h.a[i], h.b[j]));
      lam[i * nb + j] = l;
      F1[i * nb + j] = l.real() * h.at(i, j);
      F2[i * nb + j] = l.imag() * h.at(i, j);
    }
  auto F1at = [&](long i, std::size_t j) -> cplx {
    if (i < 0 || i >= static_cast<long>(na)) return {0.0, 0.0};
    return F1[static_cast<std::size_t>(i) * nb + j];
  };
  // b direction: index -1 is the face b = 0 carrying h(a, b_min); above the top nothing flows in
  auto bval = [&](std::size_t, long j) -> double { return j < 0 ? 0.0 : h.b[static_cast<std::size_t>(j)]; };
  auto F2at = [&](std::size_t i, long j) -> cplx {
    if (j >= static_cast<long>(nb)) return {0.0, 0.0};
    if (j < 0) return lam[i * nb].imag() * h.at(i, 0);
    return F2[i * nb + static_cast<std::size_t>(j)];
  };
  auto deriv3 = [](double x0, double x1, double x2, cplx f0, cplx f1, cplx f2) {
    double w0 = 1.0 / (x0 - x1) + 1.0 / (x0 - x2);
    double w1 = (x0 - x2) / ((x1 - x0) * (x1 - x2));
    double w2 = (x0 - x1) / ((x2 - x0) * (x2 - x1));
    return w0 * f0 + w1 * f1 + w2 * f2;
  };
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      cplx l = lam[i * nb + j];
      long li = static_cast<long>(i), lj = static_cast<long>(j);
      long s1 = l.real() >= 0.0 ? -1 : 1;  // upwind neighbour offset in a
      cplx da1 = order >= 2 ? static_cast<double>(-s1) * (3.0 * F1at(li, j) - 4.0 * F1at(li + s1, j) + F1at(li + 2 * s1, j)) / (2.0 * da)
                            : static_cast<double>(-s1) * (F1at(li, j) - F1at(li + s1, j)) / da;
      long s2 = l.imag() >= 0.0 ? -1 : 1;
      cplx db1;
      long j1 = lj + s2, j2 = lj + 2 * s2;
      auto bpos = [&](long jj) {
        if (jj >= static_cast<long>(nb)) return h.b.back() + (h.b.back() - h.b[nb - 2]) * static_cast<double>(jj - static_cast<long>(nb) + 1);
        return bval(i, jj);
      };
      bool second = order >= 2 && j2 >= -1;
      if (s2 < 0 && j2 < -1) second = false;
      if (second) {
        db1 = deriv3(h.b[j], bpos(j1), bpos(j2), F2at(i, lj), F2at(i, j1), F2at(i, j2));
      } else {
        db1 = (F2at(i, lj) - F2at(i, j1)) / (h.b[j] - bpos(j1));
      }
      cplx nu = transport_nu(ctx, t, cplx(h.a[i], h.b[j]));
      out.at(i, j) = -da1 - db1 - nu * h.at(i, j);
    }
  return out;
}

OperatorImage apply_nonlocal_g3(const StripField& h, int kappa, int target_kappa, const Potential& pot, double R,
                                std::size_t norm_columns) {
  if (h.na() < 2 || h.nb() == 0) throw Error(ErrorKind::Input, "empty strip field");
  OperatorImage out;
  double b_max = h.b.back();
  auto g = remainder_line(h, kappa, pot, R);
  out.image = constant_in_b(h, apply_K(target_kappa, b_max, g, h.da()));
  if (norm_columns > 0)
    probe_columns(out, h, target_kappa, norm_columns, [](double) { return true; },
                  [&](const StripField& u) { return remainder_line(u, kappa, pot, R); });
  return out;
}

OperatorImage apply_ext(const StripField& h, int kappa, int target_kappa, const Potential& pot, double R,
                        std::size_t norm_columns) {
  if (h.na() < 2 || h.nb() == 0) throw Error(ErrorKind::Input, "empty strip field");
  for (std::size_t i = 0; i < h.na(); ++i)
    if (std::fabs(h.a[i]) < 2.0 * R)
      for (std::size_t j = 0; j < h.nb(); ++j)
        if (h.at(i, j) != cplx(0.0, 0.0)) throw Error(ErrorKind::Input, "off-support field must vanish for |a| < 2R");
  OperatorImage out;
  double b_max = h.b.back();
  auto g = ext_line(h, kappa, pot, R);
  out.image = constant_in_b(h, apply_K(target_kappa, b_max, g, h.da()));
  if (norm_columns > 0)
    probe_columns(out, h, target_kappa, norm_columns, [R](double a) { return std::fabs(a) >= 2.0 * R; },
                  [&](const StripField& u) { return ext_line(u, kappa, pot, R); });
  return out;
}

BoundaryTrace BoundaryTrace::of(const StripField& h) {
  BoundaryTrace tr;
  std::size_t nb = h.nb();
  for (std::size_t i = 0; i < h.na(); ++i) tr.top.push_back(h.at(i, nb - 1));
  for (std::size_t j = 0; j < nb; ++j) {
    tr.left.push_back(h.at(0, j));
    tr.right.push_back(h.at(h.na() - 1, j));
  }
  return tr;
}

namespace {

// Outflow terms as a function of x on the a grid (before chi_R and K).
std::vector<double> boundary_line(const BoundaryTrace& tr, const StripField& grid, double t, const StripContext& ctx) {
  std::size_t na = grid.na(), nb = grid.nb();
  if (tr.top.size() != na || tr.left.size() != nb || tr.right.size() != nb)
    throw Error(ErrorKind::Input, "boundary trace does not match the grid");
  double da = grid.da();
  double b_max = grid.b.back();
  double c = c_norm(ctx.kappa);
  auto wa = trapezoid_weights(na, da);
  std::vector<double> g(na, 0.0);
  std::vector<cplx> s(na);
  bool any = false;
  for (std::size_t i = 0; i < na; ++i) {
    double l2 = transport_velocity(ctx, t, cplx(grid.a[i], b_max)).imag();
    s[i] = wa[i] * std::max(l2, 0.0) * tr.top[i];
    any = any || s[i] != cplx(0.0, 0.0);
  }
  if (any) {
    auto conv = row_convolution(s, da, [b_max](double u) { return 1.0 / cplx(u, -b_max); });
    double pw = std::pow(b_max, 1.0 + ctx.kappa);
    for (std::size_t m = 0; m < na; ++m) g[m] += c * pw * conv[m].imag();
  }
  auto wq = b_quadrature_weights(grid.b, 1.0 + ctx.kappa);
  double aL = grid.a.front(), aR = grid.a.back();
  for (std::size_t j = 0; j < nb; ++j) {
    double bj = grid.b[j];
    double outR = std::max(transport_velocity(ctx, t, cplx(aR, bj)).real(), 0.0);
    double outL = std::max(-transport_velocity(ctx, t, cplx(aL, bj)).real(), 0.0);
    if (outR == 0.0 && outL == 0.0) continue;
    for (std::size_t m = 0; m < na; ++m) {
      double x = grid.a[m];
      cplx v = outR * tr.right[j] / cplx(x - aR, -bj) + outL * tr.left[j] / cplx(x - aL, -bj);
      g[m] += c * wq[j] * v.imag();
    }
  }
  for (std::size_t m = 0; m < na; ++m) g[m] *= chi_window(grid.a[m], ctx.R);
  return g;
}

}  // namespace

OperatorImage boundary_kernels(const BoundaryTrace& trace, const StripField& grid, int target_kappa, double t,
                               const StripContext& ctx) {
  OperatorImage out;
  double b_max = grid.b.back();
  auto img = apply_K(target_kappa, b_max, boundary_line(trace, grid, t, ctx), grid.da());
  out.image = constant_in_b(grid, img);
  double sup = 0.0;
  for (auto v : trace.top) sup = std::max(sup, std::abs(v));
  for (auto v : trace.left) sup = std::max(sup, std::abs(v));
  for (auto v : trace.right) sup = std::max(sup, std::abs(v));
  out.norm = sup > 0.0 ? line_l1(img, grid.da(), b_max) / sup : 0.0;
  return out;
}

// ---------------------------------------------------------------- evolve_h

namespace {

// Departure data of one semi-Lagrangian step for every node.
struct Departure {
  std::vector<double> a, b;
  std::vector<cplx> factor;
};

Departure departures(const StripField& grid, double t_arr, double dtau, const StripContext& ctx) {
  std::size_t na = grid.na(), nb = grid.nb();
  Departure d;
  d.a.resize(na * nb);
  d.b.resize(na * nb);
  d.factor.resize(na * nb);
  const Potential& V = *ctx.pot;
  auto m_rest = [&](double t, cplx z) {
    double a = z.real(), b = z.imag();
    return 0.25 * ctx.beta * std::conj(ctx.path->dS(t, z)) + cplx(V.d2(a) - 0.5 * b * b * V.d(4, a), -b * V.d3(a));
  };
  const int n_sub = 2;
  double hs = dtau / n_sub;
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      cplx z(grid.a[i], grid.b[j]);
      cplx I(0.0, 0.0);
      double t = t_arr;
      bool ok = true;
      // backward in tau is forward in t: dz/dt = -lambda, dI/dt = m_rest. A characteristic that
      // left the real axis carries (b_dep/b)^{1+kappa} = 0.
      auto f = [&](double tt, cplx zz) { return -transport_velocity(ctx, tt, zz); };
      for (int s = 0; s < n_sub && ok; ++s) {
        cplx k1 = f(t, z), q1 = m_rest(t, z);
        cplx z2 = z + 0.5 * hs * k1;
        if (!(z2.imag() > 0.0)) { ok = false; break; }
        cplx k2 = f(t + 0.5 * hs, z2), q2 = m_rest(t + 0.5 * hs, z2);
        cplx z3 = z + 0.5 * hs * k2;
        if (!(z3.imag() > 0.0)) { ok = false; break; }
        cplx k3 = f(t + 0.5 * hs, z3), q3 = m_rest(t + 0.5 * hs, z3);
        cplx z4 = z + hs * k3;
        if (!(z4.imag() > 0.0)) { ok = false; break; }
        cplx k4 = f(t + hs, z4), q4 = m_rest(t + hs, z4);
        z += hs / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        I += hs / 6.0 * (q1 + 2.0 * q2 + 2.0 * q3 + q4);
        ok = z.imag() > 0.0;
        t += hs;
      }
      std::size_t q = i * nb + j;
      d.a[q] = z.real();
      d.b[q] = ok ? z.imag() : grid.b[j];
      d.factor[q] = ok ? std::pow(z.imag() / grid.b[j], 1.0 + ctx.kappa) * std::exp(-I) : cplx(0.0, 0.0);
    }
  return d;
}

void lagrange4(double t, double w[4]) {  // nodes -1, 0, 1, 2
  w[0] = -t * (t - 1.0) * (t - 2.0) / 6.0;
  w[1] = (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0;
  w[2] = -(t + 1.0) * t * (t - 2.0) / 2.0;
  w[3] = (t + 1.0) * t * (t - 1.0) / 6.0;
}

// Interpolates h at (a, b): cubic (or linear) in a and in log b; zero outside the a range,
// constant below b_min.
cplx strip_sample(const StripField& h, const std::vector<double>& logb, double a, double b, bool cubic) {
  std::size_t na = h.na(), nb = h.nb();
  double ua = (a - h.a[0]) / h.da();
  if (ua < -1.0 || ua > static_cast<double>(na)) return {0.0, 0.0};
  double lb = std::log(std::max(b, h.b[0]));
  std::size_t jb = static_cast<std::size_t>(std::upper_bound(logb.begin(), logb.end(), lb) - logb.begin());
  jb = std::min(std::max<std::size_t>(jb, 1), nb - 1) - 1;  // interval [jb, jb+1]
  long ia = static_cast<long>(std::floor(ua));
  double ta = ua - static_cast<double>(ia);
  auto hv = [&](long i, long j) -> cplx {
    if (i < 0 || i >= static_cast<long>(na)) return {0.0, 0.0};
    j = std::min(std::max(j, 0L), static_cast<long>(nb) - 1);
    return h.at(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  };
  if (!cubic) {
    double tb = (lb - logb[jb]) / (logb[jb + 1] - logb[jb]);
    long j0 = static_cast<long>(jb);
    return (1 - ta) * ((1 - tb) * hv(ia, j0) + tb * hv(ia, j0 + 1)) + ta * ((1 - tb) * hv(ia + 1, j0) + tb * hv(ia + 1, j0 + 1));
  }
  double wa[4];
  lagrange4(ta, wa);
  // Lagrange weights in log b on the (possibly non-uniform) nodes jb-1 .. jb+2
  long j0 = static_cast<long>(jb) - 1;
  double nodes[4], wb[4];
  for (int q = 0; q < 4; ++q) {
    long jj = std::min(std::max(j0 + q, 0L), static_cast<long>(nb) - 1);
    nodes[q] = logb[static_cast<std::size_t>(jj)];
  }
  bool distinct = nodes[0] < nodes[1] && nodes[2] < nodes[3];
  if (!distinct) {  // near the ends fall back to linear in log b
    double tb = (lb - logb[jb]) / (logb[jb + 1] - logb[jb]);
    for (int q = 0; q < 4; ++q) wb[q] = 0.0;
    wb[1] = 1 - tb;
    wb[2] = tb;
  } else {
    for (int q = 0; q < 4; ++q) {
      double w = 1.0;
      for (int r = 0; r < 4; ++r)
        if (r != q) w *= (lb - nodes[r]) / (nodes[q] - nodes[r]);
      wb[q] = w;
    }
  }
  cplx s(0.0, 0.0);
  for (int p = 0; p < 4; ++p) {
    if (wa[p] == 0.0) continue;
    cplx row(0.0, 0.0);
    for (int q = 0; q < 4; ++q) row += wb[q] * hv(ia - 1 + p, j0 + q);
    s += wa[p] * row;
  }
  return s;
}

double strip_linf(const StripField& h) {
  double m = 0.0;
  for (auto v : h.v) m = std::max(m, std::abs(v));
  return m;
}

// One first-order finite-volume transport step of length dtau at physical time t.
void upwind_step(StripField& h, double t, double dtau, const StripContext& ctx, const std::vector<double>& faces) {
  std::size_t na = h.na(), nb = h.nb();
  double da = h.da();
  std::vector<cplx> next(h.v.size());
  // a faces between i and i+1, b faces between j and j+1 (faces[j] is the lower face of cell j)
  std::vector<cplx> Fa((na + 1) * nb, cplx(0.0, 0.0)), Fb(na * (nb + 1), cplx(0.0, 0.0));
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t i = 0; i + 1 < na; ++i) {
      double l1 = transport_velocity(ctx, t, cplx(0.5 * (h.a[i] + h.a[i + 1]), h.b[j])).real();
      Fa[(i + 1) * nb + j] = l1 * (l1 >= 0.0 ? h.at(i, j) : h.at(i + 1, j));
    }
  for (std::size_t j = 0; j < nb; ++j) {  // outflow through the side edges
    double lL = transport_velocity(ctx, t, cplx(h.a[0], h.b[j])).real();
    double lR = transport_velocity(ctx, t, cplx(h.a[na - 1], h.b[j])).real();
    Fa[0 * nb + j] = std::min(lL, 0.0) * h.at(0, j);
    Fa[na * nb + j] = std::max(lR, 0.0) * h.at(na - 1, j);
  }
  for (std::size_t i = 0; i < na; ++i) {
    for (std::size_t j = 0; j <= nb; ++j) {
      double bf = j == 0 ? h.b[0] : (j == nb ? faces[nb] : faces[j]);
      double l2 = transport_velocity(ctx, t, cplx(h.a[i], bf)).imag();
      cplx below = j == 0 ? h.at(i, 0) : h.at(i, j - 1);
      cplx above = j == nb ? cplx(0.0, 0.0) : h.at(i, j);
      if (j == nb) above = cplx(0.0, 0.0);
      Fb[i * (nb + 1) + j] = l2 * (l2 >= 0.0 ? below : above);
    }
  }
  for (std::size_t i = 0; i < na; ++i)
    for (std::size_t j = 0; j < nb; ++j) {
      double wb = faces[j + 1] - faces[j];
      cplx div = (Fa[(i + 1) * nb + j] - Fa[i * nb + j]) / da + (Fb[i * (nb + 1) + j + 1] - Fb[i * (nb + 1) + j]) / wb;
      cplx v = h.at(i, j) - dtau * div;
      cplx nu = transport_nu(ctx, t, cplx(h.a[i], h.b[j]));
      next[i * nb + j] = v * std::exp(-nu * dtau);
    }
  h.v = std::move(next);
}

double upwind_rate(const StripField& h, double t, const StripContext& ctx, const std::vector<double>& faces) {
  double r = 0.0;
  for (std::size_t i = 0; i < h.na(); ++i)
    for (std::size_t j = 0; j < h.nb(); ++j) {
      cplx l = transport_velocity(ctx, t, cplx(h.a[i], h.b[j]));
      r = std::max(r, std::fabs(l.real()) / h.da() + std::fabs(l.imag()) / (faces[j + 1] - faces[j]));
    }
  return r;
}

}  // namespace

HEvolution evolve_h(const StripField& h_T, int kappa, const MeasurePath& path, const Potential& pot, double beta,
                    double T, const EvolveHOptions& opt) {
  if (h_T.na() < 4 || h_T.nb() < 4) throw Error(ErrorKind::Input, "evolve_h needs at least a 4 x 4 grid");
  if (opt.n_steps == 0 || opt.n_out == 0 || !(T >= 0.0)) throw Error(ErrorKind::Input, "invalid evolve_h options");
  StripContext ctx;
  ctx.kappa = kappa;
  ctx.beta = beta;
  ctx.R = default_R(path, opt.R);
  ctx.path = &path;
  ctx.pot = &pot;
  HEvolution ev;
  StripField h = h_T;
  double offset = 0.0;
  ev.times.push_back(T);
  ev.h.push_back(h);
  ev.offset.push_back(0.0);

  double dtau = T / static_cast<double>(opt.n_steps);
  double b_max = h.b.back();
  std::size_t nb = h.nb();
  std::vector<double> logb(nb);
  for (std::size_t j = 0; j < nb; ++j) logb[j] = std::log(h.b[j]);
  std::vector<double> faces(nb + 1);
  faces[0] = 0.0;
  for (std::size_t j = 0; j + 1 < nb; ++j) faces[j + 1] = 0.5 * (h.b[j] + h.b[j + 1]);
  faces[nb] = b_max;
  auto wa = trapezoid_weights(h.na(), h.da());
  auto wq = b_quadrature_weights(h.b, 1.0 + kappa);
  bool stationary = path.times().size() == 1;
  Departure dep;
  bool have_dep = false;

  std::size_t out_every = std::max<std::size_t>(1, opt.n_steps / opt.n_out);
  for (std::size_t n = 0; n < opt.n_steps; ++n) {
    double t_hi = T - static_cast<double>(n) * dtau;  // physical time at the start of the step
    double t_lo = T - static_cast<double>(n + 1) * dtau;
    if (n + 1 == opt.n_steps) t_lo = 0.0;

    // bounded parts: line image and constant-offset rate of the current state
    auto source_of = [&](const StripField& hs, double ts, double& offset_rate) {
      std::vector<double> src(hs.na(), 0.0);
      offset_rate = 0.0;
      if (opt.boundary) {
        auto img = apply_K(kappa, b_max, boundary_line(BoundaryTrace::of(hs), hs, ts, ctx), hs.da());
        for (std::size_t i = 0; i < hs.na(); ++i) src[i] += img[i];
      }
      if (opt.nonlocal) {
        auto img = apply_K(kappa, b_max, remainder_line(hs, kappa, pot, ctx.R), hs.da());
        for (std::size_t i = 0; i < hs.na(); ++i) src[i] += img[i];
        double dconst = 0.0;
        for (std::size_t i = 0; i < hs.na(); ++i) {
          double v3 = pot.d3(hs.a[i]);
          if (v3 == 0.0) continue;
          for (std::size_t j = 0; j < nb; ++j) dconst += wa[i] * wq[j] * v3 * hs.at(i, j).imag();
        }
        offset_rate = 0.5 * c_norm(kappa) * dconst;
      }
      return src;
    };
    auto add_line = [&](StripField& hs, const std::vector<double>& src, double w) {
      for (std::size_t i = 0; i < hs.na(); ++i)
        if (src[i] != 0.0)
          for (std::size_t j = 0; j < nb; ++j) hs.at(i, j) += w * src[i];
    };
    // half step of the bounded parts by Heun's method
    auto source_half = [&](double ts) {
      if (!opt.boundary && !opt.nonlocal) return;
      double r1 = 0.0, r2 = 0.0;
      auto s1 = source_of(h, ts, r1);
      StripField h1 = h;
      add_line(h1, s1, 0.5 * dtau);
      auto s2 = source_of(h1, ts - 0.5 * dtau, r2);
      add_line(h, s1, 0.25 * dtau);
      add_line(h, s2, 0.25 * dtau);
      offset += 0.25 * dtau * (r1 + r2);
    };
    source_half(t_hi);

    // transport
    double l1_before = strip_norms(h).l1, linf_before = strip_linf(h);
    if (opt.scheme == TransportScheme::SemiLagrangian) {
      if (!have_dep || !stationary) {
        dep = departures(h, t_lo, dtau, ctx);
        have_dep = true;
      }
      StripField next(h.a, h.b, true);
      for (std::size_t q = 0; q < h.v.size(); ++q)
        next.v[q] = dep.factor[q] * strip_sample(h, logb, dep.a[q], dep.b[q], opt.cubic);
      h = std::move(next);
      ev.substeps++;
      double l1 = strip_norms(h).l1, linf = strip_linf(h);
      ev.transport_l1.push_back(l1_before > 0.0 ? l1 / l1_before : 0.0);
      ev.transport_linf.push_back(linf_before > 0.0 ? linf / linf_before : 0.0);
    } else {
      double rate = upwind_rate(h, 0.5 * (t_hi + t_lo), ctx, faces);
      std::size_t nsub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(rate * dtau / opt.cfl)));
      double ds = dtau / static_cast<double>(nsub);
      for (std::size_t s = 0; s < nsub; ++s) {
        double l1b = strip_norms(h).l1, lib = strip_linf(h);
        upwind_step(h, t_hi - (static_cast<double>(s) + 0.5) * ds, ds, ctx, faces);
        ev.substeps++;
        double l1 = strip_norms(h).l1, linf = strip_linf(h);
        ev.transport_l1.push_back(l1b > 0.0 ? l1 / l1b : 0.0);
        ev.transport_linf.push_back(lib > 0.0 ? linf / lib : 0.0);
      }
    }
    source_half(0.5 * (t_hi + t_lo));

    if ((n + 1) % out_every == 0 || n + 1 == opt.n_steps) {
      if (ev.times.back() != t_lo) {
        ev.times.push_back(t_lo);
        ev.h.push_back(h);
        ev.offset.push_back(offset);
      }
    }
  }
  return ev;
}

double evaluate_dual(const HEvolution& ev, std::size_t k, int kappa, double x) {
  if (k >= ev.h.size()) throw Error(ErrorKind::Range, "output index out of range");
  DecompositionSpec spec;
  spec.kappa = kappa;
  spec.b_max = ev.h[k].b.back();
  return reconstruct(spec, ev.h[k], x) + ev.offset[k];
}

// ---------------------------------------------------------------- test-function evolution

namespace {

std::vector<double> fd_d1(const std::vector<double>& f, double dx) {
  std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 6) return d;
  double c = 1.0 / (12.0 * dx);
  for (std::size_t i = 2; i + 2 < n; ++i) d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) * c;
  d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
  d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
  std::size_t m = n - 1;
  d[m] = -(-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]) * c;
  d[m - 1] = -(-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]) * c;
  return d;
}

std::vector<double> fd_d2(const std::vector<double>& f, double dx) {
  std::size_t n = f.size();
  std::vector<double> d(n, 0.0);
  if (n < 7) return d;
  double c = 1.0 / (12.0 * dx * dx);
  for (std::size_t i = 2; i + 2 < n; ++i)
    d[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) * c;
  d[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]) * c;
  d[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * c;
  std::size_t m = n - 1;
  d[m] = (45.0 * f[m] - 154.0 * f[m - 1] + 214.0 * f[m - 2] - 156.0 * f[m - 3] + 61.0 * f[m - 4] - 10.0 * f[m - 5]) * c;
  d[m - 1] = (10.0 * f[m] - 15.0 * f[m - 1] - 4.0 * f[m - 2] + 14.0 * f[m - 3] - 6.0 * f[m - 4] + f[m - 5]) * c;
  return d;
}

// Cubic Lagrange interpolation on a uniform grid; constant extrapolation outside.
double interp_uniform(const std::vector<double>& x, const std::vector<double>& v, double y) {
  std::size_t n = x.size();
  double dx = x[1] - x[0];
  double u = (y - x[0]) / dx;
  if (u <= 0.0) return v.front();
  if (u >= static_cast<double>(n - 1)) return v.back();
  long i = static_cast<long>(std::floor(u));
  i = std::min(std::max(i, 1L), static_cast<long>(n) - 3);
  double t = u - static_cast<double>(i);
  double w[4];
  lagrange4(t, w);
  double s = 0.0;
  for (int q = 0; q < 4; ++q) s += w[q] * v[static_cast<std::size_t>(i - 1 + q)];
  return s;
}

std::vector<double> nonlocal_term(const std::vector<double>& x, const std::vector<double>& d1,
                                  const std::vector<double>& d2, const AtomicMeasure& nodes, double beta) {
  std::size_t n = x.size(), m = nodes.x.size();
  double dx = x[1] - x[0];
  std::vector<double> yd1(m), out(n, 0.0);
  for (std::size_t k = 0; k < m; ++k) yd1[k] = interp_uniform(x, d1, nodes.x[k]);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      double dy = x[i] - nodes.x[k];
      if (std::fabs(dy) >= dx) {
        s += nodes.w[k] * (d1[i] - yd1[k]) / dy;
      } else {
        s += nodes.w[k] * interp_uniform(x, d2, 0.5 * (x[i] + nodes.x[k]));
      }
    }
    out[i] = 0.25 * beta * s;
  }
  return out;
}

// Bound on the spectral radius of the discrete nonlocal term: far pairs act like advection,
// pairs closer than dx like diffusion with the node weight.
double nonlocal_rate(const std::vector<double>& x, const AtomicMeasure& nodes, double beta) {
  double dx = x[1] - x[0];
  double worst = 0.0;
  for (double xi : x) {
    double far = 0.0, near = 0.0;
    for (std::size_t k = 0; k < nodes.x.size(); ++k) {
      double d = std::fabs(xi - nodes.x[k]);
      if (d >= dx) far += std::fabs(nodes.w[k]) / d;
      else near += std::fabs(nodes.w[k]);
    }
    worst = std::max(worst, 2.8 * far / dx + 5.4 * near / (dx * dx));
  }
  return 0.25 * beta * worst;
}

}  // namespace

std::vector<double> dual_generator(const std::vector<double>& x, const std::vector<double>& f, double t,
                                   const MeasurePath& path, const Potential& pot, double beta) {
  if (x.size() < 7 || x.size() != f.size()) throw Error(ErrorKind::Input, "dual_generator needs a grid of 7+ points");
  double dx = x[1] - x[0];
  auto d1 = fd_d1(f, dx), d2 = fd_d2(f, dx);
  auto r = nonlocal_term(x, d1, d2, path.driving_nodes(t), beta);
  for (std::size_t i = 0; i < x.size(); ++i) r[i] -= pot.d1(x[i]) * d1[i];
  return r;
}

double TestEvolution::value(std::size_t k, double y) const { return interp_uniform(x, f.at(k), y); }

double TestEvolution::d1(std::size_t k, double y) const { return interp_uniform(x, fd_d1(f.at(k), x[1] - x[0]), y); }

double TestEvolution::d2(std::size_t k, double y) const { return interp_uniform(x, fd_d2(f.at(k), x[1] - x[0]), y); }

namespace {
std::vector<double> interp_many(const std::vector<double>& x, const std::vector<double>& v, const std::vector<double>& ys) {
  std::vector<double> out(ys.size());
  for (std::size_t i = 0; i < ys.size(); ++i) out[i] = interp_uniform(x, v, ys[i]);
  return out;
}
}  // namespace

std::vector<double> TestEvolution::values(std::size_t k, const std::vector<double>& ys) const {
  return interp_many(x, f.at(k), ys);
}

std::vector<double> TestEvolution::d1(std::size_t k, const std::vector<double>& ys) const {
  return interp_many(x, fd_d1(f.at(k), x[1] - x[0]), ys);
}

std::vector<double> TestEvolution::d2(std::size_t k, const std::vector<double>& ys) const {
  return interp_many(x, fd_d2(f.at(k), x[1] - x[0]), ys);
}

TestEvolution evolve_test_function(const TestFunction& f_T, const MeasurePath& path, const Potential& pot,
                                   double beta, double T, const TestEvolutionOptions& opt) {
  if (opt.n_steps == 0 || opt.n_out == 0 || !(opt.dx > 0.0) || !(T >= 0.0))
    throw Error(ErrorKind::Input, "invalid test-function evolution options");
  double R = default_R(path, opt.R);
  double L = opt.L > 0.0 ? opt.L : 3.0 * R;
  std::size_t n = static_cast<std::size_t>(std::lround(2.0 * L / opt.dx)) + 1;
  TestEvolution ev;
  ev.x = uniform_grid(-L, L, n);
  double dx = ev.x[1] - ev.x[0];
  std::vector<double> f(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = f_T.f(ev.x[i]);

  double dtau = T / static_cast<double>(opt.n_steps);
  // departure points of the half-step V' flow: f(tau + dtau/2, x) = f(tau, y), dy/ds = -V'(y)
  std::vector<double> ydep(n);
  for (std::size_t i = 0; i < n; ++i) {
    double y = ev.x[i];
    const int sub = 16;
    double hs = 0.5 * dtau / sub;
    for (int s = 0; s < sub; ++s) {
      double k1 = -pot.d1(y), k2 = -pot.d1(y + 0.5 * hs * k1), k3 = -pot.d1(y + 0.5 * hs * k2), k4 = -pot.d1(y + hs * k3);
      y += hs / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    ydep[i] = y;
  }
  auto flow = [&](std::vector<double>& v) {
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = interp_uniform(ev.x, v, ydep[i]);
    v = std::move(w);
  };
  auto G = [&](const std::vector<double>& v, double t) {
    auto d1 = fd_d1(v, dx), d2 = fd_d2(v, dx);
    return nonlocal_term(ev.x, d1, d2, path.driving_nodes(t), beta);
  };

  std::vector<std::pair<double, std::vector<double>>> rec{{T, f}};
  std::size_t out_every = std::max<std::size_t>(1, opt.n_steps / opt.n_out);
  for (std::size_t s = 0; s < opt.n_steps; ++s) {
    double t0 = T - static_cast<double>(s) * dtau;
    flow(f);
    // RK4 is stable up to about 2.7 times the spectral radius on both axes
    double rate = std::max(nonlocal_rate(ev.x, path.driving_nodes(t0), beta),
                           nonlocal_rate(ev.x, path.driving_nodes(t0 - dtau), beta));
    std::size_t nsub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(rate * dtau / 2.5)));
    double hs = dtau / static_cast<double>(nsub);
    std::vector<double> tmp(n);
    for (std::size_t q = 0; q < nsub; ++q) {
      double ts = t0 - static_cast<double>(q) * hs;
      auto k1 = G(f, ts);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = f[i] + 0.5 * hs * k1[i];
      auto k2 = G(tmp, ts - 0.5 * hs);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = f[i] + 0.5 * hs * k2[i];
      auto k3 = G(tmp, ts - 0.5 * hs);
      for (std::size_t i = 0; i < n; ++i) tmp[i] = f[i] + hs * k3[i];
      auto k4 = G(tmp, ts - hs);
      for (std::size_t i = 0; i < n; ++i) f[i] += hs / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    }
    flow(f);
    if ((s + 1) % out_every == 0 || s + 1 == opt.n_steps) {
      double t1 = (s + 1 == opt.n_steps) ? 0.0 : t0 - dtau;
      if (rec.back().first != t1) rec.push_back({t1, f});
    }
  }
  for (auto it = rec.rbegin(); it != rec.rend(); ++it) {
    ev.times.push_back(it->first);
    ev.f.push_back(std::move(it->second));
  }
  return ev;
}

}  // namespace loggas
