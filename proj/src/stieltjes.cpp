#include "loggas/stieltjes.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

#include "loggas/fft.hpp"

namespace loggas {

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

void require_off_axis(cplx z) {
  if (z.imag() == 0.0) throw Error(ErrorKind::OnAxis, "Stieltjes transform evaluated on the real axis");
}

// 8-point Gauss-Legendre on [-1,1]
constexpr double kGLx[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
                            0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
constexpr double kGLw[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873, 0.3626837833783620,
                            0.3626837833783620, 0.3137066458778873, 0.2223810344533745, 0.1012285362903763};

// Neville evaluation at 0 of the interpolant through (x_k, y_k)
cplx neville_at_zero(const std::vector<double>& x, std::vector<cplx> y) {
  std::size_t n = x.size();
  for (std::size_t m = 1; m < n; ++m)
    for (std::size_t i = 0; i + m < n; ++i)
      y[i] = ((0.0 - x[i + m]) * y[i] + (x[i] - 0.0) * y[i + 1]) / (x[i] - x[i + m]);
  return y[0];
}

}  // namespace

void validate(const DecompositionSpec& spec) {
  if (spec.kappa < 0 || spec.kappa > kMaxKappa) throw Error(ErrorKind::Range, "kappa must lie in [0,5]");
  if (!(spec.b_max > 0.0)) throw Error(ErrorKind::Range, "b_max must be positive");
  if (spec.rho && (!(*spec.rho > 0.0) || *spec.rho > spec.b_max))
    throw Error(ErrorKind::Range, "rho must lie in (0, b_max]");
}

cplx stieltjes_points_sum(const std::vector<double>& points, cplx z) {
  require_off_axis(z);
  cplx s(0.0, 0.0);
  for (double p : points) s += 1.0 / (p - z);
  return s;
}

cplx stieltjes_points(const std::vector<double>& points, cplx z) {
  if (points.empty()) {
    require_off_axis(z);
    return {0.0, 0.0};
  }
  return stieltjes_points_sum(points, z) / static_cast<double>(points.size());
}

cplx stieltjes_points_deriv(const std::vector<double>& points, cplx z) {
  require_off_axis(z);
  if (points.empty()) return {0.0, 0.0};
  cplx s(0.0, 0.0);
  for (double p : points) {
    cplx d = p - z;
    s += 1.0 / (d * d);
  }
  return s / static_cast<double>(points.size());
}

cplx stieltjes_density(const DensityGrid& rho, cplx z) {
  require_off_axis(z);
  std::size_t n = rho.size();
  if (n < 2) return {0.0, 0.0};
  double h = rho.dx();
  cplx total(0.0, 0.0);
  cplx e0 = rho.x[0] - z;
  cplx L0 = std::log(e0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    cplx e1 = rho.x[k + 1] - z;
    cplx L1 = std::log(e1);
    cplx J0 = L1 - L0;          // int dx/(x-z)
    cplx J1 = h - e0 * J0;      // int (x-x_k)/(x-z)
    total += rho.rho[k] * J0 + (rho.rho[k + 1] - rho.rho[k]) / h * J1;
    e0 = e1;
    L0 = L1;
  }
  return total;
}

cplx stieltjes_density_deriv(const DensityGrid& rho, cplx z) {
  require_off_axis(z);
  std::size_t n = rho.size();
  if (n < 2) return {0.0, 0.0};
  double h = rho.dx();
  cplx total(0.0, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    cplx e0 = rho.x[k] - z, e1 = rho.x[k + 1] - z;
    cplx K0 = 1.0 / e0 - 1.0 / e1;                     // int dx/(x-z)^2
    cplx K1 = (std::log(e1) - std::log(e0)) - h / e1;  // int (x-x_k)/(x-z)^2
    total += rho.rho[k] * K0 + (rho.rho[k + 1] - rho.rho[k]) / h * K1;
  }
  return total;
}

DensityGrid hilbert_transform(const DensityGrid& f) {
  // exact transform of the piecewise linear interpolant: sum_k rho_k g(i-k) / pi with
  // g(m) = (m+1) ln|m+1| - 2m ln|m| + (m-1) ln|m-1|, evaluated as a linear convolution
  std::size_t n = f.size();
  DensityGrid g = f;
  if (n < 2) {
    std::fill(g.rho.begin(), g.rho.end(), 0.0);
    return g;
  }
  auto xlogx = [](double m) { return m == 0.0 ? 0.0 : m * std::log(std::fabs(m)); };
  std::size_t nf = next_pow2(2 * n);
  std::vector<cplx> data(nf, cplx(0.0, 0.0)), ker(nf, cplx(0.0, 0.0));
  for (std::size_t i = 0; i < n; ++i) data[i] = f.rho[i];
  for (long m = -static_cast<long>(n - 1); m <= static_cast<long>(n - 1); ++m) {
    double dm = static_cast<double>(m);
    double w = xlogx(dm + 1) - 2.0 * xlogx(dm) + xlogx(dm - 1);
    ker[static_cast<std::size_t>((m + static_cast<long>(nf)) % static_cast<long>(nf))] = w;
  }
  fft_inplace(data, true);
  fft_inplace(ker, true);
  for (std::size_t k = 0; k < nf; ++k) data[k] *= ker[k];
  fft_inplace(data, false);
  for (std::size_t i = 0; i < n; ++i) g.rho[i] = data[i].real() / (static_cast<double>(nf) * kPi);
  return g;
}

double principal_value(const std::function<double(double)>& f, double x, double lo, double hi, int n_nodes) {
  if (!(x > lo && x < hi)) throw Error(ErrorKind::Input, "principal_value needs lo < x < hi");
  double d = std::min(x - lo, hi - x);
  int panels = std::max(1, n_nodes / 8);
  double total = 0.0;
  // symmetric part: int_0^d (f(x-t) - f(x+t))/t dt
  double w = d / panels;
  for (int p = 0; p < panels; ++p) {
    double c = (p + 0.5) * w;
    for (int q = 0; q < 8; ++q) {
      double t = c + 0.5 * w * kGLx[q];
      total += 0.5 * w * kGLw[q] * (f(x - t) - f(x + t)) / t;
    }
  }
  // regular remainder on the longer side
  double a = (x - lo > hi - x) ? lo : x + d;
  double b = (x - lo > hi - x) ? x - d : hi;
  if (b > a) {
    double ww = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
      double c = a + (p + 0.5) * ww;
      for (int q = 0; q < 8; ++q) {
        double y = c + 0.5 * ww * kGLx[q];
        total += 0.5 * ww * kGLw[q] * f(y) / (x - y);
      }
    }
  }
  return total;
}

PlemeljResult plemelj_extract(const std::vector<double>& b, const std::vector<cplx>& M) {
  if (b.size() < 3 || b.size() != M.size()) throw Error(ErrorKind::Input, "plemelj_extract needs >= 3 matched samples");
  for (std::size_t k = 0; k < b.size(); ++k) {
    if (!(b[k] > 0.0)) throw Error(ErrorKind::Input, "plemelj_extract needs positive b values");
    if (k > 0 && !(b[k] < b[k - 1])) throw Error(ErrorKind::Input, "plemelj_extract needs strictly decreasing b");
  }
  PlemeljResult r;
  cplx lim = neville_at_zero(b, M);
  std::vector<cplx> bm(M.size());
  double scale = 0.0;
  for (std::size_t k = 0; k < M.size(); ++k) {
    bm[k] = b[k] * M[k];
    scale = std::max(scale, std::abs(bm[k]));
  }
  cplx atom = neville_at_zero(b, bm);
  r.extrapolable = !(std::abs(atom) > 0.05 * scale && scale > 0.0);
  r.density = lim.imag() / kPi;
  r.pv = lim.real();
  return r;
}

double b_power_integral(int n, double b_max, double sigma) {
  if (sigma == 0.0) return std::pow(b_max, n + 1) / (n + 1);
  double x = b_max * sigma;
  if (x < 1e-3) {
    // short series avoids loss of accuracy in gamma_p for tiny arguments
    double s = 0.0, term = std::pow(b_max, n + 1);
    for (int k = 0; k < 8; ++k) {
      s += term / (n + 1 + k);
      term *= -x / (k + 1);
    }
    return s;
  }
  return factorial(n) * boost::math::gamma_p(static_cast<double>(n + 1), x) / std::pow(sigma, n + 1);
}

double kernel_multiplier(const DecompositionSpec& spec, double s) {
  double sigma = std::fabs(s) + (spec.rho ? 1.0 / *spec.rho : 0.0);
  return factorial(1 + spec.kappa) / (2.0 * kPi * b_power_integral(1 + spec.kappa, spec.b_max, sigma));
}

std::vector<double> kernel_apply_line(const DecompositionSpec& spec, const std::vector<double>& f, double dx,
                                      std::size_t pad_factor) {
  std::size_t n = f.size();
  std::vector<cplx> data(f.begin(), f.end());
  auto out = apply_multiplier(data, dx, [&](double s) { return cplx(kernel_multiplier(spec, s), 0.0); }, pad_factor);
  std::vector<double> r(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = out[i].real();
  if (spec.rho || n < 2) return r;
  // The |s| kink of the multiplier at 0 gives h a tail -c/(pi a^2) with c = K'(0+) int f.
  // The periodic images of that tail are removed in closed form: sum_n 1/(u+nL)^2 = (pi/L)^2 / sin^2(pi u/L).
  int k1 = 1 + spec.kappa;
  double slope = factorial(k1) * b_power_integral(k1 + 1, spec.b_max, 0.0) /
                 (2.0 * kPi * std::pow(b_power_integral(k1, spec.b_max, 0.0), 2));
  double mass = 0.0, first = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mass += f[i] * dx;
    first += f[i] * dx * static_cast<double>(i) * dx;
  }
  if (mass == 0.0) return r;
  double centre = first / mass;
  double L = static_cast<double>(next_pow2(std::max<std::size_t>(pad_factor, 1) * n)) * dx;
  double c = slope * mass / kPi;
  for (std::size_t i = 0; i < n; ++i) {
    double u = static_cast<double>(i) * dx - centre;
    double images;
    if (std::fabs(u) < 1e-6 * L) {
      images = kPi * kPi / (3.0 * L * L);
    } else {
      double sn = std::sin(kPi * u / L);
      images = kPi * kPi / (L * L * sn * sn) - 1.0 / (u * u);
    }
    r[i] += c * images;
  }
  return r;
}

StripField kernel_apply(const DecompositionSpec& spec, const DensityGrid& f, const std::vector<double>& b_grid,
                        bool* edge_warning) {
  validate(spec);
  if (spec.rho) throw Error(ErrorKind::Unsupported, "kernel_apply computes the standard decomposition only");
  if (edge_warning) {
    double peak = 0.0;
    for (double v : f.rho) peak = std::max(peak, std::fabs(v));
    double edge = std::max(std::fabs(f.rho.front()), std::fabs(f.rho.back()));
    *edge_warning = edge > 1e-8 * std::max(peak, 1e-300);
  }
  auto line = kernel_apply_line(spec, f.rho, f.dx());
  StripField h(f.x, b_grid, true);
  for (std::size_t i = 0; i < h.na(); ++i)
    for (std::size_t j = 0; j < h.nb(); ++j) h.at(i, j) = line[i];
  return h;
}

std::vector<double> b_quadrature_weights(const std::vector<double>& b, double p) {
  std::size_t n = b.size();
  std::vector<double> w(n, 0.0);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = std::pow(b[0], p + 1) / (p + 1);
    return w;
  }
  // tail [0, b_0]: linear extrapolation through the two lowest nodes
  {
    double b0 = b[0], b1 = b[1];
    double c = std::pow(b0, p + 2) * (1.0 / (p + 2) - 1.0 / (p + 1));
    w[0] += std::pow(b0, p + 1) / (p + 1) - c / (b1 - b0);
    w[1] += c / (b1 - b0);
  }
  std::size_t order = std::min<std::size_t>(4, n);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    std::size_t start = (j >= 1) ? j - 1 : 0;
    if (start + order > n) start = n - order;
    double lo = b[j], hi = b[j + 1];
    for (int q = 0; q < 8; ++q) {
      double t = 0.5 * (lo + hi) + 0.5 * (hi - lo) * kGLx[q];
      double wq = 0.5 * (hi - lo) * kGLw[q] * std::pow(t, p);
      for (std::size_t m = start; m < start + order; ++m) {
        double L = 1.0;
        for (std::size_t l = start; l < start + order; ++l)
          if (l != m) L *= (t - b[l]) / (b[m] - b[l]);
        w[m] += wq * L;
      }
    }
  }
  return w;
}

namespace {

// int h(a)/(x - a - i b) da for the piecewise linear interpolant of one b-column
cplx column_cauchy(const StripField& h, std::size_t j, double x) {
  std::size_t na = h.na();
  double da = h.da();
  double bj = h.b[j];
  cplx total(0.0, 0.0);
  cplx d0(x - h.a[0], -bj);
  cplx L0 = std::log(d0);
  for (std::size_t k = 0; k + 1 < na; ++k) {
    cplx d1(x - h.a[k + 1], -bj);
    cplx L1 = std::log(d1);
    cplx J0 = L0 - L1;
    cplx J1 = d0 * J0 - da;
    cplx beta = J1 / da;
    total += h.at(k, j) * (J0 - beta) + h.at(k + 1, j) * beta;
    d0 = d1;
    L0 = L1;
  }
  return total;
}

}  // namespace

double reconstruct(const DecompositionSpec& spec, const StripField& h, double x) {
  if (h.na() < 2 || h.nb() == 0) return 0.0;
  auto w = b_quadrature_weights(h.b, 1.0 + spec.kappa);
  double s = 0.0;
  for (std::size_t j = 0; j < h.nb(); ++j) s += w[j] * column_cauchy(h, j, x).imag();
  return 2.0 * s / factorial(1 + spec.kappa);
}

std::vector<double> reconstruct(const DecompositionSpec& spec, const StripField& h, const std::vector<double>& xs,
                                int jobs) {
  std::vector<double> out(xs.size(), 0.0);
  if (h.na() < 2 || h.nb() == 0) return out;
  auto w = b_quadrature_weights(h.b, 1.0 + spec.kappa);
  double norm = 2.0 / factorial(1 + spec.kappa);
  parallel_for(xs.size(), jobs, [&](std::size_t m) {
    double s = 0.0;
    for (std::size_t j = 0; j < h.nb(); ++j) s += w[j] * column_cauchy(h, j, xs[m]).imag();
    out[m] = norm * s;
  });
  return out;
}

StripField rho_family(cplx z_T, const DecompositionSpec& spec_in, const std::vector<double>& a_grid,
                      const std::vector<double>& b_grid) {
  double bT = z_T.imag();
  if (!(bT > 0.0)) throw Error(ErrorKind::Range, "rho_family needs Im z_T > 0");
  if (bT > spec_in.b_max) throw Error(ErrorKind::Range, "rho_family needs Im z_T <= b_max");
  DecompositionSpec spec = spec_in;
  if (!spec.rho) spec.rho = bT / kDefaultRhoConstant;
  validate(spec);
  if (a_grid.size() < 2) throw Error(ErrorKind::Input, "rho_family needs an a grid");
  double da = a_grid[1] - a_grid[0];
  double aT = z_T.real();
  std::size_t nf = next_pow2(8 * a_grid.size());
  std::vector<cplx> buf(nf);
  double pref = factorial(1 + spec.kappa) / 2.0;
  for (std::size_t k = 0; k < nf; ++k) {
    double s = fft_frequency(k, nf, da);
    double mag = std::exp(-bT * std::fabs(s)) / b_power_integral(1 + spec.kappa, spec.b_max, std::fabs(s) + 1.0 / *spec.rho);
    // phase e^{-i aT s} of the source, shifted so that index 0 corresponds to a_grid[0]
    buf[k] = mag * std::exp(cplx(0.0, s * (a_grid[0] - aT)));
  }
  fft_inplace(buf, false);
  StripField h(a_grid, b_grid, true);
  double inv = 1.0 / (static_cast<double>(nf) * da);
  for (std::size_t i = 0; i < h.na(); ++i) {
    double H = pref * buf[i].real() * inv;
    for (std::size_t j = 0; j < h.nb(); ++j) h.at(i, j) = H * std::exp(-h.b[j] / *spec.rho);
  }
  return h;
}

std::vector<double> b_cell_widths(const std::vector<double>& b) {
  std::size_t n = b.size();
  std::vector<double> w(n, 0.0);
  if (n == 0) return w;
  if (n == 1) {
    w[0] = b[0];
    return w;
  }
  for (std::size_t j = 0; j < n; ++j) {
    double lo = j == 0 ? 0.0 : std::sqrt(b[j - 1] * b[j]);
    double hi = j + 1 == n ? b[j] : std::sqrt(b[j] * b[j + 1]);
    w[j] = hi - lo;
  }
  return w;
}

StripNorms strip_norms(const StripField& h) {
  StripNorms r;
  if (h.na() == 0 || h.nb() == 0) return r;
  auto wb = b_cell_widths(h.b);
  double da = h.na() > 1 ? h.da() : 1.0;
  std::vector<double> lw(h.nb());
  for (std::size_t j = 0; j < h.nb(); ++j) {
    if (j == 0) {
      double f = wb[0];
      lw[0] = f * (1.0 + std::log(1.0 / f));
    } else {
      lw[j] = wb[j] * std::log(1.0 / h.b[j]);
    }
  }
  for (std::size_t i = 0; i < h.na(); ++i) {
    double wa = (i == 0 || i + 1 == h.na()) ? 0.5 * da : da;
    for (std::size_t j = 0; j < h.nb(); ++j) {
      double m = std::abs(h.at(i, j));
      r.l1 += wa * wb[j] * m;
      r.log_l1 += wa * lw[j] * m;
      r.linf = std::max(r.linf, m);
    }
  }
  return r;
}

cplx strip_interpolate(const StripField& f, double a, double b) {
  std::size_t na = f.na(), nb = f.nb();
  if (na == 0 || nb == 0) return {0.0, 0.0};
  double ua = na > 1 ? (a - f.a[0]) / f.da() : 0.0;
  ua = std::clamp(ua, 0.0, static_cast<double>(na - 1));
  std::size_t i = std::min<std::size_t>(static_cast<std::size_t>(ua), na > 1 ? na - 2 : 0);
  double ta = na > 1 ? ua - static_cast<double>(i) : 0.0;
  double lb = std::log(std::clamp(b, f.b.front(), f.b.back()));
  std::size_t j = 0;
  double tb = 0.0;
  if (nb > 1) {
    auto it = std::upper_bound(f.b.begin(), f.b.end(), std::exp(lb));
    j = it == f.b.begin() ? 0 : static_cast<std::size_t>(it - f.b.begin()) - 1;
    j = std::min(j, nb - 2);
    tb = (lb - std::log(f.b[j])) / (std::log(f.b[j + 1]) - std::log(f.b[j]));
    tb = std::clamp(tb, 0.0, 1.0);
  }
  std::size_t i1 = na > 1 ? i + 1 : i, j1 = nb > 1 ? j + 1 : j;
  return (1 - ta) * (1 - tb) * f.at(i, j) + ta * (1 - tb) * f.at(i1, j) + (1 - ta) * tb * f.at(i, j1) +
         ta * tb * f.at(i1, j1);
}

}  // namespace loggas
