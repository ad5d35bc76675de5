#include "loggas/fluctuations.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace loggas {

namespace {

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t k = 0; k + 1 < t.size(); ++k) s += 0.5 * (t[k + 1] - t[k]) * (v[k] + v[k + 1]);
  return s;
}

double dot(const std::vector<double>& w, const std::vector<double>& v) {
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * v[i];
  return s;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& v) {
  MeanSe r;
  if (v.empty()) return r;
  double n = static_cast<double>(v.size());
  r.mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  if (v.size() < 2) return r;
  double ss = 0.0;
  for (double x : v) ss += (x - r.mean) * (x - r.mean);
  r.se = std::sqrt(ss / (n - 1.0) / n);
  return r;
}

}  // namespace

// ---------------------------------------------------------------- predictor

double GaussPrediction::initial_term(const std::vector<double>& lambdas0, const MeasurePath& limit) const {
  if (lambdas0.empty() || f_path.f.empty()) return 0.0;
  double n = static_cast<double>(lambdas0.size());
  auto emp = f_path.values(0, lambdas0);
  double s = std::accumulate(emp.begin(), emp.end(), 0.0) / n;
  auto nodes = limit.limit_nodes(f_path.times.front());
  return n * (s - dot(nodes.w, f_path.values(0, nodes.x)));
}

GaussPrediction gaussian_predictor(const TestFunction& f_T, const MeasurePath& limit, const Potential& pot,
                                   double beta, double T, TestEvolutionOptions opt) {
  if (limit.times().empty() || limit.mode() != PathMode::Asymptotic)
    throw Error(ErrorKind::Input, "predictor needs a non-empty limit path");
  GaussPrediction g;
  g.beta = beta;
  g.T = T;
  opt.n_out = opt.n_steps;
  g.f_path = evolve_test_function(f_T, limit, pot, beta, T, opt);
  const auto& ts = g.f_path.times;
  std::vector<double> second(ts.size()), square(ts.size());
  for (std::size_t k = 0; k < ts.size(); ++k) {
    auto nodes = limit.limit_nodes(ts[k]);
    auto d1 = g.f_path.d1(k, nodes.x);
    auto d2 = g.f_path.d2(k, nodes.x);
    for (auto& v : d1) v *= v;
    second[k] = dot(nodes.w, d2);
    square[k] = dot(nodes.w, d1);
  }
  g.mean = 0.5 * (1.0 - 0.5 * beta) * trapezoid(ts, second);
  g.variance = std::max(0.0, trapezoid(ts, square));
  return g;
}

GaussPrediction gaussian_predictor(const TestFunction& f_T, const HydroSolution& hydro, const Potential& pot,
                                   double beta, double T, TestEvolutionOptions opt) {
  return gaussian_predictor(f_T, MeasurePath::from_hydro(hydro), pot, beta, T, opt);
}

// ---------------------------------------------------------------- samples

std::vector<FluctuationSample> fluctuation_samples(const SimulationConfig& cfg_in, const std::vector<TestFunction>& panel,
                                                   const MeasurePath& limit, std::size_t M, std::uint64_t master_seed,
                                                   int jobs) {
  SimulationConfig cfg = cfg_in;
  cfg.record_states = false;
  cfg.observables.clear();
  for (const auto& p : panel) cfg.observables.push_back(p.f);
  auto traj = simulate_ensemble(cfg, master_seed, M, jobs);
  std::vector<FluctuationSample> out(M);
  if (M == 0) return out;
  // deterministic side, shared by all replicas
  const auto& times = traj.front().times;
  std::vector<std::vector<double>> det(times.size(), std::vector<double>(panel.size()));
  for (std::size_t k = 0; k < times.size(); ++k) {
    auto nodes = limit.limit_nodes(times[k]);
    for (std::size_t j = 0; j < panel.size(); ++j) det[k][j] = nodes.integrate(panel[j].f);
  }
  double n = static_cast<double>(cfg.n_particles);
  parallel_for(M, jobs, [&](std::size_t r) {
    auto& s = out[r];
    s.seed = traj[r].seed;
    s.times = traj[r].times;
    s.sup_abs = traj[r].stats.sup_abs;
    s.values.assign(times.size(), std::vector<double>(panel.size()));
    for (std::size_t k = 0; k < times.size(); ++k)
      for (std::size_t j = 0; j < panel.size(); ++j) {
        // phi = 1 gives exactly 0 whatever rounding the two sides carry
        double e = traj[r].observables[k][j], d = det[k][j];
        s.values[k][j] = (e == d) ? 0.0 : n * (e - d);
      }
    Rng rng = make_rng(s.seed);
    s.initial = initial_positions(cfg, rng);
  });
  return out;
}

std::vector<double> sample_column(const std::vector<FluctuationSample>& s, std::size_t k, std::size_t j) {
  std::vector<double> v;
  v.reserve(s.size());
  for (const auto& x : s) v.push_back(x.values.at(k).at(j));
  return v;
}

void write_samples_csv(std::ostream& os, const std::vector<FluctuationSample>& s, const std::vector<std::string>& ids) {
  os << "replica,time,phi_id,value\n";
  os.precision(17);
  for (std::size_t r = 0; r < s.size(); ++r)
    for (std::size_t k = 0; k < s[r].times.size(); ++k)
      for (std::size_t j = 0; j < s[r].values[k].size(); ++j)
        os << r << ',' << s[r].times[k] << ',' << (j < ids.size() ? ids[j] : std::to_string(j)) << ','
           << s[r].values[k][j] << '\n';
}

void save_samples(const std::string& path, const std::vector<FluctuationSample>& s) {
  std::ofstream os(path);
  if (!os) throw Error(ErrorKind::Input, "cannot write " + path);
  os.precision(17);
  os << "loggas-samples 2 " << s.size() << '\n';
  for (const auto& x : s) {
    std::size_t nphi = x.values.empty() ? 0 : x.values.front().size();
    os << x.seed << ' ' << x.times.size() << ' ' << nphi << ' ' << x.initial.size() << ' ' << x.sup_abs << '\n';
    for (std::size_t k = 0; k < x.times.size(); ++k) {
      os << x.times[k];
      for (double v : x.values[k]) os << ' ' << v;
      os << '\n';
    }
    for (double v : x.initial) os << v << ' ';
    os << '\n';
  }
}

std::vector<FluctuationSample> load_samples(const std::string& path) {
  std::ifstream is(path);
  std::vector<FluctuationSample> out;
  if (!is) return out;
  std::string tag;
  int version = 0;
  std::size_t m = 0;
  if (!(is >> tag >> version >> m) || tag != "loggas-samples" || version != 2) return {};
  out.resize(m);
  for (auto& x : out) {
    std::size_t nt = 0, nphi = 0, ni = 0;
    if (!(is >> x.seed >> nt >> nphi >> ni >> x.sup_abs)) return {};
    x.times.resize(nt);
    x.values.assign(nt, std::vector<double>(nphi));
    for (std::size_t k = 0; k < nt; ++k) {
      is >> x.times[k];
      for (auto& v : x.values[k]) is >> v;
    }
    x.initial.resize(ni);
    for (auto& v : x.initial) is >> v;
    if (!is) return {};
  }
  return out;
}

// ---------------------------------------------------------------- normality and CF

AndersonDarling anderson_darling(std::vector<double> x) {
  AndersonDarling r;
  std::size_t n = x.size();
  if (n < 8) throw Error(ErrorKind::Input, "Anderson-Darling needs at least 8 samples");
  std::sort(x.begin(), x.end());
  auto ms = mean_se(x);
  double sd = ms.se * std::sqrt(static_cast<double>(n));
  if (!(sd > 0.0)) {
    r.a2 = r.a2_star = 1e300;
    r.p_value = 0.0;
    return r;
  }
  // log Phi(z) and log(1 - Phi(z)) through erfc to keep the tails
  auto log_cdf = [](double z) { return std::log(0.5 * std::erfc(-z / std::sqrt(2.0))); };
  auto log_sf = [](double z) { return std::log(0.5 * std::erfc(z / std::sqrt(2.0))); };
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double zi = (x[i] - ms.mean) / sd;
    double zr = (x[n - 1 - i] - ms.mean) / sd;
    s += (2.0 * static_cast<double>(i) + 1.0) * (log_cdf(zi) + log_sf(zr));
  }
  double dn = static_cast<double>(n);
  r.a2 = -dn - s / dn;
  double a = r.a2 * (1.0 + 0.75 / dn + 2.25 / (dn * dn));
  r.a2_star = a;
  // D'Agostino and Stephens, normal with both parameters estimated
  if (a >= 0.6) r.p_value = std::exp(1.2937 - 5.709 * a + 0.0186 * a * a);
  else if (a >= 0.34) r.p_value = std::exp(0.9177 - 4.279 * a - 1.38 * a * a);
  else if (a >= 0.2) r.p_value = 1.0 - std::exp(-8.318 + 42.796 * a - 59.938 * a * a);
  else r.p_value = 1.0 - std::exp(-13.436 + 101.14 * a - 223.73 * a * a);
  r.p_value = std::clamp(r.p_value, 0.0, 1.0);
  return r;
}

CfReport normality_and_cf_test(const std::vector<double>& samples, double mean, double variance,
                               const std::vector<double>& y0, const std::vector<double>& thetas, double k) {
  CfReport rep;
  rep.power_warning = samples.size() < 500;
  rep.ad = anderson_darling(samples);
  rep.normal = rep.ad.p_value >= 0.01;
  rep.cf_match = true;
  for (double th : thetas) {
    CfRow row;
    row.theta = th;
    std::vector<double> c(samples.size()), s(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      c[i] = std::cos(th * samples[i]);
      s[i] = std::sin(th * samples[i]);
    }
    auto mc = mean_se(c), msn = mean_se(s);
    row.empirical = cplx(mc.mean, msn.mean);
    row.se = std::sqrt(mc.se * mc.se + msn.se * msn.se);
    cplx init(1.0, 0.0);
    if (!y0.empty()) {
      init = cplx(0.0, 0.0);
      for (double y : y0) init += std::exp(cplx(0.0, th * y));
      init /= static_cast<double>(y0.size());
    }
    row.predicted = init * std::exp(cplx(-0.5 * th * th * variance, th * mean));
    double diff = std::abs(row.empirical - row.predicted);
    row.pass = row.se > 0.0 ? diff <= k * row.se : diff <= 1e-12;
    rep.cf_match = rep.cf_match && row.pass;
    rep.rows.push_back(row);
  }
  return rep;
}

CfReport normality_and_cf_test(const std::vector<double>& samples, const GaussPrediction& pred,
                               const std::vector<double>& y0, const std::vector<double>& thetas, double k) {
  return normality_and_cf_test(samples, pred.mean, pred.variance, y0, thetas, k);
}

// ---------------------------------------------------------------- martingale problem

ResidualStats martingale_residual(const std::vector<TrajectoryRecord>& traj, const TestFunction& phi,
                                  const MeasurePath& limit, const Potential& pot, double beta, Functional F,
                                  bool flip) {
  ResidualStats st;
  if (traj.empty()) return st;
  const auto& times = traj.front().times;
  std::size_t nk = times.size();
  std::vector<double> lim_phi(nk), lim_rate(nk);
  if (F == Functional::Square)
    for (std::size_t k = 0; k < nk; ++k) {
      auto nodes = limit.limit_nodes(times[k]);
      lim_phi[k] = nodes.integrate(phi.f);
      lim_rate[k] = weak_rhs(nodes, pot, beta, phi);
    }
  ItoTracker gen(phi.f, phi.d1, phi.d2);
  auto dsq = [&](double x) { return phi.d1(x) * phi.d1(x); };
  double sign = flip ? -1.0 : 1.0;
  st.values.resize(traj.size());
  for (std::size_t r = 0; r < traj.size(); ++r) {
    const auto& tr = traj[r];
    if (tr.states.size() != nk || tr.times != times)
      throw Error(ErrorKind::Input, "martingale residual needs recorded states on common checkpoints");
    double n = static_cast<double>(tr.states.front().size());
    ParticleState ps;
    ps.beta = beta;
    ps.pot = pot;
    std::vector<double> integrand(nk), obs(nk);
    for (std::size_t k = 0; k < nk; ++k) {
      ps.lambdas = tr.states[k];
      double g = gen.generator(ps);
      obs[k] = observable(tr.states[k], phi.f);
      if (F == Functional::Linear) {
        integrand[k] = g;
      } else {
        double y = n * (obs[k] - lim_phi[k]);
        integrand[k] = 2.0 * y * n * (g - lim_rate[k]) + observable(tr.states[k], dsq);
      }
    }
    double I = sign * trapezoid(times, integrand);
    if (F == Functional::Linear) {
      st.values[r] = n * (obs.back() - obs.front() - I);
    } else {
      double yT = n * (obs.back() - lim_phi.back()), y0 = n * (obs.front() - lim_phi.front());
      st.values[r] = yT * yT - y0 * y0 - I;
    }
  }
  auto ms = mean_se(st.values);
  st.mean = ms.mean;
  st.se = ms.se;
  return st;
}

// ---------------------------------------------------------------- scaling probe

LogLogFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  LogLogFit f;
  std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::Input, "log-log fit needs two or more points");
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw Error(ErrorKind::Range, "log-log fit needs positive data");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n, my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double e = ly[i] - f.intercept - f.slope * lx[i];
      ssr += e * e;
    }
    f.slope_se = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

ScalingReport fundamental_scaling_probe(const std::vector<std::vector<TrajectoryRecord>>& ensembles,
                                        const std::vector<std::size_t>& ns, const std::vector<cplx>& zs,
                                        const MeasurePath& limit, std::size_t k) {
  if (ensembles.size() != ns.size() || ns.empty() || zs.empty())
    throw Error(ErrorKind::Input, "scaling probe needs one ensemble per N and a z list");
  ScalingReport rep;
  std::vector<std::vector<double>> table(zs.size());
  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    for (std::size_t q = 0; q < zs.size(); ++q) {
      std::vector<double> v;
      for (const auto& tr : ensembles[e]) {
        if (k >= tr.states.size()) throw Error(ErrorKind::Input, "scaling probe needs recorded states");
        const auto& l = tr.states[k];
        double n = static_cast<double>(l.size());
        cplx m(0.0, 0.0);
        for (double x : l) m += 1.0 / (x - zs[q]);
        m /= n;
        v.push_back(std::norm(n * (m - limit.limit_stieltjes(tr.times[k], zs[q]))));
      }
      auto ms = mean_se(v);
      rep.rows.push_back({ns[e], zs[q], ms.mean, ms.se});
      table[q].push_back(ms.mean);
    }
  }
  std::vector<double> nd(ns.begin(), ns.end());
  if (ns.size() >= 2)
    for (std::size_t q = 0; q < zs.size(); ++q) rep.n_exponent.push_back(fit_loglog(nd, table[q]).slope);
  if (zs.size() >= 2) {
    std::vector<double> bs, vs;
    for (std::size_t q = 0; q < zs.size(); ++q) {
      bs.push_back(zs[q].imag());
      vs.push_back(table[q].back());
    }
    rep.b_fit = fit_loglog(bs, vs);
  }
  return rep;
}

}  // namespace loggas
