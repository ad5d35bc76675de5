#include "loggas/particle_sde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/random/normal_distribution.hpp>

#include "loggas/equilibrium.hpp"

namespace loggas {

namespace {

std::vector<std::size_t> sort_order(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  if (!std::is_sorted(x.begin(), x.end())) std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return x[a] < x[b];
    });
  return idx;
}

// drift on positions listed in increasing order; pair sums always run in rank order so that
// the result does not depend on labels
void drift_ranked(const std::vector<double>& x, const std::vector<std::size_t>& order, double beta,
                  const Potential& pot, std::vector<double>& out) {
  std::size_t n = x.size();
  out.assign(n, 0.0);
  thread_local std::vector<double> xs, acc;
  xs.resize(n);
  acc.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k) xs[k] = x[order[k]];
  for (std::size_t k = 0; k + 1 < n; ++k)
    if (!(xs[k + 1] > xs[k])) throw Error(ErrorKind::Collision, "coincident particle positions");
  double* __restrict a = acc.data();
  const double* __restrict p = xs.data();
  for (std::size_t i = 0; i < n; ++i) {
    double xi = p[i], s = 0.0;
#pragma omp simd reduction(+ : s)
    for (std::size_t j = i + 1; j < n; ++j) {
      double r = 1.0 / (xi - p[j]);
      s += r;
      a[j] -= r;
    }
    a[i] += s;
  }
  double c = beta / (2.0 * static_cast<double>(n));
  for (std::size_t k = 0; k < n; ++k) out[order[k]] = -pot.d1(xs[k]) + c * acc[k];
}

struct Stepper {
  const StepOptions& opt;
  Rng& rng;
  StepStats* stats;
  const StepObserver* observer;
  std::size_t* violations;
  boost::random::normal_distribution<double> normal;  // standard normal (ziggurat)
  std::vector<double> drift_buf;

  ParticleState advance(const ParticleState& cur, const std::vector<std::size_t>& order, double dt,
                        const std::vector<double>& dW, int depth, bool drift_ready = false) {
    std::size_t n = cur.size();
    double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    // the first half of a rejected step starts from the same state, so its drift is still in drift_buf
    if (!drift_ready) drift_ranked(cur.lambdas, order, cur.beta, cur.pot, drift_buf);
    ParticleState prop = cur;
    prop.time = cur.time + dt;
    for (std::size_t i = 0; i < n; ++i) prop.lambdas[i] = cur.lambdas[i] + drift_buf[i] * dt + dW[i] * inv_sqrt_n;
    double margin = opt.gap_safety * std::sqrt(dt / static_cast<double>(n));
    bool ok = true;
    std::size_t bad = 0;
    // A gap already below the margin scale may still shrink, but by at most half per step;
    // a fixed margin alone would reject pairs sitting at the margin at every halving level.
    for (std::size_t k = 0; k + 1 < n && ok; ++k) {
      double g = prop.lambdas[order[k + 1]] - prop.lambdas[order[k]];
      double g_old = cur.lambdas[order[k + 1]] - cur.lambdas[order[k]];
      ok = std::isfinite(g) && g >= std::min(margin, 0.5 * g_old) && g > 0.0;
      bad = k;
    }
    for (double v : prop.lambdas) ok = ok && std::isfinite(v);
    if (ok) {
      for (std::size_t k = 0; k + 1 < n; ++k)
        if (!(prop.lambdas[order[k + 1]] > prop.lambdas[order[k]]) && violations) ++*violations;
      if (stats) {
        stats->record(dt, prop.lambdas);
        stats->max_depth = std::max(stats->max_depth, depth);
      }
      if (observer && *observer) (*observer)(cur, dt, dW, prop);
      return prop;
    }
    // The budget counts halvings below the gap scale N g_min^2 of the current state (where the
    // noise matches the smallest gap): near-misses at beta = 1 reach gaps far below the base step.
    double g_min = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < n; ++k) g_min = std::min(g_min, cur.lambdas[order[k + 1]] - cur.lambdas[order[k]]);
    double gap_scale = static_cast<double>(n) * g_min * g_min;
    if ((depth >= opt.max_halvings && dt <= std::ldexp(gap_scale, -opt.max_halvings)) || depth >= 8 * opt.max_halvings) {
      std::ostringstream msg;
      msg << "step rejected after " << opt.max_halvings << " halvings at t = " << cur.time << " (dt " << dt
          << ", ranks " << bad << "," << bad + 1 << " at " << cur.lambdas[order[bad]] << " gap "
          << cur.lambdas[order[bad + 1]] - cur.lambdas[order[bad]] << " -> "
          << prop.lambdas[order[bad + 1]] - prop.lambdas[order[bad]] << ")";
      throw Error(ErrorKind::Stiffness, msg.str());
    }
    if (stats) ++stats->rejected;
    // Brownian bridge: W(dt/2) given W(dt) has mean W(dt)/2 and variance dt/4
    std::vector<double> dW1(n), dW2(n);
    double sd = std::sqrt(dt / 4.0);
    for (std::size_t k = 0; k < n; ++k) {  // draws assigned by rank, not by label
      std::size_t i = order[k];
      dW1[i] = 0.5 * dW[i] + sd * normal(rng);
      dW2[i] = dW[i] - dW1[i];
    }
    ParticleState mid = advance(cur, order, 0.5 * dt, dW1, depth + 1, true);
    return advance(mid, order, 0.5 * dt, dW2, depth + 1);
  }
};

double min_gap(const std::vector<double>& sorted) {
  double g = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k + 1 < sorted.size(); ++k) g = std::min(g, sorted[k + 1] - sorted[k]);
  return g;
}

double max_abs(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::fabs(v));
  return m;
}

}  // namespace

std::vector<double> drift(const ParticleState& s) {
  std::vector<double> out;
  drift_ranked(s.lambdas, sort_order(s.lambdas), s.beta, s.pot, out);
  return out;
}

void StepStats::record(double dt, const std::vector<double>& l) {
  if (accepted == 0) {
    min_dt = max_dt = dt;
  } else {
    min_dt = std::min(min_dt, dt);
    max_dt = std::max(max_dt, dt);
  }
  ++accepted;
  sum_dt += dt;
  sup_abs = std::max(sup_abs, max_abs(l));
}

static ParticleState step_impl(const ParticleState& s, double dt, const std::vector<double>& gauss, Rng& rng,
                               StepStats* stats, const StepOptions& opt, const StepObserver* observer,
                               std::size_t* violations) {
  if (gauss.size() != s.size()) throw Error(ErrorKind::Input, "step needs one normal per particle");
  if (!(dt > 0.0)) throw Error(ErrorKind::Input, "step needs dt > 0");
  if (s.size() == 0) return s;
  auto order = sort_order(s.lambdas);
  std::vector<double> dW(gauss.size());
  double sq = std::sqrt(dt);
  for (std::size_t i = 0; i < gauss.size(); ++i) dW[i] = sq * gauss[i];
  Stepper st{opt, rng, stats, observer, violations, boost::random::normal_distribution<double>(), {}};
  return st.advance(s, order, dt, dW, 0);
}

ParticleState step(const ParticleState& s, double dt, const std::vector<double>& gauss, Rng& rng, StepStats* stats,
                   const StepOptions& opt) {
  return step_impl(s, dt, gauss, rng, stats, opt, nullptr, nullptr);
}

std::uint64_t replica_seed(std::uint64_t master, std::uint64_t replica) {
  return splitmix64(splitmix64(master) ^ splitmix64(replica + 0x632BE59BD9B4E019ULL));
}

Rng make_rng(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(splitmix64(seed)), static_cast<std::uint32_t>(splitmix64(seed) >> 32)};
  return Rng(seq);
}

std::vector<double> initial_positions(const SimulationConfig& cfg, Rng& rng) {
  std::vector<double> x;
  switch (cfg.init.kind) {
    case InitKind::Quantiles:
      if (cfg.init.rho0.size() < 2) throw Error(ErrorKind::Input, "quantile init needs a density grid");
      x = density_quantiles(cfg.init.rho0, cfg.n_particles);
      break;
    case InitKind::User:
      x = cfg.init.user_points;
      if (x.size() != cfg.n_particles) throw Error(ErrorKind::Input, "user init must list n_particles positions");
      break;
    case InitKind::Mcmc:
      x = sample_gibbs(cfg.n_particles, cfg.beta, cfg.pot, cfg.init.mcmc_sweeps, rng);
      break;
  }
  std::sort(x.begin(), x.end());
  for (std::size_t k = 0; k + 1 < x.size(); ++k)
    if (!(x[k + 1] > x[k])) throw Error(ErrorKind::Collision, "initial positions are not distinct");
  return x;
}

TrajectoryRecord simulate(const SimulationConfig& cfg, std::uint64_t seed, const StepObserver& observer) {
  if (cfg.n_particles == 0) throw Error(ErrorKind::Input, "n_particles must be positive");
  if (!(cfg.t_final > 0.0)) throw Error(ErrorKind::Input, "t_final must be positive");
  if (cfg.n_checkpoints == 0) throw Error(ErrorKind::Input, "n_checkpoints must be positive");
  Rng rng = make_rng(seed);
  TrajectoryRecord rec;
  rec.seed = seed;
  ParticleState st;
  st.beta = cfg.beta;
  st.pot = cfg.pot;
  st.lambdas = initial_positions(cfg, rng);
  rec.stats.sup_abs = max_abs(st.lambdas);

  double T = cfg.t_final;
  double dt = T / 2000.0;
  if (st.size() > 1) dt = std::min(dt, cfg.gap_factor * std::pow(min_gap(st.lambdas), 2));
  if (cfg.dt_max > 0.0) dt = std::min(dt, cfg.dt_max);

  auto snapshot = [&](double t) {
    rec.times.push_back(t);
    if (cfg.record_states) rec.states.push_back(st.lambdas);
    std::vector<double> obs;
    obs.reserve(cfg.observables.size());
    for (auto& phi : cfg.observables) obs.push_back(observable(st.lambdas, phi));
    rec.observables.push_back(std::move(obs));
  };
  snapshot(0.0);

  boost::random::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> gauss(st.size());
  const StepObserver* obs_ptr = observer ? &observer : nullptr;
  for (std::size_t k = 1; k <= cfg.n_checkpoints; ++k) {
    double target = T * static_cast<double>(k) / static_cast<double>(cfg.n_checkpoints);
    while (st.time < target) {
      double h = std::min(dt, target - st.time);
      if (target - st.time - h < 1e-12 * T) h = target - st.time;
      for (auto& g : gauss) g = normal(rng);
      double t_next = st.time + h;
      st = step_impl(st, h, gauss, rng, &rec.stats, cfg.step, obs_ptr, &rec.ordering_violations);
      st.time = (t_next >= target) ? target : t_next;
    }
    snapshot(target);
  }
  return rec;
}

std::vector<TrajectoryRecord> simulate_ensemble(const SimulationConfig& cfg, std::uint64_t master_seed,
                                                std::size_t m, int jobs) {
  std::vector<TrajectoryRecord> out(m);
  parallel_for(m, jobs, [&](std::size_t k) { out[k] = simulate(cfg, replica_seed(master_seed, k)); });
  return out;
}

double observable(const std::vector<double>& lambdas, const std::function<double(double)>& phi) {
  if (lambdas.empty()) return 0.0;
  double s = 0.0;
  for (double l : lambdas) s += phi(l);
  return s / static_cast<double>(lambdas.size());
}

double observable(const ParticleState& s, const std::function<double(double)>& phi) {
  return observable(s.lambdas, phi);
}

std::vector<double> sample_gibbs(std::size_t n, double beta, const Potential& pot, std::size_t sweeps, Rng& rng,
                                 const std::vector<double>& start, McmcStats* stats) {
  if (n == 0) return {};
  std::vector<double> x = start;
  if (x.empty()) {
    // spread start roughly at the equilibrium scale
    double r = std::sqrt(2.0 * beta / 2.0 / std::max(pot.d2(0.0), 1e-3));
    x = uniform_grid(-r, r, n);
    if (n == 1) x[0] = 0.0;
  }
  if (x.size() != n) throw Error(ErrorKind::Input, "MCMC start has the wrong size");
  double dn = static_cast<double>(n);
  double width = 0.5 / dn * std::max(1.0, x.back() - x.front());
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  std::size_t acc = 0, tried = 0, acc_window = 0, tried_window = 0;
  for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
    for (std::size_t i = 0; i < n; ++i) {
      double old = x[i], prop = old + width * normal(rng);
      double dlog = -2.0 * dn * (pot.value(prop) - pot.value(old));
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        double dp = std::fabs(prop - x[j]);
        if (dp == 0.0) {
          dlog = -std::numeric_limits<double>::infinity();
          break;
        }
        dlog += beta * (std::log(dp) - std::log(std::fabs(old - x[j])));
      }
      ++tried;
      ++tried_window;
      if (std::log(unif(rng)) < dlog) {
        x[i] = prop;
        ++acc;
        ++acc_window;
      }
    }
    // tune the proposal width during the first half only
    if (sweep < sweeps / 2 && tried_window >= 20 * n) {
      double rate = static_cast<double>(acc_window) / static_cast<double>(tried_window);
      width *= rate > 0.4 ? 1.2 : 0.8;
      acc_window = tried_window = 0;
    }
  }
  if (stats) stats->acceptance = tried ? static_cast<double>(acc) / static_cast<double>(tried) : 0.0;
  std::sort(x.begin(), x.end());
  return x;
}

Proportion wilson_interval(std::size_t hits, std::size_t total, double z) {
  Proportion r;
  r.hits = hits;
  r.total = total;
  if (total == 0) {
    r.hi = 1.0;
    return r;
  }
  double n = static_cast<double>(total);
  double p = static_cast<double>(hits) / n;
  double z2 = z * z;
  double centre = (p + z2 / (2 * n)) / (1 + z2 / n);
  double half = z * std::sqrt(p * (1 - p) / n + z2 / (4 * n * n)) / (1 + z2 / n);
  r.p = p;
  r.lo = std::max(0.0, centre - half);
  r.hi = std::min(1.0, centre + half);
  return r;
}

std::vector<ExcursionRow> support_excursion_stats(const std::vector<std::vector<TrajectoryRecord>>& ensembles,
                                                  const std::vector<std::size_t>& ns, double R) {
  if (ensembles.size() != ns.size()) throw Error(ErrorKind::Input, "one N per ensemble required");
  std::vector<ExcursionRow> rows;
  for (std::size_t e = 0; e < ensembles.size(); ++e) {
    std::size_t hits = 0;
    for (auto& rec : ensembles[e])
      if (rec.stats.sup_abs > R) ++hits;
    rows.push_back({ns[e], wilson_interval(hits, ensembles[e].size())});
  }
  return rows;
}

ItoTracker::ItoTracker(std::function<double(double)> phi, std::function<double(double)> dphi,
                       std::function<double(double)> d2phi)
    : phi_(std::move(phi)), dphi_(std::move(dphi)), d2phi_(std::move(d2phi)) {}

double ItoTracker::generator(const ParticleState& s) const {
  std::size_t n = s.size();
  if (n == 0) return 0.0;
  double dn = static_cast<double>(n);
  std::vector<double> dp(n);
  double a = 0.0, c = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dp[i] = dphi_(s.lambdas[i]);
    a -= dp[i] * s.pot.d1(s.lambdas[i]);
    c += d2phi_(s.lambdas[i]);
  }
  double b = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) b += (dp[i] - dp[j]) / (s.lambdas[i] - s.lambdas[j]);
  return a / dn + s.beta / (2.0 * dn * dn) * b + c / (2.0 * dn * dn);
}

StepObserver ItoTracker::observer() {
  return [this](const ParticleState& before, double dt, const std::vector<double>& dW, const ParticleState&) {
    gen_ += generator(before) * dt;
    double n = static_cast<double>(before.size());
    // first-order part plus the centred quadratic-variation part (1/2N^2) sum phi'' (dW^2 - dt);
    // both are martingale increments, and keeping the second makes the residual O(dt)
    double m = 0.0, q = 0.0;
    for (std::size_t i = 0; i < before.size(); ++i) {
      m += dphi_(before.lambdas[i]) * dW[i];
      q += d2phi_(before.lambdas[i]) * (dW[i] * dW[i] - dt);
    }
    mart_ += m / (n * std::sqrt(n)) + q / (2.0 * n * n);
  };
}

}  // namespace loggas
