#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "loggas/equilibrium.hpp"
#include "loggas/experiment.hpp"
#include "loggas/fluctuations.hpp"
#include "loggas/generators.hpp"
#include "loggas/hydrodynamic.hpp"
#include "loggas/measure_path.hpp"
#include "loggas/particle_sde.hpp"
#include "loggas/stieltjes.hpp"

namespace loggas {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

DensityGrid semicircle_grid(double r) {
  return DensityGrid::sample(-r, r, 2001, [r](double x) {
    return std::fabs(x) < r ? 2.0 / (kPi * r * r) * std::sqrt(r * r - x * x) : 0.0;
  });
}

// Writes into the output directory and remembers the file for the manifest.
class Output {
 public:
  explicit Output(fs::path dir) : dir_(std::move(dir)) {}

  std::ostringstream& open(const std::string& name) {
    pending_.emplace_back(name, std::make_unique<std::ostringstream>());
    auto& os = *pending_.back().second;
    os << std::setprecision(17);
    return os;
  }

  void flush() {
    for (auto& [name, os] : pending_) {
      std::string data = os->str();
      std::ofstream f(dir_ / name, std::ios::binary);
      f << data;
      if (!f) throw Error(ErrorKind::Input, "cannot write " + (dir_ / name).string());
      files_.emplace_back(name, content_hash(data));
    }
    pending_.clear();
  }

  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::unique_ptr<std::ostringstream>>> pending_;
  std::vector<std::pair<std::string, std::string>> files_;
};

struct Context {
  const ExperimentConfig& cfg;
  const RunOptions& opt;
  Potential pot;
  EquilibriumMeasure eq;
  double R = 0.0;  // test-function window
  std::optional<HydroSolution> hydro;
  std::optional<MeasurePath> path;
  ordered_json summary = ordered_json::object();
  std::vector<std::string> failures;

  void log(const std::string& s) const {
    if (opt.log) *opt.log << s << "\n";
  }
  void require(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  bool want(Pipeline p) const { return cfg.pipeline == Pipeline::All || cfg.pipeline == p; }

  DensityGrid initial_density() const {
    const auto& ik = cfg.init.kind;
    if (ik == "semicircle") return semicircle_grid(cfg.init.radius);
    if (ik == "user") return kde(cfg.init.points, 801);
    return eq.density;
  }

  SimulationConfig simulation(std::size_t n) const {
    SimulationConfig s;
    s.n_particles = n;
    s.beta = cfg.beta;
    s.pot = pot;
    s.t_final = cfg.T;
    s.n_checkpoints = cfg.checkpoints;
    s.gap_factor = cfg.gap_factor;
    const auto& ik = cfg.init.kind;
    if (ik == "user") {
      s.init.kind = InitKind::User;
      s.init.user_points = cfg.init.points;
    } else if (ik == "mcmc") {
      s.init.kind = InitKind::Mcmc;
      s.init.mcmc_sweeps = cfg.init.sweeps;
    } else {
      s.init.rho0 = initial_density();
    }
    return s;
  }

  const HydroSolution& limit() {
    if (!hydro) {
      ParticleHydroOptions ho;
      ho.n_det = cfg.hydro_particles;
      ho.n_checkpoints = cfg.checkpoints;
      hydro = evolve_density_particle(initial_density(), pot, cfg.beta, cfg.T, ho);
      path = MeasurePath::from_hydro(*hydro);
    }
    return *hydro;
  }
};

void run_equilibrium(Context& c, Output& out) {
  c.log("equilibrium");
  auto& os = out.open("equilibrium_density.csv");
  os << "x,rho\n";
  for (std::size_t i = 0; i < c.eq.density.size(); ++i) os << c.eq.density.x[i] << "," << c.eq.density.rho[i] << "\n";
  double cut = cut_equation_residual(c.eq);
  double stat = stationarity_residual(c.eq.density, c.pot, c.cfg.beta);
  double mass = c.eq.density.mass();
  double neg = 0.0;
  for (double r : c.eq.density.rho) neg = std::min(neg, r);
  c.summary["equilibrium"] = {{"a_minus", c.eq.a_minus},   {"a_plus", c.eq.a_plus},          {"mass", mass},
                              {"cut_residual", cut},       {"stationarity_residual", stat}, {"min_density", neg},
                              {"newton_iterations", c.eq.newton_iterations}};
  c.require(std::fabs(mass - 1.0) < 1e-3, "equilibrium mass differs from 1");
  c.require(neg >= -1e-12, "equilibrium density is negative somewhere");
  c.require(cut < 1e-6, "cut equation residual above 1e-6");
}

void run_hydro(Context& c, Output& out) {
  c.log("hydro");
  const auto& h = c.limit();
  auto& st = out.open("hydro_stieltjes.csv");
  st << "time,z_re,z_im,M_re,M_im\n";
  bool herglotz = true;
  for (std::size_t k = 0; k < h.times.size(); ++k)
    for (cplx z : c.cfg.z_probes) {
      cplx m = h.stieltjes(k, z);
      herglotz = herglotz && m.imag() > 0.0;
      st << h.times[k] << "," << z.real() << "," << z.imag() << "," << m.real() << "," << m.imag() << "\n";
    }
  auto& mo = out.open("hydro_moments.csv");
  mo << "time,mass,m1,m2\n";
  double mass_err = 0.0;
  for (std::size_t k = 0; k < h.times.size(); ++k) {
    double m0 = h.weak(k, [](double) { return 1.0; });
    mass_err = std::max(mass_err, std::fabs(m0 - 1.0));
    mo << h.times[k] << "," << m0 << "," << h.weak(k, [](double x) { return x; }) << ","
       << h.weak(k, [](double x) { return x * x; }) << "\n";
  }
  c.summary["hydro"] = {{"checkpoints", h.times.size()},
                        {"particles", c.cfg.hydro_particles},
                        {"richardson", !h.companion.empty()},
                        {"herglotz", herglotz},
                        {"mass_error", mass_err}};
  c.require(herglotz, "limit Stieltjes transform left the upper half-plane");
  c.require(mass_err < 1e-9, "limit measure lost mass");
}

void run_ensemble(Context& c, Output& out) {
  c.log("ensemble");
  const auto& h = c.limit();
  std::vector<TestFunction> panel;
  for (const auto& n : c.cfg.phi) panel.push_back(panel_function(n, c.R));
  std::vector<std::vector<TrajectoryRecord>> ens;
  ordered_json rows = ordered_json::array();
  for (std::size_t n : c.cfg.n_list) {
    auto sc = c.simulation(n);
    for (auto& p : panel) sc.observables.push_back(p.f);
    auto traj = simulate_ensemble(sc, replica_seed(c.cfg.seed, n), c.cfg.replicas, c.opt.jobs);
    auto& os = out.open("ensemble_N" + std::to_string(n) + ".csv");
    os << "replica,time,phi,value\n";
    std::size_t violations = 0, rejected = 0;
    double dist = 0.0;
    for (std::size_t r = 0; r < traj.size(); ++r) {
      const auto& t = traj[r];
      violations += t.ordering_violations;
      rejected += t.stats.rejected;
      for (std::size_t k = 0; k < t.times.size(); ++k)
        for (std::size_t j = 0; j < panel.size(); ++j)
          os << r << "," << t.times[k] << ",\"" << c.cfg.phi[j] << "\"," << t.observables[k][j] << "\n";
      std::size_t kT = t.times.size() - 1;
      double d = 0.0;
      for (cplx z : c.cfg.z_probes) d = std::max(d, std::abs(stieltjes_points(t.states[kT], z) - h.stieltjes(kT, z)));
      dist += d / static_cast<double>(traj.size());
    }
    rows.push_back({{"n", n},
                    {"replicas", traj.size()},
                    {"ordering_violations", violations},
                    {"rejected_substeps", rejected},
                    {"mean_sup_stieltjes_distance_T", dist}});
    c.require(violations == 0, "particle ordering violated at N = " + std::to_string(n));
    ens.push_back(std::move(traj));
  }
  double Rx = 1.5 * c.eq.edge() + 1.0;
  auto exc = support_excursion_stats(ens, c.cfg.n_list, Rx);
  ordered_json ex = ordered_json::array();
  for (auto& e : exc)
    ex.push_back({{"n", e.n}, {"fraction", e.fraction.p}, {"lo", e.fraction.lo}, {"hi", e.fraction.hi}});
  c.summary["ensemble"] = {{"rows", rows}, {"excursion_radius", Rx}, {"excursions", ex}};
}

void run_fluctuations(Context& c, Output& out) {
  c.log("fluctuations");
  const auto& h = c.limit();
  std::vector<TestFunction> panel;
  for (const auto& n : c.cfg.phi) panel.push_back(panel_function(n, c.R));
  std::vector<GaussPrediction> preds;
  TestEvolutionOptions to;
  to.R = c.R;
  to.dx = 0.02;  // variance agrees with dx = 0.005 to about 1e-5 relative at a sixteenth of the cost
  for (const auto& f : panel) preds.push_back(gaussian_predictor(f, h, c.pot, c.cfg.beta, c.cfg.T, to));

  std::size_t n_gate = *std::max_element(c.cfg.n_list.begin(), c.cfg.n_list.end());
  bool gate_active = c.cfg.replicas >= 500;
  ordered_json rows = ordered_json::array();
  for (std::size_t n : c.cfg.n_list) {
    auto s = fluctuation_samples(c.simulation(n), panel, *c.path, c.cfg.replicas, replica_seed(c.cfg.seed + 1, n),
                                 c.opt.jobs);
    write_samples_csv(out.open("samples_N" + std::to_string(n) + ".csv"), s, c.cfg.phi);
    auto& cf = out.open("cf_N" + std::to_string(n) + ".csv");
    cf << "phi,theta,emp_re,emp_im,pred_re,pred_im,se,pass\n";
    std::size_t kT = s.front().times.size() - 1;
    for (std::size_t j = 0; j < panel.size(); ++j) {
      ordered_json row = {{"n", n}, {"phi", c.cfg.phi[j]}, {"mean", preds[j].mean}, {"variance", preds[j].variance}};
      if (preds[j].variance <= 0.0) {
        row["degenerate"] = true;
        rows.push_back(row);
        continue;
      }
      std::vector<double> y0;
      for (const auto& r : s) y0.push_back(preds[j].initial_term(r.initial, *c.path));
      auto col = sample_column(s, kT, j);
      if (col.size() < 8) {
        row["skipped"] = "fewer than 8 replicas";
        rows.push_back(row);
        continue;
      }
      // Y_T minus the shift from Y_0 is tested for normality; the CF includes the shift
      std::vector<double> centred(col);
      for (std::size_t r = 0; r < centred.size(); ++r) centred[r] -= y0[r];
      auto ad = anderson_darling(centred);
      auto rep = normality_and_cf_test(col, preds[j], y0, c.cfg.thetas);
      rep.ad = ad;
      rep.normal = ad.p_value >= 0.01;
      for (const auto& cr : rep.rows)
        cf << "\"" << c.cfg.phi[j] << "\"," << cr.theta << "," << cr.empirical.real() << "," << cr.empirical.imag() << ","
           << cr.predicted.real() << "," << cr.predicted.imag() << "," << cr.se << "," << (cr.pass ? 1 : 0) << "\n";
      row["ad_a2_star"] = ad.a2_star;
      row["ad_p_value"] = ad.p_value;
      row["normal"] = rep.normal;
      row["cf_match"] = rep.cf_match;
      row["power_warning"] = rep.power_warning;
      rows.push_back(row);
      if (n == n_gate && gate_active) c.require(rep.pass(), "fluctuation gate failed for " + c.cfg.phi[j]);
    }
  }
  c.summary["fluctuations"] = {{"gate_n", n_gate},
                               {"gate_active", gate_active},
                               {"power_warning", !gate_active},
                               {"rows", rows}};
}

void run_operators(Context& c, Output& out) {
  c.log("operators");
  ordered_json j;
  // decomposition round trip on the exponentially weighted family
  auto a = uniform_grid(-4, 4, 3201);
  auto b = log_b_grid(1e-3, c.cfg.b_max, 1.1);
  cplx zT(0.3, 0.2);
  std::vector<double> xs{-1.0, 0.0, 0.3, 0.5, 1.5};
  ordered_json rt = ordered_json::array();
  for (int kappa = 0; kappa <= 3; ++kappa) {
    DecompositionSpec spec{kappa, c.cfg.b_max, std::nullopt};
    auto h = rho_family(zT, spec, a, b);
    auto back = reconstruct(spec, h, xs);
    double err = 0.0;
    for (std::size_t m = 0; m < xs.size(); ++m) err = std::max(err, std::fabs(back[m] - (1.0 / (xs[m] - zT)).imag()));
    rt.push_back({{"kappa", kappa}, {"max_error", err}});
    c.require(err < 1e-2, "decomposition round trip error above 1e-2 at kappa " + std::to_string(kappa));
  }
  j["round_trip"] = rt;

  // remainder and off-support operator norms at two b floors
  auto ag = uniform_grid(-8, 8, 801);
  double Rw = 1.0;
  ordered_json norms = ordered_json::array();
  for (double floor : {1e-2, 1e-3}) {
    StripField h(ag, log_b_grid(floor, c.cfg.b_max, 1.2), true);
    StripField far = h;
    for (std::size_t i = 0; i < ag.size(); ++i)
      for (std::size_t jb = 0; jb < h.nb(); ++jb) {
        h.at(i, jb) = 1.0 / (1.0 + ag[i] * ag[i]);
        if (std::fabs(ag[i]) >= 2.0 * Rw) far.at(i, jb) = h.at(i, jb);
      }
    auto g3 = apply_nonlocal_g3(h, 0, 0, c.pot, Rw, 12);
    auto ext = apply_ext(far, 0, 0, c.pot, Rw, 12);
    norms.push_back({{"b_floor", floor}, {"g3_norm", g3.norm}, {"ext_norm", ext.norm}});
  }
  j["operator_norms"] = norms;
  double g1 = norms[0]["g3_norm"], g2 = norms[1]["g3_norm"];
  double e1 = norms[0]["ext_norm"], e2 = norms[1]["ext_norm"];
  if (g1 > 0.0) c.require(g2 < 2.0 * g1, "remainder norm grows with the b floor");
  if (e1 > 0.0) c.require(e2 < 2.0 * e1, "off-support norm grows with the b floor");

  // characteristics on the stationary path
  auto path = MeasurePath::stationary(c.eq);
  double L = 0.0;
  for (double x = -c.R; x <= c.R; x += 0.01) L = std::max(L, c.pot.d2(x));
  double excess = -std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (cplx z : c.cfg.z_probes) {
    if (z.imag() > c.cfg.b_max) continue;
    auto p = characteristics_full(z, 1.0, 0, path, c.pot, c.cfg.beta, c.cfg.T);
    excess = std::max(excess, char_bound_excess(p, c.cfg.beta, L));
    monotone = monotone && char_b_monotone(p);
  }
  j["characteristics"] = {{"curvature_bound", L}, {"bound_excess", excess}, {"b_monotone", monotone}};
  c.require(excess <= 1e-9, "characteristic b bound violated");
  c.summary["operators"] = j;
  (void)out;
}

}  // namespace

RunResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opt) {
  RunResult res;
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) {
    res.exit_code = kExitValidation;
    res.message = "cannot create output directory " + dir.string() + ": " + ec.message();
    return res;
  }
  fs::remove(dir / "FAILED", ec);
  Output out(dir);
  // the output location is not part of the experiment, so it stays out of the hash
  auto cfg_json = config_to_json(cfg);
  cfg_json.erase("output_dir");
  std::string cfg_text = cfg_json.dump(2) + "\n";
  try {
    Context c{cfg, opt, cfg.make_potential(), {}, 0.0, std::nullopt, std::nullopt, {}, {}};
    c.eq = solve_cut_equation(c.pot, cfg.beta);
    double support = c.eq.edge();
    if (cfg.init.kind == "semicircle") support = std::max(support, cfg.init.radius);
    if (cfg.init.kind == "user")
      for (double x : cfg.init.points) support = std::max(support, std::fabs(x));
    c.R = 1.5 * support + 1.0;
    c.summary["pipeline"] = pipeline_name(cfg.pipeline);
    c.summary["window_radius"] = c.R;
    if (c.want(Pipeline::Equilibrium)) run_equilibrium(c, out);
    if (c.want(Pipeline::Hydro)) run_hydro(c, out);
    if (c.want(Pipeline::Ensemble)) run_ensemble(c, out);
    if (c.want(Pipeline::Fluctuations)) run_fluctuations(c, out);
    if (c.want(Pipeline::Operators)) run_operators(c, out);
    c.summary["failures"] = c.failures;
    c.summary["status"] = c.failures.empty() ? "ok" : "gate_failed";
    out.open("summary.json") << c.summary.dump(2) << "\n";
    out.open("config.json") << cfg_text;
    out.flush();
    if (!c.failures.empty()) {
      res.exit_code = kExitGate;
      res.message = c.failures.front();
    }
  } catch (const Error& e) {
    std::ofstream f(dir / "FAILED");
    f << error_kind_name(e.kind()) << ": " << e.what() << "\n";
    res.exit_code = kExitSolver;
    res.message = std::string(error_kind_name(e.kind())) + ": " + e.what();
    return res;
  }
  ordered_json man;
  man["config_hash"] = content_hash(cfg_text);
  man["config"] = cfg_json;
  ordered_json files = ordered_json::object();
  for (const auto& [name, hash] : out.files()) {
    files[name] = hash;
    res.files.push_back(name);
  }
  man["files"] = files;
  std::ofstream(dir / "manifest.json") << man.dump(2) << "\n";
  res.files.push_back("manifest.json");
  if (res.message.empty()) res.message = "ok";
  return res;
}

}  // namespace loggas
