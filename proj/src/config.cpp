#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "loggas/experiment.hpp"
#include "loggas/test_functions.hpp"

namespace loggas {

using nlohmann::json;
using nlohmann::ordered_json;

Potential ExperimentConfig::make_potential() const {
  if (potential.kind == "harmonic") return Potential::harmonic(potential.scale);
  if (potential.kind == "landau_ginzburg") return Potential::landau_ginzburg(potential.lambda);
  return Potential::polynomial(potential.coeffs);
}

std::string pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::Equilibrium: return "equilibrium";
    case Pipeline::Hydro: return "hydro";
    case Pipeline::Ensemble: return "ensemble";
    case Pipeline::Fluctuations: return "fluctuations";
    case Pipeline::Operators: return "operators";
    case Pipeline::All: break;
  }
  return "all";
}

namespace {

class Reader {
 public:
  Reader(const json& j, std::vector<ConfigIssue>& issues) : root_(j), issues_(issues) {}

  void issue(const std::string& path, const std::string& msg, const std::string& hint) {
    issues_.push_back({path, msg, hint});
  }

  const json* field(const json& obj, const std::string& key) const {
    auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
  }

  bool number(const json& obj, const std::string& base, const std::string& key, double& out) {
    const json* v = field(obj, key);
    if (!v) return false;
    if (!v->is_number()) {
      issue(base + "/" + key, "expected a number", "write the value without quotes");
      return false;
    }
    out = v->get<double>();
    if (!std::isfinite(out)) issue(base + "/" + key, "value is not finite", "use a finite number");
    return true;
  }

  bool count(const json& obj, const std::string& base, const std::string& key, std::size_t& out) {
    const json* v = field(obj, key);
    if (!v) return false;
    if (!v->is_number_integer() || v->get<long long>() < 0) {
      issue(base + "/" + key, "expected a non-negative integer", "use a whole number such as 10");
      return false;
    }
    out = v->get<std::size_t>();
    return true;
  }

  bool text(const json& obj, const std::string& base, const std::string& key, std::string& out) {
    const json* v = field(obj, key);
    if (!v) return false;
    if (!v->is_string()) {
      issue(base + "/" + key, "expected a string", "quote the value");
      return false;
    }
    out = v->get<std::string>();
    return true;
  }

  bool numbers(const json& obj, const std::string& base, const std::string& key, std::vector<double>& out) {
    const json* v = field(obj, key);
    if (!v) return false;
    if (!v->is_array()) {
      issue(base + "/" + key, "expected an array of numbers", "for example [0.25, 0.5, 1]");
      return false;
    }
    out.clear();
    for (std::size_t i = 0; i < v->size(); ++i) {
      if (!(*v)[i].is_number()) {
        issue(base + "/" + key + "/" + std::to_string(i), "expected a number", "remove quotes or non-numeric entries");
        continue;
      }
      out.push_back((*v)[i].get<double>());
    }
    return true;
  }

  void unknown_keys(const json& obj, const std::string& base, const std::set<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!known.count(it.key()))
        issue(base + "/" + it.key(), "unknown field", "check the spelling against `loggas template`");
  }

  const json& root_;
  std::vector<ConfigIssue>& issues_;
};

bool convex_polynomial(const std::vector<double>& c) {
  Potential p = Potential::polynomial(c);
  int d = p.degree();
  if (d < 2 || d % 2 != 0 || c[static_cast<std::size_t>(d)] <= 0.0) return false;
  for (int i = -2000; i <= 2000; ++i)
    if (p.d2(0.005 * i) < 0.0) return false;
  return true;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, std::vector<ConfigIssue>& issues) {
  ExperimentConfig cfg;
  json j;
  try {
    j = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    issues.push_back({"", std::string("JSON parse error: ") + e.what(), "fix the syntax; comments are allowed"});
    return cfg;
  }
  if (!j.is_object()) {
    issues.push_back({"", "top level must be an object", "start from `loggas template`"});
    return cfg;
  }
  Reader r(j, issues);
  r.unknown_keys(j, "", {"potential", "beta", "n_list", "replicas", "T", "checkpoints", "init", "phi", "z_probes", "thetas",
                         "b_max", "gap_factor", "hydro_particles", "seed", "output_dir", "pipeline"});

  if (const json* p = r.field(j, "potential")) {
    if (!p->is_object()) {
      r.issue("/potential", "expected an object", "{\"kind\": \"harmonic\", \"scale\": 1}");
    } else {
      r.unknown_keys(*p, "/potential", {"kind", "scale", "lambda", "coeffs"});
      r.text(*p, "/potential", "kind", cfg.potential.kind);
      r.number(*p, "/potential", "scale", cfg.potential.scale);
      r.number(*p, "/potential", "lambda", cfg.potential.lambda);
      r.numbers(*p, "/potential", "coeffs", cfg.potential.coeffs);
    }
  }
  const std::string& pk = cfg.potential.kind;
  if (pk == "harmonic") {
    if (!(cfg.potential.scale > 0.0)) r.issue("/potential/scale", "harmonic scale must be > 0", "use e.g. 1");
  } else if (pk == "landau_ginzburg") {
    if (!(cfg.potential.lambda >= 0.0)) r.issue("/potential/lambda", "lambda must be >= 0", "use e.g. 1");
  } else if (pk == "polynomial") {
    if (cfg.potential.coeffs.empty() || !convex_polynomial(cfg.potential.coeffs))
      r.issue("/potential/coeffs", "polynomial must be convex of even degree with positive leading coefficient",
              "ascending coefficients, e.g. [0, 0, 0.5, 0, 0.25]");
  } else {
    r.issue("/potential/kind", "unknown potential '" + pk + "'", "use harmonic, landau_ginzburg or polynomial");
  }

  r.number(j, "", "beta", cfg.beta);
  if (!(cfg.beta >= 1.0)) r.issue("/beta", "beta must be >= 1", "the log-gas is studied for beta >= 1");

  if (const json* v = r.field(j, "n_list")) {
    if (!v->is_array() || v->empty()) {
      r.issue("/n_list", "expected a non-empty array of particle counts", "for example [64, 128, 256]");
    } else {
      cfg.n_list.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        if (!e.is_number_integer() || e.get<long long>() < 1)
          r.issue("/n_list/" + std::to_string(i), "N must be an integer >= 1", "use a positive whole number");
        else
          cfg.n_list.push_back(e.get<std::size_t>());
      }
    }
  }
  r.count(j, "", "replicas", cfg.replicas);
  if (cfg.replicas < 1) r.issue("/replicas", "replicas must be >= 1", "use e.g. 10 for a smoke run");
  r.number(j, "", "T", cfg.T);
  if (!(cfg.T > 0.0)) r.issue("/T", "T must be > 0", "use a positive final time");
  r.count(j, "", "checkpoints", cfg.checkpoints);
  if (cfg.checkpoints < 1) r.issue("/checkpoints", "checkpoints must be >= 1", "use e.g. 10");

  if (const json* p = r.field(j, "init")) {
    if (!p->is_object()) {
      r.issue("/init", "expected an object", "{\"kind\": \"equilibrium\"}");
    } else {
      r.unknown_keys(*p, "/init", {"kind", "radius", "points", "sweeps"});
      r.text(*p, "/init", "kind", cfg.init.kind);
      r.number(*p, "/init", "radius", cfg.init.radius);
      r.numbers(*p, "/init", "points", cfg.init.points);
      r.count(*p, "/init", "sweeps", cfg.init.sweeps);
    }
  }
  const std::string& ik = cfg.init.kind;
  if (ik == "semicircle") {
    if (!(cfg.init.radius > 0.0)) r.issue("/init/radius", "semicircle radius must be > 0", "e.g. 2.8 for a relaxing start");
  } else if (ik == "user") {
    std::set<double> distinct(cfg.init.points.begin(), cfg.init.points.end());
    if (cfg.init.points.empty() || distinct.size() != cfg.init.points.size())
      r.issue("/init/points", "user start needs distinct points", "list one position per particle");
    for (std::size_t n : cfg.n_list)
      if (n != cfg.init.points.size())
        r.issue("/n_list", "every N must equal the number of user points", "use a single N matching /init/points");
  } else if (ik == "mcmc") {
    if (cfg.init.sweeps < 1) r.issue("/init/sweeps", "sweeps must be >= 1", "use e.g. 2000");
  } else if (ik != "equilibrium") {
    r.issue("/init/kind", "unknown start '" + ik + "'", "use equilibrium, semicircle, user or mcmc");
  }

  if (const json* v = r.field(j, "phi")) {
    if (!v->is_array()) {
      r.issue("/phi", "expected an array of panel names", "see `loggas template` for the names");
    } else {
      cfg.phi.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        if (!(*v)[i].is_string()) {
          r.issue("/phi/" + std::to_string(i), "expected a string", "quote the panel name");
          continue;
        }
        std::string name = (*v)[i].get<std::string>();
        try {
          panel_function(name, 3.0);
          cfg.phi.push_back(name);
        } catch (const Error&) {
          r.issue("/phi/" + std::to_string(i), "unknown test function '" + name + "'",
                  "use const, x^1, x^2, x^3, Re f(0+1i), Im f(0+0.5i), bump(0,1), ...");
        }
      }
    }
  }
  if (const json* v = r.field(j, "z_probes")) {
    if (!v->is_array() || v->empty()) {
      r.issue("/z_probes", "expected a non-empty array of [re, im] pairs", "for example [[0, 0.3], [0.5, 0.4]]");
    } else {
      cfg.z_probes.clear();
      for (std::size_t i = 0; i < v->size(); ++i) {
        const json& e = (*v)[i];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
          r.issue("/z_probes/" + std::to_string(i), "expected [re, im]", "two numbers");
          continue;
        }
        cplx z(e[0].get<double>(), e[1].get<double>());
        if (!(z.imag() > 0.0)) r.issue("/z_probes/" + std::to_string(i), "probe must lie in the upper half-plane", "im > 0");
        cfg.z_probes.push_back(z);
      }
    }
  }
  r.numbers(j, "", "thetas", cfg.thetas);
  if (cfg.thetas.empty()) r.issue("/thetas", "need at least one theta", "for example [0.25, 0.5, 1]");
  r.number(j, "", "b_max", cfg.b_max);
  if (cfg.b_max != 0.5) r.issue("/b_max", "b_max is fixed at 0.5", "remove the field or set it to 0.5");
  r.number(j, "", "gap_factor", cfg.gap_factor);
  if (!(cfg.gap_factor > 0.0)) r.issue("/gap_factor", "gap_factor must be > 0", "use e.g. 0.1");
  r.count(j, "", "hydro_particles", cfg.hydro_particles);
  if (cfg.hydro_particles < 16) r.issue("/hydro_particles", "need at least 16 deterministic particles", "use e.g. 256");
  if (const json* v = r.field(j, "seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<long long>() >= 0))
      r.issue("/seed", "seed must be a non-negative integer", "e.g. 20240101");
    else
      cfg.seed = v->get<std::uint64_t>();
  }
  r.text(j, "", "output_dir", cfg.output_dir);
  if (cfg.output_dir.empty()) r.issue("/output_dir", "output directory must be non-empty", "e.g. \"runs/smoke\"");
  std::string pipe = "all";
  if (r.text(j, "", "pipeline", pipe)) {
    static const std::pair<const char*, Pipeline> names[] = {
        {"equilibrium", Pipeline::Equilibrium}, {"hydro", Pipeline::Hydro},         {"ensemble", Pipeline::Ensemble},
        {"fluctuations", Pipeline::Fluctuations}, {"operators", Pipeline::Operators}, {"all", Pipeline::All}};
    bool found = false;
    for (auto& [n, p] : names)
      if (pipe == n) {
        cfg.pipeline = p;
        found = true;
      }
    if (!found)
      r.issue("/pipeline", "unknown pipeline '" + pipe + "'", "use equilibrium, hydro, ensemble, fluctuations, operators or all");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, std::vector<ConfigIssue>& issues) {
  std::ifstream is(path);
  if (!is) {
    issues.push_back({"", "cannot read config file '" + path + "'", "check the --config path"});
    return {};
  }
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str(), issues);
}

ordered_json config_to_json(const ExperimentConfig& c) {
  ordered_json j;
  ordered_json pot;
  pot["kind"] = c.potential.kind;
  if (c.potential.kind == "harmonic") pot["scale"] = c.potential.scale;
  if (c.potential.kind == "landau_ginzburg") pot["lambda"] = c.potential.lambda;
  if (c.potential.kind == "polynomial") pot["coeffs"] = c.potential.coeffs;
  j["potential"] = pot;
  j["beta"] = c.beta;
  j["n_list"] = c.n_list;
  j["replicas"] = c.replicas;
  j["T"] = c.T;
  j["checkpoints"] = c.checkpoints;
  ordered_json init;
  init["kind"] = c.init.kind;
  if (c.init.kind == "semicircle") init["radius"] = c.init.radius;
  if (c.init.kind == "user") init["points"] = c.init.points;
  if (c.init.kind == "mcmc") init["sweeps"] = c.init.sweeps;
  j["init"] = init;
  j["phi"] = c.phi;
  ordered_json z = ordered_json::array();
  for (auto p : c.z_probes) z.push_back({p.real(), p.imag()});
  j["z_probes"] = z;
  j["thetas"] = c.thetas;
  j["b_max"] = c.b_max;
  j["gap_factor"] = c.gap_factor;
  j["hydro_particles"] = c.hydro_particles;
  j["seed"] = c.seed;
  j["output_dir"] = c.output_dir;
  j["pipeline"] = pipeline_name(c.pipeline);
  return j;
}

std::string config_template() {
  return R"TPL({
  // confining potential: harmonic (scale), landau_ginzburg (lambda) or polynomial (ascending coeffs)
  "potential": {"kind": "harmonic", "scale": 1.0},
  "beta": 2.0,                 // >= 1
  "n_list": [32],              // particle counts, one ensemble each
  "replicas": 10,              // Monte Carlo replicas per N
  "T": 1.0,
  "checkpoints": 10,
  // equilibrium | semicircle (radius) | user (points) | mcmc (sweeps)
  "init": {"kind": "equilibrium"},
  // panel names: const, x^1, x^2, x^3, Re f(0+1i), Im f(0+1i), Re f(0+0.5i), Im f(0+0.5i),
  // Re f(1+0.5i), Im f(1+0.5i), bump(0,1)
  "phi": ["x^2", "Im f(0+0.5i)"],
  "z_probes": [[0, 0.3], [0.5, 0.4], [-0.8, 0.3], [1, 0.5], [2.2, 0.5]],
  "thetas": [0.25, 0.5, 1.0],
  "b_max": 0.5,                // fixed; echoed only
  "gap_factor": 0.1,           // SDE base step = gap_factor * (min initial gap)^2
  "hydro_particles": 256,      // deterministic particles of the limit solver
  "seed": 1,
  "output_dir": "loggas_out",
  // equilibrium | hydro | ensemble | fluctuations | operators | all
  "pipeline": "all"
}
)TPL";
}

std::string content_hash(const std::string& content) {
  std::string blob = "blob " + std::to_string(content.size());
  blob.push_back('\0');
  blob += content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(blob.data(), blob.size(), md, &len, EVP_sha1(), nullptr) != 1)
    throw Error(ErrorKind::Solver, "SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 15]);
  }
  return out;
}

std::string config_hash(const ExperimentConfig& cfg) {
  auto j = config_to_json(cfg);
  j.erase("output_dir");
  return content_hash(j.dump(2) + "\n");
}

}  // namespace loggas
