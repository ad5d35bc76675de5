// Command-line front end: validate a config, run it, or print a template.
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "loggas/experiment.hpp"

namespace {

int report(const std::vector<loggas::ConfigIssue>& issues) {
  for (const auto& i : issues)
    std::cerr << "error: " << (i.path.empty() ? "<root>" : i.path) << ": " << i.message << " (hint: " << i.hint
              << ")\n";
  return issues.empty() ? loggas::kExitOk : loggas::kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Log-gas dynamics experiments"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  int jobs = 1;
  std::uint64_t seed = 0;

  auto* validate = app.add_subcommand("validate", "check a config file and exit");
  validate->add_option("--config", config_path, "JSON config (comments allowed)")->required();

  auto* run = app.add_subcommand("run", "run the configured pipelines");
  run->add_option("--config", config_path, "JSON config (comments allowed)")->required();
  run->add_option("--jobs", jobs, "worker threads for replica ensembles")->check(CLI::PositiveNumber);
  auto* out_opt = run->add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = run->add_option("--seed", seed, "master seed (overrides the config)");

  auto* tmpl = app.add_subcommand("template", "print a commented config with the defaults");
  tmpl->add_option("--out", out_dir, "write to this file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? loggas::kExitOk : loggas::kExitValidation;
  }

  if (*tmpl) {
    if (out_dir.empty()) {
      std::cout << loggas::config_template();
    } else {
      std::ofstream f(out_dir);
      f << loggas::config_template();
      if (!f) {
        std::cerr << "error: cannot write " << out_dir << "\n";
        return loggas::kExitValidation;
      }
    }
    return loggas::kExitOk;
  }

  std::vector<loggas::ConfigIssue> issues;
  auto cfg = loggas::load_config(config_path, issues);
  if (*run) {
    if (*out_opt) {
      if (out_dir.empty()) issues.push_back({"--out", "output directory must be non-empty", "pass a path"});
      cfg.output_dir = out_dir;
    }
    if (*seed_opt) cfg.seed = seed;
  }
  if (int code = report(issues); code != loggas::kExitOk) return code;
  if (*validate) {
    std::cout << "ok " << loggas::config_hash(cfg) << "\n";
    return loggas::kExitOk;
  }

  loggas::RunOptions opt;
  opt.jobs = jobs;
  opt.log = &std::cerr;
  auto res = loggas::run_experiment(cfg, opt);
  (res.exit_code == loggas::kExitOk ? std::cout : std::cerr) << res.message << "\n";
  for (const auto& f : res.files) std::cout << cfg.output_dir << "/" << f << "\n";
  return res.exit_code;
}
