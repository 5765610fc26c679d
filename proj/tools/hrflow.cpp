// hrflow: catalog inspection, config validation and experiment runs.

#include "hrf/experiment.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

int catalog_list() {
  for (const std::string& n : hrf::catalog_names()) std::cout << n << "  " << hrf::catalog(n).description << "\n";
  return 0;
}

int catalog_show(const std::string& name) {
  hrf::CatalogEntry e;
  try {
    e = hrf::catalog(name);
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 2;
  }
  const hrf::ReductiveSplit s = hrf::build_split(e);
  hrf::Json j;
  j["name"] = e.name;
  j["description"] = e.description;
  j["algebra"] = hrf::to_json(s.algebra);
  j["split"] = hrf::to_json(s);
  hrf::Json metrics = hrf::Json::object();
  for (const auto& [k, m] : e.metrics) metrics[k] = hrf::to_json(m);
  j["metrics"] = metrics;
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Homogeneous Ricci flow experiments on U x| V"};
  app.require_subcommand(1);

  CLI::App* cat = app.add_subcommand("catalog", "Built-in example spaces");
  cat->require_subcommand(1);
  cat->add_subcommand("list", "List catalog entries");
  std::string show_name;
  CLI::App* show = cat->add_subcommand("show", "Print one entry as JSON");
  show->add_option("name", show_name, "Catalog entry")->required();

  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int jobs = 1;
  CLI::App* run = app.add_subcommand("run", "Run the experiments of a config file");
  run->add_option("--config", config, "Config file (JSON)")->required();
  run->add_option("--out", out, "Output directory")->required();
  CLI::Option* seed_opt = run->add_option("--seed", seed, "Override the seed of every experiment");
  run->add_option("--jobs", jobs, "Parallel experiments")->check(CLI::PositiveNumber);

  std::string check_config;
  CLI::App* check = app.add_subcommand("check", "Validate a config file without running it");
  check->add_option("--config", check_config, "Config file (JSON)")->required();

  CLI11_PARSE(app, argc, argv);

  if (cat->parsed()) {
    if (cat->got_subcommand("list")) return catalog_list();
    return catalog_show(show_name);
  }

  if (check->parsed()) {
    try {
      for (const hrf::ExperimentConfig& c : hrf::load_configs(check_config)) {
        hrf::resolve(c);
        std::cout << c.name << ": ok\n";
      }
    } catch (const hrf::StageError& e) {
      std::cerr << "stage " << e.stage() << ": " << e.what() << "\n";
      return 1;
    }
    return 0;
  }

  std::vector<hrf::ExperimentConfig> configs;
  try {
    configs = hrf::load_configs(config);
  } catch (const hrf::StageError& e) {
    std::cerr << "stage " << e.stage() << ": " << e.what() << "\n";
    return 1;
  }
  if (seed_opt->count() > 0)
    for (hrf::ExperimentConfig& c : configs) c.seed = seed;
  const auto results = hrf::run_sweep(configs, out, jobs);
  bool ok = true;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const hrf::RunResult& r = results[i];
    std::cout << configs[i].name << ": " << r.summary["status"].get<std::string>();
    if (!r.failed_stage.empty()) std::cout << " (stage " << r.failed_stage << ": " << r.message << ")";
    for (const hrf::CheckResult& c : r.checks)
      std::cout << "\n  " << c.name << ": " << c.status << (c.note.empty() ? "" : " (" + c.note + ")");
    std::cout << "\n";
    ok = ok && r.ok;
  }
  return ok ? 0 : 1;
}
