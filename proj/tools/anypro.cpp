#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anypro/errors.hpp"
#include "anypro/pipeline.hpp"

namespace {

using anypro::RunConfig;

struct CommonOpts {
  std::string topo_path;
  std::string fixture;
  std::string gen_spec;
  std::string desired = "nearest";
  int max_prepend = 9;
  std::string mode = "flat";
  std::string enable;
  std::uint64_t seed = 0;
  std::int64_t budget = -1;
  std::string out_dir;
  double convergence_cost = 10.0;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
  cmd->add_option("--topo", o.topo_path, "Topology JSON file");
  cmd->add_option("--fixture", o.fixture, "Named fixture (testbed)");
  cmd->add_option("--gen", o.gen_spec,
                  "Generator params n_ingresses,n_clients,n_intermediate,density");
  cmd->add_option("--desired", o.desired, "Desired mapping file or \"nearest\"");
  cmd->add_option("--max", o.max_prepend, "Maximum prepending length");
  cmd->add_option("--mode", o.mode, "Routing mode: flat | gr");
  cmd->add_option("--enable", o.enable, "Comma-separated enabled ingress ids");
  cmd->add_option("--seed", o.seed, "Seed for all randomness");
  cmd->add_option("--budget", o.budget, "Solver node budget (-1 = unlimited)");
  cmd->add_option("--out", o.out_dir, "Output directory");
  cmd->add_option("--convergence-cost", o.convergence_cost,
                  "Simulated minutes per ASPP adjustment");
}

RunConfig to_config(const CommonOpts& o) {
  RunConfig cfg;
  int sources = (!o.topo_path.empty()) + (!o.fixture.empty()) + (!o.gen_spec.empty());
  if (sources > 1) throw anypro::Error("cli", "choose one of --topo, --fixture, --gen");
  if (!o.topo_path.empty()) {
    cfg.topo_source = RunConfig::TopoSource::file;
    cfg.topo_path = o.topo_path;
  } else if (!o.fixture.empty()) {
    if (o.fixture != "testbed")
      throw anypro::Error("cli", "unknown fixture \"" + o.fixture + "\" (try: testbed)");
    cfg.topo_source = RunConfig::TopoSource::fixture;
  } else if (!o.gen_spec.empty()) {
    cfg.topo_source = RunConfig::TopoSource::generator;
    if (std::sscanf(o.gen_spec.c_str(), "%d,%d,%d,%lf", &cfg.gen_ingresses, &cfg.gen_clients,
                    &cfg.gen_intermediate, &cfg.gen_density) != 4)
      throw anypro::Error("cli", "--gen expects n_ingresses,n_clients,n_intermediate,density");
  } else {
    cfg.topo_source = RunConfig::TopoSource::generator;  // defaults
  }
  if (o.desired != "nearest") cfg.desired_path = o.desired;
  cfg.max_prepend = o.max_prepend;
  if (o.mode == "flat")
    cfg.mode = anypro::Mode::flat;
  else if (o.mode == "gr" || o.mode == "gao-rexford")
    cfg.mode = anypro::Mode::gao_rexford;
  else
    throw anypro::Error("cli", "unknown mode \"" + o.mode + "\" (flat | gr)");
  if (!o.enable.empty()) {
    std::stringstream ss(o.enable);
    std::string item;
    while (std::getline(ss, item, ',')) cfg.enabled_ids.push_back(std::stoi(item));
  }
  cfg.seed = o.seed;
  if (o.budget >= 0) cfg.solver_budget = o.budget;
  cfg.out_dir = o.out_dir;
  cfg.convergence_cost_minutes = o.convergence_cost;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"anypro: anycast catchment engineering by AS-path prepending"};
  app.require_subcommand(1);

  CommonOpts run_opts, sweep_opts, verify_opts, gen_opts;
  int sweep_n = 10;

  CLI::App* run = app.add_subcommand("run", "Full pipeline: poll, derive, resolve, solve, evaluate");
  add_common(run, run_opts);

  CLI::App* sweep = app.add_subcommand("sweep", "Objective-vs-RTT sweep over random configs");
  add_common(sweep, sweep_opts);
  sweep->add_option("--configs", sweep_n, "Number of random configs");

  CLI::App* verify = app.add_subcommand("verify", "Brute-force property suite on a small world");
  add_common(verify, verify_opts);

  CLI::App* gen = app.add_subcommand("gen-topo", "Generate a topology document");
  add_common(gen, gen_opts);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      RunConfig cfg = to_config(run_opts);
      if (cfg.out_dir.empty()) throw anypro::Error("cli", "run requires --out DIR");
      anypro::RunResult r = anypro::run_pipeline(cfg);
      std::printf("objective all-zero=%.4f preliminary=%.4f finalized=%.4f\n",
                  r.all_zero.objective, r.preliminary.objective, r.finalized.objective);
      std::printf("budget experiments=%lld adjustments=%lld wall-clock=%.0f min\n",
                  static_cast<long long>(r.budget.experiments),
                  static_cast<long long>(r.budget.total_adjustments),
                  r.budget.simulated_wall_clock_minutes);
      std::printf("report: %s/report.json\n", cfg.out_dir.c_str());
      return 0;
    }
    if (sweep->parsed()) {
      RunConfig cfg = to_config(sweep_opts);
      anypro::SweepResult sr = anypro::run_sweep(cfg, sweep_n);
      for (const auto& row : sr.rows)
        std::printf("%s objective=%.4f mean_rtt=%.3f p95_rtt=%.3f\n",
                    row.optimized ? "optimized" : "random   ", row.objective, row.mean_rtt,
                    row.p95_rtt);
      std::printf("pearson objective~mean_rtt=%.4f objective~p95_rtt=%.4f\n", sr.pearson_mean,
                  sr.pearson_p95);
      return 0;
    }
    if (verify->parsed()) {
      RunConfig cfg = to_config(verify_opts);
      anypro::VerifyResult vr = anypro::run_verify(cfg);
      for (const auto& p : vr.properties)
        std::printf("%s %s: %s\n", p.pass ? "PASS" : "FAIL", p.name.c_str(), p.detail.c_str());
      return 0;
    }
    if (gen->parsed()) {
      RunConfig cfg = to_config(gen_opts);
      anypro::Topology t = anypro::make_topology(cfg);
      std::string doc = anypro::save_topology(t);
      if (cfg.out_dir.empty()) {
        std::fputs(doc.c_str(), stdout);
      } else {
        std::filesystem::create_directories(cfg.out_dir);
        std::ofstream out(std::filesystem::path(cfg.out_dir) / "topology.json",
                          std::ios::binary);
        out << doc;
        std::printf("topology: %s/topology.json\n", cfg.out_dir.c_str());
      }
      return 0;
    }
  } catch (const anypro::Error& e) {
    std::fprintf(stderr, "error [%s] %s\n", e.stage().c_str(), e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error %s\n", e.what());
    return 1;
  }
  return 0;
}
