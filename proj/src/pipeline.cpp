#include "anypro/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "anypro/errors.hpp"

namespace anypro {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

int log_level() {
  static int level = [] {
    const char* env = std::getenv("ANYPRO_LOG");
    if (!env) return 1;
    std::string s(env);
    if (s == "error") return 0;
    if (s == "debug") return 2;
    return 1;  // info
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::fprintf(stderr, "[anypro] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::fprintf(stderr, "[anypro:debug] %s\n", msg.c_str());
}

// One run per output directory.
class DirLock {
 public:
  explicit DirLock(const std::string& dir) {
    if (dir.empty()) return;
    fs::create_directories(dir);
    path_ = fs::path(dir) / ".anypro.lock";
    std::FILE* f = std::fopen(path_.c_str(), "wx");
    if (!f)
      throw Error("cli", "output directory is locked by another run: " + path_.string());
    std::fclose(f);
    held_ = true;
  }
  ~DirLock() {
    if (held_) std::remove(path_.c_str());
  }
  DirLock(const DirLock&) = delete;
  DirLock& operator=(const DirLock&) = delete;

 private:
  fs::path path_;
  bool held_ = false;
};

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  if (dir.empty()) return;
  fs::create_directories(dir);
  std::ofstream out(fs::path(dir) / name, std::ios::binary);
  if (!out) throw Error("cli", "cannot write " + name + " under " + dir);
  out << content;
}

long hamming(const std::vector<int>& x, const std::vector<int>& y) {
  long d = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) ++d;
  return d;
}

std::string mappings_csv(const Topology& t, const DesiredMapping& dm, const Mapping& m) {
  std::string out = "client,desired,assigned,rtt_ms\n";
  char buf[96];
  for (Asn c : t.clients) {
    auto dit = dm.desired.find(c);
    std::string desired = dit == dm.desired.end() ? "" : std::to_string(dit->second);
    auto ait = m.assignment.find(c);
    if (ait == m.assignment.end()) {
      std::snprintf(buf, sizeof(buf), "%u,%s,,\n", c, desired.c_str());
    } else {
      std::snprintf(buf, sizeof(buf), "%u,%s,%d,%.3f\n", c, desired.c_str(), ait->second,
                    m.rtt.at(c));
    }
    out += buf;
  }
  return out;
}

json rtt_json(const RttStats& s) {
  return json{{"p50", s.p50}, {"p90", s.p90}, {"p95", s.p95}, {"mean", s.mean}};
}

}  // namespace

Topology make_topology(const RunConfig& cfg) {
  switch (cfg.topo_source) {
    case RunConfig::TopoSource::fixture:
      return build_testbed_fixture();
    case RunConfig::TopoSource::file: {
      std::ifstream in(cfg.topo_path, std::ios::binary);
      if (!in) throw ParseError("cannot open topology file " + cfg.topo_path);
      std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      return load_topology(text);
    }
    case RunConfig::TopoSource::generator:
      return generate_random_topology(cfg.gen_ingresses, cfg.gen_clients, cfg.gen_intermediate,
                                      cfg.gen_density, cfg.seed);
  }
  throw ParseError("unknown topology source");
}

std::vector<bool> make_enabled(const RunConfig& cfg, const Topology& t) {
  std::vector<bool> enabled(t.ingress_count(), cfg.enabled_ids.empty());
  for (int id : cfg.enabled_ids) {
    if (id < 0 || id >= t.ingress_count())
      throw Error("cli", "enabled ingress id " + std::to_string(id) + " out of range");
    enabled[id] = true;
  }
  if (std::none_of(enabled.begin(), enabled.end(), [](bool b) { return b; }))
    throw Error("cli", "enabled ingress subset is empty");
  return enabled;
}

DesiredMapping make_desired(const RunConfig& cfg, const Topology& t,
                            const std::vector<bool>& enabled) {
  if (cfg.desired_path.empty()) return nearest_by_latency(t, enabled);

  std::ifstream in(cfg.desired_path, std::ios::binary);
  if (!in) throw PollingError("cannot open desired mapping file " + cfg.desired_path);
  json doc;
  try {
    in >> doc;
  } catch (const json::parse_error& e) {
    throw PollingError(std::string("desired mapping parse: ") + e.what());
  }
  if (!doc.is_object()) throw PollingError("desired mapping must be an object client -> ingress");
  DesiredMapping dm;
  std::set<Asn> clients(t.clients.begin(), t.clients.end());
  for (const auto& [key, val] : doc.items()) {
    Asn c = static_cast<Asn>(std::stoul(key));
    int id = val.get<int>();
    if (!clients.count(c))
      throw PollingError("desired mapping names unknown client " + key);
    if (id < 0 || id >= t.ingress_count() || !enabled[id])
      throw PollingError("desired ingress " + std::to_string(id) + " for client " + key +
                         " does not exist or is disabled");
    dm.desired[c] = id;
  }
  for (Asn c : t.clients)
    if (!dm.desired.count(c))
      throw PollingError("desired mapping misses client " + std::to_string(c));
  return dm;
}

PrependConfig random_config(int n, int max_prepend, const std::vector<bool>& enabled,
                            std::mt19937_64& rng) {
  PrependConfig cfg = PrependConfig::uniform(n, 0, max_prepend);
  cfg.enabled = enabled;
  for (int i = 0; i < n; ++i)
    cfg.lengths[i] = static_cast<int>(rng() % static_cast<std::uint64_t>(max_prepend + 1));
  return cfg;
}

std::map<Asn, std::set<int>> enumerate_candidates(Oracle& o, int max_prepend,
                                                  const std::vector<bool>& enabled) {
  const int n = o.topology().ingress_count();
  std::vector<bool> en = enabled.empty() ? std::vector<bool>(n, true) : enabled;
  std::vector<int> polled;
  for (int i = 0; i < n; ++i)
    if (en[i]) polled.push_back(i);
  double space = std::pow(max_prepend + 1.0, static_cast<double>(polled.size()));
  if (space > 1e6)
    throw SimulationError("enumeration guard: (MAX+1)^n = " + std::to_string(space) + " > 1e6");

  std::map<Asn, std::set<int>> cand;
  PrependConfig cfg = PrependConfig::uniform(n, 0, max_prepend);
  cfg.enabled = en;
  while (true) {
    Mapping m = o.experiment(cfg);
    for (const auto& [c, id] : m.assignment) cand[c].insert(id);
    std::size_t j = 0;
    while (j < polled.size() && cfg.lengths[polled[j]] == max_prepend)
      cfg.lengths[polled[j++]] = 0;
    if (j == polled.size()) break;
    ++cfg.lengths[polled[j]];
  }
  return cand;
}

RunResult run_pipeline(const RunConfig& cfg) {
  if (cfg.max_prepend < 1) throw Error("cli", "max_prepend must be >= 1");
  DirLock lock(cfg.out_dir);

  RunResult r;
  r.topology = make_topology(cfg);
  auto violations = validate(r.topology);
  if (!violations.empty()) {
    std::string msg = "topology invalid:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw SemanticError(msg);
  }
  r.enabled = make_enabled(cfg, r.topology);
  r.desired = make_desired(cfg, r.topology, r.enabled);
  const int n = r.topology.ingress_count();
  int n_polled = static_cast<int>(std::count(r.enabled.begin(), r.enabled.end(), true));
  log_info("topology: " + std::to_string(n) + " ingresses (" + std::to_string(n_polled) +
           " enabled), " + std::to_string(r.topology.clients.size()) + " clients");

  Oracle oracle(r.topology, cfg.mode);
  BudgetLog budget_log;
  budget_log.convergence_cost_minutes = cfg.convergence_cost_minutes;
  std::int64_t eval_experiments = 0;

  PrependConfig resting = PrependConfig::uniform(n, cfg.max_prepend, cfg.max_prepend);
  resting.enabled = r.enabled;
  auto evaluate = [&](const PrependConfig& c) {
    Mapping m = oracle.experiment(c);
    budget_log.eval_adjustments += 2 * hamming(c.lengths, resting.lengths);
    eval_experiments += 1;
    EvalPoint p;
    p.objective = normalized_objective(m, r.desired);
    p.rtt = rtt_distribution(m);
    return std::make_pair(p, m);
  };

  // Stage: baseline evaluation (no prepending anywhere).
  r.all_zero_config = PrependConfig::uniform(n, 0, cfg.max_prepend);
  r.all_zero_config.enabled = r.enabled;
  Mapping all_zero_mapping;
  std::tie(r.all_zero, all_zero_mapping) = evaluate(r.all_zero_config);
  log_info("all-zero objective: " + std::to_string(r.all_zero.objective));

  // Stage: max-min polling.
  r.poll = max_min_poll(oracle, cfg.max_prepend, r.enabled);
  budget_log.polling_adjustments = r.poll.adjustments;
  r.classification = classify(r.poll, r.desired);
  r.groups = derive_preliminary_constraints(r.poll, r.desired);
  log_info("polling: " + std::to_string(r.poll.sensitive.size()) + " sensitive clients, " +
           std::to_string(r.groups.size()) + " groups");

  auto solve_fn = [&cfg](const solver::Instance& inst) {
    return solver::solve(inst, cfg.solver_budget);
  };

  // Stage: preliminary configuration (no contradiction resolution).
  r.preliminary_instance = solver::encode(r.groups, n, cfg.max_prepend);
  r.preliminary_solution = solve_fn(r.preliminary_instance);
  r.preliminary_config = r.preliminary_solution.config;
  r.preliminary_config.enabled = r.enabled;
  Mapping preliminary_mapping;
  std::tie(r.preliminary, preliminary_mapping) = evaluate(r.preliminary_config);
  log_info("preliminary objective: " + std::to_string(r.preliminary.objective));

  // Stage: contradiction resolution and final solve.
  r.resolution = resolve_all(r.groups, oracle, cfg.max_prepend, solve_fn);
  budget_log.scan_adjustments = r.resolution.scan_adjustments;
  r.final_instance = solver::encode(r.resolution.groups, n, cfg.max_prepend);
  r.final_config = r.resolution.final_solution.config;
  r.final_config.enabled = r.enabled;
  std::tie(r.finalized, r.final_mapping) = evaluate(r.final_config);
  log_info("finalized objective: " + std::to_string(r.finalized.objective));

  r.budget = budget_report(oracle, budget_log);

  // Report assembly; key order is canonical (sorted) for reproducibility.
  json rep;
  rep["budget"] = {
      {"experiments", r.budget.experiments},
      {"experiments_polling", r.poll.experiments},
      {"experiments_scan", r.resolution.scan_experiments},
      {"experiments_eval", eval_experiments},
      {"polling_adjustments", r.budget.polling_adjustments},
      {"scan_adjustments", r.budget.scan_adjustments_total},
      {"eval_adjustments", r.budget.eval_adjustments},
      {"total_adjustments", r.budget.total_adjustments},
      {"simulated_wall_clock_minutes", r.budget.simulated_wall_clock_minutes},
  };
  json cls;
  for (const auto& [label, count] : r.classification.counts)
    cls[client_class_name(label)] = count;
  rep["classification"] = cls;
  rep["config"] = {
      {"all_zero", r.all_zero_config.lengths},
      {"preliminary", r.preliminary_config.lengths},
      {"finalized", r.final_config.lengths},
  };
  long total_clients = static_cast<long>(r.desired.desired.size());
  long desired_reachable = r.classification.counts.at(ClientClass::static_desired) +
                           r.classification.counts.at(ClientClass::dynamic_desired);
  rep["objective"] = {
      {"all_zero", r.all_zero.objective},
      {"preliminary", r.preliminary.objective},
      {"finalized", r.finalized.objective},
      {"ceiling", total_clients ? static_cast<double>(desired_reachable) /
                                      static_cast<double>(total_clients)
                                : 0.0},
  };
  rep["per_region"] = per_region_objective(r.topology, r.final_mapping, r.desired);
  rep["rtt"] = {
      {"all_zero", rtt_json(r.all_zero.rtt)},
      {"preliminary", rtt_json(r.preliminary.rtt)},
      {"finalized", rtt_json(r.finalized.rtt)},
  };
  rep["solver"] = {
      {"objective", r.resolution.final_solution.objective},
      {"upper_bound", r.final_instance.weight_upper_bound()},
      {"base_weight", r.final_instance.base_weight},
      {"soft_groups", r.final_instance.groups.size()},
      {"distinct_atoms", r.final_instance.distinct_atoms},
      {"unattainable_weight", r.final_instance.unattainable_weight},
      {"proof", r.resolution.final_solution.proof == solver::Solution::Proof::exact
                    ? "exact"
                    : "heuristic"},
      {"nodes", r.resolution.final_solution.nodes},
  };
  rep["resolution"] = {
      {"scans", r.resolution.resolutions.size()},
      {"unresolvable", r.resolution.unresolvable.size()},
      {"scan_experiments", r.resolution.scan_experiments},
  };
  json run;
  run["seed"] = cfg.seed;
  run["max_prepend"] = cfg.max_prepend;
  run["mode"] = cfg.mode == Mode::flat ? "flat" : "gao-rexford";
  run["enabled"] = r.enabled;
  run["convergence_cost_minutes"] = cfg.convergence_cost_minutes;
  switch (cfg.topo_source) {
    case RunConfig::TopoSource::fixture: run["topology"] = "testbed-fixture"; break;
    case RunConfig::TopoSource::file: run["topology"] = cfg.topo_path; break;
    case RunConfig::TopoSource::generator:
      run["topology"] = "generated(" + std::to_string(cfg.gen_ingresses) + "," +
                        std::to_string(cfg.gen_clients) + "," +
                        std::to_string(cfg.gen_intermediate) + ")";
      break;
  }
  run["desired"] = cfg.desired_path.empty() ? "nearest-by-latency" : cfg.desired_path;
  rep["run"] = run;
  r.report_json = rep.dump(2) + "\n";

  if (!cfg.out_dir.empty()) {
    write_file(cfg.out_dir, "report.json", r.report_json);
    write_file(cfg.out_dir, "mappings.csv", mappings_csv(r.topology, r.desired, r.final_mapping));
    write_file(cfg.out_dir, "workflow.jsonl", workflow_to_jsonl(r.resolution.log));
    write_file(cfg.out_dir, "cdf_baseline.csv", cdf_to_csv(r.all_zero.rtt));
    write_file(cfg.out_dir, "cdf_final.csv", cdf_to_csv(r.finalized.rtt));
    write_file(cfg.out_dir, "instance.json", solver::instance_to_json(r.final_instance));
    write_file(cfg.out_dir, "instance.dimacs", solver::instance_to_dimacs(r.final_instance));
    write_file(cfg.out_dir, "poll.json", poll_result_to_json(r.poll, r.groups));
    log_debug("outputs written to " + cfg.out_dir);
  }
  return r;
}

SweepResult run_sweep(const RunConfig& cfg, int n_random_configs) {
  if (n_random_configs < 3)
    throw Error("cli", "sweep needs at least 3 random configs");

  RunConfig quiet = cfg;
  quiet.out_dir.clear();
  RunResult pipeline = run_pipeline(quiet);

  Oracle oracle(pipeline.topology, cfg.mode);
  const int n = pipeline.topology.ingress_count();
  std::mt19937_64 rng(cfg.seed ^ 0x53EEBull);

  SweepResult sr;
  auto add_row = [&](const PrependConfig& c, bool optimized) {
    Mapping m = oracle.experiment(c);
    SweepRow row;
    row.objective = normalized_objective(m, pipeline.desired);
    RttStats stats = rtt_distribution(m);
    row.mean_rtt = stats.mean;
    row.p95_rtt = stats.p95;
    row.optimized = optimized;
    sr.rows.push_back(row);
  };
  for (int i = 0; i < n_random_configs; ++i)
    add_row(random_config(n, cfg.max_prepend, pipeline.enabled, rng), false);
  add_row(pipeline.final_config, true);

  std::vector<std::pair<double, double>> mean_pts, p95_pts;
  for (const auto& row : sr.rows) {
    mean_pts.push_back({row.objective, row.mean_rtt});
    p95_pts.push_back({row.objective, row.p95_rtt});
  }
  sr.pearson_mean = correlation(mean_pts);
  sr.pearson_p95 = correlation(p95_pts);

  if (!cfg.out_dir.empty()) {
    std::string csv = "objective,mean_rtt_ms,p95_rtt_ms,kind\n";
    char buf[96];
    for (const auto& row : sr.rows) {
      std::snprintf(buf, sizeof(buf), "%.6f,%.3f,%.3f,%s\n", row.objective, row.mean_rtt,
                    row.p95_rtt, row.optimized ? "optimized" : "random");
      csv += buf;
    }
    std::snprintf(buf, sizeof(buf), "pearson,%.6f,%.6f,\n", sr.pearson_mean, sr.pearson_p95);
    csv += buf;
    write_file(cfg.out_dir, "sweep.csv", csv);
  }
  return sr;
}

VerifyResult run_verify(const RunConfig& cfg) {
  Topology t = make_topology(cfg);
  std::vector<bool> enabled = make_enabled(cfg, t);
  int n_polled = static_cast<int>(std::count(enabled.begin(), enabled.end(), true));
  if (n_polled > 4 || cfg.max_prepend > 3)
    throw Error("cli", "verify guard: needs <= 4 enabled ingresses and MAX <= 3 (got " +
                           std::to_string(n_polled) + ", " + std::to_string(cfg.max_prepend) +
                           ")");
  DesiredMapping dm = make_desired(cfg, t, enabled);

  VerifyResult vr;

  {
    Oracle poll_oracle(t, cfg.mode);
    PollResult pr = max_min_poll(poll_oracle, cfg.max_prepend, enabled);
    Oracle enum_oracle(t, cfg.mode);
    auto truth = enumerate_candidates(enum_oracle, cfg.max_prepend, enabled);
    bool ok = pr.candidates == truth;
    int diffs = 0;
    for (const auto& [c, s] : truth) {
      auto it = pr.candidates.find(c);
      if (it == pr.candidates.end() || it->second != s) ++diffs;
    }
    vr.properties.push_back({"polling-completeness", ok,
                             ok ? "poll candidates match exhaustive enumeration"
                                : std::to_string(diffs) + " clients differ from enumeration"});

    bool budget_ok = pr.experiments == n_polled + 1 &&
                     poll_oracle.experiment_count() == n_polled + 1 &&
                     pr.adjustments == 2 * n_polled;
    vr.properties.push_back({"budget-identity", budget_ok,
                             std::to_string(pr.experiments) + " experiments, " +
                                 std::to_string(pr.adjustments) + " adjustments for " +
                                 std::to_string(n_polled) + " ingresses"});

    Oracle solver_oracle(t, cfg.mode);
    auto groups = derive_preliminary_constraints(pr, dm);
    auto inst = solver::encode(groups, t.ingress_count(), cfg.max_prepend);
    auto exact = solver::solve(inst);
    auto brute = solver::solve_bruteforce(inst);
    bool solver_ok = exact.objective == brute.objective;
    vr.properties.push_back({"solver-exactness", solver_ok,
                             "branch-and-bound " + std::to_string(exact.objective) +
                                 " vs brute force " + std::to_string(brute.objective)});
  }

  {
    bool unique = true;
    long violations = 0;
    for (int a = 0; a < t.ingress_count(); ++a) {
      if (!enabled[a]) continue;
      for (int b = a + 1; b < t.ingress_count(); ++b) {
        if (!enabled[b]) continue;
        Oracle sweep_oracle(t, cfg.mode);
        FlipTable table =
            sweep_pair_difference(sweep_oracle, a, b, cfg.max_prepend, cfg.max_prepend, enabled);
        for (const auto& [c, row] : table.rows)
          if (FlipTable::changes(row) > 1) {
            unique = false;
            ++violations;
          }
      }
    }
    vr.properties.push_back({"flip-uniqueness", unique,
                             unique ? "every pair row changes at most once"
                                    : std::to_string(violations) + " rows change more than once"});
  }

  return vr;
}

}  // namespace anypro
