#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "anypro/bgp_sim.hpp"
#include "anypro/metrics.hpp"
#include "anypro/polling.hpp"
#include "anypro/resolution.hpp"
#include "anypro/solver.hpp"
#include "anypro/topology.hpp"

namespace anypro {

struct RunConfig {
  enum class TopoSource { file, generator, fixture };
  TopoSource topo_source = TopoSource::generator;
  std::string topo_path;
  int gen_ingresses = 4;
  int gen_clients = 30;
  int gen_intermediate = 10;
  double gen_density = 0.4;

  std::string desired_path;  // empty: nearest-by-latency rule
  int max_prepend = 9;
  Mode mode = Mode::flat;
  std::vector<int> enabled_ids;  // empty: all ingresses
  std::uint64_t seed = 0;
  double convergence_cost_minutes = 10.0;
  std::optional<std::int64_t> solver_budget;
  std::string out_dir;  // empty: write nothing
};

struct EvalPoint {
  double objective = 0.0;
  RttStats rtt;
};

struct RunResult {
  Topology topology;
  DesiredMapping desired;
  std::vector<bool> enabled;

  PollResult poll;
  Classification classification;
  std::vector<ClientGroup> groups;

  solver::Instance preliminary_instance;
  solver::Solution preliminary_solution;
  ResolveResult resolution;
  solver::Instance final_instance;

  PrependConfig all_zero_config;
  PrependConfig preliminary_config;
  PrependConfig final_config;
  EvalPoint all_zero;
  EvalPoint preliminary;
  EvalPoint finalized;
  Mapping final_mapping;

  BudgetReport budget;
  std::string report_json;
};

RunResult run_pipeline(const RunConfig& cfg);

struct SweepRow {
  double objective = 0.0;
  double mean_rtt = 0.0;
  double p95_rtt = 0.0;
  bool optimized = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  double pearson_mean = 0.0;
  double pearson_p95 = 0.0;
};

SweepResult run_sweep(const RunConfig& cfg, int n_random_configs);

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyResult {
  std::vector<PropertyResult> properties;
  bool all_pass() const {
    for (const auto& p : properties)
      if (!p.pass) return false;
    return true;
  }
};

// Brute-force property suite on small worlds; throws on topologies beyond the
// enumeration guard (n > 4 or MAX > 3).
VerifyResult run_verify(const RunConfig& cfg);

// Helpers shared by sweep/verify and the test suites.
Topology make_topology(const RunConfig& cfg);
DesiredMapping make_desired(const RunConfig& cfg, const Topology& t,
                            const std::vector<bool>& enabled);
std::vector<bool> make_enabled(const RunConfig& cfg, const Topology& t);
PrependConfig random_config(int n, int max_prepend, const std::vector<bool>& enabled,
                            std::mt19937_64& rng);

// Candidate relation from exhaustive enumeration of all (MAX+1)^n configs:
// the ground truth for the polling completeness property.
std::map<Asn, std::set<int>> enumerate_candidates(Oracle& o, int max_prepend,
                                                  const std::vector<bool>& enabled = {});

}  // namespace anypro
