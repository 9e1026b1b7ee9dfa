#pragma once

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "anypro/topology.hpp"

namespace anypro {

enum class Mode { flat, gao_rexford };

// The optimization variable vector: one prepending length per ingress id.
struct PrependConfig {
  std::vector<int> lengths;
  int max_prepend = 9;
  std::vector<bool> enabled;  // sized like lengths

  static PrependConfig uniform(int n, int value, int max_prepend);
  PrependConfig with(int ingress_id, int value) const;

  bool operator==(const PrependConfig&) const = default;
};

// Throws SimulationError if cfg does not fit the topology.
void check_config(const Topology& t, const PrependConfig& cfg);

// Route held by one AS. as_path excludes the holder: front is the neighbor the
// route was learned from, the tail is the origin repeated 1 + prepend times.
struct Route {
  int ingress_id = -1;
  std::vector<Asn> as_path;
  Asn learned_from = 0;
  double latency_ms = 0.0;

  int path_len() const { return static_cast<int>(as_path.size()); }
  bool operator==(const Route&) const = default;
};

// Catchment: client -> selected ingress, plus round-trip times. Unreachable
// clients are simply absent.
struct Mapping {
  std::map<Asn, int> assignment;
  std::map<Asn, double> rtt;

  bool operator==(const Mapping&) const = default;
};

// Middle-ISP behavior: the AS caps the origin-repetition count of every route
// it receives at 1 + max_kept copies.
struct RewriteRule {
  int max_kept = 0;
};

using RouteState = std::map<Asn, Route>;

// Synchronous-round fixpoint of per-AS route selection. Flat mode ranks offers
// by (path length, learned_from asn, ingress id); gao-rexford first prefers
// customer over peer over provider routes and exports valley-free.
RouteState propagate(const Topology& t, const PrependConfig& cfg, Mode mode = Mode::flat,
                     const std::map<Asn, RewriteRule>& rules = {});

Mapping mapping_from_state(const Topology& t, const RouteState& state);

// The network oracle standing in for the live testbed. Every experiment()
// call costs one unit of the measurement budget.
class Oracle {
 public:
  Oracle(Topology topology, Mode mode = Mode::flat,
         std::map<Asn, RewriteRule> rewrite_rules = {})
      : topology_(std::move(topology)), mode_(mode), rules_(std::move(rewrite_rules)) {}

  Oracle(const Oracle& other)
      : topology_(other.topology_), mode_(other.mode_), rules_(other.rules_) {
    experiments_.store(other.experiments_.load());
  }

  Mapping experiment(const PrependConfig& cfg);

  const Topology& topology() const { return topology_; }
  Mode mode() const { return mode_; }
  std::int64_t experiment_count() const { return experiments_.load(); }

 private:
  Topology topology_;
  Mode mode_;
  std::map<Asn, RewriteRule> rules_;
  std::atomic<std::int64_t> experiments_{0};
};

// Per-client selected ingress as the pair difference d = s_b - s_a sweeps
// -max..max with every other ingress pinned at others_at. Index 0 is d=-max.
struct FlipTable {
  int max_prepend = 0;
  std::map<Asn, std::vector<std::optional<int>>> rows;

  static int changes(const std::vector<std::optional<int>>& row);
};

FlipTable sweep_pair_difference(Oracle& o, int a, int b, int others_at, int max_prepend,
                                const std::vector<bool>& enabled = {});

}  // namespace anypro
