#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "anypro/bgp_sim.hpp"
#include "anypro/constraints.hpp"

namespace anypro {

struct ClientGroup;  // polling.hpp

namespace solver {

struct SoftGroup {
  long weight = 0;
  std::vector<Atom> atoms;  // conjunction; empty is never emitted by encode
  int source_group_id = -1;
};

struct Instance {
  int n = 0;
  int max_prepend = 0;
  long base_weight = 0;  // unconditionally satisfied weight
  std::vector<SoftGroup> groups;

  // Feasibility statistics gathered at encode time.
  long total_clients = 0;
  long unattainable_weight = 0;
  int distinct_atoms = 0;
  std::map<int, int> candidate_histogram;  // candidate-set size -> group count

  long weight_upper_bound() const;
};

struct Solution {
  PrependConfig config;
  long objective = 0;
  std::vector<int> satisfied_groups;  // indices into Instance::groups
  enum class Proof { exact, heuristic } proof = Proof::exact;
  std::int64_t nodes = 0;
};

// One soft conjunction per dynamic reachable group; always-satisfied groups
// fold into base_weight; unattainable groups are dropped (zero attainable
// weight) but counted in the statistics.
Instance encode(const std::vector<ClientGroup>& groups, int n, int max_prepend);

// Exact depth-first branch and bound over [0, MAX]^n. Variables in descending
// incident-weight order, values by ascending newly-violated weight. Among
// optimal configs returns the lexicographically smallest. With a node budget
// the search may stop early and return the incumbent (proof = heuristic).
Solution solve(const Instance& inst, std::optional<std::int64_t> node_budget = std::nullopt);

// Exhaustive ground truth; guarded to (MAX+1)^n <= 10^7. Ties break to the
// lexicographically smallest config.
Solution solve_bruteforce(const Instance& inst);

bool check_feasible(const std::vector<Atom>& atoms, int max_prepend);

long evaluate_objective(const Instance& inst, const std::vector<int>& lengths);

std::string instance_to_json(const Instance& inst);
Instance instance_from_json(const std::string& text);
std::string instance_to_dimacs(const Instance& inst);

}  // namespace solver
}  // namespace anypro
