#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "anypro/bgp_sim.hpp"
#include "anypro/constraints.hpp"
#include "anypro/polling.hpp"
#include "anypro/solver.hpp"

namespace anypro {

// All ordered-pair conflicts (offset sum < 0 over one ingress pair), sorted by
// client impact descending, plus any group whose own conjunction carries a
// negative cycle.
struct ContradictionReport {
  std::vector<ContradictionPair> pairs;
  std::vector<int> infeasible_groups;  // group ids
};

ContradictionReport detect_contradictions(const std::vector<Atom>& atoms,
                                          const std::vector<ClientGroup>& groups,
                                          int max_prepend);

struct Resolution {
  enum class Outcome { resolved, unresolvable };
  Outcome outcome = Outcome::unresolvable;
  Atom refined1;  // valid when resolved
  Atom refined2;
  // Integer intervals still containing the true flip points when the scan
  // stopped: [lo+1, hi] for gamma1 and [lo, hi-1] for gamma2.
  std::pair<int, int> ds1_interval{0, 0};
  std::pair<int, int> ds2_interval{0, 0};
  std::int64_t experiments_used = 0;
  std::int64_t adjustments = 0;
};

// Algorithm: bisect [0, k] for gamma1 (s_a <= s_b - k) and [b, MAX] for gamma2
// (s_b <= s_a + b) against live probes. A gamma1 probe at m applies
// S[a]=0, S[b]=m, others MAX and passes iff every member of w1 reaches its
// desired ingress; the gamma2 probe is symmetric with S[b]=m', S[a]=0.
// Already-refined inputs return unresolvable without probing. Uses at most
// 2*ceil(log2(MAX+1)) experiments.
Resolution binary_scan(const ContradictionPair& pair, Oracle& o, const ClientGroup& w1,
                       const ClientGroup& w2, int max_prepend);

// One record per workflow step, serializable as a JSON line.
struct WorkflowRecord {
  int step = 0;  // 1..8
  std::string detail;
  std::optional<std::pair<Atom, Atom>> pair;
  std::optional<std::pair<int, int>> ds1_interval;
  std::optional<std::pair<int, int>> ds2_interval;
  std::int64_t experiments = 0;
  std::optional<long> objective;
};

std::string workflow_to_jsonl(const std::vector<WorkflowRecord>& log);

using SolveFn = std::function<solver::Solution(const solver::Instance&)>;

struct ResolveResult {
  std::vector<ClientGroup> groups;  // with refined atoms substituted
  std::vector<ContradictionPair> unresolvable;
  std::vector<Resolution> resolutions;  // scanned pairs only
  std::vector<WorkflowRecord> log;
  std::int64_t scan_experiments = 0;
  std::vector<std::int64_t> scan_adjustments;  // one entry per scan
  solver::Solution final_solution;
};

// The full resolution workflow: initial solve, contradiction extraction in
// impact order, tightness short-circuit, binary scans with re-solve after each
// resolution, single pass over the contradiction set.
ResolveResult resolve_all(const std::vector<ClientGroup>& groups, Oracle& o,
                          int max_prepend, const SolveFn& solve_fn);

}  // namespace anypro
