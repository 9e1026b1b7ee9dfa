#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "anypro/bgp_sim.hpp"
#include "anypro/constraints.hpp"

namespace anypro {

// The matrix M*: one desired ingress per client.
struct DesiredMapping {
  std::map<Asn, int> desired;

  bool operator==(const DesiredMapping&) const = default;
};

// Default desired-mapping rule: the enabled ingress with the smallest
// latency-weighted distance (client -> transit -> origin), ties to the lower
// ingress id.
DesiredMapping nearest_by_latency(const Topology& t, const std::vector<bool>& enabled = {});

// One observed catchment shift: toggling `toggled` moved the client from
// baseline ingress `from` to `to`.
struct ShiftRecord {
  int toggled = -1;
  int from = -1;
  int to = -1;

  auto operator<=>(const ShiftRecord&) const = default;
};

struct PollResult {
  Mapping baseline;                       // all ingresses at MAX
  std::map<int, Mapping> per_ingress;     // ingress id -> mapping with that ingress at 0
  std::set<Asn> sensitive;                // >= 2 candidate ingresses
  std::map<Asn, std::set<int>> candidates;
  std::map<Asn, std::vector<ShiftRecord>> triggers;
  int max_prepend = 0;
  std::vector<bool> enabled;
  std::int64_t experiments = 0;  // polled ingresses + 1
  std::int64_t adjustments = 0;  // 2 per polled ingress (set to 0, restore to MAX)
};

// Algorithm: all-MAX baseline, then each enabled ingress dropped to 0 in turn
// and restored. Exactly n+1 experiments and 2n adjustments for n polled
// ingresses.
PollResult max_min_poll(Oracle& o, int max_prepend, const std::vector<bool>& enabled = {});

// The inferior schedule kept for comparison: all-0 baseline, each ingress
// raised to MAX in turn.
PollResult min_max_poll(Oracle& o, int max_prepend, const std::vector<bool>& enabled = {});

enum class ClientClass { static_desired, static_undesired, dynamic_desired, dynamic_undesired };

std::string client_class_name(ClientClass c);

struct Classification {
  std::map<Asn, ClientClass> labels;
  std::map<ClientClass, int> counts;
};

Classification classify(const PollResult& pr, const DesiredMapping& dm);

// Clients with identical observed behavior (baseline ingress, candidate set,
// triggers) and identical desired ingress, carrying the group's constraint
// conjunction. weight = member count.
struct ClientGroup {
  int group_id = 0;
  std::vector<Asn> members;
  long weight = 0;
  int desired = -1;
  std::set<int> candidates;
  std::vector<Atom> atoms;
  bool attainable = true;       // desired ingress among candidates
  bool always_satisfied = false;  // desired held in baseline and every poll
};

// Emits, per group whose desired ingress D is reachable:
//   - toggled=D gained the client from X        ->  s_D <= s_X - MAX
//   - D held at baseline, lost to X at toggled=X ->  s_D <= s_X
//   - toggled=T (third party) moved X -> D       ->  s_T <= s_X - MAX, flagged
std::vector<ClientGroup> derive_preliminary_constraints(const PollResult& pr,
                                                        const DesiredMapping& dm);

// Baseline/per-ingress mappings, sensitivity set, triggers and group table as
// a JSON document.
std::string poll_result_to_json(const PollResult& pr, const std::vector<ClientGroup>& groups);

}  // namespace anypro
