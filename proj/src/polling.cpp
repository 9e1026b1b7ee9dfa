#include "anypro/polling.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <tuple>

#include <json.hpp>

#include "anypro/errors.hpp"

namespace anypro {

namespace {

std::vector<bool> all_enabled(const Topology& t) {
  return std::vector<bool>(t.ingress_count(), true);
}

// Polling schedule shared by max-min and min-max: baseline at `rest`, each
// enabled ingress toggled to `probe` in turn and restored.
PollResult run_schedule(Oracle& o, int max_prepend, std::vector<bool> enabled, int rest,
                        int probe) {
  const Topology& t = o.topology();
  if (max_prepend < 1) throw PollingError("max_prepend must be >= 1");
  if (enabled.empty()) enabled = all_enabled(t);
  if (std::none_of(enabled.begin(), enabled.end(), [](bool b) { return b; }))
    throw PollingError("no ingress enabled");

  PollResult pr;
  pr.max_prepend = max_prepend;
  pr.enabled = enabled;

  PrependConfig base = PrependConfig::uniform(t.ingress_count(), rest, max_prepend);
  base.enabled = enabled;
  pr.baseline = o.experiment(base);
  pr.experiments = 1;

  for (Asn c : t.clients) {
    auto it = pr.baseline.assignment.find(c);
    if (it != pr.baseline.assignment.end()) pr.candidates[c].insert(it->second);
  }

  for (int i = 0; i < t.ingress_count(); ++i) {
    if (!enabled[i]) continue;
    Mapping m = o.experiment(base.with(i, probe));
    pr.adjustments += 2;  // set, then restore
    pr.experiments += 1;
    pr.per_ingress[i] = m;
    for (Asn c : t.clients) {
      auto cur = m.assignment.find(c);
      if (cur != m.assignment.end()) pr.candidates[c].insert(cur->second);
      auto was = pr.baseline.assignment.find(c);
      int from = was == pr.baseline.assignment.end() ? -1 : was->second;
      int to = cur == m.assignment.end() ? -1 : cur->second;
      if (from != to) pr.triggers[c].push_back({i, from, to});
    }
  }

  for (const auto& [c, cand] : pr.candidates)
    if (cand.size() >= 2) pr.sensitive.insert(c);
  return pr;
}

}  // namespace

DesiredMapping nearest_by_latency(const Topology& t, const std::vector<bool>& enabled) {
  // Latency-weighted shortest distance from every node to each transit, then
  // desired = argmin over enabled ingresses of dist(client, transit) +
  // latency(transit, origin).
  std::map<Asn, std::vector<std::pair<Asn, double>>> adj;
  for (const auto& l : t.links) {
    adj[l.a].push_back({l.b, l.latency_ms});
    adj[l.b].push_back({l.a, l.latency_ms});
  }
  std::map<Asn, double> origin_leg;
  for (const auto& l : t.links) {
    if (l.a == t.origin) origin_leg[l.b] = l.latency_ms;
    if (l.b == t.origin) origin_leg[l.a] = l.latency_ms;
  }
  std::map<Asn, Role> role;
  for (const auto& n : t.nodes) role[n.asn] = n.role;

  auto dijkstra = [&](Asn src) {
    std::map<Asn, double> dist;
    using Item = std::pair<double, Asn>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    dist[src] = 0.0;
    heap.push({0.0, src});
    while (!heap.empty()) {
      auto [d, x] = heap.top();
      heap.pop();
      if (d > dist[x]) continue;
      // No route transits the origin or a stub client.
      if (x != src && (x == t.origin || role[x] == Role::client)) continue;
      for (auto [y, w] : adj[x]) {
        double nd = d + w;
        auto it = dist.find(y);
        if (it == dist.end() || nd < it->second) {
          dist[y] = nd;
          heap.push({nd, y});
        }
      }
    }
    return dist;
  };

  std::vector<bool> en = enabled.empty() ? std::vector<bool>(t.ingress_count(), true) : enabled;
  std::map<int, std::map<Asn, double>> transit_dist;
  for (const auto& g : t.ingresses)
    if (en[g.id] && !transit_dist.count(g.id)) transit_dist[g.id] = dijkstra(g.transit_asn);

  DesiredMapping dm;
  for (Asn c : t.clients) {
    double best = std::numeric_limits<double>::infinity();
    int best_id = -1;
    for (const auto& g : t.ingresses) {
      if (!en[g.id]) continue;
      auto dit = transit_dist[g.id].find(c);
      if (dit == transit_dist[g.id].end()) continue;
      double d = dit->second + origin_leg[g.transit_asn];
      if (d < best || (d == best && g.id < best_id)) {
        best = d;
        best_id = g.id;
      }
    }
    if (best_id >= 0) dm.desired[c] = best_id;
  }
  return dm;
}

PollResult max_min_poll(Oracle& o, int max_prepend, const std::vector<bool>& enabled) {
  return run_schedule(o, max_prepend, enabled, max_prepend, 0);
}

PollResult min_max_poll(Oracle& o, int max_prepend, const std::vector<bool>& enabled) {
  return run_schedule(o, max_prepend, enabled, 0, max_prepend);
}

std::string client_class_name(ClientClass c) {
  switch (c) {
    case ClientClass::static_desired: return "static_desired";
    case ClientClass::static_undesired: return "static_undesired";
    case ClientClass::dynamic_desired: return "dynamic_desired";
    case ClientClass::dynamic_undesired: return "dynamic_undesired";
  }
  return "?";
}

Classification classify(const PollResult& pr, const DesiredMapping& dm) {
  Classification cl;
  cl.counts[ClientClass::static_desired] = 0;
  cl.counts[ClientClass::static_undesired] = 0;
  cl.counts[ClientClass::dynamic_desired] = 0;
  cl.counts[ClientClass::dynamic_undesired] = 0;
  for (const auto& [c, cand] : pr.candidates) {
    auto dit = dm.desired.find(c);
    if (dit == dm.desired.end())
      throw PollingError("client " + std::to_string(c) + " has no desired ingress");
    int desired = dit->second;
    bool is_static = cand.size() == 1 && pr.triggers.find(c) == pr.triggers.end() &&
                     pr.baseline.assignment.count(c);
    bool ok;
    if (is_static)
      ok = pr.baseline.assignment.at(c) == desired;
    else
      ok = cand.count(desired) > 0;
    ClientClass label = is_static
                            ? (ok ? ClientClass::static_desired : ClientClass::static_undesired)
                            : (ok ? ClientClass::dynamic_desired : ClientClass::dynamic_undesired);
    cl.labels[c] = label;
    cl.counts[label] += 1;
  }
  return cl;
}

std::vector<ClientGroup> derive_preliminary_constraints(const PollResult& pr,
                                                        const DesiredMapping& dm) {
  const int maxp = pr.max_prepend;

  struct Key {
    int baseline;
    std::set<int> candidates;
    std::vector<ShiftRecord> triggers;
    int desired;
    auto operator<=>(const Key&) const = default;
  };
  std::map<Key, std::vector<Asn>> buckets;
  for (const auto& [c, cand] : pr.candidates) {
    auto dit = dm.desired.find(c);
    if (dit == dm.desired.end())
      throw PollingError("client " + std::to_string(c) + " has no desired ingress");
    Key k;
    auto bit = pr.baseline.assignment.find(c);
    k.baseline = bit == pr.baseline.assignment.end() ? -1 : bit->second;
    k.candidates = cand;
    auto tit = pr.triggers.find(c);
    if (tit != pr.triggers.end()) k.triggers = tit->second;
    k.desired = dit->second;
    buckets[k].push_back(c);
  }

  std::vector<ClientGroup> groups;
  int gid = 0;
  for (auto& [key, members] : buckets) {
    ClientGroup g;
    g.group_id = gid++;
    std::sort(members.begin(), members.end());
    g.members = members;
    g.weight = static_cast<long>(members.size());
    g.desired = key.desired;
    g.candidates = key.candidates;
    g.attainable = key.candidates.count(key.desired) > 0;
    g.always_satisfied = g.attainable && key.triggers.empty() && key.baseline == key.desired;

    if (g.attainable && !g.always_satisfied) {
      const int d = key.desired;
      std::vector<Atom> atoms;
      for (const ShiftRecord& s : key.triggers) {
        if (s.from < 0 || s.to < 0) continue;  // reachability changes carry no constraint
        if (s.toggled == d && s.to == d && s.from != d) {
          atoms.push_back(canonicalize({d, s.from, -maxp, false, false}, maxp));
        } else if (s.from == d && s.toggled == s.to && s.to != d) {
          atoms.push_back(canonicalize({d, s.to, 0, false, false}, maxp));
        } else if (s.to == d && s.toggled != d && s.toggled != s.from) {
          atoms.push_back(canonicalize({s.toggled, s.from, -maxp, false, true}, maxp));
        }
      }
      std::sort(atoms.begin(), atoms.end());
      atoms.erase(std::unique(atoms.begin(), atoms.end(),
                              [](const Atom& x, const Atom& y) {
                                return x.same_constraint(y);
                              }),
                  atoms.end());
      g.atoms = atoms;
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

std::string poll_result_to_json(const PollResult& pr, const std::vector<ClientGroup>& groups) {
  nlohmann::json j;
  auto mapping_json = [](const Mapping& m) {
    nlohmann::json out = nlohmann::json::object();
    for (const auto& [c, i] : m.assignment) out[std::to_string(c)] = i;
    return out;
  };
  j["baseline"] = mapping_json(pr.baseline);
  j["per_ingress"] = nlohmann::json::object();
  for (const auto& [i, m] : pr.per_ingress) j["per_ingress"][std::to_string(i)] = mapping_json(m);
  j["sensitive"] = pr.sensitive;
  j["candidates"] = nlohmann::json::object();
  for (const auto& [c, cand] : pr.candidates) j["candidates"][std::to_string(c)] = cand;
  j["triggers"] = nlohmann::json::object();
  for (const auto& [c, ts] : pr.triggers) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& t : ts)
      arr.push_back({{"toggled", t.toggled}, {"from", t.from}, {"to", t.to}});
    j["triggers"][std::to_string(c)] = arr;
  }
  j["experiments"] = pr.experiments;
  j["adjustments"] = pr.adjustments;
  nlohmann::json garr = nlohmann::json::array();
  for (const auto& g : groups) {
    nlohmann::json jg;
    jg["group_id"] = g.group_id;
    jg["members"] = g.members;
    jg["weight"] = g.weight;
    jg["desired"] = g.desired;
    jg["attainable"] = g.attainable;
    jg["always_satisfied"] = g.always_satisfied;
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : g.atoms)
      atoms.push_back({{"lhs", a.lhs},
                       {"rhs", a.rhs},
                       {"offset", a.offset},
                       {"refined", a.refined},
                       {"third_party", a.third_party}});
    jg["atoms"] = atoms;
    garr.push_back(jg);
  }
  j["groups"] = garr;
  return j.dump(2) + "\n";
}

}  // namespace anypro
