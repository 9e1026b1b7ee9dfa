#include "anypro/bgp_sim.hpp"

#include <algorithm>
#include <tuple>

#include "anypro/errors.hpp"

namespace anypro {

namespace {

// Relationship of neighbor y as seen from x: 0 customer, 1 peer, 2 provider.
// Flat-labeled links count as peer in gao-rexford mode.
int neighbor_class(Relation rel, bool x_is_a) {
  switch (rel) {
    case Relation::customer_provider: return x_is_a ? 2 : 0;  // a customer, b provider
    case Relation::peer:
    case Relation::flat: return 1;
  }
  return 1;
}

struct Neighbor {
  Asn asn;
  double latency_ms;
  int cls;  // from the receiving side's perspective
};

struct Offer {
  Route route;
  int cls;           // class of the advertising neighbor at the receiver
  std::uint64_t key;  // router-ID-style bias, see route_tie_key
};

std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Deterministic stand-in for the lower-tier tie-breaking metrics real routers
// apply between equal-length routes (origin code, MED, router ID). Keyed by
// the selecting AS and the route identity with the prepend block collapsed,
// so the bias does not depend on the configured prepending lengths.
std::uint64_t route_tie_key(Asn selector, const Route& r, Asn origin) {
  std::uint64_t h = mix64(selector);
  h = mix64(h ^ static_cast<std::uint64_t>(r.ingress_id));
  bool prev_origin = false;
  for (Asn asn : r.as_path) {
    bool is_origin = asn == origin;
    if (is_origin && prev_origin) continue;
    prev_origin = is_origin;
    h = mix64(h ^ asn);
  }
  return h;
}

// Number of trailing origin repetitions (the prepend block, >= 1 on any path).
int origin_block(const std::vector<Asn>& path, Asn origin) {
  int n = 0;
  for (auto it = path.rbegin(); it != path.rend() && *it == origin; ++it) ++n;
  return n;
}

void apply_rewrite(Route& r, Asn origin, const std::map<Asn, RewriteRule>& rules, Asn at) {
  auto rit = rules.find(at);
  if (rit == rules.end()) return;
  int block = origin_block(r.as_path, origin);
  int keep = 1 + rit->second.max_kept;
  if (block > keep) r.as_path.resize(r.as_path.size() - (block - keep), origin);
}

bool better(const Offer& x, const Offer& y, Mode mode) {
  if (mode == Mode::gao_rexford && x.cls != y.cls) return x.cls < y.cls;
  return std::make_tuple(x.route.path_len(), x.key, x.route.learned_from, x.route.ingress_id) <
         std::make_tuple(y.route.path_len(), y.key, y.route.learned_from, y.route.ingress_id);
}

}  // namespace

PrependConfig PrependConfig::uniform(int n, int value, int max_prepend) {
  PrependConfig cfg;
  cfg.lengths.assign(n, value);
  cfg.enabled.assign(n, true);
  cfg.max_prepend = max_prepend;
  return cfg;
}

PrependConfig PrependConfig::with(int ingress_id, int value) const {
  PrependConfig cfg = *this;
  cfg.lengths.at(ingress_id) = value;
  return cfg;
}

void check_config(const Topology& t, const PrependConfig& cfg) {
  const int n = t.ingress_count();
  if (static_cast<int>(cfg.lengths.size()) != n)
    throw SimulationError("config has " + std::to_string(cfg.lengths.size()) +
                          " lengths for " + std::to_string(n) + " ingresses");
  if (static_cast<int>(cfg.enabled.size()) != n)
    throw SimulationError("config enabled vector size mismatch");
  if (cfg.max_prepend < 1) throw SimulationError("max_prepend must be >= 1");
  bool any = false;
  for (int i = 0; i < n; ++i) {
    if (!cfg.enabled[i]) continue;
    any = true;
    if (cfg.lengths[i] < 0 || cfg.lengths[i] > cfg.max_prepend)
      throw SimulationError("prepend length " + std::to_string(cfg.lengths[i]) +
                            " for ingress " + std::to_string(i) + " outside [0, " +
                            std::to_string(cfg.max_prepend) + "]");
  }
  if (!any) throw SimulationError("no ingress enabled");
}

RouteState propagate(const Topology& t, const PrependConfig& cfg, Mode mode,
                     const std::map<Asn, RewriteRule>& rules) {
  check_config(t, cfg);

  std::map<Asn, std::vector<Neighbor>> adj;
  for (const auto& l : t.links) {
    adj[l.a].push_back({l.b, l.latency_ms, neighbor_class(l.relation, true)});
    adj[l.b].push_back({l.a, l.latency_ms, neighbor_class(l.relation, false)});
  }
  for (auto& [asn, ns] : adj)
    std::sort(ns.begin(), ns.end(),
              [](const Neighbor& x, const Neighbor& y) { return x.asn < y.asn; });

  std::map<Asn, Role> role;
  for (const auto& n : t.nodes) role[n.asn] = n.role;

  // The origin's per-ingress announcements, delivered to each ingress transit
  // every round. The transit sees the origin as a customer.
  std::map<Asn, std::vector<Offer>> announcements;
  for (const auto& g : t.ingresses) {
    if (!cfg.enabled[g.id]) continue;
    double lat = 0.0;
    bool linked = false;
    for (const auto& l : t.links) {
      if ((l.a == t.origin && l.b == g.transit_asn) ||
          (l.b == t.origin && l.a == g.transit_asn)) {
        lat = l.latency_ms;
        linked = true;
        break;
      }
    }
    if (!linked)
      throw SimulationError("ingress " + std::to_string(g.id) + " transit not adjacent to origin");
    Route r;
    r.ingress_id = g.id;
    r.as_path.assign(1 + cfg.lengths[g.id], t.origin);
    r.learned_from = t.origin;
    r.latency_ms = lat;
    apply_rewrite(r, t.origin, rules, g.transit_asn);
    announcements[g.transit_asn].push_back({r, 0, route_tie_key(g.transit_asn, r, t.origin)});
  }

  // Class of `from` as seen by `y` (customer 0 / peer 1 / provider 2).
  auto learned_class = [&adj](Asn y, Asn from) {
    const auto& ns = adj[y];
    for (const auto& nb : ns)
      if (nb.asn == from) return nb.cls;
    return 1;
  };

  RouteState state;
  const int max_rounds = static_cast<int>(t.nodes.size()) + 1;
  for (int round = 0; round <= max_rounds; ++round) {
    RouteState next;
    for (const auto& n : t.nodes) {
      if (n.role == Role::origin) continue;
      std::optional<Offer> best;
      auto consider = [&](const Offer& o) {
        if (!best || better(o, *best, mode)) best = o;
      };
      if (auto ait = announcements.find(n.asn); ait != announcements.end())
        for (const auto& o : ait->second) consider(o);
      auto adj_it = adj.find(n.asn);
      if (adj_it != adj.end()) {
        for (const auto& nb : adj_it->second) {
          if (nb.asn == t.origin) continue;  // origin offers only ingress announcements
          auto sit = state.find(nb.asn);
          if (sit == state.end()) continue;
          if (role[nb.asn] == Role::client) continue;  // clients are stubs
          const Route& held = sit->second;
          if (mode == Mode::gao_rexford) {
            // Valley-free export: the neighbor passes routes learned from its
            // customers to everyone, everything else only to its customers.
            // The anycast operator counts as a customer of its transits, so
            // origin-learned routes always export.
            bool to_customer = nb.cls == 2;  // nb is our provider <=> we are its customer
            bool from_customer = held.learned_from == t.origin ||
                                 learned_class(nb.asn, held.learned_from) == 0;
            if (!to_customer && !from_customer) continue;
          }
          if (std::find(held.as_path.begin(), held.as_path.end(), n.asn) != held.as_path.end())
            continue;  // loop
          Offer o;
          o.route.ingress_id = held.ingress_id;
          o.route.as_path.reserve(held.as_path.size() + 1);
          o.route.as_path.push_back(nb.asn);
          o.route.as_path.insert(o.route.as_path.end(), held.as_path.begin(),
                                 held.as_path.end());
          o.route.learned_from = nb.asn;
          o.route.latency_ms = held.latency_ms + nb.latency_ms;
          apply_rewrite(o.route, t.origin, rules, n.asn);
          o.cls = nb.cls;
          o.key = route_tie_key(n.asn, o.route, t.origin);
          consider(o);
        }
      }
      if (best) next[n.asn] = best->route;
    }
    if (next == state) return state;
    state = std::move(next);
  }
  throw SimulationError("route propagation did not converge within " +
                        std::to_string(max_rounds) + " rounds");
}

Mapping mapping_from_state(const Topology& t, const RouteState& state) {
  Mapping m;
  for (Asn c : t.clients) {
    auto it = state.find(c);
    if (it == state.end()) continue;
    m.assignment[c] = it->second.ingress_id;
    m.rtt[c] = 2.0 * it->second.latency_ms;
  }
  return m;
}

Mapping Oracle::experiment(const PrependConfig& cfg) {
  Mapping m = mapping_from_state(topology_, propagate(topology_, cfg, mode_, rules_));
  experiments_.fetch_add(1);
  return m;
}

int FlipTable::changes(const std::vector<std::optional<int>>& row) {
  int n = 0;
  for (std::size_t i = 1; i < row.size(); ++i)
    if (row[i] != row[i - 1]) ++n;
  return n;
}

FlipTable sweep_pair_difference(Oracle& o, int a, int b, int others_at, int max_prepend,
                                const std::vector<bool>& enabled) {
  if (a == b) throw SimulationError("sweep requires two distinct ingresses");
  const int n = o.topology().ingress_count();
  FlipTable table;
  table.max_prepend = max_prepend;
  for (int d = -max_prepend; d <= max_prepend; ++d) {
    PrependConfig cfg = PrependConfig::uniform(n, others_at, max_prepend);
    if (!enabled.empty()) cfg.enabled = enabled;
    cfg.lengths[a] = d >= 0 ? 0 : -d;
    cfg.lengths[b] = d >= 0 ? d : 0;
    Mapping m = o.experiment(cfg);
    for (Asn c : o.topology().clients) {
      auto& row = table.rows[c];
      if (row.empty()) row.resize(2 * max_prepend + 1);
      auto it = m.assignment.find(c);
      row[d + max_prepend] = it == m.assignment.end() ? std::nullopt
                                                      : std::optional<int>(it->second);
    }
  }
  return table;
}

}  // namespace anypro
