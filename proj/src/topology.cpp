#include "anypro/topology.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "anypro/errors.hpp"

namespace anypro {

namespace {

using json = nlohmann::json;

// Deterministic draw helpers. Raw engine output only, so documents are
// byte-identical for a fixed seed regardless of the standard library's
// distribution implementations.
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t n) { return rng() % n; }

double draw_latency_ms(std::mt19937_64& rng) {
  // [1.000, 100.000] on a 0.001 grid
  return static_cast<double>(1000 + draw_below(rng, 99001)) / 1000.0;
}

bool draw_bernoulli(std::mt19937_64& rng, double p) {
  return (static_cast<double>(rng() >> 11) * 0x1.0p-53) < p;
}

double quantize_latency(double ms) { return std::round(ms * 1000.0) / 1000.0; }

void canonical_sort(Topology& t) {
  std::sort(t.nodes.begin(), t.nodes.end(),
            [](const AsNode& x, const AsNode& y) { return x.asn < y.asn; });
  std::sort(t.links.begin(), t.links.end(), [](const Link& x, const Link& y) {
    return std::tie(x.a, x.b) < std::tie(y.a, y.b);
  });
  std::sort(t.ingresses.begin(), t.ingresses.end(),
            [](const Ingress& x, const Ingress& y) { return x.id < y.id; });
  std::sort(t.clients.begin(), t.clients.end());
}

constexpr Asn kOriginAsn = 64500;
constexpr Asn kTransitBase = 64501;
constexpr Asn kIntermediateBase = 65001;
constexpr Asn kClientBase = 66001;

struct IngressSpec {
  std::string pop;
  Asn transit;
};

// Shared world builder: origin + transit skeleton from `specs`, then an
// Erdos-Renyi core over transits and intermediates, then stub clients on 1-3
// intermediates each. Caller retries on a disconnected core.
Topology build_world(const std::vector<IngressSpec>& specs, int n_clients,
                     int n_intermediate, double density, std::mt19937_64& rng) {
  Topology t;
  t.origin = kOriginAsn;
  t.nodes.push_back({kOriginAsn, Role::origin, std::nullopt});

  std::vector<Asn> transits;
  for (const auto& s : specs) {
    if (std::find(transits.begin(), transits.end(), s.transit) == transits.end())
      transits.push_back(s.transit);
  }
  std::sort(transits.begin(), transits.end());
  for (Asn asn : transits) t.nodes.push_back({asn, Role::transit, std::nullopt});
  for (Asn asn : transits)
    t.links.push_back({kOriginAsn, asn, draw_latency_ms(rng), Relation::customer_provider});

  std::vector<Asn> intermediates;
  for (int i = 0; i < n_intermediate; ++i) {
    Asn asn = kIntermediateBase + static_cast<Asn>(i);
    intermediates.push_back(asn);
    t.nodes.push_back({asn, Role::intermediate, std::nullopt});
  }

  // Core mesh. Transit-transit links are peer, transit-intermediate links make
  // the transit the provider, intermediate-intermediate links are peer.
  std::vector<Asn> core = transits;
  core.insert(core.end(), intermediates.begin(), intermediates.end());
  for (std::size_t i = 0; i < core.size(); ++i) {
    for (std::size_t j = i + 1; j < core.size(); ++j) {
      if (!draw_bernoulli(rng, density)) continue;
      Asn a = core[i], b = core[j];
      bool a_transit = a < kIntermediateBase;
      bool b_transit = b < kIntermediateBase;
      if (a_transit == b_transit) {
        t.links.push_back({a, b, draw_latency_ms(rng), Relation::peer});
      } else if (a_transit) {
        t.links.push_back({b, a, draw_latency_ms(rng), Relation::customer_provider});
      } else {
        t.links.push_back({a, b, draw_latency_ms(rng), Relation::customer_provider});
      }
    }
  }

  for (int c = 0; c < n_clients; ++c) {
    Asn asn = kClientBase + static_cast<Asn>(c);
    t.nodes.push_back({asn, Role::client, std::nullopt});
    t.clients.push_back(asn);
    int k = 1 + static_cast<int>(draw_below(rng, 3));
    k = std::min(k, n_intermediate);
    std::set<Asn> picked;
    while (static_cast<int>(picked.size()) < k)
      picked.insert(intermediates[draw_below(rng, intermediates.size())]);
    for (Asn mid : picked)
      t.links.push_back({asn, mid, draw_latency_ms(rng), Relation::customer_provider});
  }

  int id = 0;
  for (const auto& s : specs) t.ingresses.push_back({id++, s.pop, s.transit});

  canonical_sort(t);
  return t;
}

bool core_connected(const Topology& t) {
  std::set<Asn> core;
  for (const auto& n : t.nodes)
    if (n.role != Role::client) core.insert(n.asn);
  if (core.empty()) return false;
  std::map<Asn, std::vector<Asn>> adj;
  for (const auto& l : t.links)
    if (core.count(l.a) && core.count(l.b)) {
      adj[l.a].push_back(l.b);
      adj[l.b].push_back(l.a);
    }
  std::set<Asn> seen{*core.begin()};
  std::queue<Asn> q;
  q.push(*core.begin());
  while (!q.empty()) {
    Asn x = q.front();
    q.pop();
    for (Asn y : adj[x])
      if (seen.insert(y).second) q.push(y);
  }
  return seen.size() == core.size();
}

std::string fmt_latency(double ms) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", ms);
  return buf;
}

std::string json_escape(const std::string& s) {
  return json(s).dump();  // quoted and escaped
}

const json& require_field(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw ParseError(std::string("missing field \"") + key + "\" in " + where);
  return *it;
}

Role parse_role(const std::string& s) {
  if (s == "origin") return Role::origin;
  if (s == "transit") return Role::transit;
  if (s == "intermediate") return Role::intermediate;
  if (s == "client") return Role::client;
  throw ParseError("unknown role \"" + s + "\"");
}

Relation parse_relation(const std::string& s) {
  if (s == "flat") return Relation::flat;
  if (s == "customer-provider") return Relation::customer_provider;
  if (s == "peer") return Relation::peer;
  throw ParseError("unknown relation \"" + s + "\"");
}

}  // namespace

std::string role_name(Role role) {
  switch (role) {
    case Role::origin: return "origin";
    case Role::transit: return "transit";
    case Role::intermediate: return "intermediate";
    case Role::client: return "client";
  }
  return "?";
}

std::string relation_name(Relation relation) {
  switch (relation) {
    case Relation::flat: return "flat";
    case Relation::customer_provider: return "customer-provider";
    case Relation::peer: return "peer";
  }
  return "?";
}

const AsNode* Topology::find_node(Asn asn) const {
  for (const auto& n : nodes)
    if (n.asn == asn) return &n;
  return nullptr;
}

bool Topology::adjacent(Asn a, Asn b) const {
  for (const auto& l : links)
    if ((l.a == a && l.b == b) || (l.a == b && l.b == a)) return true;
  return false;
}

Topology generate_random_topology(int n_ingresses, int n_clients, int n_intermediate,
                                  double density, std::uint64_t seed) {
  if (n_ingresses < 1) throw GenerationError("n_ingresses must be >= 1");
  if (n_clients < 1) throw GenerationError("n_clients must be >= 1");
  if (n_intermediate < 1) throw GenerationError("n_intermediate must be >= 1");
  if (!(density > 0.0 && density <= 1.0)) throw GenerationError("density must be in (0, 1]");

  std::vector<IngressSpec> specs;
  char pop[16];
  for (int i = 0; i < n_ingresses; ++i) {
    std::snprintf(pop, sizeof(pop), "pop%02d", i);
    specs.push_back({pop, kTransitBase + static_cast<Asn>(i)});
  }

  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Topology t = build_world(specs, n_clients, n_intermediate, density, rng);
    if (core_connected(t)) return t;
  }
  throw GenerationError("no connected core graph found within 1000 retries");
}

Topology build_testbed_fixture() {
  // 20 PoPs and their transit providers; 38 (PoP, transit) ingresses.
  static const std::vector<IngressSpec> kTable = {
      {"Malaysia", 2914},    {"Malaysia", 24218},   {"Madrid", 6453},
      {"Manila", 9299},      {"Manila", 4775},      {"Hong Kong", 3491},
      {"Hong Kong", 2914},   {"Seoul", 9318},       {"Seoul", 6453},
      {"Vancouver", 6453},   {"Ashburn", 3356},     {"Ashburn", 174},
      {"Moscow", 12389},     {"Moscow", 31133},     {"Chicago", 3356},
      {"Chicago", 174},      {"Ho Chi Minh", 7552}, {"Ho Chi Minh", 45903},
      {"California", 2914},  {"California", 6453},  {"Frankfurt", 1299},
      {"Frankfurt", 6453},   {"Bangkok", 6453},     {"Bangkok", 38082},
      {"Singapore", 7473},   {"Singapore", 6453},   {"Singapore", 3491},
      {"Sydney", 4637},      {"Sydney", 7474},      {"Toronto", 6453},
      {"India", 4755},       {"India", 9498},       {"Indonesia", 2914},
      {"Indonesia", 135391}, {"London", 4755},      {"London", 1299},
      {"Tokyo", 2914},       {"Tokyo", 17676},
  };
  std::mt19937_64 rng(0xA21CA57u);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Topology t = build_world(kTable, 200, 60, 0.2, rng);
    if (core_connected(t)) return t;
  }
  throw GenerationError("testbed fixture core never connected");  // unreachable in practice
}

std::vector<std::string> validate(const Topology& t) {
  std::vector<std::string> out;
  auto flag = [&out](const std::string& s) { out.push_back(s); };

  std::map<Asn, const AsNode*> by_asn;
  int origin_count = 0;
  for (const auto& n : t.nodes) {
    if (n.asn == 0) flag("zero-asn: node asn must be positive");
    if (!by_asn.emplace(n.asn, &n).second)
      flag("duplicate-asn: " + std::to_string(n.asn));
    if (n.role == Role::origin) ++origin_count;
    if (n.pop && n.role != Role::transit)
      flag("pop-on-non-transit: " + std::to_string(n.asn));
  }
  if (origin_count != 1)
    flag("origin-count: expected exactly 1 origin node, found " + std::to_string(origin_count));
  auto oit = by_asn.find(t.origin);
  if (oit == by_asn.end() || oit->second->role != Role::origin)
    flag("origin-missing: origin asn " + std::to_string(t.origin) + " is not an origin node");

  std::set<std::pair<Asn, Asn>> seen_pairs;
  for (const auto& l : t.links) {
    if (l.a == l.b) flag("self-loop: " + std::to_string(l.a));
    if (l.latency_ms < 0)
      flag("negative latency: link " + std::to_string(l.a) + "-" + std::to_string(l.b));
    if (!by_asn.count(l.a) || !by_asn.count(l.b))
      flag("link-unknown-asn: " + std::to_string(l.a) + "-" + std::to_string(l.b));
    auto key = std::minmax(l.a, l.b);
    if (!seen_pairs.insert({key.first, key.second}).second)
      flag("duplicate-link: " + std::to_string(l.a) + "-" + std::to_string(l.b));
  }

  std::vector<int> ids;
  for (const auto& g : t.ingresses) ids.push_back(g.id);
  std::sort(ids.begin(), ids.end());
  for (std::size_t i = 0; i < ids.size(); ++i)
    if (ids[i] != static_cast<int>(i)) {
      flag("ingress-id-gap: ids are not the dense range 0.." +
           std::to_string(ids.size() - 1));
      break;
    }
  std::set<std::pair<std::string, Asn>> seen_ingress;
  for (std::size_t i = 0; i < t.ingresses.size(); ++i) {
    const auto& g = t.ingresses[i];
    if (!seen_ingress.insert({g.pop, g.transit_asn}).second)
      flag("duplicate-ingress: (" + g.pop + ", " + std::to_string(g.transit_asn) + ")");
    auto nit = by_asn.find(g.transit_asn);
    if (nit == by_asn.end() || nit->second->role != Role::transit)
      flag("ingress-transit-role: ingress " + std::to_string(g.id) + " transit " +
           std::to_string(g.transit_asn) + " is not a transit node");
    if (!t.adjacent(t.origin, g.transit_asn))
      flag("ingress-detached: ingress " + std::to_string(g.id) + " transit " +
           std::to_string(g.transit_asn) + " not adjacent to origin");
  }

  std::set<Asn> client_set(t.clients.begin(), t.clients.end());
  for (Asn c : t.clients) {
    auto nit = by_asn.find(c);
    if (nit == by_asn.end() || nit->second->role != Role::client)
      flag("client-role: " + std::to_string(c) + " is not a client node");
  }
  for (const auto& n : t.nodes)
    if (n.role == Role::client && !client_set.count(n.asn))
      flag("client-not-listed: " + std::to_string(n.asn));

  // Reachability from origin over all links, and core connectivity.
  std::map<Asn, std::vector<Asn>> adj;
  for (const auto& l : t.links) {
    adj[l.a].push_back(l.b);
    adj[l.b].push_back(l.a);
  }
  std::set<Asn> reach{t.origin};
  std::queue<Asn> q;
  q.push(t.origin);
  while (!q.empty()) {
    Asn x = q.front();
    q.pop();
    for (Asn y : adj[x])
      if (reach.insert(y).second) q.push(y);
  }
  for (Asn c : t.clients)
    if (!reach.count(c)) flag("client-unreachable: " + std::to_string(c));
  if (!core_connected(t)) flag("core-disconnected");

  return out;
}

std::string save_topology(const Topology& t) {
  Topology c = t;
  canonical_sort(c);
  std::ostringstream os;
  os << "{\n";
  os << "  \"clients\": [";
  for (std::size_t i = 0; i < c.clients.size(); ++i)
    os << (i ? ", " : "") << c.clients[i];
  os << "],\n";
  os << "  \"ingresses\": [\n";
  for (std::size_t i = 0; i < c.ingresses.size(); ++i) {
    const auto& g = c.ingresses[i];
    os << "    {\"id\": " << g.id << ", \"pop\": " << json_escape(g.pop)
       << ", \"transit_asn\": " << g.transit_asn << "}"
       << (i + 1 < c.ingresses.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"links\": [\n";
  for (std::size_t i = 0; i < c.links.size(); ++i) {
    const auto& l = c.links[i];
    os << "    {\"a\": " << l.a << ", \"b\": " << l.b
       << ", \"latency_ms\": " << fmt_latency(quantize_latency(l.latency_ms))
       << ", \"relation\": \"" << relation_name(l.relation) << "\"}"
       << (i + 1 < c.links.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"nodes\": [\n";
  for (std::size_t i = 0; i < c.nodes.size(); ++i) {
    const auto& n = c.nodes[i];
    os << "    {\"asn\": " << n.asn;
    if (n.pop) os << ", \"pop\": " << json_escape(*n.pop);
    os << ", \"role\": \"" << role_name(n.role) << "\"}"
       << (i + 1 < c.nodes.size() ? "," : "") << "\n";
  }
  os << "  ],\n";
  os << "  \"origin\": " << c.origin << "\n";
  os << "}\n";
  return os.str();
}

Topology load_topology(const std::string& document) {
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what());
  }
  if (!doc.is_object()) throw ParseError("top-level document must be an object");

  Topology t;
  try {
    t.origin = require_field(doc, "origin", "document").get<Asn>();
    for (const auto& jn : require_field(doc, "nodes", "document")) {
      AsNode n;
      n.asn = require_field(jn, "asn", "node").get<Asn>();
      n.role = parse_role(require_field(jn, "role", "node").get<std::string>());
      if (jn.contains("pop")) n.pop = jn["pop"].get<std::string>();
      t.nodes.push_back(n);
    }
    for (const auto& jl : require_field(doc, "links", "document")) {
      Link l;
      l.a = require_field(jl, "a", "link").get<Asn>();
      l.b = require_field(jl, "b", "link").get<Asn>();
      l.latency_ms = quantize_latency(require_field(jl, "latency_ms", "link").get<double>());
      l.relation = jl.contains("relation")
                       ? parse_relation(jl["relation"].get<std::string>())
                       : Relation::flat;
      t.links.push_back(l);
    }
    for (const auto& ji : require_field(doc, "ingresses", "document")) {
      Ingress g;
      g.id = require_field(ji, "id", "ingress").get<int>();
      g.pop = require_field(ji, "pop", "ingress").get<std::string>();
      g.transit_asn = require_field(ji, "transit_asn", "ingress").get<Asn>();
      t.ingresses.push_back(g);
    }
    for (const auto& jc : require_field(doc, "clients", "document"))
      t.clients.push_back(jc.get<Asn>());
  } catch (const json::exception& e) {
    throw ParseError(e.what());
  }

  canonical_sort(t);
  auto violations = validate(t);
  if (!violations.empty()) {
    std::string msg = "invalid topology:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw SemanticError(msg);
  }
  return t;
}

}  // namespace anypro
