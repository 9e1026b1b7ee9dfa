#pragma once

// Hand-built worlds shared by the unit and acceptance suites.

#include <string>
#include <vector>

#include "anypro/topology.hpp"

namespace anypro::testsupport {

// One origin, one transit per ingress, and per-client private intermediate
// chains: hops[j][i] is the AS-path length client j sees via ingress i when
// nothing is prepended (>= 2; 2 means the client sits on the transit).
// Latencies are latency_ms everywhere.
inline Topology pair_gadget(const std::vector<std::vector<int>>& hops,
                            double latency_ms = 10.0) {
  Topology t;
  t.origin = 64500;
  t.nodes.push_back({t.origin, Role::origin, std::nullopt});
  const int n_ingress = static_cast<int>(hops.at(0).size());
  for (int i = 0; i < n_ingress; ++i) {
    Asn transit = 64501 + static_cast<Asn>(i);
    t.nodes.push_back({transit, Role::transit, std::nullopt});
    t.links.push_back({t.origin, transit, latency_ms, Relation::customer_provider});
    t.ingresses.push_back({i, "pop" + std::to_string(i), transit});
  }
  Asn next_mid = 65001;
  for (std::size_t j = 0; j < hops.size(); ++j) {
    Asn client = 66001 + static_cast<Asn>(j);
    t.nodes.push_back({client, Role::client, std::nullopt});
    t.clients.push_back(client);
    for (int i = 0; i < n_ingress; ++i) {
      Asn prev = 64501 + static_cast<Asn>(i);
      for (int h = 0; h < hops[j][i] - 2; ++h) {
        Asn mid = next_mid++;
        t.nodes.push_back({mid, Role::intermediate, std::nullopt});
        t.links.push_back({mid, prev, latency_ms, Relation::customer_provider});
        prev = mid;
      }
      t.links.push_back({client, prev, latency_ms, Relation::customer_provider});
    }
  }
  return t;
}

// The three-ingress world where the far ingress C (path length 4) is only ever
// observable under an all-MAX baseline: A and B sit 2 hops away.
inline Topology far_ingress_world() { return pair_gadget({{2, 2, 4}}); }

}  // namespace anypro::testsupport
