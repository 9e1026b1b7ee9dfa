#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace anypro {

using Asn = std::uint32_t;

enum class Role { origin, transit, intermediate, client };

// Business relationship of a link. For customer_provider the stored direction
// is fixed: `a` is the customer, `b` is the provider. Relations matter only in
// gao-rexford mode; flat links behave like peer links there.
enum class Relation { flat, customer_provider, peer };

struct AsNode {
  Asn asn = 0;
  Role role = Role::intermediate;
  std::optional<std::string> pop;  // only meaningful on transit (attachment) nodes

  bool operator==(const AsNode&) const = default;
};

struct Link {
  Asn a = 0;
  Asn b = 0;
  double latency_ms = 0.0;
  Relation relation = Relation::flat;

  bool operator==(const Link&) const = default;
};

// An ingress is a unique (PoP, transit provider) pair; `id` is the dense index
// used by prepending configurations.
struct Ingress {
  int id = 0;
  std::string pop;
  Asn transit_asn = 0;

  bool operator==(const Ingress&) const = default;
};

struct Topology {
  Asn origin = 0;
  std::vector<AsNode> nodes;       // ascending asn in canonical form
  std::vector<Link> links;         // ascending (a, b) in canonical form
  std::vector<Ingress> ingresses;  // ascending id, ids dense 0..n-1
  std::vector<Asn> clients;        // ascending

  bool operator==(const Topology&) const = default;

  int ingress_count() const { return static_cast<int>(ingresses.size()); }
  const AsNode* find_node(Asn asn) const;
  bool adjacent(Asn a, Asn b) const;
};

std::string role_name(Role role);
std::string relation_name(Relation relation);

// Random world: one transit per ingress, an Erdos-Renyi core over
// transits+intermediates, clients attached to 1-3 intermediates. Latencies are
// uniform in [1, 100] ms on a 0.001 ms grid. Deterministic in (args, seed).
Topology generate_random_topology(int n_ingresses, int n_clients, int n_intermediate,
                                  double density, std::uint64_t seed);

// The 20-PoP / 38-ingress testbed with its real transit ASNs; intermediate
// mesh and clients come from a fixed internal seed.
Topology build_testbed_fixture();

// One entry per violated invariant; empty means valid.
std::vector<std::string> validate(const Topology& t);

Topology load_topology(const std::string& document);
std::string save_topology(const Topology& t);

}  // namespace anypro
