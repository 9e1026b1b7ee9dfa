#include "anypro/constraints.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "anypro/errors.hpp"

namespace anypro {

std::string atom_to_string(const Atom& a) {
  std::string s = "s" + std::to_string(a.lhs) + " <= s" + std::to_string(a.rhs);
  if (a.offset > 0) s += " + " + std::to_string(a.offset);
  if (a.offset < 0) s += " - " + std::to_string(-a.offset);
  if (a.third_party) s += " [third-party]";
  if (a.refined) s += " [refined]";
  return s;
}

Atom canonicalize(const Atom& a, int max_prepend) {
  if (a.lhs == a.rhs)
    throw ResolutionError("atom relates an ingress to itself: " + atom_to_string(a));
  if (a.lhs < 0 || a.rhs < 0)
    throw ResolutionError("atom has negative ingress id: " + atom_to_string(a));
  if (a.offset < -max_prepend || a.offset > max_prepend)
    throw ResolutionError("atom offset outside [-MAX, MAX]: " + atom_to_string(a));
  return a;
}

std::vector<Atom> collect_atoms(const std::vector<std::vector<Atom>>& conjunctions) {
  std::map<std::tuple<int, int, int>, Atom> uniq;
  for (const auto& conj : conjunctions)
    for (const auto& a : conj) {
      auto [it, fresh] = uniq.emplace(a.key(), a);
      if (!fresh) {
        it->second.third_party = it->second.third_party || a.third_party;
        it->second.refined = it->second.refined || a.refined;
      }
    }
  std::vector<Atom> out;
  out.reserve(uniq.size());
  for (auto& [k, a] : uniq) out.push_back(a);
  return out;
}

bool difference_system_feasible(const std::vector<Atom>& atoms, int max_prepend) {
  // Variables are the ingress ids present in the atoms plus a zero anchor.
  // Atom s_a <= s_b + c is edge b -> a of weight c; bounds add z -> i (MAX)
  // and i -> z (0). Feasible iff no negative cycle.
  std::set<int> vars;
  for (const auto& a : atoms) {
    vars.insert(a.lhs);
    vars.insert(a.rhs);
  }
  if (vars.empty()) return true;
  std::map<int, int> index;
  int n = 1;  // 0 is the anchor
  for (int v : vars) index[v] = n++;

  struct Edge {
    int from, to, w;
  };
  std::vector<Edge> edges;
  for (const auto& [v, i] : index) {
    edges.push_back({0, i, max_prepend});  // s_v <= MAX
    edges.push_back({i, 0, 0});            // s_v >= 0
  }
  for (const auto& a : atoms) edges.push_back({index[a.rhs], index[a.lhs], a.offset});

  std::vector<long> dist(n, 0);  // implicit zero source reaching every node
  for (int pass = 0; pass < n; ++pass) {
    bool changed = false;
    for (const auto& e : edges)
      if (dist[e.from] + e.w < dist[e.to]) {
        dist[e.to] = dist[e.from] + e.w;
        changed = true;
      }
    if (!changed) return true;
  }
  for (const auto& e : edges)
    if (dist[e.from] + e.w < dist[e.to]) return false;
  return true;
}

}  // namespace anypro
