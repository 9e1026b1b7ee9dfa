#include "anypro/resolution.hpp"

#include <algorithm>
#include <map>

#include <json.hpp>

#include "anypro/errors.hpp"

namespace anypro {

namespace {

long hamming(const std::vector<int>& x, const std::vector<int>& y) {
  long d = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] != y[i]) ++d;
  return d;
}

bool group_at_desired(const Mapping& m, const ClientGroup& g) {
  for (Asn c : g.members) {
    auto it = m.assignment.find(c);
    if (it == m.assignment.end() || it->second != g.desired) return false;
  }
  return true;
}

}  // namespace

ContradictionReport detect_contradictions(const std::vector<Atom>& atoms,
                                          const std::vector<ClientGroup>& groups,
                                          int max_prepend) {
  ContradictionReport report;

  // Weight carried by each atom identity across groups.
  std::map<std::tuple<int, int, int>, long> atom_weight;
  for (const auto& g : groups)
    for (const auto& a : g.atoms) atom_weight[a.key()] += g.weight;

  // Bucket atoms by orientation over each unordered pair.
  std::map<std::pair<int, int>, std::vector<const Atom*>> forward, backward;
  for (const auto& a : atoms) {
    auto key = std::minmax(a.lhs, a.rhs);
    if (a.lhs == key.first)
      forward[key].push_back(&a);
    else
      backward[key].push_back(&a);
  }

  for (const auto& [key, fs] : forward) {
    auto bit = backward.find(key);
    if (bit == backward.end()) continue;
    for (const Atom* f : fs)
      for (const Atom* b : bit->second) {
        if (f->offset + b->offset >= 0) continue;
        ContradictionPair pair;
        // gamma1 takes the more negative offset; ties to the forward atom.
        if (f->offset <= b->offset) {
          pair.gamma1 = *f;
          pair.gamma2 = *b;
        } else {
          pair.gamma1 = *b;
          pair.gamma2 = *f;
        }
        long w1 = atom_weight.count(pair.gamma1.key()) ? atom_weight[pair.gamma1.key()] : 0;
        long w2 = atom_weight.count(pair.gamma2.key()) ? atom_weight[pair.gamma2.key()] : 0;
        pair.impact = w1 + w2;
        report.pairs.push_back(pair);
      }
  }
  std::stable_sort(report.pairs.begin(), report.pairs.end(),
                   [](const ContradictionPair& x, const ContradictionPair& y) {
                     if (x.impact != y.impact) return x.impact > y.impact;
                     return std::make_tuple(x.gamma1.key(), x.gamma2.key()) <
                            std::make_tuple(y.gamma1.key(), y.gamma2.key());
                   });

  for (const auto& g : groups) {
    if (g.atoms.empty()) continue;
    if (!difference_system_feasible(g.atoms, max_prepend))
      report.infeasible_groups.push_back(g.group_id);
  }
  return report;
}

Resolution binary_scan(const ContradictionPair& pair, Oracle& o, const ClientGroup& w1,
                       const ClientGroup& w2, int max_prepend) {
  Resolution res;
  const int k = -pair.gamma1.offset;
  const int b = pair.gamma2.offset;

  if (pair.gamma1.refined || pair.gamma2.refined) {
    // A tight constraint cannot be relaxed further; no probes spent.
    res.outcome = Resolution::Outcome::unresolvable;
    res.ds1_interval = {1, k};
    res.ds2_interval = {b, max_prepend - 1};
    return res;
  }
  if (k <= 0 || b < 0)
    throw ResolutionError("binary_scan needs gamma1 offset < 0 and gamma2 offset >= 0, got " +
                          atom_to_string(pair.gamma1) + " / " + atom_to_string(pair.gamma2));
  if (w1.desired < 0 || w2.desired < 0) throw ResolutionError("scan witness lacks a desired ingress");

  const Topology& t = o.topology();
  const int n = t.ingress_count();
  PrependConfig resting = PrependConfig::uniform(n, max_prepend, max_prepend);
  std::vector<int> prev = resting.lengths;

  auto probe = [&](int lhs, int rhs, int lhs_value, int rhs_value,
                   const ClientGroup& witness) {
    PrependConfig cfg = resting;
    cfg.lengths[lhs] = lhs_value;
    cfg.lengths[rhs] = rhs_value;
    res.adjustments += hamming(cfg.lengths, prev);
    prev = cfg.lengths;
    Mapping m = o.experiment(cfg);
    res.experiments_used += 1;
    return group_at_desired(m, witness);
  };

  // gamma1: s_a <= s_b - k, witness w1; probe at difference m via (0, m).
  // gamma2: s_b <= s_a + b, witness w2; probe at difference m via (m, 0) on
  // gamma2's own orientation, which is the same absolute configuration.
  int lo1 = 0, hi1 = k;
  int lo2 = b, hi2 = max_prepend;
  while (hi1 > lo2 && lo1 < hi2) {
    bool progressed = false;
    if (hi1 - lo1 > 1) {
      int m = (lo1 + hi1) / 2;
      if (probe(pair.gamma1.lhs, pair.gamma1.rhs, 0, m, w1))
        hi1 = m;
      else
        lo1 = m;
      progressed = true;
    }
    if (hi2 - lo2 > 1) {
      int m = (lo2 + hi2) / 2;
      if (probe(pair.gamma2.lhs, pair.gamma2.rhs, m, 0, w2))
        lo2 = m;
      else
        hi2 = m;
      progressed = true;
    }
    if (!progressed) break;  // both intervals pinned to width 1
  }
  res.adjustments += hamming(resting.lengths, prev);  // restore to all-MAX

  res.ds1_interval = {lo1 + 1, hi1};
  res.ds2_interval = {lo2, hi2 - 1};
  if (hi1 <= lo2) {
    res.outcome = Resolution::Outcome::resolved;
    res.refined1 = pair.gamma1;
    res.refined1.offset = -hi1;
    res.refined1.refined = true;
    res.refined2 = pair.gamma2;
    res.refined2.offset = lo2;
    res.refined2.refined = true;
  } else {
    res.outcome = Resolution::Outcome::unresolvable;
  }
  return res;
}

std::string workflow_to_jsonl(const std::vector<WorkflowRecord>& log) {
  std::string out;
  for (const auto& r : log) {
    nlohmann::json j;
    j["step"] = r.step;
    j["detail"] = r.detail;
    if (r.pair) {
      auto atom_json = [](const Atom& a) {
        return nlohmann::json{{"lhs", a.lhs},
                              {"rhs", a.rhs},
                              {"offset", a.offset},
                              {"refined", a.refined},
                              {"third_party", a.third_party}};
      };
      j["pair"] = {{"gamma1", atom_json(r.pair->first)}, {"gamma2", atom_json(r.pair->second)}};
    }
    if (r.ds1_interval) j["ds1_interval"] = {r.ds1_interval->first, r.ds1_interval->second};
    if (r.ds2_interval) j["ds2_interval"] = {r.ds2_interval->first, r.ds2_interval->second};
    j["experiments"] = r.experiments;
    if (r.objective) j["objective"] = *r.objective;
    out += j.dump() + "\n";
  }
  return out;
}

ResolveResult resolve_all(const std::vector<ClientGroup>& groups, Oracle& o, int max_prepend,
                          const SolveFn& solve_fn) {
  ResolveResult rr;
  rr.groups = groups;
  const int n = o.topology().ingress_count();

  auto solve_current = [&]() {
    return solve_fn(solver::encode(rr.groups, n, max_prepend));
  };

  // Step 1: try the preliminary constraint set as-is.
  rr.final_solution = solve_current();
  rr.log.push_back({1, "initial solve", std::nullopt, std::nullopt, std::nullopt, 0,
                    rr.final_solution.objective});

  // Step 2: extract the contradiction set, ordered by client impact.
  std::vector<std::vector<Atom>> conj;
  for (const auto& g : rr.groups) conj.push_back(g.atoms);
  ContradictionReport report = detect_contradictions(collect_atoms(conj), rr.groups, max_prepend);
  rr.log.push_back({2,
                    "contradiction set: " + std::to_string(report.pairs.size()) + " pairs, " +
                        std::to_string(report.infeasible_groups.size()) + " infeasible groups",
                    std::nullopt, std::nullopt, std::nullopt, 0, std::nullopt});

  // Current version of every atom identity, updated as scans refine.
  std::map<std::tuple<int, int, int>, Atom> current;
  auto lookup = [&current](const Atom& a) {
    auto it = current.find(a.key());
    return it == current.end() ? a : it->second;
  };
  auto substitute = [&rr, &current](const Atom& original, const Atom& refined) {
    current[original.key()] = refined;
    for (auto& g : rr.groups)
      for (auto& a : g.atoms)
        if (a.same_constraint(original)) {
          bool tp = a.third_party;
          a = refined;
          a.third_party = tp;
        }
  };

  // Steps 3-7, one pass over the set.
  for (const auto& pair : report.pairs) {
    Atom g1 = lookup(pair.gamma1);
    Atom g2 = lookup(pair.gamma2);
    rr.log.push_back({3, "tightness check", std::make_pair(g1, g2), std::nullopt, std::nullopt,
                      0, std::nullopt});
    if (g1.refined || g2.refined) {
      rr.log.push_back({4, "unresolvable: tight constraint in pair", std::make_pair(g1, g2),
                        std::nullopt, std::nullopt, 0, std::nullopt});
      rr.unresolvable.push_back({g1, g2, pair.impact});
      continue;
    }
    if (g2.offset < 0) {
      // Mutual TYPE-I: jointly forces MAX = 0, never scannable.
      rr.log.push_back({4, "unresolvable: mutual type-i pair", std::make_pair(g1, g2),
                        std::nullopt, std::nullopt, 0, std::nullopt});
      rr.unresolvable.push_back({g1, g2, pair.impact});
      continue;
    }

    // Witnesses: the heaviest group carrying each side.
    const ClientGroup* w1 = nullptr;
    const ClientGroup* w2 = nullptr;
    for (const auto& g : rr.groups) {
      for (const auto& a : g.atoms) {
        if (a.same_constraint(g1) && (!w1 || g.weight > w1->weight)) w1 = &g;
        if (a.same_constraint(g2) && (!w2 || g.weight > w2->weight)) w2 = &g;
      }
    }
    if (!w1 || !w2) {
      rr.log.push_back({4, "unresolvable: no witness group", std::make_pair(g1, g2),
                        std::nullopt, std::nullopt, 0, std::nullopt});
      rr.unresolvable.push_back({g1, g2, pair.impact});
      continue;
    }

    ContradictionPair live{g1, g2, pair.impact};
    Resolution res = binary_scan(live, o, *w1, *w2, max_prepend);
    rr.resolutions.push_back(res);
    rr.scan_experiments += res.experiments_used;
    rr.scan_adjustments.push_back(res.adjustments);
    if (res.outcome == Resolution::Outcome::resolved) {
      substitute(g1, res.refined1);
      substitute(g2, res.refined2);
      rr.log.push_back({5, "scan resolved", std::make_pair(res.refined1, res.refined2),
                        res.ds1_interval, res.ds2_interval, res.experiments_used,
                        std::nullopt});
      // Step 7: propagate the resolution through a re-solve.
      rr.final_solution = solve_current();
      rr.log.push_back({7, "re-solve", std::nullopt, std::nullopt, std::nullopt, 0,
                        rr.final_solution.objective});
    } else {
      rr.log.push_back({6, "scan unresolvable", std::make_pair(g1, g2), res.ds1_interval,
                        res.ds2_interval, res.experiments_used, std::nullopt});
      rr.unresolvable.push_back({g1, g2, pair.impact});
    }
  }

  // Step 8: final configuration.
  rr.final_solution = solve_current();
  rr.log.push_back({8,
                    "workflow complete: " + std::to_string(rr.resolutions.size()) + " scans, " +
                        std::to_string(rr.unresolvable.size()) + " unresolvable",
                    std::nullopt, std::nullopt, std::nullopt, rr.scan_experiments,
                    rr.final_solution.objective});
  return rr;
}

}  // namespace anypro
