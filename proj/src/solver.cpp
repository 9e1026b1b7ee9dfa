#include "anypro/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "anypro/errors.hpp"
#include "anypro/polling.hpp"

namespace anypro::solver {

namespace {

struct GroupState {
  long weight = 0;
  std::vector<Atom> atoms;
  int original_index = 0;
  bool root_infeasible = false;
};

// Feasibility of a set of atoms under 0 <= s_i <= MAX plus fixed-value
// constraints for a prefix of variables; when feasible and `out` is given,
// fills it with the componentwise-minimal solution (which is also the
// lexicographically smallest one, since the feasible set is min-closed).
bool atoms_feasible(const std::vector<const Atom*>& atoms, int n, int max_prepend,
                    const std::vector<int>& fixed, std::vector<int>* out = nullptr) {
  // Least fixpoint: raise values until every constraint holds.
  std::vector<int> s(n, 0);
  for (std::size_t i = 0; i < fixed.size(); ++i)
    if (fixed[i] >= 0) s[i] = fixed[i];
  for (int pass = 0; pass <= n * (max_prepend + 1) + 1; ++pass) {
    bool changed = false;
    for (const Atom* a : atoms) {
      if (s[a->lhs] > s[a->rhs] + a->offset) {
        int need = s[a->lhs] - a->offset;  // s_rhs must reach this
        if (a->rhs < static_cast<int>(fixed.size()) && fixed[a->rhs] >= 0)
          return false;  // fixed variable cannot be raised
        if (need > max_prepend) return false;
        s[a->rhs] = need;
        changed = true;
      }
    }
    if (!changed) {
      if (out) *out = s;
      return true;
    }
  }
  return false;  // unreachable: every pass raises some value
}

// Branch and bound over which group conjunctions to satisfy. A set of groups
// is satisfiable together iff the union of their atoms admits a solution in
// [0, MAX]^n, so the search branches on include/exclude per group (heaviest
// first) with the optimistic bound included + remaining. The returned config
// is the lexicographically smallest optimum, built by fixing one variable at
// a time and re-proving the optimum still holds.
class Search {
 public:
  Search(const Instance& inst, std::optional<std::int64_t> budget)
      : inst_(inst), budget_(budget) {
    for (std::size_t gi = 0; gi < inst.groups.size(); ++gi) {
      GroupState gs;
      gs.weight = inst.groups[gi].weight;
      gs.atoms = inst.groups[gi].atoms;
      gs.original_index = static_cast<int>(gi);
      std::vector<const Atom*> alone;
      for (const auto& a : gs.atoms) alone.push_back(&a);
      gs.root_infeasible = !atoms_feasible(alone, inst.n, inst.max_prepend, no_fixed());
      if (!gs.root_infeasible) groups_.push_back(std::move(gs));
    }
    std::stable_sort(groups_.begin(), groups_.end(),
                     [](const GroupState& x, const GroupState& y) { return x.weight > y.weight; });
    suffix_weight_.assign(groups_.size() + 1, 0);
    for (std::size_t i = groups_.size(); i-- > 0;)
      suffix_weight_[i] = suffix_weight_[i + 1] + groups_[i].weight;
  }

  Solution run() {
    fixed_.assign(inst_.n, -1);
    best_weight_ = -1;
    dfs(0, 0);

    Solution sol;
    sol.config = PrependConfig::uniform(inst_.n, 0, inst_.max_prepend);
    if (best_weight_ < 0) best_weight_ = 0;  // budget exhausted before any leaf

    // Lexicographic extraction: fix each variable at the smallest value that
    // still admits the proven optimum.
    std::vector<int> config(inst_.n, 0);
    if (!exhausted_) {
      long target = best_weight_;
      for (int var = 0; var < inst_.n && !exhausted_; ++var) {
        for (int v = 0; v <= inst_.max_prepend; ++v) {
          fixed_[var] = v;
          best_weight_ = -1;
          dfs(0, 0);
          if (exhausted_) break;
          if (best_weight_ >= target) {
            config[var] = v;
            break;
          }
        }
      }
      best_weight_ = target;
    }
    if (exhausted_) {
      // Fall back to the minimal solution of the best set seen so far.
      std::fill(fixed_.begin(), fixed_.end(), -1);
      std::vector<const Atom*> atoms;
      for (std::size_t i = 0; i < best_set_.size(); ++i)
        if (best_set_[i])
          for (const auto& a : groups_[i].atoms) atoms.push_back(&a);
      atoms_feasible(atoms, inst_.n, inst_.max_prepend, fixed_, &config);
    }

    sol.config.lengths = config;
    sol.objective = inst_.base_weight + evaluate_weight(config);
    sol.proof = exhausted_ ? Solution::Proof::heuristic : Solution::Proof::exact;
    sol.nodes = nodes_;
    for (std::size_t gi = 0; gi < inst_.groups.size(); ++gi) {
      bool sat = true;
      for (const auto& a : inst_.groups[gi].atoms)
        if (!a.holds(config)) {
          sat = false;
          break;
        }
      if (sat) sol.satisfied_groups.push_back(static_cast<int>(gi));
    }
    return sol;
  }

 private:
  static const std::vector<int>& no_fixed() {
    static const std::vector<int> empty;
    return empty;
  }

  long evaluate_weight(const std::vector<int>& lengths) const {
    long s = 0;
    for (const auto& g : inst_.groups) {
      bool sat = true;
      for (const auto& a : g.atoms)
        if (!a.holds(lengths)) {
          sat = false;
          break;
        }
      if (sat) s += g.weight;
    }
    return s;
  }

  void dfs(std::size_t idx, long included) {
    if (exhausted_) return;
    ++nodes_;
    if (budget_ && nodes_ > *budget_) {
      exhausted_ = true;
      return;
    }
    if (included + suffix_weight_[idx] <= best_weight_) return;
    if (idx == groups_.size()) {
      best_weight_ = included;
      best_set_ = in_set_;
      return;
    }
    // Include if jointly feasible, preferring inclusion.
    std::size_t before = atoms_.size();
    for (const auto& a : groups_[idx].atoms) atoms_.push_back(&a);
    if (atoms_feasible(atoms_, inst_.n, inst_.max_prepend, fixed_)) {
      in_set_.resize(groups_.size(), false);
      in_set_[idx] = true;
      dfs(idx + 1, included + groups_[idx].weight);
      in_set_[idx] = false;
    }
    atoms_.resize(before);
    if (exhausted_) return;
    dfs(idx + 1, included);
  }

  const Instance& inst_;
  std::optional<std::int64_t> budget_;
  std::vector<GroupState> groups_;
  std::vector<long> suffix_weight_;

  std::vector<const Atom*> atoms_;
  std::vector<char> in_set_;
  std::vector<char> best_set_;
  std::vector<int> fixed_;
  long best_weight_ = -1;
  std::int64_t nodes_ = 0;
  bool exhausted_ = false;
};

}  // namespace

long Instance::weight_upper_bound() const {
  long w = base_weight;
  for (const auto& g : groups) w += g.weight;
  return w;
}

Instance encode(const std::vector<ClientGroup>& groups, int n, int max_prepend) {
  Instance inst;
  inst.n = n;
  inst.max_prepend = max_prepend;
  for (const auto& g : groups) {
    inst.total_clients += g.weight;
    inst.candidate_histogram[static_cast<int>(g.candidates.size())] += 1;
    if (!g.attainable) {
      inst.unattainable_weight += g.weight;
      continue;
    }
    if (g.always_satisfied || g.atoms.empty()) {
      inst.base_weight += g.weight;
      continue;
    }
    SoftGroup sg;
    sg.weight = g.weight;
    sg.source_group_id = g.group_id;
    for (const auto& a : g.atoms) {
      if (a.lhs >= n || a.rhs >= n)
        throw SolverError("atom references ingress beyond n: " + atom_to_string(a));
      sg.atoms.push_back(canonicalize(a, max_prepend));
    }
    inst.groups.push_back(std::move(sg));
  }
  std::vector<std::vector<Atom>> conj;
  for (const auto& g : inst.groups) conj.push_back(g.atoms);
  inst.distinct_atoms = static_cast<int>(collect_atoms(conj).size());
  return inst;
}

long evaluate_objective(const Instance& inst, const std::vector<int>& lengths) {
  long s = inst.base_weight;
  for (const auto& g : inst.groups) {
    bool sat = true;
    for (const auto& a : g.atoms)
      if (!a.holds(lengths)) {
        sat = false;
        break;
      }
    if (sat) s += g.weight;
  }
  return s;
}

Solution solve(const Instance& inst, std::optional<std::int64_t> node_budget) {
  if (inst.n < 1) throw SolverError("instance needs n >= 1");
  Search search(inst, node_budget);
  return search.run();
}

Solution solve_bruteforce(const Instance& inst) {
  if (inst.n < 1) throw SolverError("instance needs n >= 1");
  double space = std::pow(inst.max_prepend + 1.0, inst.n);
  if (space > 1e7)
    throw SolverError("brute force guard: (MAX+1)^n = " + std::to_string(space) + " > 1e7");

  std::vector<int> cfg(inst.n, 0);
  std::vector<int> best_cfg = cfg;
  long best = evaluate_objective(inst, cfg);
  while (true) {
    int i = inst.n - 1;
    while (i >= 0 && cfg[i] == inst.max_prepend) cfg[i--] = 0;
    if (i < 0) break;
    ++cfg[i];
    long obj = evaluate_objective(inst, cfg);
    if (obj > best) {  // strict: first (lexicographically smallest) wins ties
      best = obj;
      best_cfg = cfg;
    }
  }

  Solution sol;
  sol.config = PrependConfig::uniform(inst.n, 0, inst.max_prepend);
  sol.config.lengths = best_cfg;
  sol.objective = best;
  sol.proof = Solution::Proof::exact;
  for (std::size_t gi = 0; gi < inst.groups.size(); ++gi) {
    bool sat = true;
    for (const auto& a : inst.groups[gi].atoms)
      if (!a.holds(best_cfg)) {
        sat = false;
        break;
      }
    if (sat) sol.satisfied_groups.push_back(static_cast<int>(gi));
  }
  return sol;
}

bool check_feasible(const std::vector<Atom>& atoms, int max_prepend) {
  return difference_system_feasible(atoms, max_prepend);
}

std::string instance_to_json(const Instance& inst) {
  nlohmann::json j;
  j["n"] = inst.n;
  j["max"] = inst.max_prepend;
  j["base_weight"] = inst.base_weight;
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : inst.groups) {
    nlohmann::json jg;
    jg["weight"] = g.weight;
    nlohmann::json atoms = nlohmann::json::array();
    for (const auto& a : g.atoms)
      atoms.push_back({{"lhs", a.lhs}, {"rhs", a.rhs}, {"offset", a.offset}});
    jg["atoms"] = atoms;
    groups.push_back(jg);
  }
  j["groups"] = groups;
  return j.dump(2) + "\n";
}

Instance instance_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SolverError(std::string("instance parse: ") + e.what());
  }
  Instance inst;
  try {
    inst.n = j.at("n").get<int>();
    inst.max_prepend = j.at("max").get<int>();
    inst.base_weight = j.at("base_weight").get<long>();
    for (const auto& jg : j.at("groups")) {
      SoftGroup g;
      g.weight = jg.at("weight").get<long>();
      for (const auto& ja : jg.at("atoms")) {
        Atom a;
        a.lhs = ja.at("lhs").get<int>();
        a.rhs = ja.at("rhs").get<int>();
        a.offset = ja.at("offset").get<int>();
        g.atoms.push_back(canonicalize(a, inst.max_prepend));
      }
      inst.groups.push_back(std::move(g));
    }
  } catch (const nlohmann::json::exception& e) {
    throw SolverError(std::string("instance parse: ") + e.what());
  }
  return inst;
}

std::string instance_to_dimacs(const Instance& inst) {
  std::string out;
  out += "c anypro difference-constraint instance\n";
  out += "p groups " + std::to_string(inst.groups.size()) + " vars " + std::to_string(inst.n) +
         " max " + std::to_string(inst.max_prepend) + " base " +
         std::to_string(inst.base_weight) + "\n";
  for (std::size_t gi = 0; gi < inst.groups.size(); ++gi) {
    const auto& g = inst.groups[gi];
    for (const auto& a : g.atoms)
      out += "g" + std::to_string(gi) + " w" + std::to_string(g.weight) + " : " +
             atom_to_string(a) + "\n";
  }
  return out;
}

}  // namespace anypro::solver
