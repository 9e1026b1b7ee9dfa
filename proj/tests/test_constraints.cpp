#include <doctest.h>

#include <optional>

#include "anypro/constraints.hpp"
#include "anypro/errors.hpp"
#include "anypro/resolution.hpp"
#include "anypro/solver.hpp"
#include "support.hpp"

using namespace anypro;
using testsupport::pair_gadget;
using solver::check_feasible;

namespace {

// First difference d = s_1 - s_0 from which the row stays at `want`
// (rows change at most once, so this is the flip point).
std::optional<int> flip_from(const std::vector<std::optional<int>>& row, int maxp, int want) {
  for (int d = -maxp; d <= maxp; ++d) {
    bool all = true;
    for (int e = d; e <= maxp; ++e)
      if (row[e + maxp] != std::optional<int>(want)) {
        all = false;
        break;
      }
    if (all) return d;
  }
  return std::nullopt;
}

ClientGroup make_group(int id, std::vector<Asn> members, int desired, std::vector<Atom> atoms) {
  ClientGroup g;
  g.group_id = id;
  g.members = std::move(members);
  g.weight = static_cast<long>(g.members.size());
  g.desired = desired;
  g.atoms = std::move(atoms);
  return g;
}

}  // namespace

TEST_CASE("canonicalize validates and atoms deduplicate across groups") {
  CHECK_THROWS_AS(canonicalize({2, 2, 0, false, false}, 9), ResolutionError);
  CHECK_THROWS_AS(canonicalize({0, 1, 10, false, false}, 9), ResolutionError);

  Atom a{0, 1, -9, false, false};
  Atom a_tp{0, 1, -9, false, true};
  Atom b{1, 0, 0, false, false};
  auto atoms = collect_atoms({{a, b}, {a_tp}});
  CHECK(atoms.size() == 2);  // a and a_tp share one identity
  bool third_party_kept = false;
  for (const auto& x : atoms)
    if (x.same_constraint(a)) third_party_kept = x.third_party;
  CHECK(third_party_kept);
}

TEST_CASE("feasibility of difference systems") {
  // Lone TYPE-I atom has the corner solution.
  CHECK(check_feasible({{0, 1, -9, false, false}}, 9));
  // Mutually imposed TYPE-I atoms force MAX = 0.
  CHECK_FALSE(check_feasible({{0, 1, -9, false, false}, {1, 0, -9, false, false}}, 9));
  // TYPE-II in both directions collapses to equality.
  CHECK(check_feasible({{0, 1, 0, false, false}, {1, 0, 0, false, false}}, 9));
  // Chained TYPE-I atoms can exceed the domain even without a cycle.
  CHECK(check_feasible({{0, 1, -5, false, false}, {1, 2, -4, false, false}}, 9));
  CHECK_FALSE(check_feasible({{0, 1, -5, false, false}, {1, 2, -5, false, false}}, 9));
}

TEST_CASE("contradiction detection and impact ordering") {
  Atom t1{0, 1, -9, false, false};  // s_0 <= s_1 - 9
  Atom t2{1, 0, 0, false, false};   // s_1 <= s_0

  SUBCASE("hybrid pair is a contradiction") {
    auto groups = std::vector<ClientGroup>{make_group(0, {1001}, 0, {t1}),
                                           make_group(1, {1002, 1003}, 1, {t2})};
    auto rep = detect_contradictions(collect_atoms({{t1}, {t2}}), groups, 9);
    REQUIRE(rep.pairs.size() == 1);
    CHECK(rep.pairs[0].gamma1.same_constraint(t1));
    CHECK(rep.pairs[0].gamma2.same_constraint(t2));
    CHECK(rep.pairs[0].impact == 3);
    CHECK(rep.infeasible_groups.empty());
  }

  SUBCASE("type-ii cycle is no contradiction") {
    Atom ab{0, 1, 0, false, false}, bc{1, 2, 0, false, false}, ca{2, 0, 0, false, false};
    auto groups = std::vector<ClientGroup>{make_group(0, {1001}, 0, {ab, bc, ca})};
    auto rep = detect_contradictions(collect_atoms({{ab, bc, ca}}), groups, 9);
    CHECK(rep.pairs.empty());
    CHECK(rep.infeasible_groups.empty());
  }

  SUBCASE("type-i cycle carries a negative cycle") {
    Atom ab{0, 1, -3, false, false}, bc{1, 2, -3, false, false}, ca{2, 0, -3, false, false};
    auto groups = std::vector<ClientGroup>{make_group(7, {1001}, 0, {ab, bc, ca})};
    auto rep = detect_contradictions(collect_atoms({{ab, bc, ca}}), groups, 3);
    CHECK(rep.pairs.empty());  // no opposite orientations
    REQUIRE(rep.infeasible_groups.size() == 1);
    CHECK(rep.infeasible_groups[0] == 7);
  }

  SUBCASE("pairs sort by impact descending") {
    Atom u1{2, 3, -9, false, false}, u2{3, 2, 0, false, false};
    auto groups = std::vector<ClientGroup>{
        make_group(0, {1001}, 0, {t1}), make_group(1, {1002}, 1, {t2}),
        make_group(2, {1003, 1004, 1005}, 2, {u1}), make_group(3, {1006, 1007}, 3, {u2})};
    auto rep = detect_contradictions(collect_atoms({{t1}, {t2}, {u1}, {u2}}), groups, 9);
    REQUIRE(rep.pairs.size() == 2);
    CHECK(rep.pairs[0].impact == 5);
    CHECK(rep.pairs[1].impact == 2);
    CHECK(rep.pairs[0].gamma1.same_constraint(u1));
  }
}

TEST_CASE("binary scan against the sweep oracle") {
  const int maxp = 9;
  // Client 0 wants far ingress 0 (type-i side), client 1 wants ingress 1 but
  // tolerates only small differences (type-ii side).
  auto run_case = [&](int a1, int b1, int a2, int b2) {
    Topology t = pair_gadget({{a1, b1}, {a2, b2}});
    Oracle sweep_o(t);
    FlipTable ft = sweep_pair_difference(sweep_o, 0, 1, maxp, maxp);
    auto t1 = flip_from(ft.rows.at(t.clients[0]), maxp, 0);
    auto t2raw = ft.rows.at(t.clients[1]);
    // Last d at which client 1 still reaches ingress 1.
    std::optional<int> t2;
    for (int d = -maxp; d <= maxp; ++d)
      if (t2raw[d + maxp] == std::optional<int>(1)) t2 = d;
    REQUIRE(t1.has_value());
    REQUIRE(t2.has_value());

    ContradictionPair pair;
    pair.gamma1 = Atom{0, 1, -maxp, false, false};
    pair.gamma2 = Atom{1, 0, 0, false, false};
    ClientGroup w1 = make_group(0, {t.clients[0]}, 0, {pair.gamma1});
    ClientGroup w2 = make_group(1, {t.clients[1]}, 1, {pair.gamma2});

    Oracle scan_o(t);
    Resolution res = binary_scan(pair, scan_o, w1, w2, maxp);
    CHECK(res.experiments_used <= 8);  // 2 * ceil(log2(10))
    CHECK(res.experiments_used == scan_o.experiment_count());

    bool truth_resolvable = *t1 <= *t2;
    if (truth_resolvable) {
      REQUIRE(res.outcome == Resolution::Outcome::resolved);
      // Refined bounds never cross the true flip points.
      CHECK(-res.refined1.offset >= *t1);
      CHECK(res.refined2.offset <= *t2);
      CHECK(-res.refined1.offset <= res.refined2.offset);
      CHECK(res.refined1.refined);
      CHECK(res.refined2.refined);
      // Joint satisfiability of the refined pair over the domain.
      CHECK(check_feasible({res.refined1, res.refined2}, maxp));
      // Post-scan confirmation: a config satisfying both refined atoms with
      // others at MAX steers both witnesses to their desired ingresses.
      PrependConfig confirm = PrependConfig::uniform(2, maxp, maxp);
      confirm.lengths[0] = 0;
      confirm.lengths[1] = -res.refined1.offset;
      Mapping m = scan_o.experiment(confirm);
      CHECK(m.assignment.at(t.clients[0]) == 0);
      CHECK(m.assignment.at(t.clients[1]) == 1);
    } else {
      CHECK(res.outcome == Resolution::Outcome::unresolvable);
      CHECK(res.ds1_interval.first > res.ds2_interval.second);
    }
  };

  run_case(4, 2, 8, 2);  // flips near 2 and 5: resolvable
  run_case(8, 2, 4, 2);  // flips near 6 and 1: unresolvable
  run_case(3, 2, 9, 2);  // barely-shifted type-i side
}

TEST_CASE("already-refined input is unresolvable without probes") {
  Topology t = pair_gadget({{4, 2}, {8, 2}});
  Oracle o(t);
  ContradictionPair pair;
  pair.gamma1 = Atom{0, 1, -4, true, false};
  pair.gamma2 = Atom{1, 0, 0, false, false};
  ClientGroup w1 = make_group(0, {t.clients[0]}, 0, {pair.gamma1});
  ClientGroup w2 = make_group(1, {t.clients[1]}, 1, {pair.gamma2});
  Resolution res = binary_scan(pair, o, w1, w2, 9);
  CHECK(res.outcome == Resolution::Outcome::unresolvable);
  CHECK(res.experiments_used == 0);
  CHECK(o.experiment_count() == 0);
}

TEST_CASE("mutually imposed type-i pair is a caller error for the scan") {
  Topology t = pair_gadget({{4, 2}, {2, 4}});
  Oracle o(t);
  ContradictionPair pair;
  pair.gamma1 = Atom{0, 1, -9, false, false};
  pair.gamma2 = Atom{1, 0, -9, false, false};
  ClientGroup w1 = make_group(0, {t.clients[0]}, 0, {pair.gamma1});
  ClientGroup w2 = make_group(1, {t.clients[1]}, 1, {pair.gamma2});
  CHECK_THROWS_AS(binary_scan(pair, o, w1, w2, 9), ResolutionError);
}

TEST_CASE("resolve_all without contradictions changes nothing") {
  Topology t = pair_gadget({{4, 2}});
  Oracle o(t);
  auto groups = std::vector<ClientGroup>{
      make_group(0, {t.clients[0]}, 0, {Atom{0, 1, -9, false, false}})};
  auto solve_fn = [](const solver::Instance& inst) { return solver::solve(inst); };
  ResolveResult rr = resolve_all(groups, o, 9, solve_fn);
  CHECK(rr.resolutions.empty());
  CHECK(rr.unresolvable.empty());
  CHECK(rr.scan_experiments == 0);
  CHECK(o.experiment_count() == 0);
  CHECK(rr.groups[0].atoms[0] == groups[0].atoms[0]);
  CHECK(rr.final_solution.objective == 1);
}

TEST_CASE("resolve_all refines a resolvable pair and keeps the objective moving up") {
  Topology t = pair_gadget({{4, 2}, {8, 2}});
  Oracle o(t);
  auto groups = std::vector<ClientGroup>{
      make_group(0, {t.clients[0]}, 0, {Atom{0, 1, -9, false, false}}),
      make_group(1, {t.clients[1]}, 1, {Atom{1, 0, 0, false, false}})};
  auto solve_fn = [](const solver::Instance& inst) { return solver::solve(inst); };
  ResolveResult rr = resolve_all(groups, o, 9, solve_fn);

  REQUIRE(rr.resolutions.size() == 1);
  CHECK(rr.resolutions[0].outcome == Resolution::Outcome::resolved);
  CHECK(rr.unresolvable.empty());
  bool refined_present = false;
  for (const auto& g : rr.groups)
    for (const auto& a : g.atoms)
      if (a.refined) refined_present = true;
  CHECK(refined_present);
  CHECK(rr.final_solution.objective == 2);  // both groups satisfiable now

  // Workflow objectives are non-decreasing across re-solves.
  std::optional<long> prev;
  for (const auto& rec : rr.log)
    if (rec.objective) {
      if (prev) CHECK(*rec.objective >= *prev);
      prev = rec.objective;
    }

  // One-pass property: one scan for one pair.
  CHECK(rr.scan_experiments == rr.resolutions[0].experiments_used);

  // Oracle agreement: the solved config, applied through the simulator,
  // steers every satisfied group's members to their desired ingress.
  PrependConfig final_cfg = rr.final_solution.config;
  Mapping m = o.experiment(final_cfg);
  for (const auto& g : rr.groups) {
    bool sat = true;
    for (const auto& a : g.atoms)
      if (!a.holds(final_cfg.lengths)) sat = false;
    if (!sat) continue;
    for (Asn member : g.members) CHECK(m.assignment.at(member) == g.desired);
  }
}

TEST_CASE("resolve_all keeps the heavier side of an unresolvable pair") {
  // Two clients want far ingress 0 (flip ~6), one wants ingress 1 with a low
  // tolerance (flip ~1): intervals disjoint.
  Topology t = pair_gadget({{8, 2}, {8, 2}, {4, 2}});
  Oracle o(t);
  auto groups = std::vector<ClientGroup>{
      make_group(0, {t.clients[0], t.clients[1]}, 0, {Atom{0, 1, -9, false, false}}),
      make_group(1, {t.clients[2]}, 1, {Atom{1, 0, 0, false, false}})};
  auto solve_fn = [](const solver::Instance& inst) { return solver::solve(inst); };
  ResolveResult rr = resolve_all(groups, o, 9, solve_fn);

  REQUIRE(rr.resolutions.size() == 1);
  CHECK(rr.resolutions[0].outcome == Resolution::Outcome::unresolvable);
  REQUIRE(rr.unresolvable.size() == 1);
  CHECK(rr.final_solution.objective == 2);  // weight-2 group wins
  REQUIRE(rr.final_solution.satisfied_groups.size() == 1);
  const auto& inst_groups = solver::encode(rr.groups, 2, 9).groups;
  CHECK(inst_groups[rr.final_solution.satisfied_groups[0]].weight == 2);
}

TEST_CASE("resolve_all handles independent contradictions in one pass") {
  // Two unrelated contradiction pairs over disjoint ingress pairs; the
  // far-away ingresses are pinned at MAX during probes so neither scan
  // disturbs the other.
  Topology t = pair_gadget({{4, 2, 12, 12},
                            {8, 2, 12, 12},
                            {12, 12, 4, 2},
                            {12, 12, 8, 2}});
  Oracle o(t);
  auto mk = [&](int id, Asn member, int desired, Atom a) {
    ClientGroup g;
    g.group_id = id;
    g.members = {member};
    g.weight = 1;
    g.desired = desired;
    g.atoms = {a};
    return g;
  };
  auto groups = std::vector<ClientGroup>{
      mk(0, t.clients[0], 0, {0, 1, -9, false, false}),
      mk(1, t.clients[1], 1, {1, 0, 0, false, false}),
      mk(2, t.clients[2], 2, {2, 3, -9, false, false}),
      mk(3, t.clients[3], 3, {3, 2, 0, false, false})};
  auto solve_fn = [](const solver::Instance& inst) { return solver::solve(inst); };
  ResolveResult rr = resolve_all(groups, o, 9, solve_fn);

  REQUIRE(rr.resolutions.size() == 2);
  CHECK(rr.resolutions[0].outcome == Resolution::Outcome::resolved);
  CHECK(rr.resolutions[1].outcome == Resolution::Outcome::resolved);
  CHECK(rr.unresolvable.empty());
  CHECK(rr.scan_adjustments.size() == 2);
  std::int64_t both = rr.resolutions[0].experiments_used + rr.resolutions[1].experiments_used;
  CHECK(rr.scan_experiments == both);
  CHECK(rr.final_solution.objective == 4);
}
