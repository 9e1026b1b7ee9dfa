#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

namespace anypro {

// One difference constraint over prepending lengths: S[lhs] <= S[rhs] + offset.
// TYPE-I atoms start at offset -MAX, TYPE-II at offset 0; binary scan tightens
// offsets and sets `refined`.
struct Atom {
  int lhs = -1;
  int rhs = -1;
  int offset = 0;
  bool refined = false;
  bool third_party = false;

  bool holds(const std::vector<int>& lengths) const {
    return lengths[lhs] <= lengths[rhs] + offset;
  }
  // Identity for deduplication; refined/third_party are metadata.
  auto key() const { return std::make_tuple(lhs, rhs, offset); }
  bool same_constraint(const Atom& o) const { return key() == o.key(); }
  auto operator<=>(const Atom&) const = default;
};

std::string atom_to_string(const Atom& a);

// Validates lhs != rhs and |offset| <= max_prepend; returns the atom unchanged
// otherwise (the <= form is already normal). Throws ResolutionError on
// malformed input.
Atom canonicalize(const Atom& a, int max_prepend);

// Sorted unique atoms over a set of conjunctions.
std::vector<Atom> collect_atoms(const std::vector<std::vector<Atom>>& conjunctions);

// Two atoms over the same ingress pair in opposite orientations whose offsets
// sum negative: no integer assignment satisfies both. gamma1 is the side with
// the (more) negative offset.
struct ContradictionPair {
  Atom gamma1;
  Atom gamma2;
  long impact = 0;  // total weight of groups carrying either atom
};

// True iff the conjunction plus 0 <= s_i <= max_prepend admits an integer
// solution (Bellman-Ford negative-cycle test on the difference graph with
// bound edges).
bool difference_system_feasible(const std::vector<Atom>& atoms, int max_prepend);

}  // namespace anypro
