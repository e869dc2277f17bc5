#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "chemrec/molgraph.hpp"
#include "chemrec/species.hpp"
#include "chemrec/types.hpp"

// Constraint Engine: stoichiometric balancing, atom mapping, by-product
// enumeration and the registered hard-check set.
namespace chemrec::balance {

class BalanceError : public std::runtime_error {
 public:
  enum class Kind { Unbalanceable, EmptySide, NegativeDifference };
  BalanceError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct Stoichiometry {
  std::vector<int> reactants;  // positive
  std::vector<int> products;   // positive
  std::vector<int> aux;        // non-negative, aligned with the aux input list
};

// Minimal positive-integer solution of the element-conservation system.
// Rational nullspace first, exhaustive search over coefficients <= 12 as
// fallback.
Stoichiometry balance_stoichiometry(const std::vector<mol::Molecule>& reactants,
                                    const std::vector<mol::Molecule>& products,
                                    const std::vector<mol::Molecule>& aux = {});

bool conserves_elements(const std::vector<mol::Molecule>& reactants,
                        const std::vector<mol::Molecule>& products,
                        const std::vector<mol::Molecule>& aux, const Stoichiometry& s);

// ---- atom mapping --------------------------------------------------------

struct MolAtom {
  int mol = 0;
  int atom = 0;
  bool operator==(const MolAtom&) const = default;
  auto operator<=>(const MolAtom&) const = default;
};

struct ReactionAtomMap {
  std::vector<std::pair<MolAtom, MolAtom>> pairs;  // reactant-side -> product-side
  std::vector<MolAtom> unmapped_reactant;
  std::vector<MolAtom> unmapped_product;
};

// Greedy assembly of pairwise MCS mappings, largest first.
ReactionAtomMap derive_atom_map(const std::vector<mol::Molecule>& reactants,
                                const std::vector<mol::Molecule>& products,
                                const mol::McsOptions& opts = {});

// ---- by-products ---------------------------------------------------------

struct LeavingGroup {
  std::string name;
  std::string smiles;
  mol::Molecule molecule;
};

class LeavingGroupTable {
 public:
  // line format: name<TAB>SMILES; '#' comments
  static LeavingGroupTable load(std::istream& in);
  static LeavingGroupTable load_file(const std::string& path);
  static LeavingGroupTable defaults();

  const std::vector<LeavingGroup>& entries() const { return entries_; }
  const LeavingGroup* find(const std::string& name) const;

 private:
  std::vector<LeavingGroup> entries_;
};

struct ByProductSpecies {
  std::string name;
  mol::Molecule molecule;
  int count = 1;
};

struct ByProductHypothesis {
  std::vector<ByProductSpecies> species;
  std::string rule_name;  // proposing table entry, or "UnexplainedResidue"
  int atom_total = 0;     // parsimony key 1
  int species_total = 0;  // parsimony key 2
};

// Multisets of leaving-group species tiling the reactant-minus-product
// element difference, most parsimonious first.
std::vector<ByProductHypothesis> enumerate_byproducts(
    const std::vector<mol::Molecule>& reactants, const std::vector<mol::Molecule>& products,
    const LeavingGroupTable& table = LeavingGroupTable::defaults());

// ---- hard checks (Constr) ------------------------------------------------

// registered check names, citable individually by the debate
std::vector<std::string> hard_check_names();

ConstraintReport run_hard_checks(const Reaction& x, const ConditionConfig& c,
                                 const ReactionReport& report,
                                 const species::SpeciesDict& dict);

}  // namespace chemrec::balance
