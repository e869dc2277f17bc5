#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "chemrec/molgraph.hpp"

namespace chemrec {

// The 5-slot condition candidate flowing through recall -> tournament ->
// rationale. Empty string means the slot is unused.
struct ConditionConfig {
  std::string catalyst1;
  std::string solvent1;
  std::string solvent2;
  std::string reagent1;
  std::string reagent2;

  static constexpr int kSlots = 5;
  static const std::array<std::string, kSlots>& slot_names();

  const std::string& slot(int i) const;
  std::string& slot(int i);
  bool all_empty() const;
  std::vector<std::string> nonempty_species() const;

  // canonical identity: slot tuple joined with '|'
  std::string canonical_id() const;

  bool operator==(const ConditionConfig&) const = default;
  bool operator<(const ConditionConfig& o) const { return canonical_id() < o.canonical_id(); }
};

struct Reaction {
  std::vector<std::string> reactant_smiles;
  std::vector<std::string> product_smiles;
  std::vector<mol::Molecule> reactants;
  std::vector<mol::Molecule> products;

  static Reaction parse(const std::vector<std::string>& reactant_smiles,
                        const std::vector<std::string>& product_smiles);
};

// Per-record match facets behind every citation.
struct EvidenceItem {
  std::string record_id;
  bool type_match = false;
  double fg_overlap = 0.0;   // Jaccard of FG name sets
  double mcs_norm = 0.0;     // normalized MCS size
  double similarity = 0.0;   // fingerprint tanimoto
  double combined = 0.0;     // facet-weighted score
};

struct Evidence {
  std::vector<EvidenceItem> cited;
  std::map<std::string, int> cooccurrence;  // species -> count among cited records

  bool empty() const { return cited.empty(); }
  std::vector<std::string> cited_ids() const;
};

struct SignalFeatures {
  std::map<std::string, double> s_type;    // reaction type -> vote share
  std::map<std::string, double> s_role;    // fg name -> role-consistency score
  std::map<std::string, int> s_byprod;     // by-product species -> support count
};

struct CheckResult {
  std::string name;
  bool pass = true;
  std::string message;
};

struct ConstraintReport {
  std::vector<CheckResult> checks;

  bool overall() const {
    for (const CheckResult& c : checks)
      if (!c.pass) return false;
    return true;
  }
  const CheckResult* find(const std::string& name) const;
};

// General-Chemist output written to Memory: the mechanistic summary every
// later stage reads.
struct ReactionReport {
  std::vector<std::string> main_fgs;
  std::map<std::string, std::vector<std::vector<int>>> fg_atoms;  // fg -> per-hit atom indices
  std::string balanced_equation;
  bool balance_ok = false;
  std::vector<std::string> byproducts;  // top hypothesis species names
  std::string reaction_type;            // tau-hat; "unknown" when base is empty
  double type_confidence = 0.0;
  Evidence citations;
  SignalFeatures signals;
};

}  // namespace chemrec
