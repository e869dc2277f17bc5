#include "chemrec/types.hpp"

namespace chemrec {

const std::array<std::string, ConditionConfig::kSlots>& ConditionConfig::slot_names() {
  static const std::array<std::string, kSlots> names = {"catalyst1", "solvent1", "solvent2",
                                                        "reagent1", "reagent2"};
  return names;
}

const std::string& ConditionConfig::slot(int i) const {
  switch (i) {
    case 0: return catalyst1;
    case 1: return solvent1;
    case 2: return solvent2;
    case 3: return reagent1;
    default: return reagent2;
  }
}

std::string& ConditionConfig::slot(int i) {
  switch (i) {
    case 0: return catalyst1;
    case 1: return solvent1;
    case 2: return solvent2;
    case 3: return reagent1;
    default: return reagent2;
  }
}

bool ConditionConfig::all_empty() const {
  for (int i = 0; i < kSlots; ++i)
    if (!slot(i).empty()) return false;
  return true;
}

std::vector<std::string> ConditionConfig::nonempty_species() const {
  std::vector<std::string> out;
  for (int i = 0; i < kSlots; ++i)
    if (!slot(i).empty()) out.push_back(slot(i));
  return out;
}

std::string ConditionConfig::canonical_id() const {
  std::string id;
  for (int i = 0; i < kSlots; ++i) {
    if (i) id += '|';
    id += slot(i);
  }
  return id;
}

Reaction Reaction::parse(const std::vector<std::string>& reactant_smiles,
                         const std::vector<std::string>& product_smiles) {
  Reaction x;
  x.reactant_smiles = reactant_smiles;
  x.product_smiles = product_smiles;
  for (const std::string& s : reactant_smiles) x.reactants.push_back(mol::parse_smiles(s));
  for (const std::string& s : product_smiles) x.products.push_back(mol::parse_smiles(s));
  return x;
}

std::vector<std::string> Evidence::cited_ids() const {
  std::vector<std::string> ids;
  for (const EvidenceItem& e : cited) ids.push_back(e.record_id);
  return ids;
}

const CheckResult* ConstraintReport::find(const std::string& name) const {
  for (const CheckResult& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

}  // namespace chemrec
