#pragma once

#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "chemrec/molgraph.hpp"

namespace chemrec::species {

// Species dictionary: canonical condition-species names with role tags and
// synonyms. Single source of truth for hard checks and evaluation matching.
struct SpeciesEntry {
  std::string name;     // canonical
  std::string smiles;   // may be empty for species without a SMILES form
  std::set<std::string> roles;
  std::vector<std::string> synonyms;
};

class SpeciesDict {
 public:
  // line format: name<TAB>SMILES<TAB>roles(comma)<TAB>synonyms(comma); '#' comments
  static SpeciesDict load(std::istream& in);
  static SpeciesDict load_file(const std::string& path);

  // synonym -> canonical name; unknown names pass through unchanged
  std::string canonical(const std::string& name) const;
  bool has_role(const std::string& name, const std::string& role) const;
  // true when the name (or a synonym) is in the dictionary
  bool known(const std::string& name) const;
  const SpeciesEntry* find(const std::string& name) const;
  const std::vector<SpeciesEntry>& entries() const { return entries_; }

 private:
  std::vector<SpeciesEntry> entries_;
};

}  // namespace chemrec::species
