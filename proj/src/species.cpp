#include "chemrec/species.hpp"

#include <fstream>
#include <sstream>

namespace chemrec::species {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

}  // namespace

SpeciesDict SpeciesDict::load(std::istream& in) {
  SpeciesDict dict;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split(line, '\t');
    if (fields.size() < 3)
      throw std::runtime_error("species dictionary line " + std::to_string(lineno) +
                               ": expected name, SMILES, roles");
    SpeciesEntry e;
    e.name = fields[0];
    e.smiles = fields[1];
    for (const std::string& r : split(fields[2], ','))
      if (!r.empty()) e.roles.insert(r);
    if (fields.size() > 3)
      for (const std::string& s : split(fields[3], ','))
        if (!s.empty()) e.synonyms.push_back(s);
    if (dict.find(e.name))
      throw std::runtime_error("duplicate species '" + e.name + "' on line " +
                               std::to_string(lineno));
    dict.entries_.push_back(std::move(e));
  }
  return dict;
}

SpeciesDict SpeciesDict::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open species dictionary: " + path);
  return load(in);
}

const SpeciesEntry* SpeciesDict::find(const std::string& name) const {
  for (const SpeciesEntry& e : entries_) {
    if (e.name == name) return &e;
    for (const std::string& s : e.synonyms)
      if (s == name) return &e;
  }
  return nullptr;
}

std::string SpeciesDict::canonical(const std::string& name) const {
  const SpeciesEntry* e = find(name);
  return e ? e->name : name;
}

bool SpeciesDict::has_role(const std::string& name, const std::string& role) const {
  const SpeciesEntry* e = find(name);
  return e && e->roles.count(role) > 0;
}

bool SpeciesDict::known(const std::string& name) const { return find(name) != nullptr; }

}  // namespace chemrec::species
