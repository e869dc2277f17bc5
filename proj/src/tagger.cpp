#include "chemrec/tagger.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

namespace chemrec::tagger {

FGRole role_from_string(const std::string& s) {
  if (s == "electrophile") return FGRole::Electrophile;
  if (s == "nucleophile") return FGRole::Nucleophile;
  if (s == "neutral") return FGRole::Neutral;
  throw std::invalid_argument("unknown FG role: " + s);
}

std::string to_string(FGRole r) {
  switch (r) {
    case FGRole::Electrophile: return "electrophile";
    case FGRole::Nucleophile: return "nucleophile";
    case FGRole::Neutral: return "neutral";
  }
  return "neutral";
}

const FGEntry* FGLibrary::find(const std::string& name) const {
  for (const FGEntry& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

FGLibrary FGLibrary::load(std::istream& in) {
  FGLibrary lib;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, '\t')) fields.push_back(field);
    if (fields.size() != 4)
      throw LibraryError(LibraryError::Kind::ParseError, lineno,
                         "expected 4 tab-separated fields on line " + std::to_string(lineno));
    FGEntry e;
    e.name = fields[0];
    e.smarts = fields[1];
    if (lib.find(e.name))
      throw LibraryError(LibraryError::Kind::DuplicateName, lineno,
                         "duplicate FG name '" + e.name + "' on line " + std::to_string(lineno));
    try {
      e.pattern = mol::parse_smarts(e.smarts);
      e.role = role_from_string(fields[2]);
      e.activation = std::stoi(fields[3]);
    } catch (const std::exception& ex) {
      throw LibraryError(LibraryError::Kind::ParseError, lineno,
                         "line " + std::to_string(lineno) + ": " + ex.what());
    }
    if (e.activation < 0 || e.activation > 3)
      throw LibraryError(LibraryError::Kind::ParseError, lineno,
                         "activation out of range on line " + std::to_string(lineno));
    lib.entries_.push_back(std::move(e));
  }
  return lib;
}

FGLibrary FGLibrary::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw LibraryError(LibraryError::Kind::Unreadable, 0, "cannot open FG library: " + path);
  return load(in);
}

std::vector<FGHit> tag_reactants(const std::vector<mol::Molecule>& reactants,
                                 const FGLibrary& lib) {
  std::vector<FGHit> hits;
  for (size_t mi = 0; mi < reactants.size(); ++mi) {
    for (const FGEntry& e : lib.entries()) {
      for (const mol::AtomMapping& m : mol::match_pattern(e.pattern, reactants[mi])) {
        FGHit h;
        h.fg_name = e.name;
        h.molecule_index = static_cast<int>(mi);
        for (auto [n, a] : m.pairs) h.atom_indices.push_back(a);
        std::sort(h.atom_indices.begin(), h.atom_indices.end());
        hits.push_back(std::move(h));
      }
    }
  }
  return hits;
}

std::vector<MainFG> MainFGList::main() const {
  size_t n = std::min<size_t>(ranked.size(), static_cast<size_t>(top_n));
  return {ranked.begin(), ranked.begin() + n};
}

std::vector<std::string> MainFGList::main_names() const {
  std::vector<std::string> names;
  for (const MainFG& m : main()) names.push_back(m.name);
  return names;
}

MainFGList rank_salience(const std::vector<FGHit>& hits, const FGLibrary& lib,
                         const SalienceWeights& w) {
  std::map<std::string, std::vector<FGHit>> by_fg;
  for (const FGHit& h : hits) by_fg[h.fg_name].push_back(h);
  double total = static_cast<double>(hits.size());

  MainFGList out;
  out.top_n = w.top_n;
  for (auto& [name, fg_hits] : by_fg) {
    const FGEntry* e = lib.find(name);
    if (!e) continue;
    double role_w = w.w_neutral;
    if (e->role == FGRole::Electrophile) role_w = w.w_electrophile;
    if (e->role == FGRole::Nucleophile) role_w = w.w_nucleophile;
    MainFG m;
    m.name = name;
    m.salience = w.w_act * e->activation + role_w +
                 w.w_freq * (static_cast<double>(fg_hits.size()) / total);
    m.hits = fg_hits;
    out.ranked.push_back(std::move(m));
  }
  std::sort(out.ranked.begin(), out.ranked.end(), [](const MainFG& a, const MainFG& b) {
    if (a.salience != b.salience) return a.salience > b.salience;
    return a.name < b.name;
  });
  return out;
}

}  // namespace chemrec::tagger
