#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "chemrec/molgraph.hpp"

// Functional-group tagging over reactant sets and salience ranking into the
// Main FG set.
namespace chemrec::tagger {

enum class FGRole { Electrophile, Nucleophile, Neutral };

FGRole role_from_string(const std::string& s);
std::string to_string(FGRole r);

struct FGEntry {
  std::string name;
  std::string smarts;
  mol::Pattern pattern;
  FGRole role = FGRole::Neutral;
  int activation = 0;  // 0..3
};

class LibraryError : public std::runtime_error {
 public:
  enum class Kind { ParseError, DuplicateName, Unreadable };
  LibraryError(Kind kind, int line, const std::string& what)
      : std::runtime_error(what), kind_(kind), line_(line) {}
  Kind kind() const { return kind_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  int line_;
};

class FGLibrary {
 public:
  const std::vector<FGEntry>& entries() const { return entries_; }
  const FGEntry* find(const std::string& name) const;

  // line format: name<TAB>SMARTS<TAB>role<TAB>activation, '#' comments
  static FGLibrary load(std::istream& in);
  static FGLibrary load_file(const std::string& path);

 private:
  std::vector<FGEntry> entries_;
};

struct FGHit {
  std::string fg_name;
  int molecule_index = 0;
  std::vector<int> atom_indices;  // sorted

  bool operator==(const FGHit&) const = default;
};

std::vector<FGHit> tag_reactants(const std::vector<mol::Molecule>& reactants,
                                 const FGLibrary& lib);

struct SalienceWeights {
  double w_act = 1.0;
  double w_electrophile = 0.5;
  double w_nucleophile = 0.4;
  double w_neutral = 0.1;
  double w_freq = 0.2;
  int top_n = 4;
};

struct MainFG {
  std::string name;
  double salience = 0.0;
  std::vector<FGHit> hits;
};

struct MainFGList {
  std::vector<MainFG> ranked;  // salience non-increasing, ties by name
  int top_n = 4;

  // the Main FG set: the first top_n ranked entries
  std::vector<MainFG> main() const;
  std::vector<std::string> main_names() const;
};

MainFGList rank_salience(const std::vector<FGHit>& hits, const FGLibrary& lib,
                         const SalienceWeights& w = {});

}  // namespace chemrec::tagger
