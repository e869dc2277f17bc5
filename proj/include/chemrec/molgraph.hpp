#pragma once

#include <bitset>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

// Molecular graph primitives: SMILES parsing, a SMARTS predicate subset,
// substructure matching, maximum common substructure and path fingerprints.
namespace chemrec::mol {

enum class BondOrder : uint8_t { Single = 1, Double = 2, Triple = 3, Aromatic = 4 };

struct Atom {
  std::string element;
  int charge = 0;
  bool aromatic = false;
  int explicit_h = 0;    // H count given in brackets
  int implicit_h = 0;    // derived from the valence table; 0 for bracket atoms
  bool bracket = false;
};

struct Bond {
  int a = 0;
  int b = 0;
  BondOrder order = BondOrder::Single;
};

enum class ParseErrc {
  EmptyInput,
  UnknownToken,
  UnclosedBranch,
  UnmatchedRingClosure,
  ValenceUnderflow,
  UnsupportedPrimitive,
};

class ParseError : public std::runtime_error {
 public:
  ParseError(ParseErrc code, size_t pos, const std::string& what)
      : std::runtime_error(what), code_(code), pos_(pos) {}
  ParseErrc code() const { return code_; }
  size_t position() const { return pos_; }

 private:
  ParseErrc code_;
  size_t pos_;
};

class Molecule {
 public:
  Molecule() = default;
  Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds, bool stereo_ignored = false);

  const std::vector<Atom>& atoms() const { return atoms_; }
  const std::vector<Bond>& bonds() const { return bonds_; }
  size_t atom_count() const { return atoms_.size(); }
  bool empty() const { return atoms_.empty(); }
  // true when stereo marks or isotopes were present in the source and dropped
  bool stereo_ignored() const { return stereo_ignored_; }

  int total_h(int i) const { return atoms_[i].explicit_h + atoms_[i].implicit_h; }
  int degree(int i) const { return static_cast<int>(adjacency_[i].size()); }
  const std::vector<int>& neighbors(int i) const { return adjacency_[i]; }
  // bond between i and j, or nullptr
  const Bond* bond_between(int i, int j) const;
  int net_charge() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<Bond> bonds_;
  std::vector<std::vector<int>> adjacency_;
  bool stereo_ignored_ = false;
};

Molecule parse_smiles(const std::string& text);

// Per-element totals, implicit and explicit hydrogens folded into "H".
std::map<std::string, int> element_counts(const Molecule& m);
std::map<std::string, int> element_counts(const std::vector<Molecule>& mols);

// ---- SMARTS subset -------------------------------------------------------

enum class AtomPredKind {
  Element,       // element symbol, with an aromatic constraint when from case
  Aromatic,      // a
  Aliphatic,     // A
  Charge,        // +n / -n
  Degree,        // Dn (explicit connections)
  Connectivity,  // Xn (explicit connections + total H)
  TotalH,        // Hn
  Wildcard,      // *
  Not,           // !child
  And,           // all children
  Or,            // any child
};

struct AtomPred {
  AtomPredKind kind = AtomPredKind::Wildcard;
  std::string element;
  bool constrain_aromatic = false;  // element predicate carries case information
  bool aromatic = false;
  int value = 0;  // charge / degree / connectivity / H count
  std::vector<AtomPred> children;
};

enum class BondPredKind { Any, Order, SingleOrAromatic };

struct BondPred {
  BondPredKind kind = BondPredKind::SingleOrAromatic;
  BondOrder order = BondOrder::Single;
};

struct PatternEdge {
  int a = 0;
  int b = 0;
  BondPred pred;
};

struct Pattern {
  std::vector<AtomPred> nodes;
  std::vector<PatternEdge> edges;
  std::vector<std::vector<std::pair<int, int>>> adjacency;  // (neighbor, edge idx)

  void build_adjacency();
};

Pattern parse_smarts(const std::string& text);

bool atom_matches(const AtomPred& p, const Molecule& m, int atom);
bool bond_matches(const BondPred& p, BondOrder order);

// ---- matching ------------------------------------------------------------

struct AtomMapping {
  // (index in A / pattern, index in B / molecule)
  std::vector<std::pair<int, int>> pairs;
  bool approximate = false;  // MCS only: search budget was exhausted

  size_t size() const { return pairs.size(); }
};

// All embeddings of p into m, deduplicated by matched atom set and ordered
// lexicographically by the matched molecule indices.
std::vector<AtomMapping> match_pattern(const Pattern& p, const Molecule& m);

struct McsOptions {
  int cap = 24;           // max atoms in the common subgraph
  long budget = 1000000;  // node-expansion limit before falling back to best-found
};

// Maximum common connected subgraph by exact backtracking within budget.
AtomMapping mcs(const Molecule& a, const Molecule& b, const McsOptions& opts = {});

// ---- fingerprints --------------------------------------------------------

inline constexpr size_t kFingerprintBits = 2048;

class Fingerprint {
 public:
  Fingerprint() = default;
  static Fingerprint of(const Molecule& m);
  static Fingerprint union_of(const std::vector<Molecule>& mols);

  size_t count() const { return bits_.count(); }
  bool none() const { return bits_.none(); }
  Fingerprint operator|(const Fingerprint& o) const;
  bool operator==(const Fingerprint& o) const = default;

  friend double tanimoto(const Fingerprint& a, const Fingerprint& b);

 private:
  std::bitset<kFingerprintBits> bits_;
};

// |a&b| / |a|b|; 1 when both empty.
double tanimoto(const Fingerprint& a, const Fingerprint& b);

// Cheap structural identity for dedup: sorted multiset of
// (element, charge, degree, bond-order multiset) per atom. Not a full
// canonization; collisions are tolerated at corpus scale.
std::string structure_key(const Molecule& m);

}  // namespace chemrec::mol
