#include "chemrec/molgraph.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <set>
#include <functional>
#include <sstream>

namespace chemrec::mol {

namespace {

const std::set<std::string> kKnownElements = {
    "H",  "He", "Li", "Be", "B",  "C",  "N",  "O",  "F",  "Ne", "Na", "Mg",
    "Al", "Si", "P",  "S",  "Cl", "Ar", "K",  "Ca", "Ti", "Cr", "Mn", "Fe",
    "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As", "Se", "Br", "Rb", "Sr", "Zr",
    "Mo", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn", "Sb", "Te", "I",  "Cs",
    "Ba", "W",  "Re", "Os", "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi"};

// organic subset: atoms writable without brackets
const std::set<std::string> kOrganicSubset = {"B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"};
const std::set<char> kAromaticSubset = {'b', 'c', 'n', 'o', 'p', 's'};

// fixed valence table; smallest valence >= bond-order sum wins
std::vector<int> valences_for(const std::string& element) {
  if (element == "B") return {3};
  if (element == "C") return {4};
  if (element == "N") return {3};
  if (element == "O") return {2};
  if (element == "P") return {3, 5};
  if (element == "S") return {2, 4, 6};
  if (element == "F" || element == "Cl" || element == "Br" || element == "I") return {1};
  return {};
}

double order_value(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return 1.0;
    case BondOrder::Double: return 2.0;
    case BondOrder::Triple: return 3.0;
    case BondOrder::Aromatic: return 1.5;
  }
  return 1.0;
}

char order_char(BondOrder o) {
  switch (o) {
    case BondOrder::Single: return '-';
    case BondOrder::Double: return '=';
    case BondOrder::Triple: return '#';
    case BondOrder::Aromatic: return ':';
  }
  return '-';
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

Molecule::Molecule(std::vector<Atom> atoms, std::vector<Bond> bonds, bool stereo_ignored)
    : atoms_(std::move(atoms)), bonds_(std::move(bonds)), stereo_ignored_(stereo_ignored) {
  adjacency_.resize(atoms_.size());
  std::set<std::pair<int, int>> seen;
  for (const Bond& b : bonds_) {
    if (b.a < 0 || b.b < 0 || b.a >= static_cast<int>(atoms_.size()) ||
        b.b >= static_cast<int>(atoms_.size()))
      throw std::invalid_argument("bond endpoint out of range");
    if (b.a == b.b) throw std::invalid_argument("self-loop bond");
    auto key = std::minmax(b.a, b.b);
    if (!seen.insert(key).second) throw std::invalid_argument("duplicate bond");
    adjacency_[b.a].push_back(b.b);
    adjacency_[b.b].push_back(b.a);
  }
}

const Bond* Molecule::bond_between(int i, int j) const {
  for (const Bond& b : bonds_)
    if ((b.a == i && b.b == j) || (b.a == j && b.b == i)) return &b;
  return nullptr;
}

int Molecule::net_charge() const {
  int q = 0;
  for (const Atom& a : atoms_) q += a.charge;
  return q;
}

// ---- SMILES parser -------------------------------------------------------

namespace {

struct SmilesParser {
  const std::string& text;
  size_t pos = 0;
  std::vector<Atom> atoms;
  std::vector<Bond> bonds;
  std::vector<size_t> atom_pos;  // source position per atom, for valence errors
  std::vector<int> branch_stack;
  int prev = -1;
  std::optional<BondOrder> pending;
  std::map<int, std::pair<int, std::optional<BondOrder>>> ring_open;  // closure digit -> (atom, order)
  bool stereo_ignored = false;

  explicit SmilesParser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(ParseErrc code, size_t at, const std::string& msg) {
    std::ostringstream os;
    os << msg << " at position " << at;
    throw ParseError(code, at, os.str());
  }

  void add_bond(int a, int b, std::optional<BondOrder> order) {
    BondOrder o;
    if (order) {
      o = *order;
    } else if (atoms[a].aromatic && atoms[b].aromatic) {
      o = BondOrder::Aromatic;
    } else {
      o = BondOrder::Single;
    }
    bonds.push_back({a, b, o});
  }

  void push_atom(Atom a, size_t at) {
    atoms.push_back(std::move(a));
    atom_pos.push_back(at);
    int idx = static_cast<int>(atoms.size()) - 1;
    if (prev >= 0) add_bond(prev, idx, pending);
    pending.reset();
    prev = idx;
  }

  void ring_closure(int digit, size_t at) {
    auto it = ring_open.find(digit);
    if (prev < 0) fail(ParseErrc::UnmatchedRingClosure, at, "ring closure before any atom");
    if (it == ring_open.end()) {
      ring_open[digit] = {prev, pending};
      pending.reset();
      return;
    }
    auto [other, open_order] = it->second;
    ring_open.erase(it);
    if (other == prev) fail(ParseErrc::UnmatchedRingClosure, at, "ring closure to same atom");
    std::optional<BondOrder> order = pending ? pending : open_order;
    if (pending && open_order && *pending != *open_order)
      fail(ParseErrc::UnknownToken, at, "conflicting ring bond orders");
    add_bond(other, prev, order);
    pending.reset();
  }

  Atom parse_bracket(size_t start) {
    Atom a;
    a.bracket = true;
    ++pos;  // '['
    while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      ++pos;  // isotope, ignored
      stereo_ignored = true;
    }
    if (pos >= text.size()) fail(ParseErrc::UnknownToken, start, "unterminated bracket atom");
    // element symbol, two-letter first
    if (pos + 1 < text.size()) {
      std::string two = text.substr(pos, 2);
      if (std::isupper(static_cast<unsigned char>(two[0])) &&
          std::islower(static_cast<unsigned char>(two[1])) && kKnownElements.count(two)) {
        a.element = two;
        pos += 2;
      }
    }
    if (a.element.empty()) {
      char c = text[pos];
      if (std::isupper(static_cast<unsigned char>(c))) {
        std::string one(1, c);
        if (!kKnownElements.count(one)) fail(ParseErrc::UnknownToken, pos, "unknown element");
        a.element = one;
        ++pos;
      } else if (kAromaticSubset.count(c)) {
        a.element = std::string(1, static_cast<char>(std::toupper(c)));
        a.aromatic = true;
        ++pos;
      } else {
        fail(ParseErrc::UnknownToken, pos, "expected element symbol");
      }
    }
    while (pos < text.size() && text[pos] != ']') {
      char c = text[pos];
      if (c == '@') {
        stereo_ignored = true;
        ++pos;
      } else if (c == 'H') {
        ++pos;
        int n = 1;
        if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
          n = text[pos] - '0';
          ++pos;
        }
        a.explicit_h = n;
      } else if (c == '+' || c == '-') {
        int sign = (c == '+') ? 1 : -1;
        int n = 1;
        ++pos;
        if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
          n = text[pos] - '0';
          ++pos;
        } else {
          while (pos < text.size() && text[pos] == c) {
            ++n;
            ++pos;
          }
        }
        a.charge = sign * n;
      } else {
        fail(ParseErrc::UnknownToken, pos, "unexpected character in bracket atom");
      }
    }
    if (pos >= text.size()) fail(ParseErrc::UnknownToken, start, "unterminated bracket atom");
    ++pos;  // ']'
    return a;
  }

  Molecule run() {
    if (text.empty()) throw ParseError(ParseErrc::EmptyInput, 0, "empty SMILES");
    while (pos < text.size()) {
      char c = text[pos];
      size_t at = pos;
      if (c == '[') {
        push_atom(parse_bracket(at), at);
      } else if (c == '(') {
        if (prev < 0) fail(ParseErrc::UnclosedBranch, at, "branch before any atom");
        branch_stack.push_back(prev);
        ++pos;
      } else if (c == ')') {
        if (branch_stack.empty()) fail(ParseErrc::UnclosedBranch, at, "unmatched branch close");
        if (pending) fail(ParseErrc::UnknownToken, at, "dangling bond before branch close");
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++pos;
      } else if (c == '-') {
        pending = BondOrder::Single;
        ++pos;
      } else if (c == '=') {
        pending = BondOrder::Double;
        ++pos;
      } else if (c == '#') {
        pending = BondOrder::Triple;
        ++pos;
      } else if (c == ':') {
        pending = BondOrder::Aromatic;
        ++pos;
      } else if (c == '/' || c == '\\') {
        pending = BondOrder::Single;
        stereo_ignored = true;
        ++pos;
      } else if (c == '.') {
        if (pending) fail(ParseErrc::UnknownToken, at, "bond across dot separator");
        prev = -1;
        ++pos;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        ring_closure(c - '0', at);
        ++pos;
      } else if (c == '%') {
        if (pos + 2 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos + 1])) ||
            !std::isdigit(static_cast<unsigned char>(text[pos + 2])))
          fail(ParseErrc::UnknownToken, at, "malformed %nn ring closure");
        int n = (text[pos + 1] - '0') * 10 + (text[pos + 2] - '0');
        pos += 3;
        ring_closure(n, at);
      } else if (std::isupper(static_cast<unsigned char>(c))) {
        std::string sym(1, c);
        if (pos + 1 < text.size() && std::islower(static_cast<unsigned char>(text[pos + 1]))) {
          std::string two = text.substr(pos, 2);
          if (kOrganicSubset.count(two)) sym = two;
        }
        if (!kOrganicSubset.count(sym))
          fail(ParseErrc::UnknownToken, at, "element needs brackets");
        Atom a;
        a.element = sym;
        pos += sym.size();
        push_atom(std::move(a), at);
      } else if (kAromaticSubset.count(c)) {
        Atom a;
        a.element = std::string(1, static_cast<char>(std::toupper(c)));
        a.aromatic = true;
        ++pos;
        push_atom(std::move(a), at);
      } else {
        fail(ParseErrc::UnknownToken, at, "unknown token");
      }
    }
    if (!branch_stack.empty())
      fail(ParseErrc::UnclosedBranch, text.size(), "unclosed branch");
    if (!ring_open.empty())
      fail(ParseErrc::UnmatchedRingClosure, text.size(), "unmatched ring closure");
    if (pending) fail(ParseErrc::UnknownToken, text.size(), "dangling bond");
    if (atoms.empty()) fail(ParseErrc::EmptyInput, 0, "no atoms");

    Molecule m(atoms, bonds, stereo_ignored);
    // implicit hydrogens for organic-subset atoms; bracket atoms carry explicit H only
    std::vector<Atom> final_atoms = m.atoms();
    for (size_t i = 0; i < final_atoms.size(); ++i) {
      Atom& a = final_atoms[i];
      if (a.bracket) continue;
      double sum = 0;
      for (const Bond& b : m.bonds())
        if (b.a == static_cast<int>(i) || b.b == static_cast<int>(i)) sum += order_value(b.order);
      int isum = static_cast<int>(sum);  // floor; fused aromatics round down
      int chosen = -1;
      for (int v : valences_for(a.element))
        if (v >= isum) {
          chosen = v;
          break;
        }
      if (chosen < 0)
        fail(ParseErrc::ValenceUnderflow, atom_pos[i], "bond order sum exceeds max valence");
      a.implicit_h = chosen - isum;
    }
    return Molecule(std::move(final_atoms), m.bonds(), stereo_ignored);
  }
};

}  // namespace

Molecule parse_smiles(const std::string& text) { return SmilesParser(text).run(); }

std::map<std::string, int> element_counts(const Molecule& m) {
  std::map<std::string, int> counts;
  for (size_t i = 0; i < m.atom_count(); ++i) {
    counts[m.atoms()[i].element] += 1;
    int h = m.total_h(static_cast<int>(i));
    if (h > 0) counts["H"] += h;
  }
  return counts;
}

std::map<std::string, int> element_counts(const std::vector<Molecule>& mols) {
  std::map<std::string, int> counts;
  for (const Molecule& m : mols)
    for (const auto& [el, n] : element_counts(m)) counts[el] += n;
  return counts;
}

// ---- SMARTS parser -------------------------------------------------------

namespace {

struct SmartsParser {
  const std::string& text;
  size_t pos = 0;
  Pattern pat;
  std::vector<int> branch_stack;
  int prev = -1;
  std::optional<BondPred> pending;
  std::map<int, std::pair<int, std::optional<BondPred>>> ring_open;

  explicit SmartsParser(const std::string& t) : text(t) {}

  [[noreturn]] void fail(ParseErrc code, size_t at, const std::string& msg) {
    std::ostringstream os;
    os << msg << " at position " << at;
    throw ParseError(code, at, os.str());
  }

  void add_edge(int a, int b, std::optional<BondPred> p) {
    pat.edges.push_back({a, b, p.value_or(BondPred{})});
  }

  void push_node(AtomPred p) {
    pat.nodes.push_back(std::move(p));
    int idx = static_cast<int>(pat.nodes.size()) - 1;
    if (prev >= 0) add_edge(prev, idx, pending);
    pending.reset();
    prev = idx;
  }

  void ring_closure(int digit, size_t at) {
    if (prev < 0) fail(ParseErrc::UnmatchedRingClosure, at, "ring closure before any atom");
    auto it = ring_open.find(digit);
    if (it == ring_open.end()) {
      ring_open[digit] = {prev, pending};
      pending.reset();
      return;
    }
    auto [other, open_pred] = it->second;
    ring_open.erase(it);
    add_edge(other, prev, pending ? pending : open_pred);
    pending.reset();
  }

  // bracket expression grammar: low(';') > or(',') > and('&' or juxtaposition) > '!' > primitive
  AtomPred parse_expr_low() {
    AtomPred node = parse_expr_or();
    while (pos < text.size() && text[pos] == ';') {
      ++pos;
      AtomPred rhs = parse_expr_or();
      if (node.kind != AtomPredKind::And || !node.element.empty()) {
        AtomPred conj;
        conj.kind = AtomPredKind::And;
        conj.children.push_back(std::move(node));
        node = std::move(conj);
      }
      node.children.push_back(std::move(rhs));
    }
    return node;
  }

  AtomPred parse_expr_or() {
    AtomPred node = parse_expr_and();
    if (pos < text.size() && text[pos] == ',') {
      AtomPred alt;
      alt.kind = AtomPredKind::Or;
      alt.children.push_back(std::move(node));
      while (pos < text.size() && text[pos] == ',') {
        ++pos;
        alt.children.push_back(parse_expr_and());
      }
      return alt;
    }
    return node;
  }

  AtomPred parse_expr_and() {
    AtomPred node = parse_unary();
    std::vector<AtomPred> terms;
    while (pos < text.size() && text[pos] != ']' && text[pos] != ';' && text[pos] != ',') {
      if (text[pos] == '&') ++pos;
      if (terms.empty()) terms.push_back(std::move(node));
      terms.push_back(parse_unary());
    }
    if (terms.empty()) return node;
    AtomPred conj;
    conj.kind = AtomPredKind::And;
    conj.children = std::move(terms);
    return conj;
  }

  AtomPred parse_unary() {
    if (pos < text.size() && text[pos] == '!') {
      ++pos;
      AtomPred neg;
      neg.kind = AtomPredKind::Not;
      neg.children.push_back(parse_unary());
      return neg;
    }
    return parse_primitive();
  }

  int parse_count(int fallback) {
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      int n = text[pos] - '0';
      ++pos;
      return n;
    }
    return fallback;
  }

  AtomPred parse_primitive() {
    if (pos >= text.size()) fail(ParseErrc::UnknownToken, pos, "unterminated atom expression");
    char c = text[pos];
    AtomPred p;
    if (c == '*') {
      ++pos;
      p.kind = AtomPredKind::Wildcard;
      return p;
    }
    if (c == 'a') {
      ++pos;
      p.kind = AtomPredKind::Aromatic;
      return p;
    }
    if (c == 'A') {
      ++pos;
      p.kind = AtomPredKind::Aliphatic;
      return p;
    }
    if (c == 'D') {
      ++pos;
      p.kind = AtomPredKind::Degree;
      p.value = parse_count(1);
      return p;
    }
    if (c == 'X') {
      ++pos;
      p.kind = AtomPredKind::Connectivity;
      p.value = parse_count(1);
      return p;
    }
    if (c == 'H') {
      ++pos;
      p.kind = AtomPredKind::TotalH;
      p.value = parse_count(1);
      return p;
    }
    if (c == '+' || c == '-') {
      int sign = (c == '+') ? 1 : -1;
      ++pos;
      int n = 1;
      if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
        n = text[pos] - '0';
        ++pos;
      } else {
        while (pos < text.size() && text[pos] == c) {
          ++n;
          ++pos;
        }
      }
      p.kind = AtomPredKind::Charge;
      p.value = sign * n;
      return p;
    }
    if (std::isupper(static_cast<unsigned char>(c))) {
      std::string sym(1, c);
      if (pos + 1 < text.size() && std::islower(static_cast<unsigned char>(text[pos + 1]))) {
        std::string two = text.substr(pos, 2);
        if (kKnownElements.count(two)) sym = two;
      }
      if (!kKnownElements.count(sym))
        fail(ParseErrc::UnsupportedPrimitive, pos, "unsupported atom primitive");
      pos += sym.size();
      p.kind = AtomPredKind::Element;
      p.element = sym;
      p.constrain_aromatic = true;
      p.aromatic = false;
      return p;
    }
    if (kAromaticSubset.count(c)) {
      ++pos;
      p.kind = AtomPredKind::Element;
      p.element = std::string(1, static_cast<char>(std::toupper(c)));
      p.constrain_aromatic = true;
      p.aromatic = true;
      return p;
    }
    fail(ParseErrc::UnsupportedPrimitive, pos, std::string("unsupported primitive '") + c + "'");
  }

  AtomPred parse_bracket_atom(size_t start) {
    ++pos;  // '['
    AtomPred p = parse_expr_low();
    if (pos >= text.size() || text[pos] != ']')
      fail(ParseErrc::UnknownToken, start, "unterminated bracket expression");
    ++pos;
    return p;
  }

  Pattern run() {
    if (text.empty()) throw ParseError(ParseErrc::EmptyInput, 0, "empty SMARTS");
    while (pos < text.size()) {
      char c = text[pos];
      size_t at = pos;
      if (c == '[') {
        push_node(parse_bracket_atom(at));
      } else if (c == '(') {
        if (prev < 0) fail(ParseErrc::UnclosedBranch, at, "branch before any atom");
        branch_stack.push_back(prev);
        ++pos;
      } else if (c == ')') {
        if (branch_stack.empty()) fail(ParseErrc::UnclosedBranch, at, "unmatched branch close");
        prev = branch_stack.back();
        branch_stack.pop_back();
        ++pos;
      } else if (c == '-') {
        pending = BondPred{BondPredKind::Order, BondOrder::Single};
        ++pos;
      } else if (c == '=') {
        pending = BondPred{BondPredKind::Order, BondOrder::Double};
        ++pos;
      } else if (c == '#') {
        pending = BondPred{BondPredKind::Order, BondOrder::Triple};
        ++pos;
      } else if (c == ':') {
        pending = BondPred{BondPredKind::Order, BondOrder::Aromatic};
        ++pos;
      } else if (c == '~') {
        pending = BondPred{BondPredKind::Any, BondOrder::Single};
        ++pos;
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        ring_closure(c - '0', at);
        ++pos;
      } else if (c == '%') {
        if (pos + 2 >= text.size() || !std::isdigit(static_cast<unsigned char>(text[pos + 1])) ||
            !std::isdigit(static_cast<unsigned char>(text[pos + 2])))
          fail(ParseErrc::UnknownToken, at, "malformed %nn ring closure");
        int n = (text[pos + 1] - '0') * 10 + (text[pos + 2] - '0');
        pos += 3;
        ring_closure(n, at);
      } else if (std::isupper(static_cast<unsigned char>(c)) || kAromaticSubset.count(c) ||
                 c == '*') {
        push_node(parse_primitive());
      } else {
        fail(ParseErrc::UnsupportedPrimitive, at, "unsupported token");
      }
    }
    if (!branch_stack.empty()) fail(ParseErrc::UnclosedBranch, text.size(), "unclosed branch");
    if (!ring_open.empty())
      fail(ParseErrc::UnmatchedRingClosure, text.size(), "unmatched ring closure");
    pat.build_adjacency();
    return pat;
  }
};

}  // namespace

void Pattern::build_adjacency() {
  adjacency.assign(nodes.size(), {});
  for (size_t e = 0; e < edges.size(); ++e) {
    adjacency[edges[e].a].push_back({edges[e].b, static_cast<int>(e)});
    adjacency[edges[e].b].push_back({edges[e].a, static_cast<int>(e)});
  }
}

Pattern parse_smarts(const std::string& text) { return SmartsParser(text).run(); }

bool atom_matches(const AtomPred& p, const Molecule& m, int atom) {
  const Atom& a = m.atoms()[atom];
  switch (p.kind) {
    case AtomPredKind::Wildcard: return true;
    case AtomPredKind::Element:
      if (a.element != p.element) return false;
      return !p.constrain_aromatic || a.aromatic == p.aromatic;
    case AtomPredKind::Aromatic: return a.aromatic;
    case AtomPredKind::Aliphatic: return !a.aromatic;
    case AtomPredKind::Charge: return a.charge == p.value;
    case AtomPredKind::Degree: return m.degree(atom) == p.value;
    case AtomPredKind::Connectivity: return m.degree(atom) + m.total_h(atom) == p.value;
    case AtomPredKind::TotalH: return m.total_h(atom) == p.value;
    case AtomPredKind::Not: return !atom_matches(p.children[0], m, atom);
    case AtomPredKind::And:
      for (const AtomPred& c : p.children)
        if (!atom_matches(c, m, atom)) return false;
      return true;
    case AtomPredKind::Or:
      for (const AtomPred& c : p.children)
        if (atom_matches(c, m, atom)) return true;
      return false;
  }
  return false;
}

bool bond_matches(const BondPred& p, BondOrder order) {
  switch (p.kind) {
    case BondPredKind::Any: return true;
    case BondPredKind::Order: return order == p.order;
    case BondPredKind::SingleOrAromatic:
      return order == BondOrder::Single || order == BondOrder::Aromatic;
  }
  return false;
}

// ---- substructure matching ----------------------------------------------

namespace {

struct Matcher {
  const Pattern& p;
  const Molecule& m;
  std::vector<int> assign;     // pattern node -> molecule atom
  std::vector<bool> used;      // molecule atom taken
  std::vector<int> node_order; // visit order: each node after a neighbor when possible
  std::vector<AtomMapping> out;

  Matcher(const Pattern& pat, const Molecule& mol) : p(pat), m(mol) {
    assign.assign(p.nodes.size(), -1);
    used.assign(m.atom_count(), false);
    std::vector<bool> placed(p.nodes.size(), false);
    for (size_t start = 0; start < p.nodes.size(); ++start) {
      if (placed[start]) continue;
      std::vector<int> queue = {static_cast<int>(start)};
      placed[start] = true;
      while (!queue.empty()) {
        int n = queue.front();
        queue.erase(queue.begin());
        node_order.push_back(n);
        for (auto [nb, e] : p.adjacency[n])
          if (!placed[nb]) {
            placed[nb] = true;
            queue.push_back(nb);
          }
      }
    }
  }

  bool edges_ok(int node, int atom) {
    for (auto [nb, e] : p.adjacency[node]) {
      if (assign[nb] < 0) continue;
      const Bond* b = m.bond_between(atom, assign[nb]);
      if (!b || !bond_matches(p.edges[e].pred, b->order)) return false;
    }
    return true;
  }

  void search(size_t depth) {
    if (depth == node_order.size()) {
      AtomMapping mp;
      for (size_t n = 0; n < p.nodes.size(); ++n)
        mp.pairs.push_back({static_cast<int>(n), assign[n]});
      out.push_back(std::move(mp));
      return;
    }
    int node = node_order[depth];
    for (size_t atom = 0; atom < m.atom_count(); ++atom) {
      if (used[atom]) continue;
      if (!atom_matches(p.nodes[node], m, static_cast<int>(atom))) continue;
      if (!edges_ok(node, static_cast<int>(atom))) continue;
      assign[node] = static_cast<int>(atom);
      used[atom] = true;
      search(depth + 1);
      used[atom] = false;
      assign[node] = -1;
    }
  }
};

}  // namespace

std::vector<AtomMapping> match_pattern(const Pattern& p, const Molecule& m) {
  if (p.nodes.empty() || p.nodes.size() > m.atom_count()) return {};
  Matcher matcher(p, m);
  matcher.search(0);
  // dedup by matched atom set, keeping the lexicographically smallest mapping
  std::map<std::vector<int>, std::vector<int>> by_set;  // sorted set -> mapping (per node)
  for (const AtomMapping& mp : matcher.out) {
    std::vector<int> mapping;
    for (auto [n, a] : mp.pairs) mapping.push_back(a);
    std::vector<int> key = mapping;
    std::sort(key.begin(), key.end());
    auto it = by_set.find(key);
    if (it == by_set.end() || mapping < it->second) by_set[key] = mapping;
  }
  std::vector<std::vector<int>> mappings;
  for (auto& [k, v] : by_set) mappings.push_back(v);
  std::sort(mappings.begin(), mappings.end());
  std::vector<AtomMapping> result;
  for (const auto& mapping : mappings) {
    AtomMapping mp;
    for (size_t n = 0; n < mapping.size(); ++n)
      mp.pairs.push_back({static_cast<int>(n), mapping[n]});
    result.push_back(std::move(mp));
  }
  return result;
}

// ---- maximum common connected substructure -------------------------------

namespace {

struct McsSearch {
  const Molecule& a;
  const Molecule& b;
  int cap;
  long budget;
  long expansions = 0;
  bool exhausted = false;
  std::vector<int> map_ab;  // a atom -> b atom or -1
  std::vector<int> map_ba;
  std::vector<std::pair<int, int>> current;
  std::vector<std::pair<int, int>> best;

  McsSearch(const Molecule& ma, const Molecule& mb, const McsOptions& opts)
      : a(ma), b(mb), cap(opts.cap), budget(opts.budget) {
    map_ab.assign(a.atom_count(), -1);
    map_ba.assign(b.atom_count(), -1);
  }

  bool compatible(int u, int v) const {
    return a.atoms()[u].element == b.atoms()[v].element &&
           a.atoms()[u].charge == b.atoms()[v].charge;
  }

  // extending (u,v) must keep bond structure consistent in both directions
  bool consistent(int u, int v) const {
    for (const auto& [mu, mv] : current) {
      const Bond* ba = a.bond_between(u, mu);
      const Bond* bb = b.bond_between(v, mv);
      if ((ba == nullptr) != (bb == nullptr)) return false;
      if (ba && ba->order != bb->order) return false;
    }
    return true;
  }

  bool connected_to_current(int u) const {
    for (const auto& [mu, mv] : current)
      if (a.bond_between(u, mu)) return true;
    return false;
  }

  void extend() {
    if (current.size() > best.size()) best = current;
    if (static_cast<int>(current.size()) >= cap) return;
    if (++expansions > budget) {
      exhausted = true;
      return;
    }
    for (size_t u = 0; u < a.atom_count(); ++u) {
      if (map_ab[u] >= 0 || !connected_to_current(static_cast<int>(u))) continue;
      for (size_t v = 0; v < b.atom_count(); ++v) {
        if (map_ba[v] >= 0) continue;
        if (!compatible(static_cast<int>(u), static_cast<int>(v))) continue;
        if (!consistent(static_cast<int>(u), static_cast<int>(v))) continue;
        map_ab[u] = static_cast<int>(v);
        map_ba[v] = static_cast<int>(u);
        current.push_back({static_cast<int>(u), static_cast<int>(v)});
        extend();
        current.pop_back();
        map_ab[u] = -1;
        map_ba[v] = -1;
        if (exhausted) return;
      }
    }
  }

  AtomMapping run() {
    for (size_t u = 0; u < a.atom_count() && !exhausted; ++u) {
      for (size_t v = 0; v < b.atom_count() && !exhausted; ++v) {
        if (!compatible(static_cast<int>(u), static_cast<int>(v))) continue;
        map_ab[u] = static_cast<int>(v);
        map_ba[v] = static_cast<int>(u);
        current.push_back({static_cast<int>(u), static_cast<int>(v)});
        extend();
        current.pop_back();
        map_ab[u] = -1;
        map_ba[v] = -1;
      }
    }
    AtomMapping result;
    result.pairs = best;
    result.approximate = exhausted;
    std::sort(result.pairs.begin(), result.pairs.end());
    return result;
  }
};

}  // namespace

AtomMapping mcs(const Molecule& a, const Molecule& b, const McsOptions& opts) {
  if (a.empty() || b.empty()) return {};
  return McsSearch(a, b, opts).run();
}

// ---- fingerprints --------------------------------------------------------

Fingerprint Fingerprint::of(const Molecule& m) {
  Fingerprint fp;
  auto atom_token = [&](int i) {
    const Atom& a = m.atoms()[i];
    return a.element + (a.aromatic ? "a" : "");
  };
  // bonded paths of 0..3 edges, direction-canonical
  for (size_t start = 0; start < m.atom_count(); ++start) {
    std::vector<int> path = {static_cast<int>(start)};
    std::vector<bool> seen(m.atom_count(), false);
    seen[start] = true;
    auto emit = [&]() {
      std::string fwd, rev;
      for (size_t i = 0; i < path.size(); ++i) {
        if (i) fwd += order_char(m.bond_between(path[i - 1], path[i])->order);
        fwd += atom_token(path[i]);
      }
      for (size_t i = path.size(); i-- > 0;) {
        if (i + 1 < path.size())
          rev += order_char(m.bond_between(path[i], path[i + 1])->order);
        rev += atom_token(path[i]);
      }
      fp.bits_.set(fnv1a(std::min(fwd, rev)) % kFingerprintBits);
    };
    std::function<void()> dfs = [&]() {
      emit();
      if (path.size() == 4) return;
      for (int nb : m.neighbors(path.back())) {
        if (seen[nb]) continue;
        seen[nb] = true;
        path.push_back(nb);
        dfs();
        path.pop_back();
        seen[nb] = false;
      }
    };
    dfs();
  }
  return fp;
}

Fingerprint Fingerprint::union_of(const std::vector<Molecule>& mols) {
  Fingerprint fp;
  for (const Molecule& m : mols) fp = fp | of(m);
  return fp;
}

Fingerprint Fingerprint::operator|(const Fingerprint& o) const {
  Fingerprint r;
  r.bits_ = bits_ | o.bits_;
  return r;
}

double tanimoto(const Fingerprint& a, const Fingerprint& b) {
  size_t inter = (a.bits_ & b.bits_).count();
  size_t uni = (a.bits_ | b.bits_).count();
  if (uni == 0) return 1.0;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::string structure_key(const Molecule& m) {
  std::vector<std::string> parts;
  for (size_t i = 0; i < m.atom_count(); ++i) {
    std::string orders;
    for (const Bond& b : m.bonds())
      if (b.a == static_cast<int>(i) || b.b == static_cast<int>(i))
        orders += order_char(b.order);
    std::sort(orders.begin(), orders.end());
    std::ostringstream os;
    os << m.atoms()[i].element << "|" << m.atoms()[i].charge << "|"
       << m.degree(static_cast<int>(i)) << "|" << orders;
    parts.push_back(os.str());
  }
  std::sort(parts.begin(), parts.end());
  std::string key;
  for (const std::string& s : parts) {
    key += s;
    key += ";";
  }
  return key;
}

}  // namespace chemrec::mol
