#include "chemrec/balance.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace chemrec::balance {

namespace {

struct Frac {
  long long num = 0;
  long long den = 1;

  static Frac of(long long n, long long d = 1) {
    if (d < 0) {
      n = -n;
      d = -d;
    }
    long long g = std::gcd(std::abs(n), d);
    if (g > 1) {
      n /= g;
      d /= g;
    }
    return Frac{n, d == 0 ? 1 : d};
  }
  Frac operator+(const Frac& o) const { return of(num * o.den + o.num * den, den * o.den); }
  Frac operator-(const Frac& o) const { return of(num * o.den - o.num * den, den * o.den); }
  Frac operator*(const Frac& o) const { return of(num * o.num, den * o.den); }
  Frac operator/(const Frac& o) const { return of(num * o.den, den * o.num); }
  bool zero() const { return num == 0; }
};

// one conservation row per element; columns = reactants, then products, then aux
struct System {
  std::vector<std::string> elements;
  std::vector<std::vector<long long>> rows;  // elements x species
  size_t n_react, n_prod, n_aux;
};

System build_system(const std::vector<mol::Molecule>& reactants,
                    const std::vector<mol::Molecule>& products,
                    const std::vector<mol::Molecule>& aux) {
  System sys;
  sys.n_react = reactants.size();
  sys.n_prod = products.size();
  sys.n_aux = aux.size();
  std::set<std::string> all_elements;
  std::vector<std::map<std::string, int>> counts;
  for (const auto& m : reactants) counts.push_back(mol::element_counts(m));
  for (const auto& m : products) counts.push_back(mol::element_counts(m));
  for (const auto& m : aux) counts.push_back(mol::element_counts(m));
  for (const auto& c : counts)
    for (const auto& [el, n] : c) all_elements.insert(el);
  sys.elements.assign(all_elements.begin(), all_elements.end());
  for (const std::string& el : sys.elements) {
    std::vector<long long> row;
    for (size_t s = 0; s < counts.size(); ++s) {
      long long n = counts[s].count(el) ? counts[s].at(el) : 0;
      row.push_back(s < sys.n_react ? n : -n);  // products/aux on the right
    }
    sys.rows.push_back(std::move(row));
  }
  return sys;
}

bool valid_signs(const System& sys, const std::vector<long long>& v) {
  for (size_t i = 0; i < sys.n_react + sys.n_prod; ++i)
    if (v[i] <= 0) return false;
  for (size_t i = sys.n_react + sys.n_prod; i < v.size(); ++i)
    if (v[i] < 0) return false;
  return true;
}

void gcd_reduce(std::vector<long long>& v) {
  long long g = 0;
  for (long long x : v) g = std::gcd(g, std::abs(x));
  if (g > 1)
    for (long long& x : v) x /= g;
}

// rational row reduction; returns an integer nullspace vector when the
// nullspace is one-dimensional
std::optional<std::vector<long long>> nullspace_1d(const System& sys) {
  size_t n = sys.rows.empty() ? 0 : sys.rows[0].size();
  std::vector<std::vector<Frac>> m;
  for (const auto& row : sys.rows) {
    std::vector<Frac> r;
    for (long long x : row) r.push_back(Frac::of(x));
    m.push_back(std::move(r));
  }
  std::vector<int> pivot_col;
  size_t rank = 0;
  for (size_t col = 0; col < n && rank < m.size(); ++col) {
    size_t sel = rank;
    while (sel < m.size() && m[sel][col].zero()) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[rank], m[sel]);
    Frac inv = Frac::of(m[rank][col].den, m[rank][col].num);
    for (size_t c = 0; c < n; ++c) m[rank][c] = m[rank][c] * inv;
    for (size_t r = 0; r < m.size(); ++r) {
      if (r == rank || m[r][col].zero()) continue;
      Frac f = m[r][col];
      for (size_t c = 0; c < n; ++c) m[r][c] = m[r][c] - f * m[rank][c];
    }
    pivot_col.push_back(static_cast<int>(col));
    ++rank;
  }
  if (n - rank != 1) return std::nullopt;
  // identify the free column
  std::set<int> pivots(pivot_col.begin(), pivot_col.end());
  int free_col = -1;
  for (size_t c = 0; c < n; ++c)
    if (!pivots.count(static_cast<int>(c))) free_col = static_cast<int>(c);
  // free var = 1, solve pivots
  std::vector<Frac> sol(n, Frac::of(0));
  sol[free_col] = Frac::of(1);
  for (size_t r = 0; r < rank; ++r)
    sol[pivot_col[r]] = Frac::of(0) - m[r][free_col];
  long long lcm = 1;
  for (const Frac& f : sol) lcm = std::lcm(lcm, f.den);
  std::vector<long long> v;
  for (const Frac& f : sol) v.push_back(f.num * (lcm / f.den));
  gcd_reduce(v);
  bool all_nonpos = std::all_of(v.begin(), v.end(), [](long long x) { return x <= 0; });
  if (all_nonpos)
    for (long long& x : v) x = -x;
  return v;
}

bool conserves(const System& sys, const std::vector<long long>& v) {
  for (const auto& row : sys.rows) {
    long long sum = 0;
    for (size_t i = 0; i < v.size(); ++i) sum += row[i] * v[i];
    if (sum != 0) return false;
  }
  return true;
}

constexpr long long kSearchBound = 12;

// exhaustive fallback: minimal coefficient-sum solution with entries <= 12
std::optional<std::vector<long long>> bounded_search(const System& sys) {
  size_t n = sys.rows[0].size();
  std::vector<long long> v(n), best;
  long long best_sum = 0;
  std::function<void(size_t, long long)> rec = [&](size_t i, long long sum) {
    if (!best.empty() && sum >= best_sum) return;
    if (i == n) {
      if (conserves(sys, v) && valid_signs(sys, v)) {
        std::vector<long long> cand = v;
        gcd_reduce(cand);
        long long cand_sum = std::accumulate(cand.begin(), cand.end(), 0LL);
        if (best.empty() || cand_sum < best_sum || (cand_sum == best_sum && cand < best)) {
          best = cand;
          best_sum = cand_sum;
        }
      }
      return;
    }
    long long lo = i < sys.n_react + sys.n_prod ? 1 : 0;
    for (long long c = lo; c <= kSearchBound; ++c) {
      v[i] = c;
      rec(i + 1, sum + c);
    }
  };
  rec(0, 0);
  if (best.empty()) return std::nullopt;
  return best;
}

}  // namespace

Stoichiometry balance_stoichiometry(const std::vector<mol::Molecule>& reactants,
                                    const std::vector<mol::Molecule>& products,
                                    const std::vector<mol::Molecule>& aux) {
  if (reactants.empty() || products.empty())
    throw BalanceError(BalanceError::Kind::EmptySide, "both reaction sides must be non-empty");
  System sys = build_system(reactants, products, aux);

  std::optional<std::vector<long long>> v = nullspace_1d(sys);
  if (!v || !valid_signs(sys, *v) || !conserves(sys, *v)) v = bounded_search(sys);
  if (!v)
    throw BalanceError(BalanceError::Kind::Unbalanceable,
                       "no positive integer solution within coefficient bound");

  Stoichiometry s;
  size_t i = 0;
  for (size_t r = 0; r < sys.n_react; ++r) s.reactants.push_back(static_cast<int>((*v)[i++]));
  for (size_t p = 0; p < sys.n_prod; ++p) s.products.push_back(static_cast<int>((*v)[i++]));
  for (size_t b = 0; b < sys.n_aux; ++b) s.aux.push_back(static_cast<int>((*v)[i++]));
  return s;
}

bool conserves_elements(const std::vector<mol::Molecule>& reactants,
                        const std::vector<mol::Molecule>& products,
                        const std::vector<mol::Molecule>& aux, const Stoichiometry& s) {
  System sys = build_system(reactants, products, aux);
  std::vector<long long> v;
  for (int c : s.reactants) v.push_back(c);
  for (int c : s.products) v.push_back(c);
  for (int c : s.aux) v.push_back(c);
  return conserves(sys, v);
}

// ---- atom mapping --------------------------------------------------------

namespace {

// induced subgraph over the unused atoms; keep[i] gives the original index
mol::Molecule induced_subgraph(const mol::Molecule& m, const std::vector<int>& keep) {
  std::map<int, int> remap;
  std::vector<mol::Atom> atoms;
  for (int orig : keep) {
    remap[orig] = static_cast<int>(atoms.size());
    atoms.push_back(m.atoms()[orig]);
  }
  std::vector<mol::Bond> bonds;
  for (const mol::Bond& b : m.bonds())
    if (remap.count(b.a) && remap.count(b.b)) bonds.push_back({remap[b.a], remap[b.b], b.order});
  return mol::Molecule(std::move(atoms), std::move(bonds));
}

}  // namespace

ReactionAtomMap derive_atom_map(const std::vector<mol::Molecule>& reactants,
                                const std::vector<mol::Molecule>& products,
                                const mol::McsOptions& opts) {
  ReactionAtomMap out;
  std::set<MolAtom> used_r, used_p;

  // repeatedly place the largest MCS over the still-unmapped atoms, so an
  // earlier placement cannot starve a later fragment of its counterpart
  while (true) {
    size_t best_size = 0;
    int best_ri = -1, best_pi = -1;
    std::vector<std::pair<MolAtom, MolAtom>> best_pairs;
    for (size_t ri = 0; ri < reactants.size(); ++ri) {
      std::vector<int> keep_r;
      for (size_t a = 0; a < reactants[ri].atom_count(); ++a)
        if (!used_r.count({static_cast<int>(ri), static_cast<int>(a)}))
          keep_r.push_back(static_cast<int>(a));
      if (keep_r.empty()) continue;
      mol::Molecule sub_r = induced_subgraph(reactants[ri], keep_r);
      for (size_t pi = 0; pi < products.size(); ++pi) {
        std::vector<int> keep_p;
        for (size_t a = 0; a < products[pi].atom_count(); ++a)
          if (!used_p.count({static_cast<int>(pi), static_cast<int>(a)}))
            keep_p.push_back(static_cast<int>(a));
        if (keep_p.empty()) continue;
        mol::AtomMapping mapping = mol::mcs(sub_r, induced_subgraph(products[pi], keep_p), opts);
        if (mapping.size() > best_size) {
          best_size = mapping.size();
          best_ri = static_cast<int>(ri);
          best_pi = static_cast<int>(pi);
          best_pairs.clear();
          for (auto [ra, pa] : mapping.pairs)
            best_pairs.push_back({{best_ri, keep_r[ra]}, {best_pi, keep_p[pa]}});
        }
      }
    }
    if (best_size == 0) break;
    for (auto [r, p] : best_pairs) {
      used_r.insert(r);
      used_p.insert(p);
      out.pairs.push_back({r, p});
    }
  }
  for (size_t ri = 0; ri < reactants.size(); ++ri)
    for (size_t a = 0; a < reactants[ri].atom_count(); ++a)
      if (!used_r.count({static_cast<int>(ri), static_cast<int>(a)}))
        out.unmapped_reactant.push_back({static_cast<int>(ri), static_cast<int>(a)});
  for (size_t pi = 0; pi < products.size(); ++pi)
    for (size_t a = 0; a < products[pi].atom_count(); ++a)
      if (!used_p.count({static_cast<int>(pi), static_cast<int>(a)}))
        out.unmapped_product.push_back({static_cast<int>(pi), static_cast<int>(a)});
  return out;
}

// ---- by-products ---------------------------------------------------------

LeavingGroupTable LeavingGroupTable::load(std::istream& in) {
  LeavingGroupTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw std::runtime_error("leaving-group table line " + std::to_string(lineno) +
                               ": expected name<TAB>SMILES");
    LeavingGroup g;
    g.name = line.substr(0, tab);
    g.smiles = line.substr(tab + 1);
    g.molecule = mol::parse_smiles(g.smiles);
    if (g.molecule.net_charge() != 0)
      throw std::runtime_error("leaving group '" + g.name + "' is not charge-neutral");
    t.entries_.push_back(std::move(g));
  }
  return t;
}

LeavingGroupTable LeavingGroupTable::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open leaving-group table: " + path);
  return load(in);
}

LeavingGroupTable LeavingGroupTable::defaults() {
  static const char* kDefaults =
      "HCl\tCl\n"
      "HBr\tBr\n"
      "HI\tI\n"
      "H2O\tO\n"
      "MeOH\tCO\n"
      "EtOH\tCCO\n"
      "CO2\tO=C=O\n"
      "N2\tN#N\n"
      "NaCl\t[Na+].[Cl-]\n"
      "AcOH\tCC(=O)O\n"
      "BrB(OH)2\tOB(O)Br\n";
  std::istringstream in(kDefaults);
  return load(in);
}

const LeavingGroup* LeavingGroupTable::find(const std::string& name) const {
  for (const LeavingGroup& g : entries_)
    if (g.name == name) return &g;
  return nullptr;
}

std::vector<ByProductHypothesis> enumerate_byproducts(
    const std::vector<mol::Molecule>& reactants, const std::vector<mol::Molecule>& products,
    const LeavingGroupTable& table) {
  std::map<std::string, int> diff = mol::element_counts(reactants);
  for (const auto& [el, n] : mol::element_counts(products)) diff[el] -= n;
  std::erase_if(diff, [](const auto& kv) { return kv.second == 0; });
  for (const auto& [el, n] : diff)
    if (n < 0)
      throw BalanceError(BalanceError::Kind::NegativeDifference,
                         "products exceed reactants in element " + el);
  if (diff.empty()) return {};

  // precompute element counts and atom totals per table species
  struct Candidate {
    const LeavingGroup* group;
    std::map<std::string, int> counts;
    int atoms;
  };
  std::vector<Candidate> cands;
  for (const LeavingGroup& g : table.entries()) {
    Candidate c{&g, mol::element_counts(g.molecule), 0};
    for (const auto& [el, n] : c.counts) c.atoms += n;
    // only species fully contained in the difference can participate
    bool usable = true;
    for (const auto& [el, n] : c.counts)
      if (!diff.count(el)) usable = false;
    if (usable) cands.push_back(std::move(c));
  }

  std::vector<ByProductHypothesis> out;
  std::vector<int> chosen(cands.size(), 0);
  std::function<void(size_t, std::map<std::string, int>)> rec =
      [&](size_t i, std::map<std::string, int> remaining) {
        bool done = std::all_of(remaining.begin(), remaining.end(),
                                [](const auto& kv) { return kv.second == 0; });
        if (done) {
          ByProductHypothesis h;
          for (size_t c = 0; c < cands.size(); ++c) {
            if (chosen[c] == 0) continue;
            h.species.push_back({cands[c].group->name, cands[c].group->molecule, chosen[c]});
            h.atom_total += chosen[c] * cands[c].atoms;
            h.species_total += chosen[c];
            h.rule_name = h.rule_name.empty() ? cands[c].group->name : h.rule_name;
          }
          if (!h.species.empty()) out.push_back(std::move(h));
          return;
        }
        if (i == cands.size()) return;
        // max count of this species that fits the remaining difference
        int max_n = 1 << 20;
        for (const auto& [el, n] : cands[i].counts)
          max_n = std::min(max_n, (remaining.count(el) ? remaining.at(el) : 0) / n);
        for (int n = 0; n <= max_n; ++n) {
          chosen[i] = n;
          std::map<std::string, int> next = remaining;
          for (const auto& [el, cnt] : cands[i].counts) next[el] -= n * cnt;
          rec(i + 1, std::move(next));
        }
        chosen[i] = 0;
      };
  rec(0, diff);

  if (out.empty()) {
    // no tiling: report the raw residue
    std::vector<mol::Atom> atoms;
    int atom_total = 0;
    for (const auto& [el, n] : diff) {
      for (int k = 0; k < n; ++k) {
        mol::Atom a;
        a.element = el;
        a.bracket = true;
        atoms.push_back(a);
      }
      atom_total += n;
    }
    ByProductHypothesis h;
    h.rule_name = "UnexplainedResidue";
    h.species.push_back({"UnexplainedResidue", mol::Molecule(atoms, {}), 1});
    h.atom_total = atom_total;
    h.species_total = 1;
    out.push_back(std::move(h));
  }

  auto names_of = [](const ByProductHypothesis& h) {
    std::string s;
    for (const auto& sp : h.species) s += sp.name + "*" + std::to_string(sp.count) + ";";
    return s;
  };
  std::sort(out.begin(), out.end(),
            [&](const ByProductHypothesis& a, const ByProductHypothesis& b) {
              if (a.atom_total != b.atom_total) return a.atom_total < b.atom_total;
              if (a.species_total != b.species_total) return a.species_total < b.species_total;
              return names_of(a) < names_of(b);
            });
  return out;
}

// ---- hard checks ---------------------------------------------------------

namespace {

const std::set<std::string> kAcidByproducts = {"HCl", "HBr", "HI", "AcOH"};

}  // namespace

std::vector<std::string> hard_check_names() {
  return {"mass_balance", "charge_neutrality", "byproduct_base_capture",
          "no_reactant_duplicate", "solvent_role"};
}

ConstraintReport run_hard_checks(const Reaction& x, const ConditionConfig& c,
                                 const ReactionReport& report,
                                 const species::SpeciesDict& dict) {
  ConstraintReport out;

  out.checks.push_back({"mass_balance", report.balance_ok,
                        report.balance_ok ? "balanced" : "no stoichiometric solution found"});

  int qr = 0, qp = 0;
  for (const auto& m : x.reactants) qr += m.net_charge();
  for (const auto& m : x.products) qp += m.net_charge();
  out.checks.push_back({"charge_neutrality", qr == qp,
                        qr == qp ? "charge conserved"
                                 : "reactant charge " + std::to_string(qr) +
                                       " != product charge " + std::to_string(qp)});

  bool acid_byproduct = false;
  std::string acid_name;
  for (const std::string& b : report.byproducts)
    if (kAcidByproducts.count(b)) {
      acid_byproduct = true;
      acid_name = b;
    }
  bool base_present = false;
  for (const std::string& s : c.nonempty_species())
    if (dict.has_role(s, "base")) base_present = true;
  bool capture_ok = !acid_byproduct || base_present;
  out.checks.push_back({"byproduct_base_capture", capture_ok,
                        capture_ok ? "no uncaptured acid by-product"
                                   : "by-product " + acid_name +
                                         " requires a base in the condition configuration"});

  // condition species must not duplicate a reactant
  std::set<std::string> reactant_keys;
  for (const auto& m : x.reactants) reactant_keys.insert(mol::structure_key(m));
  bool dup = false;
  std::string dup_name;
  for (const std::string& s : c.nonempty_species()) {
    const species::SpeciesEntry* e = dict.find(s);
    if (!e || e->smiles.empty()) continue;
    try {
      if (reactant_keys.count(mol::structure_key(mol::parse_smiles(e->smiles)))) {
        dup = true;
        dup_name = s;
      }
    } catch (const mol::ParseError&) {
    }
  }
  out.checks.push_back({"no_reactant_duplicate", !dup,
                        dup ? "condition species " + dup_name + " duplicates a reactant"
                            : "no slot duplicates a reactant"});

  bool solvents_ok = true;
  std::string bad_solvent;
  for (const std::string& s : {c.solvent1, c.solvent2}) {
    if (s.empty() || !dict.known(s)) continue;
    if (!dict.has_role(s, "solvent")) {
      solvents_ok = false;
      bad_solvent = s;
    }
  }
  out.checks.push_back({"solvent_role", solvents_ok,
                        solvents_ok ? "solvent slots carry solvent-tagged species"
                                    : bad_solvent + " is not tagged as a solvent"});

  return out;
}

}  // namespace chemrec::balance
