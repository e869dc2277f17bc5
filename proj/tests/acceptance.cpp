// Acceptance gate: one pass/fail line per release criterion, pinned
// tolerances, hard per-criterion runtime budgets. Exit code = failure count.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "chemrec/balance.hpp"
#include "chemrec/debate.hpp"
#include "chemrec/knowbase.hpp"
#include "chemrec/molgraph.hpp"
#include "chemrec/pipeline.hpp"
#include "chemrec/rationale.hpp"
#include "chemrec/recall.hpp"
#include "chemrec/trainkit.hpp"
#include "oracles.hpp"

using namespace chemrec;

namespace {

std::string fail(const std::string& why) { return why; }

// ---- shared fixtures -----------------------------------------------------

const tagger::FGLibrary& lib() {
  static tagger::FGLibrary l = tagger::FGLibrary::load_file(CHEMREC_DATA_DIR "/fg_library.tsv");
  return l;
}

const species::SpeciesDict& dict() {
  static species::SpeciesDict d =
      species::SpeciesDict::load_file(CHEMREC_DATA_DIR "/species.tsv");
  return d;
}

kb::ReactionBase small_base() {
  std::istringstream in(
      "{\"id\":\"a1\",\"reaction_type\":\"amide_coupling\",\"reactants\":[\"CC(=O)Cl\",\"CCN\"],"
      "\"products\":[\"CC(=O)NCC\"],\"solvent1\":\"DCM\",\"reagent1\":\"triethylamine\"}\n"
      "{\"id\":\"a2\",\"reaction_type\":\"amide_coupling\",\"reactants\":[\"CCC(=O)Cl\",\"CN\"],"
      "\"products\":[\"CCC(=O)NC\"],\"solvent1\":\"THF\",\"reagent1\":\"triethylamine\"}\n"
      "{\"id\":\"a3\",\"reaction_type\":\"amide_coupling\",\"reactants\":[\"CC(=O)Cl\",\"CN\"],"
      "\"products\":[\"CC(=O)NC\"],\"solvent1\":\"DCM\",\"reagent1\":\"pyridine\"}\n");
  return kb::ReactionBase::ingest(in, lib());
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "";
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// ---- 1. reward truth table -----------------------------------------------

std::string check_reward_table() {
  for (int f = 0; f < 2; ++f)
    for (int acc = 0; acc < 2; ++acc)
      for (int s = 0; s < 2; ++s)
        for (int m = 0; m < 2; ++m) {
          train::RewardInput in{f == 1, acc, s == 1, m == 1};
          double expected = !in.format_ok ? -1.0
                            : in.acc == 0 ? 0.0
                                          : 1.0 + ((s && m) ? train::kToolBonus : 0.0);
          double got = train::reward(in);
          if (got != expected)
            return fail("case f=" + std::to_string(f) + " acc=" + std::to_string(acc) +
                        " s=" + std::to_string(s) + " m=" + std::to_string(m) + ": got " +
                        std::to_string(got));
        }
  if (train::reward({true, 1, true, true}) != 1.1) return fail("pinned 1.1 case");
  if (train::reward({true, 0, true, true}) != 0.0) return fail("pinned 0 case");
  if (train::reward({false, 1, true, true}) != -1.0) return fail("pinned -1 case");
  return "";
}

// ---- 2. GRPO gradient vs finite differences ------------------------------

std::string check_grpo_gradient() {
  std::mt19937_64 rng(101);
  std::uniform_real_distribution<double> logits(-1.0, 1.0);
  std::uniform_real_distribution<double> adv(-1.0, 1.0);
  const double eps = 0.2;
  const double h = 1e-5;

  // identity: policy == ref, zero advantages, on-policy old logps
  {
    train::ToyPolicy p = train::ToyPolicy::uniform(2, 3);
    train::RolloutGroup g;
    g.actions = {{0, 1}, {2, 0}};
    for (const auto& seq : g.actions) {
      std::vector<double> lp;
      for (size_t t = 0; t < seq.size(); ++t) lp.push_back(p.logp(static_cast<int>(t), seq[t]));
      g.logp_old.push_back(lp);
    }
    g.rewards = {0.0, 0.0};
    g.advantages = {0.0, 0.0};
    train::GrpoResult res = train::grpo_objective(p, p, g, eps, 0.5);
    if (std::abs(res.objective) > 1e-12)
      return fail("identity objective " + std::to_string(res.objective));
  }

  int accepted = 0;
  while (accepted < 100) {
    int horizon = 1 + static_cast<int>(rng() % 3);
    int vocab = 2 + static_cast<int>(rng() % 3);
    int g_size = 2 + static_cast<int>(rng() % 3);
    double beta = (rng() % 2) ? 0.5 : 0.0;

    train::ToyPolicy policy = train::ToyPolicy::uniform(horizon, vocab);
    train::ToyPolicy ref = train::ToyPolicy::uniform(horizon, vocab);
    train::ToyPolicy old = train::ToyPolicy::uniform(horizon, vocab);
    for (double& t : policy.theta) t = logits(rng);
    for (double& t : ref.theta) t = logits(rng);
    for (double& t : old.theta) t = logits(rng);

    train::RolloutGroup group;
    bool near_kink = false;
    for (int i = 0; i < g_size; ++i) {
      int len = 1 + static_cast<int>(rng() % horizon);
      std::vector<int> seq;
      std::vector<double> lp;
      for (int t = 0; t < len; ++t) {
        int a = static_cast<int>(rng() % vocab);
        seq.push_back(a);
        lp.push_back(old.logp(t, a));
        double rho = std::exp(policy.logp(t, a) - old.logp(t, a));
        if (std::abs(rho - (1.0 + eps)) < 1e-2 || std::abs(rho - (1.0 - eps)) < 1e-2)
          near_kink = true;
      }
      group.actions.push_back(seq);
      group.logp_old.push_back(lp);
      group.rewards.push_back(0.0);
      group.advantages.push_back(adv(rng));
    }
    if (near_kink) continue;

    train::GrpoResult res = train::grpo_objective(policy, ref, group, eps, beta);
    for (size_t i = 0; i < policy.theta.size(); ++i) {
      train::ToyPolicy up = policy, down = policy;
      up.theta[i] += h;
      down.theta[i] -= h;
      double fd = (train::grpo_objective(up, ref, group, eps, beta).objective -
                   train::grpo_objective(down, ref, group, eps, beta).objective) /
                  (2 * h);
      double rel = std::abs(res.grad[i] - fd) /
                   std::max({std::abs(res.grad[i]), std::abs(fd), 1e-6});
      if (rel > 1e-4)
        return fail("instance " + std::to_string(accepted) + " theta[" + std::to_string(i) +
                    "]: rel err " + std::to_string(rel));
    }
    ++accepted;
  }
  return "";
}

// ---- 3. toy training -----------------------------------------------------

std::string check_toy_training() {
  train::ToyEnv env;
  train::ToyPolicy init = train::ToyPolicy::uniform(3, train::ToyEnv::kVocab);

  train::TrainResult res = train::toy_training_loop(init, env, 200, 16, 0.2, 0.0, 0.5, 99);
  if (res.curve.size() != 200) return fail("curve length");
  const int window = 50;
  double prev = -2.0;
  for (int w = 0; w < 4; ++w) {
    double mean = 0.0;
    for (int i = w * window; i < (w + 1) * window; ++i) mean += res.curve[i];
    mean /= window;
    if (mean + 1e-9 < prev)
      return fail("window " + std::to_string(w) + " mean decreased: " + std::to_string(mean));
    prev = mean;
  }
  double final_mean = 0.0;
  for (int i = 150; i < 200; ++i) final_mean += res.curve[i];
  final_mean /= window;
  if (final_mean < 0.9) return fail("final mean " + std::to_string(final_mean) + " < 0.9");

  // large beta anchors the policy to the reference
  train::TrainResult anchored =
      train::toy_training_loop(init, env, 200, 16, 0.2, 1e3, 1e-3, 99);
  for (int step = 0; step < init.horizon; ++step) {
    std::vector<double> p = anchored.policy.probs(step);
    std::vector<double> q = init.probs(step);
    double tv = 0.0;
    for (size_t v = 0; v < p.size(); ++v) tv += std::abs(p[v] - q[v]);
    tv *= 0.5;
    if (tv > 0.05)
      return fail("step " + std::to_string(step) + " TV " + std::to_string(tv) + " > 0.05");
  }
  return "";
}

// ---- 4. majority vote vs brute force -------------------------------------

std::string check_majority_vote() {
  std::mt19937_64 rng(202);
  const std::vector<double> confs = {0.3, 0.3, 0.6, 0.6, 0.9};
  bool saw_conf_tie_path = false, saw_id_path = false;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(rng() % 4);
    std::string a_id = (rng() % 2) ? "aaa" : "zzz";
    std::string b_id = a_id == "aaa" ? "mmm" : "bbb";
    std::vector<debate::AgentDecision> decisions(n);
    for (auto& d : decisions) {
      d.choice = (rng() % 2) ? 'A' : 'B';
      d.confidence = confs[rng() % confs.size()];
    }
    auto [winner, tally, path] = debate::majority_vote(decisions, a_id, b_id);

    int va = 0, vb = 0;
    double ca = 0, cb = 0;
    for (const auto& d : decisions) {
      if (d.choice == 'A') ++va, ca += d.confidence;
      else ++vb, cb += d.confidence;
    }
    char expect;
    debate::TiePath expect_path;
    if (va != vb) {
      expect = va > vb ? 'A' : 'B';
      expect_path = debate::TiePath::Majority;
    } else if (ca != cb) {
      expect = ca > cb ? 'A' : 'B';
      expect_path = debate::TiePath::ConfidenceSum;
    } else {
      expect = a_id < b_id ? 'A' : 'B';
      expect_path = debate::TiePath::CanonicalId;
    }
    if (winner != expect || tally != std::make_pair(va, vb) || path != expect_path)
      return fail("trial " + std::to_string(trial) + ": got " + std::string(1, winner) +
                  " expected " + std::string(1, expect));
    if (path == debate::TiePath::ConfidenceSum) saw_conf_tie_path = true;
    if (path == debate::TiePath::CanonicalId) saw_id_path = true;
  }
  if (!saw_conf_tie_path) return fail("confidence tie path never exercised");
  if (!saw_id_path) return fail("canonical-id tie path never exercised");
  return "";
}

// ---- 5. tournament cardinality and determinism ---------------------------

recall::CandidatePool synthetic_pool(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> pri(0.0, 1.0);
  recall::CandidatePool pool;
  pool.cap = 6000;
  for (int i = 0; i < n; ++i) {
    recall::Candidate c;
    c.config.catalyst1 = "cat" + std::to_string(i % 17);
    c.config.solvent1 = "sol" + std::to_string((i / 17) % 23);
    c.config.reagent1 = "rea" + std::to_string(i / (17 * 23));
    c.origin = i % 2 ? recall::Candidate::Origin::Similar : recall::Candidate::Origin::Matched;
    c.priority = pri(rng);
    pool.candidates.push_back(std::move(c));
  }
  return pool;
}

std::string audit_bracket(const recall::CandidatePool& pool,
                          const debate::TournamentResult& t, int k) {
  std::set<std::string> survivors;
  for (const auto& c : pool.candidates) survivors.insert(c.config.canonical_id());
  for (const auto& round : t.bracket) {
    std::set<std::string> next;
    for (const auto& m : round.matches) {
      if (!survivors.count(m.a_id) || !survivors.count(m.b_id))
        return fail("round " + std::to_string(round.round) + " pairs a non-survivor");
      next.insert(m.winner == 'A' ? m.a_id : m.b_id);
    }
    for (const auto& id : round.byes) {
      if (!survivors.count(id)) return fail("bye for non-survivor");
      next.insert(id);
    }
    for (const auto& id : round.auto_advanced) {
      if (!survivors.count(id)) return fail("auto-advance for non-survivor");
      next.insert(id);
    }
    size_t played = round.matches.size() * 2 + round.byes.size() + round.auto_advanced.size();
    if (played != survivors.size()) return fail("round does not account for every survivor");
    survivors = std::move(next);
  }
  std::set<std::string> winners;
  for (const auto& w : t.winners) winners.insert(w.config.canonical_id());
  if (winners.size() != static_cast<size_t>(k)) return fail("winner count");
  if (winners != survivors) return fail("winners differ from final survivors");
  return "";
}

std::string check_tournament() {
  Reaction x = pipeline::parse_reaction_spec("C=CC=C.C=C>>C1=CCCCC1");
  kb::ReactionBase base = small_base();
  pipeline::Assets assets{lib(), dict(), balance::LeavingGroupTable::defaults(),
                          std::move(base)};
  ReactionReport report = pipeline::build_report(x, assets, pipeline::PipelineConfig{});
  debate::MatchContext ctx = debate::make_context(x, report, assets.base, assets.dict);
  debate::HeuristicJudge judge(ctx);
  debate::Panel panel = {&judge, &judge, &judge, &judge};

  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 50; ++trial) {
    int n = 50 + static_cast<int>(rng() % 5951);
    recall::CandidatePool pool = synthetic_pool(n, rng);
    uint64_t seed = rng();
    debate::TournamentResult t1 = debate::tournament(pool, panel, ctx, 50, seed, 1);
    if (t1.winners.size() != 50)
      return fail("pool " + std::to_string(n) + ": " + std::to_string(t1.winners.size()) +
                  " winners");
    std::string audit = audit_bracket(pool, t1, 50);
    if (!audit.empty()) return fail("pool " + std::to_string(n) + ": " + audit);
    debate::TournamentResult t2 = debate::tournament(pool, panel, ctx, 50, seed, 1);
    if (pipeline::dump_document(pipeline::bracket_to_json(t1)) !=
            pipeline::dump_document(pipeline::bracket_to_json(t2)) ||
        pipeline::dump_document(pipeline::board_to_json(t1.board)) !=
            pipeline::dump_document(pipeline::board_to_json(t2.board)))
      return fail("pool " + std::to_string(n) + ": seeded rerun differs");
  }

  // pinned 5000 -> 50 case inside the 30s budget
  auto start = std::chrono::steady_clock::now();
  recall::CandidatePool big = synthetic_pool(5000, rng);
  debate::TournamentResult t = debate::tournament(big, panel, ctx, 50, 7, 1);
  double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (t.winners.size() != 50) return fail("5000->50 winner count");
  if (secs > 30.0) return fail("5000->50 took " + std::to_string(secs) + "s");
  return "";
}

// ---- 6. stoichiometry vs exhaustive oracle -------------------------------

std::string check_stoichiometry() {
  struct Case {
    std::vector<std::string> reactants, products;
  };
  const std::vector<Case> cases = {
      {{"C", "O=O"}, {"O=C=O", "O"}},                       // methane combustion
      {{"C=C", "O=O"}, {"O=C=O", "O"}},                     // ethene combustion
      {{"CC", "O=O"}, {"O=C=O", "O"}},                      // ethane combustion
      {{"CCC", "O=O"}, {"O=C=O", "O"}},                     // propane combustion
      {{"CCO", "O=O"}, {"O=C=O", "O"}},                     // ethanol combustion
      {{"CO", "O=O"}, {"O=C=O", "O"}},                      // methanol combustion
      {{"N#N", "[H][H]"}, {"N"}},                           // ammonia synthesis
      {{"[H][H]", "O=O"}, {"O"}},                           // water formation
      {{"CC(=O)O", "CCO"}, {"CC(=O)OCC", "O"}},             // Fischer esterification
      {{"CC(=O)Cl", "CN"}, {"CC(=O)NC", "Cl"}},             // amide coupling
      {{"C=C", "[H][H]"}, {"CC"}},                          // alkene hydrogenation
      {{"C#C", "[H][H]"}, {"CC"}},                          // alkyne hydrogenation
      {{"CC(=O)OCC", "O"}, {"CC(=O)O", "CCO"}},             // ester hydrolysis
      {{"CC(=O)O", "CCCO"}, {"CC(=O)OCCC", "O"}},           // propyl ester
      {{"CCBr", "OC"}, {"CCOC", "Br"}},                     // etherification
      {{"C", "ClCl"}, {"CCl", "Cl"}},                       // chlorination
      {{"CCO"}, {"C=C", "O"}},                              // dehydration
      {{"C=CC=C", "C=C"}, {"C1=CCCCC1"}},                   // cycloaddition
      {{"CC=O", "CN"}, {"CC=NC", "O"}},                     // imine condensation
      {{"CC(=O)OC", "CCO"}, {"CC(=O)OCC", "CO"}},           // transesterification
  };
  for (size_t i = 0; i < cases.size(); ++i) {
    std::vector<mol::Molecule> reactants, products;
    for (const auto& s : cases[i].reactants) reactants.push_back(mol::parse_smiles(s));
    for (const auto& s : cases[i].products) products.push_back(mol::parse_smiles(s));
    balance::Stoichiometry s = balance::balance_stoichiometry(reactants, products);
    auto oracle = oracles::brute_force_balance(reactants, products);
    if (!oracle) return fail("case " + std::to_string(i) + ": oracle found no solution");
    std::vector<long long> got;
    for (int c : s.reactants) got.push_back(c);
    for (int c : s.products) got.push_back(c);
    if (got != *oracle) return fail("case " + std::to_string(i) + ": differs from oracle");
    long long g = 0;
    for (long long c : got) g = std::gcd(g, c);
    if (g != 1) return fail("case " + std::to_string(i) + ": gcd " + std::to_string(g));
    if (!balance::conserves_elements(reactants, products, {}, s))
      return fail("case " + std::to_string(i) + ": element conservation");
  }
  return "";
}

// ---- 7. by-product hypotheses --------------------------------------------

std::map<std::string, int> element_difference(const std::vector<mol::Molecule>& reactants,
                                              const std::vector<mol::Molecule>& products) {
  std::map<std::string, int> diff;
  for (const auto& [el, c] : mol::element_counts(reactants)) diff[el] += c;
  for (const auto& [el, c] : mol::element_counts(products)) diff[el] -= c;
  std::erase_if(diff, [](const auto& kv) { return kv.second == 0; });
  return diff;
}

std::string check_byproducts() {
  auto parse_all = [](const std::vector<std::string>& smiles) {
    std::vector<mol::Molecule> out;
    for (const auto& s : smiles) out.push_back(mol::parse_smiles(s));
    return out;
  };
  auto verify = [&](const std::vector<std::string>& rs, const std::vector<std::string>& ps,
                    const std::vector<std::string>& expected) -> std::string {
    auto reactants = parse_all(rs), products = parse_all(ps);
    auto hyps = balance::enumerate_byproducts(reactants, products);
    std::vector<std::string> got;
    std::vector<mol::Molecule> got_mols;
    if (!hyps.empty() && hyps[0].rule_name != "UnexplainedResidue")
      for (const auto& sp : hyps[0].species) {
        for (int c = 0; c < sp.count; ++c) {
          got.push_back(sp.name);
          got_mols.push_back(sp.molecule);
        }
      }
    std::vector<std::string> got_sorted = got, want = expected;
    std::sort(got_sorted.begin(), got_sorted.end());
    std::sort(want.begin(), want.end());
    if (got_sorted != want) return fail("unexpected top hypothesis");
    // the hypothesis must tile the element difference exactly
    auto diff = element_difference(reactants, products);
    std::map<std::string, int> covered;
    for (const auto& m : got_mols)
      for (const auto& [el, c] : mol::element_counts(m)) covered[el] += c;
    std::erase_if(covered, [](const auto& kv) { return kv.second == 0; });
    if (covered != diff) return fail("hypothesis does not match the element difference");
    return "";
  };
  std::string r;
  r = verify({"CC(=O)Cl", "CN"}, {"CC(=O)NC"}, {"HCl"});
  if (!r.empty()) return "amide: " + r;
  r = verify({"CC(=O)O", "CCO"}, {"CC(=O)OCC"}, {"H2O"});
  if (!r.empty()) return "esterification: " + r;
  r = verify({"C=CC=C", "C=C"}, {"C1=CCCCC1"}, {});
  if (!r.empty()) return "cycloaddition: " + r;
  return "";
}

// ---- 8. substructure and MCS vs brute force ------------------------------

std::string check_matching() {
  const std::vector<std::string> patterns = {
      "[CX3](=O)Cl", "[NX3H2]", "C=O",        "C(=O)[OX2H]", "[CX4]Br",
      "[OX2H]",      "c1ccccc1", "C(=O)OC",   "[NX3]",       "C#N",
  };
  const std::vector<std::string> molecules = {
      "CC(=O)Cl", "CCN", "CC(=O)NC", "c1ccccc1", "Cc1ccccc1",
      "CC(=O)OCC", "OCCO", "CC(C)O", "CCBr", "N#CCC(=O)O",
  };
  int pairs = 0;
  for (const auto& ps : patterns)
    for (const auto& ms : molecules) {
      mol::Pattern p = mol::parse_smarts(ps);
      mol::Molecule m = mol::parse_smiles(ms);
      std::vector<std::vector<int>> expected = oracles::brute_force_match(p, m);
      std::vector<mol::AtomMapping> got = mol::match_pattern(p, m);
      if (got.size() != expected.size())
        return fail(ps + " in " + ms + ": match count " + std::to_string(got.size()) + " vs " +
                    std::to_string(expected.size()));
      for (size_t i = 0; i < got.size(); ++i) {
        std::vector<int> mapped(p.nodes.size());
        for (const auto& [node, atom] : got[i].pairs) mapped[node] = atom;
        if (mapped != expected[i]) return fail(ps + " in " + ms + ": mapping differs");
      }
      ++pairs;
    }
  if (pairs < 50) return fail("only " + std::to_string(pairs) + " substructure pairs");

  const std::vector<std::string> small = {"CCO",  "CCN",    "CC=O",  "CCC",
                                          "OCC=O", "CC(C)O", "ClCCO", "C1CCC1"};
  int mcs_pairs = 0;
  for (size_t i = 0; i < small.size(); ++i)
    for (size_t j = i + 1; j < small.size(); ++j) {
      mol::Molecule a = mol::parse_smiles(small[i]);
      mol::Molecule b = mol::parse_smiles(small[j]);
      size_t expected = oracles::brute_force_mcs_size(a, b);
      mol::AtomMapping got = mol::mcs(a, b);
      if (got.size() != expected)
        return fail(small[i] + " / " + small[j] + ": MCS " + std::to_string(got.size()) +
                    " vs " + std::to_string(expected));
      ++mcs_pairs;
    }
  if (mcs_pairs < 20) return fail("only " + std::to_string(mcs_pairs) + " MCS pairs");
  return "";
}

// ---- 9. recall set identities --------------------------------------------

std::string check_recall() {
  // a 40-record base with known ids and varied configs
  std::ostringstream corpus;
  const std::vector<std::string> solvents = {"DCM", "THF", "MeCN", "toluene", "DMF"};
  const std::vector<std::string> reagents = {"triethylamine", "pyridine", "DIPEA", "K2CO3"};
  for (int i = 0; i < 40; ++i) {
    corpus << "{\"id\":\"rb-" << i << "\",\"reaction_type\":\"amide_coupling\","
           << "\"reactants\":[\"CC(=O)Cl\",\"CCN\"],\"products\":[\"CC(=O)NCC\"],"
           << "\"solvent1\":\"" << solvents[i % solvents.size()] << "\","
           << "\"reagent1\":\"" << reagents[i % reagents.size()] << "\"}\n";
  }
  std::istringstream in(corpus.str());
  kb::ReactionBase base = kb::ReactionBase::ingest(in, lib());

  std::mt19937_64 rng(404);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    recall::Channels ch;
    std::map<std::string, double> best;
    std::set<std::string> in_t, in_r, in_p;
    for (int i = 0; i < 40; ++i) {
      std::string id = "rb-" + std::to_string(i);
      if (rng() % 3 == 0) {
        ch.s_t.push_back(id);
        in_t.insert(id);
      }
      if (rng() % 3 == 0) {
        EvidenceItem e;
        e.record_id = id;
        e.combined = score(rng);
        ch.s_r.push_back(e);
        in_r.insert(id);
        best[id] = std::max(best[id], e.combined);
      }
      if (rng() % 3 == 0) {
        EvidenceItem e;
        e.record_id = id;
        e.combined = score(rng);
        ch.s_p.push_back(e);
        in_p.insert(id);
        best[id] = std::max(best[id], e.combined);
      }
    }
    std::set<std::string> expected_union;
    for (const auto& id : in_t) expected_union.insert(id);
    for (const auto& id : in_r) expected_union.insert(id);
    for (const auto& id : in_p) expected_union.insert(id);

    std::vector<recall::MatchedEntry> merged = recall::merge_matched(base, ch);
    std::set<std::string> got_ids;
    for (const auto& e : merged) {
      if (!got_ids.insert(e.record_id).second) return fail("duplicate id in merged union");
      if (e.hit_type != (in_t.count(e.record_id) > 0) ||
          e.hit_reactant != (in_r.count(e.record_id) > 0) ||
          e.hit_product != (in_p.count(e.record_id) > 0))
        return fail("channel flags wrong for " + e.record_id);
      double want = best.count(e.record_id) ? best[e.record_id] : 0.0;
      if (std::abs(e.priority - want) > 1e-12) return fail("priority is not the channel max");
      if (e.config != base.record(e.record_id)->condition) return fail("config mismatch");
    }
    if (got_ids != expected_union) return fail("merged union differs from channel union");
    for (size_t i = 1; i < merged.size(); ++i)
      if (!(merged[i - 1].record_id < merged[i].record_id)) return fail("merged not id-sorted");

    // truncation-at-cap identity on synthetic pools
    if (trial % 25 == 0) {
      size_t n_matched = rng() % 3000, n_similar = rng() % 4000;
      std::vector<recall::MatchedEntry> matched(n_matched);
      for (size_t i = 0; i < n_matched; ++i) {
        matched[i].record_id = "m" + std::to_string(i);
        matched[i].config.catalyst1 = "c" + std::to_string(i);
      }
      std::vector<recall::Candidate> similar(n_similar);
      for (size_t i = 0; i < n_similar; ++i) {
        similar[i].origin = recall::Candidate::Origin::Similar;
        similar[i].config.reagent1 = "r" + std::to_string(i);
      }
      recall::CandidatePool pool = recall::build_pool(matched, similar, 5000);
      if (pool.size() != std::min<size_t>(5000, n_matched + n_similar))
        return fail("pool truncation size");
      std::set<std::string> seen;
      for (size_t i = 0; i < pool.size(); ++i) {
        const auto& c = pool.candidates[i];
        if (!seen.insert(c.config.canonical_id()).second) return fail("duplicate pool config");
        bool is_matched = c.origin == recall::Candidate::Origin::Matched;
        if (is_matched != (i < std::min<size_t>(n_matched, pool.size())))
          return fail("matched entries must precede similar entries");
      }
    }
  }
  return "";
}

// ---- 10. validity and final selection ------------------------------------

double subset_objective(const std::vector<rationale::ScoredCandidate>& picked, double lambda) {
  double sum = 0.0;
  std::vector<ConditionConfig> configs;
  for (const auto& c : picked) {
    sum += c.u;
    configs.push_back(c.candidate.config);
  }
  return sum + lambda * rationale::diversity(configs);
}

void best_subset(const std::vector<rationale::ScoredCandidate>& valid, int k, double lambda,
                 size_t start, std::vector<rationale::ScoredCandidate>& cur, double& best,
                 bool& found) {
  if (static_cast<int>(cur.size()) == k) {
    double obj = subset_objective(cur, lambda);
    if (!found || obj > best) best = obj, found = true;
    return;
  }
  for (size_t i = start; i < valid.size(); ++i) {
    cur.push_back(valid[i]);
    best_subset(valid, k, lambda, i + 1, cur, best, found);
    cur.pop_back();
  }
}

std::string check_selection() {
  using rationale::ScoredCandidate;
  // all 8 validity conjunction combinations plus the boundary
  for (int c = 0; c < 2; ++c)
    for (int a = 0; a < 2; ++a)
      for (int h = 0; h < 2; ++h) {
        double align = a ? 0.7 : 0.3;
        rationale::ValidityResult v = rationale::validate(c == 1, align, 0.5, h == 1);
        if (v.valid != (c == 1 && a == 1 && h == 1)) return fail("validity conjunction");
      }
  if (!rationale::validate(true, 0.5, 0.5, true).valid) return fail("align = delta boundary");
  if (rationale::validate(true, 0.5 - 1e-12, 0.5, true).valid) return fail("below boundary");

  std::mt19937_64 rng(505);
  std::uniform_real_distribution<double> uu(0.0, 1.0);
  const std::vector<std::string> vocab = {"", "x", "y", "z"};
  auto random_candidates = [&](int n, bool with_invalid) {
    std::vector<ScoredCandidate> cands;
    for (int i = 0; i < n; ++i) {
      ScoredCandidate sc;
      sc.candidate.config.catalyst1 = "id" + std::to_string(i);
      for (int s = 1; s < ConditionConfig::kSlots; ++s)
        sc.candidate.config.slot(s) = vocab[rng() % vocab.size()];
      sc.u = uu(rng);
      sc.validity.valid = !with_invalid || (rng() % 4 != 0);
      cands.push_back(std::move(sc));
    }
    return cands;
  };

  for (int trial = 0; trial < 30; ++trial) {
    int n = 6 + static_cast<int>(rng() % 7);  // 6..12
    int k = 2 + static_cast<int>(rng() % 4);
    double lambda = 0.5 * uu(rng);
    auto cands = random_candidates(n, true);
    std::vector<ScoredCandidate> valid;
    std::set<std::string> invalid_ids;
    for (const auto& c : cands)
      (c.validity.valid ? (void)valid.push_back(c)
                        : (void)invalid_ids.insert(c.candidate.config.canonical_id()));
    if (static_cast<int>(valid.size()) < k) {
      try {
        rationale::select_final(cands, k, lambda);
        return fail("NotEnoughValid not thrown");
      } catch (const rationale::RationaleError&) {
        continue;
      }
    }
    rationale::RecommendationSet rs = rationale::select_final(cands, k, lambda);
    if (static_cast<int>(rs.entries.size()) != k) return fail("entry count");
    for (const auto& e : rs.entries)
      if (invalid_ids.count(e.candidate.config.canonical_id()))
        return fail("invalid candidate admitted");
    double best = 0.0;
    bool found = false;
    std::vector<ScoredCandidate> cur;
    best_subset(valid, k, lambda, 0, cur, best, found);
    if (!found || std::abs(rs.objective - best) > 1e-12)
      return fail("trial " + std::to_string(trial) + ": objective " +
                  std::to_string(rs.objective) + " vs brute " + std::to_string(best));
  }

  // lambda = 0 equals top-u truncation
  for (int trial = 0; trial < 30; ++trial) {
    int n = 5 + static_cast<int>(rng() % 10);
    int k = 1 + static_cast<int>(rng() % 4);
    auto cands = random_candidates(n, false);
    rationale::RecommendationSet rs = rationale::select_final(cands, k, 0.0);
    std::vector<ScoredCandidate> sorted = cands;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      if (a.u != b.u) return a.u > b.u;
      return a.candidate.config.canonical_id() < b.candidate.config.canonical_id();
    });
    for (int i = 0; i < k; ++i)
      if (rs.entries[i].candidate.config.canonical_id() !=
          sorted[i].candidate.config.canonical_id())
        return fail("lambda=0 differs from top-u at rank " + std::to_string(i));
  }
  return "";
}

// ---- 11. end-to-end golden run -------------------------------------------

std::string check_end_to_end() {
  std::filesystem::current_path(CHEMREC_ROOT_DIR);
  pipeline::PipelineConfig cfg = pipeline::PipelineConfig::load_file("data/pipeline.cfg");
  pipeline::Assets assets = pipeline::Assets::load(cfg);
  std::vector<pipeline::TestQuery> queries = pipeline::load_test_set_file("data/queries.jsonl");
  if (queries.size() != 20) return fail("query count");

  std::map<std::string, std::vector<ConditionConfig>> preds;
  for (const auto& q : queries) {
    pipeline::RecommendOutcome outcome = pipeline::recommend(q.x, assets, cfg);
    std::string doc =
        pipeline::dump_document(pipeline::recommendations_to_json(q.x, outcome.recommendations));
    std::string golden = read_file(std::filesystem::path(CHEMREC_GOLDEN_DIR) / "runs" / q.id /
                                   "recommendations.json");
    if (golden.empty()) return fail(q.id + ": golden file missing");
    if (doc != golden) return fail(q.id + ": recommendations differ from golden");
    std::vector<ConditionConfig> ranked;
    for (const auto& e : outcome.recommendations.entries) ranked.push_back(e.candidate.config);
    preds[q.id] = std::move(ranked);
  }
  pipeline::EvalResult result = pipeline::evaluate(queries, preds, assets.dict);
  std::string table = pipeline::format_eval_table(result);
  std::string golden_table = read_file(std::filesystem::path(CHEMREC_GOLDEN_DIR) /
                                       "eval_table.txt");
  if (golden_table.empty()) return fail("golden eval table missing");
  if (table != golden_table) return fail("eval table differs from golden");
  return "";
}

// ---- 12. SFT round-trip --------------------------------------------------

std::string check_sft_roundtrip() {
  std::mt19937_64 rng(606);
  for (int run = 0; run < 50; ++run) {
    std::vector<train::ToolEvent> trace;
    int n = static_cast<int>(rng() % 6);
    bool any_search = false, any_memory = false;
    for (int i = 0; i < n; ++i) {
      train::ToolEvent e;
      e.kind = (rng() % 2) ? train::ToolEvent::Kind::Search : train::ToolEvent::Kind::Memory;
      e.content = "lookup " + std::to_string(rng() % 1000);
      (e.kind == train::ToolEvent::Kind::Search ? any_search : any_memory) = true;
      trace.push_back(std::move(e));
    }
    std::string judgment = (rng() % 2) ? "A" : "B";
    train::SftExample ex =
        train::serialize_sft_example("q" + std::to_string(run), trace, judgment);
    train::FormatCheck fc = train::check_format(ex.target);
    if (!fc.format_ok) return fail("run " + std::to_string(run) + ": format check failed");
    if (fc.used_search != any_search || fc.used_memory != any_memory)
      return fail("run " + std::to_string(run) + ": tool flags");
    if (train::parse_tool_events(ex.target) != trace)
      return fail("run " + std::to_string(run) + ": trace replay differs");
    auto parsed = train::parse_judgment(ex.target);
    if (!parsed || *parsed != judgment)
      return fail("run " + std::to_string(run) + ": judgment");
  }
  return "";
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    std::function<std::string()> run;
    double budget_s;
  };
  const std::vector<Criterion> criteria = {
      {"reward truth table", check_reward_table, 1.0},
      {"grpo gradient vs finite differences", check_grpo_gradient, 30.0},
      {"toy training convergence and anchoring", check_toy_training, 60.0},
      {"majority vote vs brute force", check_majority_vote, 5.0},
      {"tournament cardinality and determinism", check_tournament, 120.0},
      {"stoichiometry vs exhaustive oracle", check_stoichiometry, 5.0},
      {"by-product hypotheses", check_byproducts, 5.0},
      {"substructure and mcs vs brute force", check_matching, 60.0},
      {"recall set identities", check_recall, 10.0},
      {"validity and final selection", check_selection, 30.0},
      {"end-to-end golden run", check_end_to_end, 120.0},
      {"sft serialization round-trip", check_sft_roundtrip, 1.0},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    std::string why;
    try {
      why = criteria[i].run();
    } catch (const std::exception& e) {
      why = std::string("exception: ") + e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (why.empty() && secs > criteria[i].budget_s)
      why = "runtime " + std::to_string(secs) + "s over budget";
    std::printf("[%2zu/12] %-42s %s (%.2fs)\n", i + 1, criteria[i].name,
                why.empty() ? "PASS" : ("FAIL: " + why).c_str(), secs);
    if (!why.empty()) ++failures;
  }
  return failures;
}
