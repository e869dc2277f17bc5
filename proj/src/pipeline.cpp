#include "chemrec/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>

namespace chemrec::pipeline {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_config(const std::string& msg) {
  throw PipelineError(PipelineError::Kind::BadConfig, msg);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    bad_config("config key '" + key + "': not a number: " + value);
  }
}

long long to_int(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    bad_config("config key '" + key + "': not an integer: " + value);
  }
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_config("config key '" + key + "': not a boolean: " + value);
}

void check_judge(const std::string& key, const std::string& value) {
  if (value == "heuristic") return;
  if (value.rfind("remote:", 0) == 0 && value.find(':', 7) != std::string::npos) return;
  bad_config("config key '" + key + "': expected 'heuristic' or 'remote:<host>:<port>'");
}

void in_range(const std::string& key, double v, double lo, double hi) {
  if (v < lo || v > hi) {
    std::ostringstream msg;
    msg << "config key '" << key << "': value " << v << " outside [" << lo << ", " << hi << "]";
    bad_config(msg.str());
  }
}

ordered_json config_to_json(const ConditionConfig& c) {
  ordered_json j;
  for (int s = 0; s < ConditionConfig::kSlots; ++s)
    j[ConditionConfig::slot_names()[s]] = c.slot(s);
  return j;
}

ordered_json evidence_item_to_json(const EvidenceItem& e) {
  ordered_json j;
  j["record_id"] = e.record_id;
  j["type_match"] = e.type_match;
  j["fg_overlap"] = e.fg_overlap;
  j["mcs_norm"] = e.mcs_norm;
  j["similarity"] = e.similarity;
  j["combined"] = e.combined;
  return j;
}

}  // namespace

PipelineConfig PipelineConfig::load(std::istream& in) {
  PipelineConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      bad_config("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));

    if (key == "base") cfg.base_path = value;
    else if (key == "fg_library") cfg.fg_library_path = value;
    else if (key == "leaving_groups") cfg.leaving_groups_path = value;
    else if (key == "species") cfg.species_path = value;
    else if (key == "channel_k") cfg.channel_k = static_cast<int>(to_int(key, value));
    else if (key == "pool_cap") cfg.pool_cap = static_cast<size_t>(to_int(key, value));
    else if (key == "recombine_cap") cfg.recombine_cap = static_cast<int>(to_int(key, value));
    else if (key == "tournament_k") cfg.tournament_k = static_cast<int>(to_int(key, value));
    else if (key == "micro_rounds") cfg.micro_rounds = static_cast<int>(to_int(key, value));
    else if (key == "k_out") cfg.k_out = static_cast<int>(to_int(key, value));
    else if (key == "delta") cfg.delta = to_double(key, value);
    else if (key == "lambda") cfg.lambda = to_double(key, value);
    else if (key == "salience_w_act") cfg.salience.w_act = to_double(key, value);
    else if (key == "salience_w_electrophile") cfg.salience.w_electrophile = to_double(key, value);
    else if (key == "salience_w_nucleophile") cfg.salience.w_nucleophile = to_double(key, value);
    else if (key == "salience_w_neutral") cfg.salience.w_neutral = to_double(key, value);
    else if (key == "salience_w_freq") cfg.salience.w_freq = to_double(key, value);
    else if (key == "salience_top_n") cfg.salience.top_n = static_cast<int>(to_int(key, value));
    else if (key == "facet_fg") cfg.facet_weights.fg = to_double(key, value);
    else if (key == "facet_mcs") cfg.facet_weights.mcs = to_double(key, value);
    else if (key == "facet_fp") cfg.facet_weights.fp = to_double(key, value);
    else if (key == "mcs_budget") cfg.mcs_budget = to_int(key, value);
    else if (key == "eps") cfg.eps = to_double(key, value);
    else if (key == "beta") cfg.beta = to_double(key, value);
    else if (key == "group_g") cfg.group_g = static_cast<int>(to_int(key, value));
    else if (key == "lr") cfg.lr = to_double(key, value);
    else if (key == "train_steps") cfg.train_steps = static_cast<int>(to_int(key, value));
    else if (key == "seed") cfg.seed = static_cast<uint64_t>(to_int(key, value));
    else if (key == "judge_full") cfg.judge_full = value;
    else if (key == "judge_cat") cfg.judge_cat = value;
    else if (key == "judge_sol") cfg.judge_sol = value;
    else if (key == "judge_rea") cfg.judge_rea = value;
    else if (key == "feasibility_filter") cfg.feasibility_filter = to_bool(key, value);
    else bad_config("unknown config key: " + key);
  }
  cfg.validate();
  return cfg;
}

PipelineConfig PipelineConfig::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) bad_config("cannot open config file: " + path);
  return load(in);
}

void PipelineConfig::validate() const {
  in_range("channel_k", channel_k, 1, 100000);
  in_range("pool_cap", static_cast<double>(pool_cap), 1, 1000000);
  in_range("recombine_cap", recombine_cap, 0, 10000);
  in_range("tournament_k", tournament_k, 1, 100000);
  in_range("micro_rounds", micro_rounds, 0, 16);
  in_range("k_out", k_out, 1, 1000);
  in_range("delta", delta, 0.0, 1.0);
  in_range("lambda", lambda, 0.0, 100.0);
  in_range("salience_w_act", salience.w_act, 0.0, 100.0);
  in_range("salience_w_electrophile", salience.w_electrophile, 0.0, 100.0);
  in_range("salience_w_nucleophile", salience.w_nucleophile, 0.0, 100.0);
  in_range("salience_w_neutral", salience.w_neutral, 0.0, 100.0);
  in_range("salience_w_freq", salience.w_freq, 0.0, 100.0);
  in_range("salience_top_n", salience.top_n, 1, 64);
  in_range("facet_fg", facet_weights.fg, 0.0, 1.0);
  in_range("facet_mcs", facet_weights.mcs, 0.0, 1.0);
  in_range("facet_fp", facet_weights.fp, 0.0, 1.0);
  in_range("mcs_budget", static_cast<double>(mcs_budget), 1000, 1e9);
  in_range("eps", eps, 1e-9, 1e9);
  in_range("beta", beta, 0.0, 1e9);
  in_range("group_g", group_g, 2, 4096);
  in_range("lr", lr, 1e-12, 1000.0);
  in_range("train_steps", train_steps, 0, 1000000);
  check_judge("judge_full", judge_full);
  check_judge("judge_cat", judge_cat);
  check_judge("judge_sol", judge_sol);
  check_judge("judge_rea", judge_rea);
}

Assets Assets::load(const PipelineConfig& cfg, kb::IngestReport* ingest) {
  Assets a;
  if (cfg.fg_library_path.empty())
    bad_config("config key 'fg_library' is required");
  if (cfg.species_path.empty()) bad_config("config key 'species' is required");
  a.lib = tagger::FGLibrary::load_file(cfg.fg_library_path);
  a.dict = species::SpeciesDict::load_file(cfg.species_path);
  a.leaving = cfg.leaving_groups_path.empty()
                  ? balance::LeavingGroupTable::defaults()
                  : balance::LeavingGroupTable::load_file(cfg.leaving_groups_path);
  if (!cfg.base_path.empty()) {
    a.base = kb::ReactionBase::ingest_file(cfg.base_path, a.lib, ingest);
    a.base.facet_weights = cfg.facet_weights;
    a.base.mcs_options.budget = static_cast<long>(cfg.mcs_budget);
  }
  return a;
}

Reaction parse_reaction_spec(const std::string& spec) {
  size_t arrow = spec.find(">>");
  if (arrow == std::string::npos)
    throw PipelineError(PipelineError::Kind::BadInput,
                        "reaction spec must contain '>>': " + spec);
  auto split = [](const std::string& side) {
    std::vector<std::string> parts;
    std::istringstream in(side);
    std::string part;
    while (std::getline(in, part, '.'))
      if (!trim(part).empty()) parts.push_back(trim(part));
    return parts;
  };
  std::vector<std::string> reactants = split(spec.substr(0, arrow));
  std::vector<std::string> products = split(spec.substr(arrow + 2));
  if (reactants.empty() || products.empty())
    throw PipelineError(PipelineError::Kind::BadInput,
                        "reaction spec needs both sides: " + spec);
  return Reaction::parse(reactants, products);
}

ReactionReport build_report(const Reaction& x, const Assets& assets,
                            const PipelineConfig& cfg) {
  ReactionReport report;

  auto hits = tagger::tag_reactants(x.reactants, assets.lib);
  auto ranked = tagger::rank_salience(hits, assets.lib, cfg.salience);
  for (const auto& fg : ranked.main()) {
    report.main_fgs.push_back(fg.name);
    for (const auto& hit : fg.hits) report.fg_atoms[fg.name].push_back(hit.atom_indices);
  }

  std::vector<mol::Molecule> aux;
  std::vector<std::string> aux_names;
  try {
    auto hyps = balance::enumerate_byproducts(x.reactants, x.products, assets.leaving);
    if (!hyps.empty() && hyps[0].rule_name != "UnexplainedResidue")
      for (const auto& sp : hyps[0].species) {
        report.byproducts.push_back(sp.name);
        aux.push_back(sp.molecule);
        aux_names.push_back(sp.name);
      }
  } catch (const balance::BalanceError&) {
    // no by-product signal when products outweigh reactants
  }
  try {
    auto stoich = balance::balance_stoichiometry(x.reactants, x.products, aux);
    std::ostringstream eq;
    auto term = [&eq](int coeff, const std::string& text, bool& first) {
      if (coeff == 0) return;
      if (!first) eq << " + ";
      if (coeff != 1) eq << coeff << " ";
      eq << text;
      first = false;
    };
    bool first = true;
    for (size_t i = 0; i < x.reactant_smiles.size(); ++i)
      term(stoich.reactants[i], x.reactant_smiles[i], first);
    eq << " -> ";
    first = true;
    for (size_t i = 0; i < x.product_smiles.size(); ++i)
      term(stoich.products[i], x.product_smiles[i], first);
    for (size_t i = 0; i < aux_names.size(); ++i) term(stoich.aux[i], aux_names[i], first);
    report.balanced_equation = eq.str();
    report.balance_ok = true;
  } catch (const balance::BalanceError&) {
    report.balance_ok = false;
  }

  if (assets.base.empty()) {
    report.reaction_type = "unknown";
    report.type_confidence = 0.0;
  } else {
    kb::TypeCall call = assets.base.classify_reaction_type(x, cfg.channel_k);
    report.reaction_type = call.reaction_type;
    report.type_confidence = call.confidence;
    report.citations = call.evidence;
    report.signals =
        assets.base.signal_features(call.evidence, report.main_fgs, report.byproducts);
  }
  return report;
}

double survival_depth(const std::vector<debate::RoundLog>& bracket, int rounds,
                      const std::string& canonical_id) {
  if (rounds <= 0) return 1.0;
  int last = -1;
  for (const auto& round : bracket) {
    bool present = false;
    for (const auto& m : round.matches)
      if (m.a_id == canonical_id || m.b_id == canonical_id) present = true;
    for (const auto& id : round.byes)
      if (id == canonical_id) present = true;
    for (const auto& id : round.auto_advanced)
      if (id == canonical_id) present = true;
    if (present) last = std::max(last, round.round);
  }
  if (last < 0) return 1.0;  // never contested: advanced through every round
  return static_cast<double>(last) / static_cast<double>(rounds);
}

PoolStage build_pool_stage(const Reaction& x, const Assets& assets, const PipelineConfig& cfg) {
  PoolStage out;
  out.report = build_report(x, assets, cfg);
  out.channels = recall::recall_channels(assets.base, out.report.reaction_type, x.reactants,
                                         x.products, cfg.channel_k);
  std::vector<recall::MatchedEntry> matched = recall::merge_matched(assets.base, out.channels);
  matched = recall::feasibility_filter(matched, x, out.report, assets.dict,
                                       cfg.feasibility_filter);
  recall::RecombineOptions ro;
  ro.per_config_cap = cfg.recombine_cap;
  ro.limit = cfg.pool_cap;
  ro.feasibility = cfg.feasibility_filter;
  std::vector<recall::Candidate> similar =
      recall::recombine(assets.base, matched, out.report.reaction_type, out.report.main_fgs, x,
                        out.report, assets.dict, ro);
  out.pool = recall::build_pool(matched, similar, cfg.pool_cap);
  return out;
}

debate::TournamentResult tournament_stage(const Reaction& x, const PoolStage& stage,
                                          const Assets& assets, const PipelineConfig& cfg) {
  debate::MatchContext ctx = debate::make_context(x, stage.report, assets.base, assets.dict);
  debate::HeuristicJudge heuristic(ctx);
  std::vector<std::unique_ptr<debate::RemoteJudge>> remotes;
  auto backend = [&](const std::string& choice) -> debate::JudgeBackend* {
    if (choice == "heuristic") return &heuristic;
    // remote:<host>:<port>
    size_t c1 = choice.find(':'), c2 = choice.rfind(':');
    std::string host = choice.substr(c1 + 1, c2 - c1 - 1);
    int port = std::stoi(choice.substr(c2 + 1));
    remotes.push_back(std::make_unique<debate::RemoteJudge>(host, port));
    return remotes.back().get();
  };
  debate::Panel panel = {backend(cfg.judge_full), backend(cfg.judge_cat),
                         backend(cfg.judge_sol), backend(cfg.judge_rea)};
  return debate::tournament(stage.pool, panel, ctx, cfg.tournament_k, cfg.seed,
                            cfg.micro_rounds);
}

RecommendOutcome recommend(const Reaction& x, const Assets& assets, const PipelineConfig& cfg) {
  RecommendOutcome out;
  PoolStage stage = build_pool_stage(x, assets, cfg);
  out.report = stage.report;
  out.pool = stage.pool;
  out.tournament = tournament_stage(x, stage, assets, cfg);

  // per-record evidence shared by all winners
  std::map<std::string, EvidenceItem> items;
  auto absorb = [&](const EvidenceItem& item) {
    auto it = items.find(item.record_id);
    if (it == items.end() || item.combined > it->second.combined) items[item.record_id] = item;
  };
  for (const auto& item : stage.channels.s_r) absorb(item);
  for (const auto& item : stage.channels.s_p) absorb(item);

  std::vector<rationale::ScoredCandidate> scored;
  for (const auto& winner : out.tournament.winners) {
    rationale::ScoredCandidate sc;
    sc.candidate = winner;
    sc.rationale.s = balance::run_hard_checks(x, winner.config, out.report, assets.dict);
    for (const auto& id : winner.provenance) {
      const kb::ReactionRecord* rec = assets.base.record(id);
      if (!rec) continue;
      EvidenceItem item;
      auto it = items.find(id);
      if (it != items.end()) item = it->second;
      item.record_id = id;
      item.type_match = rec->reaction_type == out.report.reaction_type;
      sc.rationale.e.cited.push_back(item);
      for (const auto& sp : rec->condition.nonempty_species())
        sc.rationale.e.cooccurrence[assets.dict.canonical(sp)] += 1;
    }
    sc.rationale.derivation =
        rationale::build_derivation(out.report, sc.rationale.s, sc.rationale.e);
    double align = rationale::align_score(sc.rationale.e, winner.config, assets.base,
                                          assets.dict);
    bool coherent = rationale::coherence_check(sc.rationale.derivation, out.report,
                                               sc.rationale.s, sc.rationale.e);
    sc.validity = rationale::validate(sc.rationale.s.overall(), align, cfg.delta, coherent);
    double depth = survival_depth(out.tournament.bracket, out.tournament.rounds,
                                  winner.config.canonical_id());
    sc.u = rationale::utility(align, sc.rationale.s, depth);
    scored.push_back(std::move(sc));
  }
  out.recommendations = rationale::select_final(scored, cfg.k_out, cfg.lambda);
  return out;
}

ordered_json report_to_json(const Reaction& x, const ReactionReport& report) {
  ordered_json j;
  j["reactants"] = x.reactant_smiles;
  j["products"] = x.product_smiles;
  j["main_fgs"] = report.main_fgs;
  ordered_json atoms = ordered_json::object();
  for (const auto& [fg, hits] : report.fg_atoms) atoms[fg] = hits;
  j["fg_atoms"] = atoms;
  j["balanced_equation"] = report.balanced_equation;
  j["balance_ok"] = report.balance_ok;
  j["byproducts"] = report.byproducts;
  j["reaction_type"] = report.reaction_type;
  j["type_confidence"] = report.type_confidence;
  ordered_json cites = ordered_json::array();
  for (const auto& item : report.citations.cited) cites.push_back(evidence_item_to_json(item));
  j["citations"] = cites;
  ordered_json signals;
  signals["s_type"] = report.signals.s_type;
  signals["s_role"] = report.signals.s_role;
  signals["s_byprod"] = report.signals.s_byprod;
  j["signals"] = signals;
  return j;
}

ordered_json pool_to_json(const recall::CandidatePool& pool) {
  ordered_json j;
  j["cap"] = pool.cap;
  ordered_json cands = ordered_json::array();
  for (const auto& c : pool.candidates) {
    ordered_json e;
    e["config"] = config_to_json(c.config);
    e["origin"] = c.origin == recall::Candidate::Origin::Matched ? "matched" : "similar";
    e["provenance"] = c.provenance;
    e["priority"] = c.priority;
    e["channel_hits"] = c.channel_hits;
    cands.push_back(std::move(e));
  }
  j["candidates"] = cands;
  return j;
}

ordered_json bracket_to_json(const debate::TournamentResult& t) {
  ordered_json j;
  j["rounds"] = t.rounds;
  ordered_json winners = ordered_json::array();
  for (const auto& w : t.winners) winners.push_back(w.config.canonical_id());
  j["winners"] = winners;
  ordered_json rounds = ordered_json::array();
  for (const auto& r : t.bracket) {
    ordered_json rj;
    rj["round"] = r.round;
    ordered_json matches = ordered_json::array();
    for (const auto& m : r.matches) {
      ordered_json mj;
      mj["match_id"] = m.match_id;
      mj["a"] = m.a_id;
      mj["b"] = m.b_id;
      mj["winner"] = std::string(1, m.winner);
      mj["tally_a"] = m.tally_a;
      mj["tally_b"] = m.tally_b;
      mj["path"] = debate::to_string(m.path);
      mj["abstentions"] = m.abstentions;
      matches.push_back(std::move(mj));
    }
    rj["matches"] = matches;
    rj["byes"] = r.byes;
    rj["auto_advanced"] = r.auto_advanced;
    rounds.push_back(std::move(rj));
  }
  j["bracket"] = rounds;
  return j;
}

ordered_json board_to_json(const debate::MemoryBoard& board) {
  ordered_json matches = ordered_json::array();
  for (const auto& m : board.matches) {
    ordered_json mj;
    mj["match_id"] = m.match_id;
    ordered_json posts = ordered_json::array();
    for (const auto& p : m.posts) {
      ordered_json pj;
      pj["agent"] = debate::to_string(p.agent);
      pj["micro_round"] = p.micro_round;
      pj["choice"] = std::string(1, p.choice);
      pj["confidence"] = p.confidence;
      pj["summary"] = p.summary;
      pj["citations"] = p.citations;
      posts.push_back(std::move(pj));
    }
    mj["posts"] = posts;
    mj["facilitator"] = m.facilitator;
    matches.push_back(std::move(mj));
  }
  ordered_json j;
  j["matches"] = matches;
  return j;
}

ordered_json recommendations_to_json(const Reaction& x,
                                     const rationale::RecommendationSet& rs) {
  ordered_json j;
  j["reactants"] = x.reactant_smiles;
  j["products"] = x.product_smiles;
  j["k_out"] = rs.k_out;
  j["lambda"] = rs.lambda;
  j["objective"] = rs.objective;
  ordered_json entries = ordered_json::array();
  for (const auto& e : rs.entries) {
    ordered_json ej;
    ej["config"] = config_to_json(e.candidate.config);
    ej["utility"] = e.u;
    ordered_json vj;
    vj["constr_ok"] = e.validity.constr_ok;
    vj["align"] = e.validity.align;
    vj["delta"] = e.validity.delta;
    vj["coherent_ok"] = e.validity.coherent_ok;
    vj["valid"] = e.validity.valid;
    ej["validity"] = vj;
    ordered_json rj;
    ordered_json checks = ordered_json::array();
    for (const auto& c : e.rationale.s.checks) {
      ordered_json cj;
      cj["name"] = c.name;
      cj["pass"] = c.pass;
      cj["message"] = c.message;
      checks.push_back(std::move(cj));
    }
    rj["checks"] = checks;
    rj["evidence"] = e.rationale.e.cited_ids();
    ordered_json claims = ordered_json::array();
    for (const auto& claim : e.rationale.derivation) {
      ordered_json cj;
      cj["text"] = claim.text;
      cj["support"] = claim.support;
      claims.push_back(std::move(cj));
    }
    rj["claims"] = claims;
    ej["rationale"] = rj;
    entries.push_back(std::move(ej));
  }
  j["entries"] = entries;
  return j;
}

std::string dump_document(const ordered_json& doc) { return doc.dump(2) + "\n"; }

void write_document(const std::string& path, const ordered_json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw PipelineError(PipelineError::Kind::BadInput, "cannot write document: " + path);
  out << dump_document(doc);
}

std::string store_run(const std::string& out_dir, const std::string& run_name,
                      const Reaction& x, const RecommendOutcome& outcome) {
  std::filesystem::path dir = std::filesystem::path(out_dir) / run_name;
  std::filesystem::create_directories(dir);
  write_document((dir / "report.json").string(), report_to_json(x, outcome.report));
  write_document((dir / "pool.json").string(), pool_to_json(outcome.pool));
  write_document((dir / "bracket.json").string(), bracket_to_json(outcome.tournament));
  write_document((dir / "board.json").string(), board_to_json(outcome.tournament.board));
  write_document((dir / "recommendations.json").string(),
                 recommendations_to_json(x, outcome.recommendations));
  return dir.string();
}

std::vector<TestQuery> load_test_set(std::istream& in) {
  std::vector<TestQuery> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      TestQuery q;
      q.id = j.at("id").get<std::string>();
      q.x = Reaction::parse(j.at("reactants").get<std::vector<std::string>>(),
                            j.at("products").get<std::vector<std::string>>());
      for (int s = 0; s < ConditionConfig::kSlots; ++s) {
        const std::string& name = ConditionConfig::slot_names()[s];
        if (j.contains(name)) q.label.slot(s) = j[name].get<std::string>();
      }
      out.push_back(std::move(q));
    } catch (const std::exception& e) {
      throw PipelineError(PipelineError::Kind::MalformedTestSet,
                          "test set line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (out.empty())
    throw PipelineError(PipelineError::Kind::MalformedTestSet, "test set is empty");
  return out;
}

std::vector<TestQuery> load_test_set_file(const std::string& path) {
  std::ifstream in(path);
  if (!in)
    throw PipelineError(PipelineError::Kind::MalformedTestSet,
                        "cannot open test set: " + path);
  return load_test_set(in);
}

EvalResult evaluate(const std::vector<TestQuery>& queries,
                    const std::map<std::string, std::vector<ConditionConfig>>& predictions,
                    const species::SpeciesDict& dict, const std::vector<int>& ks) {
  EvalResult r;
  r.ks = ks;
  r.evaluated = static_cast<int>(queries.size());
  std::map<std::string, std::map<int, int>> hits;
  for (const auto& q : queries) {
    auto it = predictions.find(q.id);
    if (it == predictions.end())
      throw PipelineError(PipelineError::Kind::MalformedTestSet,
                          "no predictions for query " + q.id);
    for (int s = 0; s < ConditionConfig::kSlots; ++s) {
      const std::string& slot = ConditionConfig::slot_names()[s];
      std::string label = dict.canonical(q.label.slot(s));
      for (int k : ks) {
        size_t depth = std::min(static_cast<size_t>(k), it->second.size());
        bool hit = false;
        for (size_t i = 0; i < depth && !hit; ++i)
          hit = dict.canonical(it->second[i].slot(s)) == label;
        if (hit) hits[slot][k] += 1;
      }
    }
  }
  for (int s = 0; s < ConditionConfig::kSlots; ++s) {
    const std::string& slot = ConditionConfig::slot_names()[s];
    for (int k : ks)
      r.accuracy[slot][k] =
          queries.empty() ? 0.0
                          : 100.0 * hits[slot][k] / static_cast<double>(queries.size());
  }
  return r;
}

std::string format_eval_table(const EvalResult& r) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "slot";
  for (int k : r.ks) out << std::right << std::setw(10) << ("hit@" + std::to_string(k));
  out << "\n";
  for (int s = 0; s < ConditionConfig::kSlots; ++s) {
    const std::string& slot = ConditionConfig::slot_names()[s];
    out << std::left << std::setw(12) << slot;
    for (int k : r.ks) {
      std::ostringstream cell;
      cell << std::fixed << std::setprecision(1) << r.accuracy.at(slot).at(k);
      out << std::right << std::setw(10) << cell.str();
    }
    out << "\n";
  }
  out << "queries: " << r.evaluated << "\n";
  out << "matching: " << r.matching << "\n";
  return out.str();
}

}  // namespace chemrec::pipeline
