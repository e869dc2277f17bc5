#include "chemrec/debate.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "chemrec/balance.hpp"

namespace chemrec::debate {

std::string to_string(AgentRole r) {
  switch (r) {
    case AgentRole::Full: return "Full";
    case AgentRole::Cat: return "Cat";
    case AgentRole::Sol: return "Sol";
    default: return "Rea";
  }
}

std::string to_string(TiePath p) {
  switch (p) {
    case TiePath::Majority: return "majority";
    case TiePath::ConfidenceSum: return "confidence-sum";
    default: return "canonical-id";
  }
}

MemoryBoard::MatchLog& MemoryBoard::open_match(const std::string& match_id) {
  for (auto& m : matches)
    if (m.match_id == match_id) return m;
  matches.push_back({match_id, {}, {}});
  return matches.back();
}

MatchContext make_context(const Reaction& x, const ReactionReport& report,
                          const kb::ReactionBase& base, const species::SpeciesDict& dict) {
  MatchContext ctx;
  ctx.x = &x;
  ctx.report = &report;
  ctx.base = &base;
  ctx.dict = &dict;
  ctx.tau = report.reaction_type;
  ctx.main_fgs = report.main_fgs;
  return ctx;
}

// ---- heuristic judge -----------------------------------------------------

namespace {

std::array<double, ConditionConfig::kSlots> role_weights(AgentRole role) {
  // catalyst1, solvent1, solvent2, reagent1, reagent2
  switch (role) {
    case AgentRole::Cat: return {3.0, 0.5, 0.5, 0.5, 0.5};
    case AgentRole::Sol: return {0.5, 3.0, 3.0, 0.5, 0.5};
    case AgentRole::Rea: return {0.5, 0.5, 0.5, 3.0, 3.0};
    default: return {1.0, 1.0, 1.0, 1.0, 1.0};
  }
}

double pair_confidence(double sa, double sb) {
  double margin = std::abs(sa - sb) / (sa + sb + 1e-9);
  return std::min(1.0, 0.5 + margin);
}

Evidence provenance_evidence(const recall::Candidate& a, const recall::Candidate& b) {
  Evidence ev;
  std::set<std::string> ids(a.provenance.begin(), a.provenance.end());
  ids.insert(b.provenance.begin(), b.provenance.end());
  for (const auto& id : ids) {
    EvidenceItem item;
    item.record_id = id;
    ev.cited.push_back(item);
  }
  return ev;
}

}  // namespace

HeuristicJudge::HeuristicJudge(const MatchContext& ctx) : ctx_(&ctx) {
  for (int s = 0; s < ConditionConfig::kSlots; ++s)
    alternatives_[s] =
        ctx.base->cooccurring_alternatives(ConditionConfig::slot_names()[s], ctx.tau,
                                           ctx.main_fgs);
}

double HeuristicJudge::slot_score(int slot, const std::string& value) const {
  if (value.empty()) return 0.3;
  const auto& alts = alternatives_[slot];
  for (size_t i = 0; i < alts.size(); ++i)
    if (alts[i] == value) return 1.0 / static_cast<double>(1 + i);
  return 0.05;
}

double HeuristicJudge::option_score(AgentRole role, const recall::Candidate& c) const {
  auto w = role_weights(role);
  double num = 0.0, den = 0.0;
  for (int s = 0; s < ConditionConfig::kSlots; ++s) {
    num += w[s] * slot_score(s, c.config.slot(s));
    den += w[s];
  }
  double score = num / den;
  score += 0.15 * std::min(1.0, c.priority) + 0.05 * c.channel_hits;
  return score;
}

bool HeuristicJudge::hard_checks_pass(const ConditionConfig& c) const {
  auto it = check_cache_.find(c.canonical_id());
  if (it != check_cache_.end()) return it->second;
  bool ok = balance::run_hard_checks(*ctx_->x, c, *ctx_->report, *ctx_->dict).overall();
  check_cache_.emplace(c.canonical_id(), ok);
  return ok;
}

std::optional<AgentDecision> HeuristicJudge::init_assess(AgentRole role,
                                                         const recall::Candidate& a,
                                                         const recall::Candidate& b,
                                                         const MatchContext&,
                                                         const std::string&) {
  AgentDecision d;
  d.agent = role;
  d.score_a = option_score(role, a);
  d.score_b = option_score(role, b);
  if (d.score_a > d.score_b)
    d.choice = 'A';
  else if (d.score_b > d.score_a)
    d.choice = 'B';
  else
    d.choice = a.config.canonical_id() < b.config.canonical_id() ? 'A' : 'B';
  d.confidence = pair_confidence(d.score_a, d.score_b);
  d.citations = provenance_evidence(a, b);
  if (d.citations.empty()) d.confidence = 0.5;  // neutral prior without evidence
  std::ostringstream os;
  os << to_string(role) << " initial: " << d.score_a << " vs " << d.score_b;
  d.rationale = os.str();
  return d;
}

std::optional<AgentDecision> HeuristicJudge::refine(AgentRole role, const AgentDecision& prior,
                                                    const recall::Candidate& a,
                                                    const recall::Candidate& b,
                                                    const std::vector<Post>& peers,
                                                    const MatchContext& ctx,
                                                    const std::string&, int u) {
  int disagree = 0;
  for (const auto& p : peers)
    if (p.choice != prior.choice) ++disagree;
  bool peers_against = !peers.empty() && 2 * disagree > static_cast<int>(peers.size());
  if (prior.confidence >= ctx.uncertainty_threshold && !peers_against) return prior;

  // uncertainty path: re-run the constraint checks and widen the citations
  AgentDecision d = prior;
  d.score_a = option_score(role, a);
  d.score_b = option_score(role, b);
  if (!hard_checks_pass(a.config)) d.score_a *= 0.2;
  if (!hard_checks_pass(b.config)) d.score_b *= 0.2;
  if (d.score_a > d.score_b)
    d.choice = 'A';
  else if (d.score_b > d.score_a)
    d.choice = 'B';
  else
    d.choice = a.config.canonical_id() < b.config.canonical_id() ? 'A' : 'B';
  d.confidence = pair_confidence(d.score_a, d.score_b);

  std::set<std::string> have;
  for (const auto& item : d.citations.cited) have.insert(item.record_id);
  for (const auto& item : ctx.report->citations.cited)
    if (have.insert(item.record_id).second) d.citations.cited.push_back(item);
  std::ostringstream os;
  os << to_string(role) << " refine u" << u << ": " << d.score_a << " vs " << d.score_b;
  d.rationale = os.str();
  return d;
}

// ---- replay judge --------------------------------------------------------

std::optional<AgentDecision> ReplayJudge::init_assess(AgentRole role, const recall::Candidate&,
                                                      const recall::Candidate&,
                                                      const MatchContext&, const std::string&) {
  if (next_ >= script_.size()) return std::nullopt;
  AgentDecision d = script_[next_++];
  d.agent = role;
  return d;
}

std::optional<AgentDecision> ReplayJudge::refine(AgentRole, const AgentDecision& prior,
                                                 const recall::Candidate&,
                                                 const recall::Candidate&,
                                                 const std::vector<Post>&, const MatchContext&,
                                                 const std::string&, int) {
  return prior;
}

// ---- remote judge --------------------------------------------------------

RemoteJudge::RemoteJudge(std::string host, int port, std::string path, int timeout_seconds)
    : host_(std::move(host)), port_(port), path_(std::move(path)),
      timeout_seconds_(timeout_seconds) {}

namespace {

nlohmann::json config_json(const ConditionConfig& c) {
  nlohmann::json j;
  for (int s = 0; s < ConditionConfig::kSlots; ++s)
    j[ConditionConfig::slot_names()[s]] = c.slot(s);
  return j;
}

}  // namespace

std::optional<AgentDecision> RemoteJudge::request(AgentRole role, const recall::Candidate& a,
                                                  const recall::Candidate& b,
                                                  const std::vector<Post>& peers,
                                                  const MatchContext& ctx,
                                                  const std::string& match_id, int u) {
  nlohmann::json req;
  req["match_id"] = match_id;
  req["agent_role"] = to_string(role);
  req["option_a"] = config_json(a.config);
  req["option_b"] = config_json(b.config);
  req["reaction_report"] = {{"reaction_type", ctx.tau},
                            {"main_fgs", ctx.main_fgs},
                            {"byproducts", ctx.report->byproducts}};
  std::vector<std::string> cited;
  for (const auto& id : a.provenance) cited.push_back(id);
  for (const auto& id : b.provenance) cited.push_back(id);
  req["evidence"] = cited;
  nlohmann::json posts = nlohmann::json::array();
  for (const auto& p : peers)
    posts.push_back({{"agent", to_string(p.agent)},
                     {"micro_round", p.micro_round},
                     {"choice", std::string(1, p.choice)},
                     {"summary", p.summary}});
  req["peer_posts"] = posts;
  req["micro_round"] = u;

  httplib::Client client(host_, port_);
  client.set_connection_timeout(timeout_seconds_, 0);
  client.set_read_timeout(timeout_seconds_, 0);
  auto res = client.Post(path_, req.dump(), "application/json");
  if (!res || res->status != 200) return std::nullopt;
  try {
    nlohmann::json j = nlohmann::json::parse(res->body);
    std::string decision = j.at("decision").get<std::string>();
    if (decision != "A" && decision != "B") return std::nullopt;
    AgentDecision d;
    d.agent = role;
    d.choice = decision[0];
    d.confidence = std::clamp(j.at("confidence").get<double>(), 0.0, 1.0);
    for (const auto& id : j.value("citations", std::vector<std::string>{})) {
      EvidenceItem item;
      item.record_id = id;
      d.citations.cited.push_back(item);
    }
    d.rationale = j.value("rationale", "");
    return d;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

std::optional<AgentDecision> RemoteJudge::init_assess(AgentRole role, const recall::Candidate& a,
                                                      const recall::Candidate& b,
                                                      const MatchContext& ctx,
                                                      const std::string& match_id) {
  return request(role, a, b, {}, ctx, match_id, 0);
}

std::optional<AgentDecision> RemoteJudge::refine(AgentRole role, const AgentDecision&,
                                                 const recall::Candidate& a,
                                                 const recall::Candidate& b,
                                                 const std::vector<Post>& peers,
                                                 const MatchContext& ctx,
                                                 const std::string& match_id, int u) {
  return request(role, a, b, peers, ctx, match_id, u);
}

// ---- match orchestration -------------------------------------------------

std::tuple<char, std::pair<int, int>, TiePath> majority_vote(
    const std::vector<AgentDecision>& decisions, const std::string& a_id,
    const std::string& b_id) {
  int na = 0, nb = 0;
  double ca = 0.0, cb = 0.0;
  for (const auto& d : decisions) {
    if (d.choice == 'A') {
      ++na;
      ca += d.confidence;
    } else {
      ++nb;
      cb += d.confidence;
    }
  }
  if (na != nb) return {na > nb ? 'A' : 'B', {na, nb}, TiePath::Majority};
  if (ca != cb) return {ca > cb ? 'A' : 'B', {na, nb}, TiePath::ConfidenceSum};
  return {a_id < b_id ? 'A' : 'B', {na, nb}, TiePath::CanonicalId};
}

MatchOutcome debate_match(const recall::Candidate& a, const recall::Candidate& b,
                          const Panel& panel, const MatchContext& ctx, int micro_rounds,
                          MemoryBoard& board, const std::string& match_id) {
  MatchOutcome out;
  out.match_id = match_id;
  out.a_id = a.config.canonical_id();
  out.b_id = b.config.canonical_id();
  auto& log = board.open_match(match_id);

  auto post_of = [](const AgentDecision& d, int u) {
    Post p;
    p.agent = d.agent;
    p.micro_round = u;
    p.choice = d.choice;
    p.confidence = d.confidence;
    p.summary = d.rationale;
    for (const auto& item : d.citations.cited) p.citations.push_back(item.record_id);
    return p;
  };

  std::array<std::optional<AgentDecision>, 4> drafts;
  for (size_t i = 0; i < kAgentOrder.size(); ++i) {
    drafts[i] = panel[i]->init_assess(kAgentOrder[i], a, b, ctx, match_id);
    if (drafts[i]) {
      log.posts.push_back(post_of(*drafts[i], 0));
    } else {
      log.facilitator.push_back(to_string(kAgentOrder[i]) + " abstained at init");
    }
  }
  for (int u = 1; u <= micro_rounds; ++u) {
    for (size_t i = 0; i < kAgentOrder.size(); ++i) {
      if (!drafts[i]) continue;
      std::vector<Post> peers;
      for (const auto& p : log.posts)
        if (p.agent != kAgentOrder[i]) peers.push_back(p);
      drafts[i] = panel[i]->refine(kAgentOrder[i], *drafts[i], a, b, peers, ctx, match_id, u);
      if (drafts[i]) {
        log.posts.push_back(post_of(*drafts[i], u));
      } else {
        log.facilitator.push_back(to_string(kAgentOrder[i]) + " abstained at round " +
                                  std::to_string(u));
      }
    }
  }
  for (const auto& d : drafts) {
    if (d)
      out.decisions.push_back(*d);
    else
      ++out.abstentions;
  }
  auto [winner, tally, path] = majority_vote(out.decisions, out.a_id, out.b_id);
  out.winner = winner;
  out.tally_a = tally.first;
  out.tally_b = tally.second;
  out.path = path;
  log.facilitator.push_back("winner " + std::string(1, winner) + " by " + to_string(path) +
                            " (" + std::to_string(tally.first) + "-" +
                            std::to_string(tally.second) + ")");
  return out;
}

// ---- tournament ----------------------------------------------------------

TournamentResult tournament(const recall::CandidatePool& pool, const Panel& panel,
                            const MatchContext& ctx, int k, uint64_t seed, int micro_rounds) {
  if (static_cast<int>(pool.size()) < k || k < 1)
    throw DebateError(DebateError::Kind::PoolTooSmall,
                      "pool of " + std::to_string(pool.size()) +
                          " cannot yield top-" + std::to_string(k));

  TournamentResult result;
  std::vector<recall::Candidate> survivors = pool.candidates;

  auto lower_priority = [](const recall::Candidate& x, const recall::Candidate& y) {
    if (x.priority != y.priority) return x.priority < y.priority;
    return x.config.canonical_id() < y.config.canonical_id();
  };

  while (static_cast<int>(survivors.size()) > k) {
    ++result.rounds;
    RoundLog round_log;
    round_log.round = result.rounds;
    std::mt19937_64 rng(seed + static_cast<uint64_t>(result.rounds));

    size_t n = survivors.size();
    size_t after_full = (n + 1) / 2;
    std::vector<recall::Candidate> paired, advanced;

    if (static_cast<int>(after_full) < k) {
      // a full round would undershoot: pair only the lowest-priority
      // 2*(n-k) survivors, the rest advance unplayed
      size_t need_pairs = n - static_cast<size_t>(k);
      std::vector<recall::Candidate> sorted = survivors;
      std::sort(sorted.begin(), sorted.end(), lower_priority);
      paired.assign(sorted.begin(), sorted.begin() + 2 * need_pairs);
      advanced.assign(sorted.begin() + 2 * need_pairs, sorted.end());
      for (const auto& c : advanced) round_log.auto_advanced.push_back(c.config.canonical_id());
      std::shuffle(paired.begin(), paired.end(), rng);
    } else {
      paired = survivors;
      std::shuffle(paired.begin(), paired.end(), rng);
      if (paired.size() % 2 == 1) {
        // bye to the highest-priority survivor
        size_t best = 0;
        for (size_t i = 1; i < paired.size(); ++i)
          if (lower_priority(paired[best], paired[i])) best = i;
        advanced.push_back(paired[best]);
        round_log.byes.push_back(paired[best].config.canonical_id());
        paired.erase(paired.begin() + best);
      }
    }

    std::vector<recall::Candidate> next = advanced;
    for (size_t i = 0; i + 1 < paired.size(); i += 2) {
      std::string match_id =
          "r" + std::to_string(result.rounds) + "-m" + std::to_string(i / 2);
      MatchOutcome out = debate_match(paired[i], paired[i + 1], panel, ctx, micro_rounds,
                                      result.board, match_id);
      next.push_back(out.winner == 'A' ? paired[i] : paired[i + 1]);
      round_log.matches.push_back(std::move(out));
    }
    result.bracket.push_back(std::move(round_log));
    survivors = std::move(next);
  }

  std::sort(survivors.begin(), survivors.end(),
            [&](const recall::Candidate& x, const recall::Candidate& y) {
              return lower_priority(y, x);
            });
  result.winners = std::move(survivors);
  return result;
}

}  // namespace chemrec::debate
