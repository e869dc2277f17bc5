#pragma once

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "chemrec/knowbase.hpp"
#include "chemrec/recall.hpp"
#include "chemrec/species.hpp"
#include "chemrec/types.hpp"

// Tournament selection: four-agent debate matches with micro-round
// refinement, majority voting and seeded knockout rounds.
namespace chemrec::debate {

class DebateError : public std::runtime_error {
 public:
  enum class Kind { PoolTooSmall, BackendUnavailable };
  DebateError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

enum class AgentRole { Full, Cat, Sol, Rea };
constexpr std::array<AgentRole, 4> kAgentOrder = {AgentRole::Full, AgentRole::Cat,
                                                  AgentRole::Sol, AgentRole::Rea};
std::string to_string(AgentRole r);

struct AgentDecision {
  AgentRole agent = AgentRole::Full;
  char choice = 'A';  // 'A' or 'B'
  double confidence = 0.5;
  Evidence citations;
  std::string rationale;
  double score_a = 0.0;  // per-option assessments behind the choice
  double score_b = 0.0;
};

struct Post {
  AgentRole agent = AgentRole::Full;
  int micro_round = 0;
  char choice = 'A';
  double confidence = 0.5;
  std::string summary;
  std::vector<std::string> citations;
};

struct MemoryBoard {
  struct MatchLog {
    std::string match_id;
    std::vector<Post> posts;  // append-only, facilitator order
    std::vector<std::string> facilitator;
  };
  std::vector<MatchLog> matches;

  MatchLog& open_match(const std::string& match_id);
};

enum class TiePath { Majority, ConfidenceSum, CanonicalId };
std::string to_string(TiePath p);

struct MatchOutcome {
  std::string match_id;
  std::string a_id;  // canonical config ids
  std::string b_id;
  std::vector<AgentDecision> decisions;  // one per non-abstaining agent
  int abstentions = 0;
  char winner = 'A';
  int tally_a = 0;
  int tally_b = 0;
  TiePath path = TiePath::Majority;
};

// shared read-only inputs for every match of a run
struct MatchContext {
  const Reaction* x = nullptr;
  const ReactionReport* report = nullptr;
  const kb::ReactionBase* base = nullptr;
  const species::SpeciesDict* dict = nullptr;
  std::string tau;
  std::vector<std::string> main_fgs;
  double uncertainty_threshold = 0.65;
};

MatchContext make_context(const Reaction& x, const ReactionReport& report,
                          const kb::ReactionBase& base, const species::SpeciesDict& dict);

class JudgeBackend {
 public:
  virtual ~JudgeBackend() = default;
  // nullopt = abstention (backend failure)
  virtual std::optional<AgentDecision> init_assess(AgentRole role, const recall::Candidate& a,
                                                   const recall::Candidate& b,
                                                   const MatchContext& ctx,
                                                   const std::string& match_id) = 0;
  virtual std::optional<AgentDecision> refine(AgentRole role, const AgentDecision& prior,
                                              const recall::Candidate& a,
                                              const recall::Candidate& b,
                                              const std::vector<Post>& peers,
                                              const MatchContext& ctx,
                                              const std::string& match_id, int u) = 0;
};

// Deterministic judge scoring slot choices by co-occurrence rank with
// role-specific slot weights; hard checks enter during refinement.
class HeuristicJudge : public JudgeBackend {
 public:
  explicit HeuristicJudge(const MatchContext& ctx);

  // signal-only option assessment, role-weighted over slots
  double option_score(AgentRole role, const recall::Candidate& c) const;
  bool hard_checks_pass(const ConditionConfig& c) const;

  std::optional<AgentDecision> init_assess(AgentRole role, const recall::Candidate& a,
                                           const recall::Candidate& b, const MatchContext& ctx,
                                           const std::string& match_id) override;
  std::optional<AgentDecision> refine(AgentRole role, const AgentDecision& prior,
                                      const recall::Candidate& a, const recall::Candidate& b,
                                      const std::vector<Post>& peers, const MatchContext& ctx,
                                      const std::string& match_id, int u) override;

 private:
  double slot_score(int slot, const std::string& value) const;

  const MatchContext* ctx_;
  std::array<std::vector<std::string>, ConditionConfig::kSlots> alternatives_;
  mutable std::map<std::string, bool> check_cache_;
};

// Replays scripted decisions in order; an exhausted script abstains.
class ReplayJudge : public JudgeBackend {
 public:
  explicit ReplayJudge(std::vector<AgentDecision> script) : script_(std::move(script)) {}

  std::optional<AgentDecision> init_assess(AgentRole role, const recall::Candidate& a,
                                           const recall::Candidate& b, const MatchContext& ctx,
                                           const std::string& match_id) override;
  std::optional<AgentDecision> refine(AgentRole role, const AgentDecision& prior,
                                      const recall::Candidate& a, const recall::Candidate& b,
                                      const std::vector<Post>& peers, const MatchContext& ctx,
                                      const std::string& match_id, int u) override;

 private:
  std::vector<AgentDecision> script_;
  size_t next_ = 0;
};

// Single request/response JSON judge over HTTP; timeout means abstention.
class RemoteJudge : public JudgeBackend {
 public:
  RemoteJudge(std::string host, int port, std::string path = "/judge",
              int timeout_seconds = 5);

  std::optional<AgentDecision> init_assess(AgentRole role, const recall::Candidate& a,
                                           const recall::Candidate& b, const MatchContext& ctx,
                                           const std::string& match_id) override;
  std::optional<AgentDecision> refine(AgentRole role, const AgentDecision& prior,
                                      const recall::Candidate& a, const recall::Candidate& b,
                                      const std::vector<Post>& peers, const MatchContext& ctx,
                                      const std::string& match_id, int u) override;

 private:
  std::optional<AgentDecision> request(AgentRole role, const recall::Candidate& a,
                                       const recall::Candidate& b,
                                       const std::vector<Post>& peers, const MatchContext& ctx,
                                       const std::string& match_id, int u);

  std::string host_;
  int port_;
  std::string path_;
  int timeout_seconds_;
};

using Panel = std::array<JudgeBackend*, 4>;  // indexed by kAgentOrder

MatchOutcome debate_match(const recall::Candidate& a, const recall::Candidate& b,
                          const Panel& panel, const MatchContext& ctx, int micro_rounds,
                          MemoryBoard& board, const std::string& match_id);

// majority, then confidence sums, then lexicographic canonical id
std::tuple<char, std::pair<int, int>, TiePath> majority_vote(
    const std::vector<AgentDecision>& decisions, const std::string& a_id,
    const std::string& b_id);

struct RoundLog {
  int round = 0;
  std::vector<MatchOutcome> matches;
  std::vector<std::string> byes;            // canonical ids advancing unplayed
  std::vector<std::string> auto_advanced;   // partial-round unpaired survivors
};

struct TournamentResult {
  std::vector<recall::Candidate> winners;  // ordered: priority desc, id asc
  int rounds = 0;
  std::vector<RoundLog> bracket;
  MemoryBoard board;
};

TournamentResult tournament(const recall::CandidatePool& pool, const Panel& panel,
                            const MatchContext& ctx, int k = 50, uint64_t seed = 0,
                            int micro_rounds = 2);

}  // namespace chemrec::debate
