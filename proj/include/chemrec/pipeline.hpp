#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "chemrec/balance.hpp"
#include "chemrec/debate.hpp"
#include "chemrec/knowbase.hpp"
#include "chemrec/rationale.hpp"
#include "chemrec/recall.hpp"
#include "chemrec/species.hpp"
#include "chemrec/tagger.hpp"
#include "chemrec/types.hpp"

// Orchestration: config loading, General-Chemist report assembly, the full
// recommend pipeline, per-run memory store documents and top-k evaluation.
namespace chemrec::pipeline {

using ordered_json = nlohmann::ordered_json;

class PipelineError : public std::runtime_error {
 public:
  enum class Kind { BadConfig, MalformedTestSet, BadInput };
  PipelineError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct PipelineConfig {
  // asset paths
  std::string base_path;
  std::string fg_library_path;
  std::string leaving_groups_path;
  std::string species_path;

  // numeric knobs
  int channel_k = kb::ReactionBase::kDefaultK;
  size_t pool_cap = recall::kPoolCap;
  int recombine_cap = 8;
  int tournament_k = 50;
  int micro_rounds = 2;
  int k_out = rationale::kDefaultKOut;
  double delta = rationale::kDefaultDelta;
  double lambda = rationale::kDefaultLambda;
  tagger::SalienceWeights salience;
  kb::FacetWeights facet_weights;
  long long mcs_budget = 200000;
  double eps = 0.2;
  double beta = 0.01;
  int group_g = 8;
  double lr = 0.5;
  int train_steps = 200;
  uint64_t seed = 0;

  // one of: heuristic, remote:<host>:<port>
  std::string judge_full = "heuristic";
  std::string judge_cat = "heuristic";
  std::string judge_sol = "heuristic";
  std::string judge_rea = "heuristic";
  bool feasibility_filter = true;

  // key=value lines, '#' comments; unknown keys and out-of-range values throw
  static PipelineConfig load(std::istream& in);
  static PipelineConfig load_file(const std::string& path);
  void validate() const;
};

// loaded assets shared by every subcommand
struct Assets {
  tagger::FGLibrary lib;
  species::SpeciesDict dict;
  balance::LeavingGroupTable leaving;
  kb::ReactionBase base;

  static Assets load(const PipelineConfig& cfg, kb::IngestReport* ingest = nullptr);
};

// "A.B>>C.D" -> Reaction (components split on '.')
Reaction parse_reaction_spec(const std::string& spec);

ReactionReport build_report(const Reaction& x, const Assets& assets,
                            const PipelineConfig& cfg);

struct PoolStage {
  ReactionReport report;
  recall::Channels channels;
  recall::CandidatePool pool;
};

// report + recall channels + feasibility filter + recombination + capped pool
PoolStage build_pool_stage(const Reaction& x, const Assets& assets, const PipelineConfig& cfg);

// seeded knockout over the pool with the configured judge panel
debate::TournamentResult tournament_stage(const Reaction& x, const PoolStage& stage,
                                          const Assets& assets, const PipelineConfig& cfg);

struct RecommendOutcome {
  ReactionReport report;
  recall::CandidatePool pool;
  debate::TournamentResult tournament;
  rationale::RecommendationSet recommendations;
};

// survivors' normalized depth: last round present / total rounds (rounds are 1-based)
double survival_depth(const std::vector<debate::RoundLog>& bracket, int rounds,
                      const std::string& canonical_id);

RecommendOutcome recommend(const Reaction& x, const Assets& assets, const PipelineConfig& cfg);

// ---- memory store documents ---------------------------------------------

ordered_json report_to_json(const Reaction& x, const ReactionReport& report);
ordered_json pool_to_json(const recall::CandidatePool& pool);
ordered_json bracket_to_json(const debate::TournamentResult& t);
ordered_json board_to_json(const debate::MemoryBoard& board);
ordered_json recommendations_to_json(const Reaction& x,
                                     const rationale::RecommendationSet& rs);

std::string dump_document(const ordered_json& doc);  // canonical 2-space indent + '\n'
void write_document(const std::string& path, const ordered_json& doc);

// writes report/pool/bracket/board/recommendations documents under
// out_dir/<run_name>/ and returns the run directory path
std::string store_run(const std::string& out_dir, const std::string& run_name,
                      const Reaction& x, const RecommendOutcome& outcome);

// ---- evaluation ----------------------------------------------------------

struct TestQuery {
  std::string id;
  Reaction x;
  ConditionConfig label;
};

// same line-delimited record format as the reaction base
std::vector<TestQuery> load_test_set(std::istream& in);
std::vector<TestQuery> load_test_set_file(const std::string& path);

struct EvalResult {
  std::vector<int> ks;                                   // e.g. {1, 5, 10}
  std::map<std::string, std::map<int, double>> accuracy;  // slot -> k -> percent
  int evaluated = 0;
  std::string matching = "canonical-name slot equality";
};

// a slot hits at k if any of the top-k configs matches the label slot after
// canonicalization; empty label matches empty slot
EvalResult evaluate(const std::vector<TestQuery>& queries,
                    const std::map<std::string, std::vector<ConditionConfig>>& predictions,
                    const species::SpeciesDict& dict, const std::vector<int>& ks = {1, 5, 10});

std::string format_eval_table(const EvalResult& r);

}  // namespace chemrec::pipeline
