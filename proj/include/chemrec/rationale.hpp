#pragma once

#include <string>
#include <vector>

#include "chemrec/knowbase.hpp"
#include "chemrec/recall.hpp"
#include "chemrec/species.hpp"
#include "chemrec/types.hpp"

// Certificate assembly: alignment and coherence checks, validity conjunction
// and diversity-aware final selection.
namespace chemrec::rationale {

class RationaleError : public std::runtime_error {
 public:
  enum class Kind { NotEnoughValid };
  RationaleError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr double kDefaultDelta = 0.5;
inline constexpr double kDefaultLambda = 0.3;
inline constexpr int kDefaultKOut = 10;

// support tags: "M:<field>", "E:<record_id>", "S:<check_name>"
struct Claim {
  std::string text;
  std::vector<std::string> support;
};

struct Rationale {
  ConstraintReport s;          // hard-check outcomes
  Evidence e;                  // cited precedent
  std::vector<Claim> derivation;
};

struct ValidityResult {
  bool constr_ok = false;
  double align = 0.0;
  double delta = kDefaultDelta;
  bool coherent_ok = false;
  bool valid = false;  // constr_ok && align >= delta && coherent_ok
};

// weighted mean of per-record facet scores
// (0.35 type + 0.25 FG + 0.2 MCS + 0.2 tanimoto), each scaled by the
// slot-agreement fraction between c and the cited record's config
double align_score(const Evidence& e, const ConditionConfig& c, const kb::ReactionBase& base,
                   const species::SpeciesDict& dict);

// every claim's support must resolve: M fields non-empty in the report,
// E ids cited, S checks present and passing
bool coherence_check(const std::vector<Claim>& derivation, const ReactionReport& report,
                     const ConstraintReport& s, const Evidence& e);

ValidityResult validate(bool constr_ok, double align, double delta, bool coherent_ok);
ValidityResult validate(const ConditionConfig& c, const ReactionReport& report,
                        const Rationale& rho, const kb::ReactionBase& base,
                        const species::SpeciesDict& dict, double delta = kDefaultDelta);

// 0.5*align + 0.3*check-pass fraction + 0.2*normalized survival depth
double utility(double align, const ConstraintReport& checks, double survival_depth);

// template claims over the report, checks and evidence
std::vector<Claim> build_derivation(const ReactionReport& report, const ConstraintReport& s,
                                    const Evidence& e);

struct ScoredCandidate {
  recall::Candidate candidate;
  double u = 0.0;
  Rationale rationale;
  ValidityResult validity;
};

struct RecommendationSet {
  std::vector<ScoredCandidate> entries;  // u desc, canonical id asc
  int k_out = kDefaultKOut;
  double lambda = kDefaultLambda;
  double objective = 0.0;  // sum(u) + lambda * Div
};

// mean pairwise normalized slot Hamming distance; 0 for < 2 configs
double diversity(const std::vector<ConditionConfig>& configs);

// exact subset search when |valid| <= 15, greedy marginal gain otherwise
RecommendationSet select_final(const std::vector<ScoredCandidate>& candidates,
                               int k_out = kDefaultKOut, double lambda = kDefaultLambda);

}  // namespace chemrec::rationale
