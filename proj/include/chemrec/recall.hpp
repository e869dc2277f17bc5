#pragma once

#include <string>
#include <vector>

#include "chemrec/knowbase.hpp"
#include "chemrec/species.hpp"
#include "chemrec/types.hpp"

// Multi-channel recall: type/reactant/product channels, matched union,
// slot-level recombination and the capped candidate pool.
namespace chemrec::recall {

inline constexpr size_t kPoolCap = 5000;

struct Channels {
  std::vector<std::string> s_t;       // exact-type ids
  std::vector<EvidenceItem> s_r;      // reactant-similarity hits
  std::vector<EvidenceItem> s_p;      // product-similarity hits
};

struct MatchedEntry {
  std::string record_id;
  ConditionConfig config;
  bool hit_type = false;
  bool hit_reactant = false;
  bool hit_product = false;
  double priority = 0.0;  // best facet score across similarity channels

  int channel_hits() const {
    return (hit_type ? 1 : 0) + (hit_reactant ? 1 : 0) + (hit_product ? 1 : 0);
  }
};

struct Candidate {
  enum class Origin { Matched, Similar };

  ConditionConfig config;
  Origin origin = Origin::Matched;
  std::vector<std::string> provenance;  // supporting record ids, sorted
  double priority = 0.0;
  int channel_hits = 0;
};

struct CandidatePool {
  std::vector<Candidate> candidates;  // matched entries strictly before similar
  size_t cap = kPoolCap;

  size_t size() const { return candidates.size(); }
};

Channels recall_channels(const kb::ReactionBase& base, const std::string& tau,
                         const std::vector<mol::Molecule>& reactants,
                         const std::vector<mol::Molecule>& products,
                         int k = kb::ReactionBase::kDefaultK);

// deduplicated union of the three channels, channel-hit flags retained;
// ordered by id for determinism
std::vector<MatchedEntry> merge_matched(const kb::ReactionBase& base, const Channels& ch);

// drops entries whose config fails run_hard_checks; identity when disabled
std::vector<MatchedEntry> feasibility_filter(const std::vector<MatchedEntry>& matched,
                                             const Reaction& x, const ReactionReport& report,
                                             const species::SpeciesDict& dict,
                                             bool enabled = true);

struct RecombineOptions {
  int per_config_cap = 8;
  size_t limit = kPoolCap;
  bool feasibility = true;
};

// 1-slot then 2-slot variants of each matched config drawn from
// co-occurrence alternatives; near-duplicates and infeasible variants dropped
std::vector<Candidate> recombine(const kb::ReactionBase& base,
                                 const std::vector<MatchedEntry>& matched,
                                 const std::string& tau,
                                 const std::vector<std::string>& main_fgs, const Reaction& x,
                                 const ReactionReport& report, const species::SpeciesDict& dict,
                                 const RecombineOptions& opts = {});

// matched-first truncated union with canonical dedup across the boundary
CandidatePool build_pool(const std::vector<MatchedEntry>& matched,
                         const std::vector<Candidate>& similar, size_t cap = kPoolCap);

}  // namespace chemrec::recall
