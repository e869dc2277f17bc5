#include "chemrec/recall.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "chemrec/balance.hpp"

namespace chemrec::recall {

Channels recall_channels(const kb::ReactionBase& base, const std::string& tau,
                         const std::vector<mol::Molecule>& reactants,
                         const std::vector<mol::Molecule>& products, int k) {
  Channels ch;
  ch.s_t = base.query_type(tau);
  if (!reactants.empty()) ch.s_r = base.query_similar(reactants, kb::Side::Reactant, k, tau);
  if (!products.empty()) ch.s_p = base.query_similar(products, kb::Side::Product, k, tau);
  return ch;
}

std::vector<MatchedEntry> merge_matched(const kb::ReactionBase& base, const Channels& ch) {
  std::map<std::string, MatchedEntry> by_id;
  auto entry = [&](const std::string& id) -> MatchedEntry& {
    auto it = by_id.find(id);
    if (it == by_id.end()) {
      MatchedEntry e;
      e.record_id = id;
      e.config = base.record(id)->condition;
      it = by_id.emplace(id, std::move(e)).first;
    }
    return it->second;
  };
  for (const auto& id : ch.s_t) entry(id).hit_type = true;
  for (const auto& item : ch.s_r) {
    MatchedEntry& e = entry(item.record_id);
    e.hit_reactant = true;
    e.priority = std::max(e.priority, item.combined);
  }
  for (const auto& item : ch.s_p) {
    MatchedEntry& e = entry(item.record_id);
    e.hit_product = true;
    e.priority = std::max(e.priority, item.combined);
  }
  std::vector<MatchedEntry> out;
  for (auto& [id, e] : by_id) out.push_back(std::move(e));
  return out;  // map iteration is already id-ordered
}

std::vector<MatchedEntry> feasibility_filter(const std::vector<MatchedEntry>& matched,
                                             const Reaction& x, const ReactionReport& report,
                                             const species::SpeciesDict& dict, bool enabled) {
  if (!enabled) return matched;
  std::vector<MatchedEntry> out;
  for (const auto& e : matched)
    if (balance::run_hard_checks(x, e.config, report, dict).overall()) out.push_back(e);
  return out;
}

std::vector<Candidate> recombine(const kb::ReactionBase& base,
                                 const std::vector<MatchedEntry>& matched,
                                 const std::string& tau,
                                 const std::vector<std::string>& main_fgs, const Reaction& x,
                                 const ReactionReport& report, const species::SpeciesDict& dict,
                                 const RecombineOptions& opts) {
  std::set<std::string> seen;
  for (const auto& e : matched) seen.insert(e.config.canonical_id());

  // ranked alternatives per slot, shared across configs
  std::array<std::vector<std::string>, ConditionConfig::kSlots> alts;
  for (int s = 0; s < ConditionConfig::kSlots; ++s)
    alts[s] = base.cooccurring_alternatives(ConditionConfig::slot_names()[s], tau, main_fgs);

  std::vector<Candidate> out;
  size_t serial = 0;
  auto admit = [&](const ConditionConfig& variant, const std::string& parent_id, int& budget) {
    if (budget <= 0 || out.size() >= opts.limit) return;
    if (!seen.insert(variant.canonical_id()).second) return;
    if (opts.feasibility &&
        !balance::run_hard_checks(x, variant, report, dict).overall())
      return;
    Candidate c;
    c.config = variant;
    c.origin = Candidate::Origin::Similar;
    c.provenance = {parent_id};
    c.priority = 1.0 / static_cast<double>(1 + serial++);
    out.push_back(std::move(c));
    --budget;
  };

  for (const auto& e : matched) {
    int budget = opts.per_config_cap;
    // breadth-first: every 1-slot variant before any 2-slot variant
    for (int s = 0; s < ConditionConfig::kSlots && budget > 0; ++s)
      for (const auto& alt : alts[s]) {
        if (alt == e.config.slot(s)) continue;
        ConditionConfig v = e.config;
        v.slot(s) = alt;
        admit(v, e.record_id, budget);
        if (budget <= 0) break;
      }
    for (int s1 = 0; s1 < ConditionConfig::kSlots && budget > 0; ++s1)
      for (int s2 = s1 + 1; s2 < ConditionConfig::kSlots && budget > 0; ++s2)
        for (const auto& a1 : alts[s1]) {
          if (a1 == e.config.slot(s1)) continue;
          for (const auto& a2 : alts[s2]) {
            if (a2 == e.config.slot(s2)) continue;
            ConditionConfig v = e.config;
            v.slot(s1) = a1;
            v.slot(s2) = a2;
            admit(v, e.record_id, budget);
            if (budget <= 0) break;
          }
          if (budget <= 0) break;
        }
    if (out.size() >= opts.limit) break;
  }
  return out;
}

CandidatePool build_pool(const std::vector<MatchedEntry>& matched,
                         const std::vector<Candidate>& similar, size_t cap) {
  // collapse matched records sharing a config into one candidate
  std::map<std::string, Candidate> merged;
  for (const auto& e : matched) {
    Candidate& c = merged[e.config.canonical_id()];
    if (c.provenance.empty()) {
      c.config = e.config;
      c.origin = Candidate::Origin::Matched;
    }
    c.provenance.push_back(e.record_id);
    c.priority = std::max(c.priority, e.priority);
    c.channel_hits = std::max(c.channel_hits, e.channel_hits());
  }
  std::vector<Candidate> matched_c;
  for (auto& [id, c] : merged) {
    std::sort(c.provenance.begin(), c.provenance.end());
    matched_c.push_back(std::move(c));
  }
  std::sort(matched_c.begin(), matched_c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.channel_hits != b.channel_hits) return a.channel_hits > b.channel_hits;
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.config.canonical_id() < b.config.canonical_id();
  });

  std::set<std::string> taken;
  CandidatePool pool;
  pool.cap = cap;
  for (const auto& c : matched_c) {
    if (pool.candidates.size() >= cap) break;
    if (taken.insert(c.config.canonical_id()).second) pool.candidates.push_back(c);
  }
  std::vector<Candidate> similar_c = similar;
  std::sort(similar_c.begin(), similar_c.end(), [](const Candidate& a, const Candidate& b) {
    if (a.priority != b.priority) return a.priority > b.priority;
    return a.config.canonical_id() < b.config.canonical_id();
  });
  for (const auto& c : similar_c) {
    if (pool.candidates.size() >= cap) break;
    if (taken.insert(c.config.canonical_id()).second) pool.candidates.push_back(c);
  }
  return pool;
}

}  // namespace chemrec::recall
