#include "chemrec/rationale.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace chemrec::rationale {

namespace {

int slot_agreement(const ConditionConfig& a, const ConditionConfig& b,
                   const species::SpeciesDict& dict) {
  int agree = 0;
  for (int s = 0; s < ConditionConfig::kSlots; ++s)
    if (dict.canonical(a.slot(s)) == dict.canonical(b.slot(s))) ++agree;
  return agree;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

}  // namespace

double align_score(const Evidence& e, const ConditionConfig& c, const kb::ReactionBase& base,
                   const species::SpeciesDict& dict) {
  if (e.empty()) return 0.0;
  double num = 0.0, den = 0.0;
  double unif_num = 0.0;
  size_t used = 0;
  for (const EvidenceItem& item : e.cited) {
    const kb::ReactionRecord* rec = base.record(item.record_id);
    if (!rec) continue;
    double facets = 0.35 * (item.type_match ? 1.0 : 0.0) + 0.25 * item.fg_overlap +
                    0.2 * item.mcs_norm + 0.2 * item.similarity;
    double agree = static_cast<double>(slot_agreement(c, rec->condition, dict)) /
                   ConditionConfig::kSlots;
    num += item.combined * facets * agree;
    den += item.combined;
    unif_num += facets * agree;
    ++used;
  }
  if (used == 0) return 0.0;
  // uniform weights when the combined facet scores carry no mass
  if (den <= 0.0) return unif_num / static_cast<double>(used);
  return num / den;
}

bool coherence_check(const std::vector<Claim>& derivation, const ReactionReport& report,
                     const ConstraintReport& s, const Evidence& e) {
  std::set<std::string> cited;
  for (const EvidenceItem& item : e.cited) cited.insert(item.record_id);
  for (const Claim& claim : derivation) {
    if (claim.support.empty()) return false;
    for (const std::string& tag : claim.support) {
      auto colon = tag.find(':');
      if (colon == std::string::npos) return false;
      std::string kind = tag.substr(0, colon);
      std::string ref = tag.substr(colon + 1);
      if (kind == "M") {
        bool ok = false;
        if (ref == "reaction_type")
          ok = !report.reaction_type.empty();
        else if (ref == "main_fgs")
          ok = !report.main_fgs.empty();
        else if (ref == "balanced_equation")
          ok = !report.balanced_equation.empty();
        else if (ref == "byproducts")
          ok = !report.byproducts.empty();
        if (!ok) return false;
      } else if (kind == "E") {
        if (!cited.count(ref)) return false;
      } else if (kind == "S") {
        const CheckResult* check = s.find(ref);
        if (!check || !check->pass) return false;
      } else {
        return false;
      }
    }
  }
  return true;
}

ValidityResult validate(bool constr_ok, double align, double delta, bool coherent_ok) {
  ValidityResult v;
  v.constr_ok = constr_ok;
  v.align = align;
  v.delta = delta;
  v.coherent_ok = coherent_ok;
  v.valid = constr_ok && align >= delta && coherent_ok;
  return v;
}

ValidityResult validate(const ConditionConfig& c, const ReactionReport& report,
                        const Rationale& rho, const kb::ReactionBase& base,
                        const species::SpeciesDict& dict, double delta) {
  return validate(rho.s.overall(), align_score(rho.e, c, base, dict), delta,
                  coherence_check(rho.derivation, report, rho.s, rho.e));
}

double utility(double align, const ConstraintReport& checks, double survival_depth) {
  double passed = 0.0;
  for (const CheckResult& c : checks.checks)
    if (c.pass) passed += 1.0;
  double frac = checks.checks.empty() ? 0.0 : passed / static_cast<double>(checks.checks.size());
  return 0.5 * align + 0.3 * frac + 0.2 * survival_depth;
}

std::vector<Claim> build_derivation(const ReactionReport& report, const ConstraintReport& s,
                                    const Evidence& e) {
  std::vector<Claim> out;
  if (!report.reaction_type.empty() && report.reaction_type != "unknown") {
    Claim c;
    c.text = "classified as " + report.reaction_type;
    c.support = {"M:reaction_type"};
    for (const EvidenceItem& item : e.cited)
      if (item.type_match) c.support.push_back("E:" + item.record_id);
    out.push_back(std::move(c));
  }
  if (!report.main_fgs.empty()) {
    Claim c;
    c.text = "key functional groups: " + join(report.main_fgs, ", ");
    c.support = {"M:main_fgs"};
    out.push_back(std::move(c));
  }
  if (report.balance_ok && !report.balanced_equation.empty()) {
    Claim c;
    c.text = "mass balance holds: " + report.balanced_equation;
    c.support = {"M:balanced_equation"};
    if (const CheckResult* mb = s.find("mass_balance"); mb && mb->pass)
      c.support.push_back("S:mass_balance");
    out.push_back(std::move(c));
  }
  if (!report.byproducts.empty()) {
    Claim c;
    c.text = "expected by-products: " + join(report.byproducts, ", ");
    c.support = {"M:byproducts"};
    out.push_back(std::move(c));
  }
  {
    std::vector<std::string> passing;
    for (const CheckResult& check : s.checks)
      if (check.pass) passing.push_back(check.name);
    if (!passing.empty()) {
      Claim c;
      std::ostringstream text;
      text << "passes " << passing.size() << "/" << s.checks.size() << " hard checks";
      c.text = text.str();
      for (const std::string& name : passing) c.support.push_back("S:" + name);
      out.push_back(std::move(c));
    }
  }
  if (!e.empty()) {
    Claim c;
    std::ostringstream text;
    text << "supported by " << e.cited.size() << " precedent record"
         << (e.cited.size() == 1 ? "" : "s");
    c.text = text.str();
    for (const EvidenceItem& item : e.cited) c.support.push_back("E:" + item.record_id);
    out.push_back(std::move(c));
  }
  return out;
}

double diversity(const std::vector<ConditionConfig>& configs) {
  size_t n = configs.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  size_t pairs = 0;
  for (size_t i = 0; i < n; ++i)
    for (size_t j = i + 1; j < n; ++j) {
      int diff = 0;
      for (int s = 0; s < ConditionConfig::kSlots; ++s)
        if (configs[i].slot(s) != configs[j].slot(s)) ++diff;
      total += static_cast<double>(diff) / ConditionConfig::kSlots;
      ++pairs;
    }
  return total / static_cast<double>(pairs);
}

namespace {

double set_objective(const std::vector<const ScoredCandidate*>& chosen, double lambda) {
  double sum_u = 0.0;
  std::vector<ConditionConfig> configs;
  configs.reserve(chosen.size());
  for (const ScoredCandidate* c : chosen) {
    sum_u += c->u;
    configs.push_back(c->candidate.config);
  }
  return sum_u + lambda * diversity(configs);
}

std::vector<std::string> id_vector(const std::vector<const ScoredCandidate*>& chosen) {
  std::vector<std::string> ids;
  ids.reserve(chosen.size());
  for (const ScoredCandidate* c : chosen) ids.push_back(c->candidate.config.canonical_id());
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

RecommendationSet select_final(const std::vector<ScoredCandidate>& candidates, int k_out,
                               double lambda) {
  std::vector<const ScoredCandidate*> valid;
  for (const ScoredCandidate& c : candidates)
    if (c.validity.valid) valid.push_back(&c);
  if (static_cast<int>(valid.size()) < k_out || k_out <= 0) {
    std::ostringstream msg;
    msg << "need " << k_out << " valid candidates, have " << valid.size();
    throw RationaleError(RationaleError::Kind::NotEnoughValid, msg.str());
  }
  std::sort(valid.begin(), valid.end(), [](const ScoredCandidate* a, const ScoredCandidate* b) {
    if (a->u != b->u) return a->u > b->u;
    return a->candidate.config.canonical_id() < b->candidate.config.canonical_id();
  });

  std::vector<const ScoredCandidate*> best;
  if (valid.size() <= 15) {
    // exhaustive subset search
    size_t n = valid.size();
    std::vector<size_t> idx(k_out);
    for (int i = 0; i < k_out; ++i) idx[i] = i;
    double best_obj = -1.0;
    std::vector<std::string> best_ids;
    while (true) {
      std::vector<const ScoredCandidate*> chosen;
      for (size_t i : idx) chosen.push_back(valid[i]);
      double obj = set_objective(chosen, lambda);
      std::vector<std::string> ids = id_vector(chosen);
      if (obj > best_obj || (obj == best_obj && ids < best_ids)) {
        best_obj = obj;
        best_ids = std::move(ids);
        best = std::move(chosen);
      }
      // advance the combination
      int pos = k_out - 1;
      while (pos >= 0 && idx[pos] == n - static_cast<size_t>(k_out - pos)) --pos;
      if (pos < 0) break;
      ++idx[pos];
      for (int i = pos + 1; i < k_out; ++i) idx[i] = idx[i - 1] + 1;
    }
  } else {
    // greedy marginal gain
    std::set<const ScoredCandidate*> taken;
    for (int step = 0; step < k_out; ++step) {
      const ScoredCandidate* pick = nullptr;
      double pick_obj = -1.0;
      for (const ScoredCandidate* c : valid) {
        if (taken.count(c)) continue;
        std::vector<const ScoredCandidate*> trial = best;
        trial.push_back(c);
        double obj = set_objective(trial, lambda);
        if (obj > pick_obj ||
            (obj == pick_obj && pick &&
             c->candidate.config.canonical_id() < pick->candidate.config.canonical_id())) {
          pick = c;
          pick_obj = obj;
        }
      }
      best.push_back(pick);
      taken.insert(pick);
    }
  }

  std::sort(best.begin(), best.end(), [](const ScoredCandidate* a, const ScoredCandidate* b) {
    if (a->u != b->u) return a->u > b->u;
    return a->candidate.config.canonical_id() < b->candidate.config.canonical_id();
  });
  RecommendationSet out;
  out.k_out = k_out;
  out.lambda = lambda;
  for (const ScoredCandidate* c : best) out.entries.push_back(*c);
  out.objective = set_objective(best, lambda);
  return out;
}

}  // namespace chemrec::rationale
