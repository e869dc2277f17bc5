#include "chemrec/knowbase.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "chemrec/balance.hpp"

namespace chemrec::kb {

namespace {

constexpr const char* kSnapshotHeader = "chemrec-kb-snapshot v1";

const mol::Molecule* largest(const std::vector<mol::Molecule>& mols) {
  const mol::Molecule* best = nullptr;
  for (const auto& m : mols)
    if (!best || m.atom_count() > best->atom_count()) best = &m;
  return best;
}

double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 1.0;
  size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

std::set<std::string> fg_names(const std::vector<mol::Molecule>& mols,
                               const tagger::FGLibrary& lib) {
  std::set<std::string> out;
  for (const auto& h : tagger::tag_reactants(mols, lib)) out.insert(h.fg_name);
  return out;
}

mol::Fingerprint fp_union(const std::vector<mol::Molecule>& mols) {
  mol::Fingerprint fp;
  for (const auto& m : mols) fp = fp | mol::Fingerprint::of(m);
  return fp;
}

}  // namespace

ReactionBase ReactionBase::ingest(std::istream& in, const tagger::FGLibrary& lib,
                                  IngestReport* report) {
  ReactionBase base;
  base.lib_ = lib;
  IngestReport local;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    ReactionRecord rec;
    try {
      nlohmann::json j = nlohmann::json::parse(line);
      rec.id = j.at("id").get<std::string>();
      rec.reaction_type = j.at("reaction_type").get<std::string>();
      rec.reactant_smiles = j.at("reactants").get<std::vector<std::string>>();
      rec.product_smiles = j.at("products").get<std::vector<std::string>>();
      for (int s = 0; s < ConditionConfig::kSlots; ++s) {
        const std::string& name = ConditionConfig::slot_names()[s];
        if (j.contains(name)) rec.condition.slot(s) = j.at(name).get<std::string>();
      }
      rec.provenance = j.value("provenance", "");
    } catch (const nlohmann::json::exception& e) {
      ++local.skipped;
      local.skip_reasons.push_back("line " + std::to_string(lineno) + ": " + e.what());
      continue;
    }
    if (rec.id.empty() || rec.reaction_type.empty()) {
      ++local.skipped;
      local.skip_reasons.push_back("line " + std::to_string(lineno) +
                                   ": missing id or reaction_type");
      continue;
    }
    if (base.by_id_.count(rec.id))
      throw KbError(KbError::Kind::DuplicateId, "duplicate record id '" + rec.id + "'");
    if (rec.condition.all_empty()) {
      ++local.skipped;
      local.skip_reasons.push_back("line " + std::to_string(lineno) + ": record " + rec.id +
                                   " has no condition slots");
      continue;
    }
    try {
      for (const auto& s : rec.reactant_smiles) rec.reactants.push_back(mol::parse_smiles(s));
      for (const auto& s : rec.product_smiles) rec.products.push_back(mol::parse_smiles(s));
    } catch (const mol::ParseError& e) {
      ++local.skipped;
      local.skip_reasons.push_back("line " + std::to_string(lineno) + ": record " + rec.id +
                                   ": " + e.what());
      continue;
    }
    base.index_record(std::move(rec));
    ++local.ingested;
  }
  if (report) *report = std::move(local);
  return base;
}

ReactionBase ReactionBase::ingest_file(const std::string& path, const tagger::FGLibrary& lib,
                                       IngestReport* report) {
  std::ifstream in(path);
  if (!in)
    throw KbError(KbError::Kind::UnreadableSource, "cannot open reaction base: " + path);
  return ingest(in, lib, report);
}

void ReactionBase::index_record(ReactionRecord rec) {
  rec.reactant_fgs = fg_names(rec.reactants, lib_);
  rec.product_fgs = fg_names(rec.products, lib_);
  rec.reactant_fp = fp_union(rec.reactants);
  rec.product_fp = fp_union(rec.products);
  try {
    auto hyps = balance::enumerate_byproducts(rec.reactants, rec.products);
    if (!hyps.empty() && hyps[0].rule_name != "UnexplainedResidue")
      for (const auto& sp : hyps[0].species) rec.byproducts.push_back(sp.name);
  } catch (const balance::BalanceError&) {
    // records whose products outweigh their reactants carry no by-product signal
  }
  by_id_[rec.id] = records_.size();
  by_type_[rec.reaction_type].push_back(rec.id);
  for (const auto& fg : rec.reactant_fgs) by_fg_[fg].push_back(rec.id);
  records_.push_back(std::move(rec));
}

const ReactionRecord* ReactionBase::record(const std::string& id) const {
  auto it = by_id_.find(id);
  return it == by_id_.end() ? nullptr : &records_[it->second];
}

std::vector<std::string> ReactionBase::query_type(const std::string& tau) const {
  auto it = by_type_.find(tau);
  return it == by_type_.end() ? std::vector<std::string>{} : it->second;
}

std::vector<EvidenceItem> ReactionBase::query_similar(const std::vector<mol::Molecule>& mols,
                                                      Side side, int k,
                                                      const std::string& tau) const {
  std::set<std::string> q_fgs = fg_names(mols, lib_);
  mol::Fingerprint q_fp = fp_union(mols);
  const mol::Molecule* q_big = largest(mols);

  std::vector<EvidenceItem> scored;
  for (const auto& rec : records_) {
    const auto& r_fgs = side == Side::Reactant ? rec.reactant_fgs : rec.product_fgs;
    const auto& r_fp = side == Side::Reactant ? rec.reactant_fp : rec.product_fp;
    const auto& r_mols = side == Side::Reactant ? rec.reactants : rec.products;
    EvidenceItem item;
    item.record_id = rec.id;
    item.type_match = !tau.empty() && rec.reaction_type == tau;
    item.fg_overlap = jaccard(q_fgs, r_fgs);
    const mol::Molecule* r_big = largest(r_mols);
    if (q_big && r_big) {
      size_t cap = std::max(q_big->atom_count(), r_big->atom_count());
      if (cap > 0)
        item.mcs_norm = static_cast<double>(mol::mcs(*q_big, *r_big, mcs_options).size()) /
                        static_cast<double>(cap);
    }
    item.similarity = mol::tanimoto(q_fp, r_fp);
    item.combined = facet_weights.fg * item.fg_overlap + facet_weights.mcs * item.mcs_norm +
                    facet_weights.fp * item.similarity;
    scored.push_back(std::move(item));
  }
  std::sort(scored.begin(), scored.end(), [](const EvidenceItem& a, const EvidenceItem& b) {
    if (a.combined != b.combined) return a.combined > b.combined;
    return a.record_id < b.record_id;
  });
  if (k >= 0 && scored.size() > static_cast<size_t>(k)) scored.resize(k);
  return scored;
}

TypeCall ReactionBase::classify_reaction_type(const Reaction& x, int k) const {
  if (empty()) throw KbError(KbError::Kind::EmptyBase, "classify on an empty reaction base");

  std::map<std::string, EvidenceItem> merged;
  for (const auto& item : query_similar(x.reactants, Side::Reactant, k)) merged[item.record_id] = item;
  for (const auto& item : query_similar(x.products, Side::Product, k)) {
    auto it = merged.find(item.record_id);
    if (it == merged.end() || item.combined > it->second.combined) merged[item.record_id] = item;
  }

  double total = 0.0;
  for (const auto& [id, item] : merged) total += item.combined;
  std::map<std::string, double> votes;
  for (const auto& [id, item] : merged) {
    double w = total > 0.0 ? item.combined : 1.0;
    votes[record(id)->reaction_type] += w;
  }
  double vote_total = 0.0;
  for (const auto& [tau, w] : votes) vote_total += w;

  TypeCall call;
  for (const auto& [tau, w] : votes)
    if (call.reaction_type.empty() || w > votes.at(call.reaction_type)) call.reaction_type = tau;
  call.confidence = vote_total > 0.0 ? votes.at(call.reaction_type) / vote_total : 0.0;

  for (const auto& [id, item] : merged) call.evidence.cited.push_back(item);
  std::sort(call.evidence.cited.begin(), call.evidence.cited.end(),
            [](const EvidenceItem& a, const EvidenceItem& b) {
              if (a.combined != b.combined) return a.combined > b.combined;
              return a.record_id < b.record_id;
            });
  for (const auto& item : call.evidence.cited)
    for (const auto& s : record(item.record_id)->condition.nonempty_species())
      ++call.evidence.cooccurrence[s];
  return call;
}

SignalFeatures ReactionBase::signal_features(const Evidence& evidence,
                                             const std::vector<std::string>& main_fgs,
                                             const std::vector<std::string>& byproducts) const {
  SignalFeatures out;
  if (evidence.empty()) return out;

  double total = 0.0;
  for (const auto& item : evidence.cited) total += item.combined;
  for (const auto& item : evidence.cited) {
    const ReactionRecord* rec = record(item.record_id);
    if (!rec) continue;
    double w = total > 0.0 ? item.combined / total
                           : 1.0 / static_cast<double>(evidence.cited.size());
    out.s_type[rec->reaction_type] += w;
  }
  for (const auto& fg : main_fgs) {
    int n = 0;
    for (const auto& item : evidence.cited) {
      const ReactionRecord* rec = record(item.record_id);
      if (rec && rec->reactant_fgs.count(fg)) ++n;
    }
    out.s_role[fg] = static_cast<double>(n) / static_cast<double>(evidence.cited.size());
  }
  for (const auto& bp : byproducts) {
    int n = 0;
    for (const auto& item : evidence.cited) {
      const ReactionRecord* rec = record(item.record_id);
      if (rec && std::find(rec->byproducts.begin(), rec->byproducts.end(), bp) !=
                     rec->byproducts.end())
        ++n;
    }
    out.s_byprod[bp] = n;
  }
  return out;
}

std::vector<std::string> ReactionBase::cooccurring_alternatives(
    const std::string& slot, const std::string& tau,
    const std::vector<std::string>& main_fgs) const {
  int slot_idx = -1;
  for (int i = 0; i < ConditionConfig::kSlots; ++i)
    if (ConditionConfig::slot_names()[i] == slot) slot_idx = i;
  if (slot_idx < 0) return {};

  std::vector<std::string> pool = query_type(tau);
  if (pool.empty()) {
    std::set<std::string> ids;
    for (const auto& fg : main_fgs) {
      auto it = by_fg_.find(fg);
      if (it != by_fg_.end()) ids.insert(it->second.begin(), it->second.end());
    }
    pool.assign(ids.begin(), ids.end());
  }

  std::map<std::string, int> counts;
  for (const auto& id : pool) {
    const std::string& value = record(id)->condition.slot(slot_idx);
    if (!value.empty()) ++counts[value];
  }
  std::vector<std::pair<std::string, int>> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> out;
  for (const auto& [name, n] : ranked) out.push_back(name);
  return out;
}

void ReactionBase::save_snapshot(std::ostream& out) const {
  out << kSnapshotHeader << "\n";
  for (const auto& rec : records_) {
    nlohmann::ordered_json j;
    j["id"] = rec.id;
    j["reaction_type"] = rec.reaction_type;
    j["reactants"] = rec.reactant_smiles;
    j["products"] = rec.product_smiles;
    for (int s = 0; s < ConditionConfig::kSlots; ++s)
      j[ConditionConfig::slot_names()[s]] = rec.condition.slot(s);
    j["provenance"] = rec.provenance;
    out << j.dump() << "\n";
  }
}

void ReactionBase::save_snapshot_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw KbError(KbError::Kind::UnreadableSource, "cannot write snapshot: " + path);
  save_snapshot(out);
}

ReactionBase ReactionBase::load_snapshot(std::istream& in, const tagger::FGLibrary& lib) {
  std::string header;
  if (!std::getline(in, header) || header != kSnapshotHeader)
    throw KbError(KbError::Kind::UnreadableSource,
                  "snapshot header mismatch (expected '" + std::string(kSnapshotHeader) + "')");
  return ingest(in, lib);
}

ReactionBase ReactionBase::load_snapshot_file(const std::string& path,
                                              const tagger::FGLibrary& lib) {
  std::ifstream in(path);
  if (!in) throw KbError(KbError::Kind::UnreadableSource, "cannot open snapshot: " + path);
  return load_snapshot(in, lib);
}

}  // namespace chemrec::kb
