#pragma once

#include <iosfwd>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "chemrec/molgraph.hpp"
#include "chemrec/tagger.hpp"
#include "chemrec/types.hpp"

// Reaction base: indexed precedent records serving evidence queries, signal
// features and reaction-type classification.
namespace chemrec::kb {

class KbError : public std::runtime_error {
 public:
  enum class Kind { UnreadableSource, DuplicateId, EmptyBase };
  KbError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct ReactionRecord {
  std::string id;
  std::string reaction_type;
  std::vector<std::string> reactant_smiles;
  std::vector<std::string> product_smiles;
  ConditionConfig condition;
  std::string provenance;

  // derived at ingest
  std::vector<mol::Molecule> reactants;
  std::vector<mol::Molecule> products;
  std::set<std::string> reactant_fgs;
  std::set<std::string> product_fgs;
  mol::Fingerprint reactant_fp;
  mol::Fingerprint product_fp;
  std::vector<std::string> byproducts;  // top balanced hypothesis, may be empty
};

struct IngestReport {
  int ingested = 0;
  int skipped = 0;
  std::vector<std::string> skip_reasons;  // one line per skipped record
};

enum class Side { Reactant, Product };

struct TypeCall {
  std::string reaction_type;  // tau-hat
  double confidence = 0.0;
  Evidence evidence;
};

struct FacetWeights {
  double fg = 0.4;
  double mcs = 0.3;
  double fp = 0.3;
};

class ReactionBase {
 public:
  static constexpr int kDefaultK = 64;

  // line-delimited JSON records; malformed lines are skipped and counted
  static ReactionBase ingest(std::istream& in, const tagger::FGLibrary& lib,
                             IngestReport* report = nullptr);
  static ReactionBase ingest_file(const std::string& path, const tagger::FGLibrary& lib,
                                  IngestReport* report = nullptr);

  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<ReactionRecord>& records() const { return records_; }
  const ReactionRecord* record(const std::string& id) const;

  std::vector<std::string> query_type(const std::string& tau) const;

  // top-k records by 0.4*FG-Jaccard + 0.3*normalized-MCS + 0.3*tanimoto
  // against the chosen side; ties broken by id
  std::vector<EvidenceItem> query_similar(const std::vector<mol::Molecule>& mols, Side side,
                                          int k = kDefaultK,
                                          const std::string& tau = "") const;

  TypeCall classify_reaction_type(const Reaction& x, int k = kDefaultK) const;

  // co-occurrence signals over the cited evidence records
  SignalFeatures signal_features(const Evidence& evidence,
                                 const std::vector<std::string>& main_fgs,
                                 const std::vector<std::string>& byproducts) const;

  // species used in `slot` by records of type tau (fallback: records sharing
  // any main FG), ranked by count desc then name
  std::vector<std::string> cooccurring_alternatives(const std::string& slot,
                                                    const std::string& tau,
                                                    const std::vector<std::string>& main_fgs) const;

  void save_snapshot(std::ostream& out) const;
  void save_snapshot_file(const std::string& path) const;
  static ReactionBase load_snapshot(std::istream& in, const tagger::FGLibrary& lib);
  static ReactionBase load_snapshot_file(const std::string& path, const tagger::FGLibrary& lib);

  FacetWeights facet_weights;
  mol::McsOptions mcs_options{24, 200000};

 private:
  void index_record(ReactionRecord rec);

  tagger::FGLibrary lib_;
  std::vector<ReactionRecord> records_;
  std::map<std::string, size_t> by_id_;
  std::map<std::string, std::vector<std::string>> by_type_;
  std::map<std::string, std::vector<std::string>> by_fg_;  // reactant-side inverted index
};

}  // namespace chemrec::kb
