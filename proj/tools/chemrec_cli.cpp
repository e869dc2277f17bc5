#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chemrec/pipeline.hpp"
#include "chemrec/trainkit.hpp"

using namespace chemrec;

namespace {

struct GlobalArgs {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::string base_override;
  std::string out_dir = "out";
};

pipeline::PipelineConfig load_config(const GlobalArgs& g) {
  pipeline::PipelineConfig cfg = g.config_path.empty()
                                     ? pipeline::PipelineConfig{}
                                     : pipeline::PipelineConfig::load_file(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.base_override.empty()) cfg.base_path = g.base_override;
  cfg.validate();
  return cfg;
}

std::map<std::string, std::vector<ConditionConfig>> predictions_from_dir(
    const std::string& dir, const std::vector<pipeline::TestQuery>& queries) {
  std::map<std::string, std::vector<ConditionConfig>> preds;
  for (const auto& q : queries) {
    std::filesystem::path path =
        std::filesystem::path(dir) / q.id / "recommendations.json";
    std::ifstream in(path);
    if (!in)
      throw pipeline::PipelineError(pipeline::PipelineError::Kind::MalformedTestSet,
                                    "missing predictions: " + path.string());
    nlohmann::json doc = nlohmann::json::parse(in);
    std::vector<ConditionConfig> configs;
    for (const auto& entry : doc.at("entries")) {
      ConditionConfig c;
      for (int s = 0; s < ConditionConfig::kSlots; ++s)
        c.slot(s) = entry.at("config").at(ConditionConfig::slot_names()[s]).get<std::string>();
      configs.push_back(std::move(c));
    }
    preds[q.id] = std::move(configs);
  }
  return preds;
}

int run(int argc, char** argv) {
  CLI::App app{"chemrec: reaction-condition recommendation pipeline"};
  app.require_subcommand(1);

  GlobalArgs g;
  app.add_option("--config", g.config_path, "pipeline config file (key=value lines)");
  app.add_option("--seed", g.seed, "override the config seed");
  app.add_option("--base", g.base_override, "override the reaction base path");
  app.add_option("--out", g.out_dir, "output directory for run documents");

  auto* cmd_ingest = app.add_subcommand("ingest", "index the reaction base and print counts");

  std::string reaction_spec;
  std::string run_name = "run";
  auto add_reaction = [&](CLI::App* cmd) {
    cmd->add_option("--reaction", reaction_spec, "reaction as reactants>>products, '.'-separated")
        ->required();
    cmd->add_option("--name", run_name, "run name (memory store subdirectory)");
  };
  auto* cmd_report = app.add_subcommand("report", "General-Chemist reaction report");
  add_reaction(cmd_report);
  auto* cmd_recall = app.add_subcommand("recall", "build the candidate pool");
  add_reaction(cmd_recall);
  auto* cmd_tournament = app.add_subcommand("tournament", "run the knockout tournament");
  add_reaction(cmd_tournament);
  auto* cmd_recommend = app.add_subcommand("recommend", "full recommendation pipeline");
  add_reaction(cmd_recommend);

  std::string queries_path, pred_dir;
  auto* cmd_eval = app.add_subcommand("eval", "top-k accuracy over a labeled test set");
  cmd_eval->add_option("--queries", queries_path, "labeled queries (reaction-base format)")
      ->required();
  cmd_eval->add_option("--pred-dir", pred_dir,
                       "directory of stored runs (default: run the live pipeline)");

  std::optional<int> steps_override;
  auto* cmd_train = app.add_subcommand("train-toy", "toy GRPO training demo");
  cmd_train->add_option("--steps", steps_override, "override train_steps");

  CLI11_PARSE(app, argc, argv);

  pipeline::PipelineConfig cfg = load_config(g);

  if (app.got_subcommand(cmd_train)) {
    if (steps_override) cfg.train_steps = *steps_override;
    train::ToyEnv env;
    train::ToyPolicy init = train::ToyPolicy::uniform(3, train::ToyEnv::kVocab);
    auto res = train::toy_training_loop(init, env, cfg.train_steps, cfg.group_g, cfg.eps,
                                        cfg.beta, cfg.lr, cfg.seed);
    std::filesystem::create_directories(g.out_dir);
    {
      std::ofstream curve(std::filesystem::path(g.out_dir) / "curve.tsv", std::ios::binary);
      train::write_reward_curve(curve, res.curve);
    }
    pipeline::ordered_json pj;
    pj["horizon"] = res.policy.horizon;
    pj["vocab"] = res.policy.vocab;
    pj["theta"] = res.policy.theta;
    pipeline::write_document((std::filesystem::path(g.out_dir) / "policy.json").string(), pj);
    double final_mean = res.curve.empty() ? 0.0 : res.curve.back();
    std::cout << "steps " << res.curve.size() << " final_mean " << final_mean << "\n";
    return 0;
  }

  kb::IngestReport ingest;
  pipeline::Assets assets = pipeline::Assets::load(cfg, &ingest);

  if (app.got_subcommand(cmd_ingest)) {
    std::cout << ingest.ingested << " indexed, " << ingest.skipped << " skipped\n";
    for (const auto& reason : ingest.skip_reasons) std::cerr << reason << "\n";
    return 0;
  }

  if (app.got_subcommand(cmd_eval)) {
    auto queries = pipeline::load_test_set_file(queries_path);
    std::map<std::string, std::vector<ConditionConfig>> preds;
    if (!pred_dir.empty()) {
      preds = predictions_from_dir(pred_dir, queries);
    } else {
      for (const auto& q : queries) {
        auto outcome = pipeline::recommend(q.x, assets, cfg);
        pipeline::store_run(g.out_dir, q.id, q.x, outcome);
        std::vector<ConditionConfig> configs;
        for (const auto& e : outcome.recommendations.entries)
          configs.push_back(e.candidate.config);
        preds[q.id] = std::move(configs);
      }
    }
    auto result = pipeline::evaluate(queries, preds, assets.dict);
    std::cout << pipeline::format_eval_table(result);
    return 0;
  }

  Reaction x = pipeline::parse_reaction_spec(reaction_spec);
  std::filesystem::path dir = std::filesystem::path(g.out_dir) / run_name;
  std::filesystem::create_directories(dir);

  if (app.got_subcommand(cmd_report)) {
    ReactionReport report = pipeline::build_report(x, assets, cfg);
    pipeline::ordered_json doc = pipeline::report_to_json(x, report);
    pipeline::write_document((dir / "report.json").string(), doc);
    std::cout << pipeline::dump_document(doc);
    return 0;
  }

  if (app.got_subcommand(cmd_recall)) {
    auto stage = pipeline::build_pool_stage(x, assets, cfg);
    pipeline::write_document((dir / "report.json").string(),
                             pipeline::report_to_json(x, stage.report));
    pipeline::write_document((dir / "pool.json").string(), pipeline::pool_to_json(stage.pool));
    size_t matched = 0;
    for (const auto& c : stage.pool.candidates)
      if (c.origin == recall::Candidate::Origin::Matched) ++matched;
    std::cout << "pool " << stage.pool.size() << " (matched " << matched << ", similar "
              << (stage.pool.size() - matched) << ")\n";
    return 0;
  }
  if (app.got_subcommand(cmd_tournament)) {
    auto stage = pipeline::build_pool_stage(x, assets, cfg);
    auto result = pipeline::tournament_stage(x, stage, assets, cfg);
    pipeline::write_document((dir / "report.json").string(),
                             pipeline::report_to_json(x, stage.report));
    pipeline::write_document((dir / "pool.json").string(), pipeline::pool_to_json(stage.pool));
    pipeline::write_document((dir / "bracket.json").string(), pipeline::bracket_to_json(result));
    pipeline::write_document((dir / "board.json").string(),
                             pipeline::board_to_json(result.board));
    for (const auto& w : result.winners) std::cout << w.config.canonical_id() << "\n";
    return 0;
  }
  // recommend
  auto outcome = pipeline::recommend(x, assets, cfg);
  pipeline::store_run(g.out_dir, run_name, x, outcome);
  std::cout << pipeline::dump_document(
      pipeline::recommendations_to_json(x, outcome.recommendations));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const mol::ParseError& e) {
    std::cerr << "error: parse error at position " << e.position() << ": " << e.what() << "\n";
  } catch (const rationale::RationaleError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 1;
}
