#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

// Desk-scale training kit: transcript format checking, the hierarchical
// reward, GRPO group advantages and the clipped-surrogate objective with an
// analytic KL term, demonstrated on a toy softmax policy.
namespace chemrec::train {

class TrainError : public std::runtime_error {
 public:
  enum class Kind { GroupTooSmall, ShapeMismatch };
  TrainError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

inline constexpr double kToolBonus = 0.1;

struct FormatCheck {
  bool format_ok = false;
  bool used_search = false;
  bool used_memory = false;
};

// stack parser over <search>/<memory> spans; a judgment section is required
FormatCheck check_format(const std::string& text);
// preferred option declared after "Judgement:"; nullopt when absent
std::optional<std::string> parse_judgment(const std::string& text);

struct RewardInput {
  bool format_ok = false;
  int acc = 0;  // 0 or 1
  bool used_search = false;
  bool used_memory = false;
};

// -1 on format failure; 0 on wrong answer; acc + 0.1 when both tools used
double reward(const RewardInput& r);

// (R_i - mean) / (std + 1e-8), population std; broadcast over tokens
std::vector<double> group_advantages(const std::vector<double>& rewards);

// Context-free softmax sequence model: one logit row per step.
struct ToyPolicy {
  int horizon = 0;
  int vocab = 0;
  std::vector<double> theta;  // horizon * vocab logits

  static ToyPolicy uniform(int horizon, int vocab);
  double& logit(int step, int action) { return theta[step * vocab + action]; }
  double logit(int step, int action) const { return theta[step * vocab + action]; }
  std::vector<double> probs(int step) const;
  double logp(int step, int action) const;
  std::vector<int> sample(std::mt19937_64& rng) const;
};

struct RolloutGroup {
  std::vector<std::vector<int>> actions;       // G sequences
  std::vector<std::vector<double>> logp_old;   // per token, under the sampling policy
  std::vector<double> rewards;
  std::vector<double> advantages;              // per sequence, see group_advantages
};

struct GrpoResult {
  double objective = 0.0;
  std::vector<double> grad;  // same shape as ToyPolicy::theta
};

// mean over sequences of the token-mean clipped surrogate, minus beta times
// the analytic token-wise KL(pi_theta || pi_ref)
GrpoResult grpo_objective(const ToyPolicy& policy, const ToyPolicy& ref,
                          const RolloutGroup& group, double eps, double beta);

// Scripted pairwise-judgment environment: action vocabulary
// {0: search, 1: memory, 2: judge A, 3: judge B}; accuracy is agreement with
// the scripted winner, format requires ending on a judgment action.
struct ToyEnv {
  static constexpr int kVocab = 4;
  static constexpr int kSearch = 0;
  static constexpr int kMemory = 1;
  static constexpr int kJudgeA = 2;
  static constexpr int kJudgeB = 3;

  int correct_judgment = kJudgeA;

  RewardInput observe(const std::vector<int>& actions) const;
  double score(const std::vector<int>& actions) const { return reward(observe(actions)); }
};

struct TrainResult {
  ToyPolicy policy;
  std::vector<double> curve;  // per-step mean group reward
};

TrainResult toy_training_loop(const ToyPolicy& init, const ToyEnv& env, int steps, int g,
                              double eps, double beta, double lr, uint64_t seed);

// line-delimited "step<TAB>mean_reward"
void write_reward_curve(std::ostream& out, const std::vector<double>& curve);

struct ToolEvent {
  enum class Kind { Search, Memory };
  Kind kind = Kind::Search;
  std::string content;

  bool operator==(const ToolEvent&) const = default;
};

struct SftExample {
  std::string input;
  std::string target;  // transcript text
};

SftExample serialize_sft_example(const std::string& query, const std::vector<ToolEvent>& trace,
                                 const std::string& judgment);
// tool spans of a transcript in order; inverse of serialization
std::vector<ToolEvent> parse_tool_events(const std::string& text);

}  // namespace chemrec::train
