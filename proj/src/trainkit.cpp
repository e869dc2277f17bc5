#include "chemrec/trainkit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <sstream>

namespace chemrec::train {

namespace {

constexpr const char* kJudgmentMarker = "Judgement:";

struct Tag {
  size_t pos;
  size_t len;
  bool open;
  int kind;  // 0 search, 1 memory
};

std::vector<Tag> scan_tags(const std::string& text) {
  static const std::pair<std::string, std::pair<bool, int>> kTokens[] = {
      {"<search>", {true, 0}},
      {"</search>", {false, 0}},
      {"<memory>", {true, 1}},
      {"</memory>", {false, 1}},
  };
  std::vector<Tag> tags;
  for (const auto& [tok, info] : kTokens)
    for (size_t pos = text.find(tok); pos != std::string::npos; pos = text.find(tok, pos + 1))
      tags.push_back({pos, tok.size(), info.first, info.second});
  std::sort(tags.begin(), tags.end(), [](const Tag& a, const Tag& b) { return a.pos < b.pos; });
  return tags;
}

}  // namespace

FormatCheck check_format(const std::string& text) {
  FormatCheck out;
  std::vector<int> stack;
  for (const Tag& tag : scan_tags(text)) {
    if (tag.open) {
      stack.push_back(tag.kind);
    } else {
      if (stack.empty() || stack.back() != tag.kind) return out;  // mismatched close
      stack.pop_back();
      (tag.kind == 0 ? out.used_search : out.used_memory) = true;
    }
  }
  if (!stack.empty()) {  // unclosed tag
    out.used_search = out.used_memory = false;
    return out;
  }
  out.format_ok = parse_judgment(text).has_value();
  if (!out.format_ok) out.used_search = out.used_memory = false;
  return out;
}

std::optional<std::string> parse_judgment(const std::string& text) {
  size_t pos = text.rfind(kJudgmentMarker);
  if (pos == std::string::npos) return std::nullopt;
  std::istringstream rest(text.substr(pos + std::string(kJudgmentMarker).size()));
  std::string token;
  if (!(rest >> token)) return std::nullopt;
  return token;
}

double reward(const RewardInput& r) {
  if (!r.format_ok) return -1.0;
  if (r.acc == 0) return 0.0;
  return r.acc + (r.used_search && r.used_memory ? kToolBonus : 0.0);
}

std::vector<double> group_advantages(const std::vector<double>& rewards) {
  if (rewards.size() < 2)
    throw TrainError(TrainError::Kind::GroupTooSmall,
                     "advantage normalization needs a group of >= 2");
  double mean = std::accumulate(rewards.begin(), rewards.end(), 0.0) /
                static_cast<double>(rewards.size());
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  double sd = std::sqrt(var / static_cast<double>(rewards.size()));
  std::vector<double> out;
  out.reserve(rewards.size());
  for (double r : rewards) out.push_back((r - mean) / (sd + 1e-8));
  return out;
}

ToyPolicy ToyPolicy::uniform(int horizon, int vocab) {
  ToyPolicy p;
  p.horizon = horizon;
  p.vocab = vocab;
  p.theta.assign(static_cast<size_t>(horizon) * vocab, 0.0);
  return p;
}

std::vector<double> ToyPolicy::probs(int step) const {
  std::vector<double> p(vocab);
  double mx = logit(step, 0);
  for (int a = 1; a < vocab; ++a) mx = std::max(mx, logit(step, a));
  double z = 0.0;
  for (int a = 0; a < vocab; ++a) z += (p[a] = std::exp(logit(step, a) - mx));
  for (double& v : p) v /= z;
  return p;
}

double ToyPolicy::logp(int step, int action) const {
  double mx = logit(step, 0);
  for (int a = 1; a < vocab; ++a) mx = std::max(mx, logit(step, a));
  double z = 0.0;
  for (int a = 0; a < vocab; ++a) z += std::exp(logit(step, a) - mx);
  return logit(step, action) - mx - std::log(z);
}

std::vector<int> ToyPolicy::sample(std::mt19937_64& rng) const {
  std::vector<int> seq(horizon);
  for (int t = 0; t < horizon; ++t) {
    std::vector<double> p = probs(t);
    std::discrete_distribution<int> dist(p.begin(), p.end());
    seq[t] = dist(rng);
  }
  return seq;
}

GrpoResult grpo_objective(const ToyPolicy& policy, const ToyPolicy& ref,
                          const RolloutGroup& group, double eps, double beta) {
  size_t g = group.actions.size();
  if (g == 0 || group.logp_old.size() != g || group.advantages.size() != g)
    throw TrainError(TrainError::Kind::ShapeMismatch, "group fields disagree on G");
  if (ref.horizon != policy.horizon || ref.vocab != policy.vocab)
    throw TrainError(TrainError::Kind::ShapeMismatch, "reference policy shape differs");

  GrpoResult out;
  out.grad.assign(policy.theta.size(), 0.0);
  for (size_t i = 0; i < g; ++i) {
    const std::vector<int>& seq = group.actions[i];
    if (seq.empty() || seq.size() != group.logp_old[i].size() ||
        seq.size() > static_cast<size_t>(policy.horizon))
      throw TrainError(TrainError::Kind::ShapeMismatch, "sequence/log-prob length mismatch");
    double adv = group.advantages[i];
    double w = 1.0 / (static_cast<double>(g) * static_cast<double>(seq.size()));
    for (size_t t = 0; t < seq.size(); ++t) {
      int step = static_cast<int>(t);
      int a = seq[t];
      if (a < 0 || a >= policy.vocab)
        throw TrainError(TrainError::Kind::ShapeMismatch, "action outside the vocabulary");
      std::vector<double> p = policy.probs(step);
      double rho = std::exp(std::log(p[a]) - group.logp_old[i][t]);
      double surr1 = rho * adv;
      double surr2 = std::clamp(rho, 1.0 - eps, 1.0 + eps) * adv;
      out.objective += w * std::min(surr1, surr2);
      if (surr1 <= surr2) {
        // unclipped branch carries the gradient: adv * rho * d log pi / d theta
        for (int v = 0; v < policy.vocab; ++v)
          out.grad[static_cast<size_t>(step) * policy.vocab + v] +=
              w * adv * rho * ((v == a ? 1.0 : 0.0) - p[v]);
      }
      if (beta > 0.0) {
        std::vector<double> q = ref.probs(step);
        double kl = 0.0;
        for (int v = 0; v < policy.vocab; ++v) kl += p[v] * (std::log(p[v]) - std::log(q[v]));
        out.objective -= w * beta * kl;
        for (int v = 0; v < policy.vocab; ++v)
          out.grad[static_cast<size_t>(step) * policy.vocab + v] -=
              w * beta * p[v] * ((std::log(p[v]) - std::log(q[v])) - kl);
      }
    }
  }
  return out;
}

RewardInput ToyEnv::observe(const std::vector<int>& actions) const {
  RewardInput r;
  if (actions.empty()) return r;
  int last = actions.back();
  r.format_ok = last == kJudgeA || last == kJudgeB;
  r.acc = (last == correct_judgment) ? 1 : 0;
  for (int a : actions) {
    if (a == kSearch) r.used_search = true;
    if (a == kMemory) r.used_memory = true;
  }
  return r;
}

TrainResult toy_training_loop(const ToyPolicy& init, const ToyEnv& env, int steps, int g,
                              double eps, double beta, double lr, uint64_t seed) {
  TrainResult out;
  out.policy = init;
  const ToyPolicy ref = init;
  std::mt19937_64 rng(seed);
  for (int step = 0; step < steps; ++step) {
    RolloutGroup group;
    for (int i = 0; i < g; ++i) {
      std::vector<int> seq = out.policy.sample(rng);
      std::vector<double> lp;
      for (size_t t = 0; t < seq.size(); ++t)
        lp.push_back(out.policy.logp(static_cast<int>(t), seq[t]));
      group.actions.push_back(std::move(seq));
      group.logp_old.push_back(std::move(lp));
      group.rewards.push_back(env.score(group.actions.back()));
    }
    group.advantages = group_advantages(group.rewards);
    GrpoResult res = grpo_objective(out.policy, ref, group, eps, beta);
    for (size_t j = 0; j < out.policy.theta.size(); ++j) out.policy.theta[j] += lr * res.grad[j];
    out.curve.push_back(std::accumulate(group.rewards.begin(), group.rewards.end(), 0.0) /
                        static_cast<double>(g));
  }
  return out;
}

void write_reward_curve(std::ostream& out, const std::vector<double>& curve) {
  for (size_t i = 0; i < curve.size(); ++i) out << i << '\t' << curve[i] << '\n';
}

SftExample serialize_sft_example(const std::string& query, const std::vector<ToolEvent>& trace,
                                 const std::string& judgment) {
  SftExample ex;
  ex.input = query;
  std::ostringstream target;
  for (const ToolEvent& ev : trace) {
    const char* tag = ev.kind == ToolEvent::Kind::Search ? "search" : "memory";
    target << "<" << tag << ">" << ev.content << "</" << tag << ">\n";
  }
  target << kJudgmentMarker << " " << judgment << "\n";
  ex.target = target.str();
  return ex;
}

std::vector<ToolEvent> parse_tool_events(const std::string& text) {
  std::vector<ToolEvent> out;
  std::vector<Tag> tags = scan_tags(text);
  std::vector<std::pair<Tag, size_t>> stack;  // tag + index reserved in out
  for (const Tag& tag : tags) {
    if (tag.open) {
      stack.push_back({tag, 0});
    } else if (!stack.empty() && stack.back().first.kind == tag.kind) {
      Tag open = stack.back().first;
      stack.pop_back();
      ToolEvent ev;
      ev.kind = tag.kind == 0 ? ToolEvent::Kind::Search : ToolEvent::Kind::Memory;
      size_t start = open.pos + open.len;
      ev.content = text.substr(start, tag.pos - start);
      out.push_back(std::move(ev));
    }
  }
  return out;
}

}  // namespace chemrec::train
