#include "claimpkg/generation.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace claimpkg {

namespace {

bool suffix_matches(std::span<const TokenId> context,
                    const std::vector<TokenId>& suffix) {
  if (suffix.size() > context.size()) return false;
  return std::equal(suffix.rbegin(), suffix.rend(), context.rbegin());
}

// Top-k (token, prob) pairs with prob > 0, ordered prob desc then token asc.
std::vector<std::pair<TokenId, double>> top_candidates(
    const std::vector<double>& dist, int k) {
  std::vector<std::pair<TokenId, double>> entries;
  for (std::size_t i = 0; i < dist.size(); ++i) {
    if (dist[i] > 0.0) entries.emplace_back(static_cast<TokenId>(i), dist[i]);
  }
  std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  if (static_cast<int>(entries.size()) > k) entries.resize(k);
  return entries;
}

}  // namespace

void MockLM::add_rule(std::vector<TokenId> suffix,
                      std::vector<std::pair<TokenId, double>> dist) {
  rules_.push_back(Rule{std::move(suffix), std::move(dist)});
}

void MockLM::set_default(std::vector<std::pair<TokenId, double>> dist) {
  default_dist_ = std::move(dist);
}

std::vector<double> MockLM::densify(
    const std::vector<std::pair<TokenId, double>>& sparse) const {
  std::vector<double> dense(vocab_size_, 0.0);
  double total = 0.0;
  for (const auto& [token, p] : sparse) {
    dense.at(static_cast<std::size_t>(token)) += p;
    total += p;
  }
  if (total <= 0.0) throw BuildError("MockLM: distribution has no mass");
  for (double& v : dense) v /= total;
  return dense;
}

std::vector<double> MockLM::next_distribution(
    std::span<const TokenId> context) const {
  const Rule* best = nullptr;
  for (const auto& rule : rules_) {
    if (!suffix_matches(context, rule.suffix)) continue;
    if (!best || rule.suffix.size() > best->suffix.size()) best = &rule;
  }
  if (best) return densify(best->dist);
  if (default_dist_.empty()) {
    throw BuildError("MockLM: no rule matches and no default distribution");
  }
  return densify(default_dist_);
}

std::vector<TokenId> extract_prefix(std::span<const TokenId> seq, TokenId open,
                                    TokenId close) {
  for (std::size_t i = seq.size(); i-- > 0;) {
    if (seq[i] == close) return {};
    if (seq[i] == open) {
      return {seq.begin() + static_cast<std::ptrdiff_t>(i) + 1, seq.end()};
    }
  }
  return {};
}

std::optional<std::vector<double>> mask_distribution(
    const std::vector<double>& p, const std::vector<TokenId>& allowed) {
  std::vector<double> out(p.size(), 0.0);
  double mass = 0.0;
  for (TokenId t : allowed) {
    auto i = static_cast<std::size_t>(t);
    if (i < p.size()) {
      out[i] = p[i];
      mass += p[i];
    }
  }
  if (mass <= 0.0) return std::nullopt;
  for (double& v : out) v /= mass;
  return out;
}

namespace {

struct StepChoice {
  TokenId token;
  double prob;
};

}  // namespace

DecodeOutcome constrained_decode(const LanguageModel& lm,
                                 const std::string& claim,
                                 const EntityTrie& trie, const Tokenizer& tok,
                                 const DecoderConfig& cfg) {
  std::vector<TokenId> context = tok.encode(claim);
  const std::size_t claim_len = context.size();
  bool constrained = false;
  double logp_sum = 0.0;
  int steps = 0;
  std::optional<std::mt19937_64> rng;
  if (cfg.sample_seed) rng.emplace(*cfg.sample_seed);

  while (steps < cfg.max_length) {
    std::vector<double> dist = lm.next_distribution(context);
    if (constrained) {
      auto generated =
          std::span<const TokenId>(context).subspan(claim_len);
      auto prefix = extract_prefix(generated, cfg.entity_open, cfg.entity_close);
      auto node = trie.lookup(prefix);
      std::vector<TokenId> allowed = node.allowed;
      if (node.terminal) allowed.push_back(cfg.entity_close);
      auto masked = mask_distribution(dist, allowed);
      if (!masked) {
        throw DeadEndError("constrained decode: no permitted token has mass");
      }
      dist = std::move(*masked);
    }

    StepChoice choice{0, 0.0};
    if (rng) {
      std::discrete_distribution<std::size_t> pick(dist.begin(), dist.end());
      std::size_t idx = pick(*rng);
      choice = {static_cast<TokenId>(idx), dist[idx]};
    } else {
      auto top = top_candidates(dist, 1);
      if (top.empty()) {
        throw DeadEndError("constrained decode: empty distribution");
      }
      choice = {top[0].first, top[0].second};
    }

    context.push_back(choice.token);
    logp_sum += std::log(choice.prob);
    ++steps;
    if (choice.token == cfg.entity_open) constrained = true;
    if (choice.token == cfg.entity_close) constrained = false;
    if (choice.token == cfg.eos) {
      context.pop_back();  // EOS carries no text
      DecodeOutcome out;
      out.tokens.assign(context.begin() + static_cast<std::ptrdiff_t>(claim_len),
                        context.end());
      out.score = logp_sum / std::max(1, steps);
      return out;
    }
  }

  std::vector<TokenId> partial(context.begin() + static_cast<std::ptrdiff_t>(claim_len),
                               context.end());
  if (constrained) {
    throw TruncationError("max_length reached with unclosed entity span",
                          std::move(partial));
  }
  DecodeOutcome out;
  out.tokens = std::move(partial);
  out.score = logp_sum / std::max(1, steps);
  return out;
}

BeamResult beam_decode(const LanguageModel& lm, const std::string& claim,
                       const EntityTrie& trie, const Tokenizer& tok,
                       const DecoderConfig& cfg) {
  struct Hyp {
    std::vector<TokenId> tokens;
    double logp_sum = 0.0;
    int steps = 0;
    bool constrained = false;

    double normalized() const { return logp_sum / std::max(1, steps); }
  };

  const std::vector<TokenId> claim_tokens = tok.encode(claim);
  std::vector<Hyp> live{Hyp{}};
  std::vector<DecodeOutcome> done;
  BeamResult result;
  std::size_t dead_ends = 0;

  for (int step = 0; step < cfg.max_length && !live.empty(); ++step) {
    std::vector<Hyp> expansions;
    for (const Hyp& hyp : live) {
      std::vector<TokenId> context = claim_tokens;
      context.insert(context.end(), hyp.tokens.begin(), hyp.tokens.end());
      std::vector<double> dist = lm.next_distribution(context);
      if (hyp.constrained) {
        auto prefix =
            extract_prefix(hyp.tokens, cfg.entity_open, cfg.entity_close);
        auto node = trie.lookup(prefix);
        std::vector<TokenId> allowed = node.allowed;
        if (node.terminal) allowed.push_back(cfg.entity_close);
        auto masked = mask_distribution(dist, allowed);
        if (!masked) {
          ++dead_ends;
          continue;
        }
        dist = std::move(*masked);
      }
      for (const auto& [token, prob] : top_candidates(dist, cfg.beam_size)) {
        Hyp next = hyp;
        next.logp_sum += std::log(prob);
        next.steps += 1;
        if (token == cfg.eos && !hyp.constrained) {
          done.push_back(DecodeOutcome{next.tokens, next.normalized()});
          continue;
        }
        next.tokens.push_back(token);
        if (token == cfg.entity_open) next.constrained = true;
        if (token == cfg.entity_close) next.constrained = false;
        expansions.push_back(std::move(next));
      }
    }
    std::stable_sort(expansions.begin(), expansions.end(),
                     [](const Hyp& a, const Hyp& b) {
                       return a.normalized() > b.normalized();
                     });
    if (static_cast<int>(expansions.size()) > cfg.beam_size) {
      expansions.resize(static_cast<std::size_t>(cfg.beam_size));
    }
    live = std::move(expansions);
  }

  // Hypotheses still live at max_length are unfinished and dropped.
  dead_ends += live.size();

  std::stable_sort(done.begin(), done.end(),
                   [](const DecodeOutcome& a, const DecodeOutcome& b) {
                     return a.score > b.score;
                   });
  if (static_cast<int>(done.size()) > cfg.beam_size) {
    done.resize(static_cast<std::size_t>(cfg.beam_size));
  }
  result.hypotheses = std::move(done);
  if (result.hypotheses.empty()) {
    result.diagnostics.push_back(
        "all beams dead-ended (" + std::to_string(dead_ends) +
        " hypotheses pruned before completion)");
  }
  return result;
}

}  // namespace claimpkg
