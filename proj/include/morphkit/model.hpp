// SPDX-License-Identifier: Apache-2.0
/**
 * @file   model.hpp
 * @brief  Joint tag and lemma predictor sharing one character embedding.
 *
 * Tag path:   embed -> dropout -> noise -> per-slot conv(4), conv(5)
 *             -> max/avg pool -> Z -> BiGRU over 2*cw+1 words
 *             -> six heads, each fed its masked linguistic features.
 * Lemma path: embed(current word) -> BiGRU encoder -> GRU decoder with
 *             Luong attention -> softmax over vocab + start/stop.
 *
 * Parameter groups: "embedding", "tag", "lemma".
 */
#ifndef MORPHKIT_MODEL_HPP
#define MORPHKIT_MODEL_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "morphkit/corpus.hpp"
#include "morphkit/layers.hpp"
#include "morphkit/lingfeat.hpp"

namespace morphkit::model {

using ad::Tape;
using ad::Var;
using nn::Rng;

class ModelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

enum class PoolVariant { MaxAvg, MaxOnly, AvgOnly };
enum class AttentionKind { Luong, Bahdanau, Monotonic };

inline constexpr const char *kEmbeddingGroup = "embedding";
inline constexpr const char *kTagGroup = "tag";
inline constexpr const char *kLemmaGroup = "lemma";

struct ModelConfig {
  int len_max = 18;
  int emb_dim = 64;
  int maps = 64; // feature maps per conv width
  int cw = 4;
  std::vector<int> widths{4, 5};
  int rnn_size = 64; // per direction
  int head1 = 64;
  int head2 = 128;
  int enc_size = 64; // per direction
  int dec_size = 64;
  double emb_dropout = 0.5;
  double head_dropout = 0.5;
  double noise_sigma = 0.1;
  int beam_width = 4;
  bool length_norm = false;
  PoolVariant pool = PoolVariant::MaxAvg;
  bool tie_conv = false;
  AttentionKind attention = AttentionKind::Luong;
  bool use_features = true;

  void validate() const;
  int conv_out(int width) const { return len_max - width + 1; }
  int pooled_rows() const { return conv_out(widths.front()) / 2; }
  int z_size() const;
  int seq_len() const { return 2 * cw + 1; }
  int max_decode_len() const { return len_max + 2; }

  std::map<std::string, std::string> to_map() const;
  /// Unknown keys are an error; absent keys keep their defaults.
  static ModelConfig from_map(const std::map<std::string, std::string> &kv);
};

std::string to_string(PoolVariant p);
std::string to_string(AttentionKind a);
PoolVariant pool_variant_from(std::string_view s);
AttentionKind attention_from(std::string_view s);

using TagProbs = std::array<Var, corpus::kNumTags>;

struct BeamResult {
  std::vector<int> symbols; // stop excluded
  double score = -std::numeric_limits<double>::infinity();
  bool finished = false;
};

/// Length-capped beam search. step(state, prev) returns a pair of
/// (log-probabilities over the output alphabet, next state). Each step keeps
/// the `width` best one-symbol extensions of the live hypotheses; extensions
/// ending in `stop` are frozen. Ties keep the earlier hypothesis and the
/// lower symbol. Returns the best frozen hypothesis, or the best live one
/// when none finished within max_len steps.
template <class State, class StepFn>
BeamResult beam_search(const State &init, StepFn &&step, int start, int stop,
                       std::size_t width, std::size_t max_len,
                       bool length_norm = false) {
  if (width < 1)
    throw ModelError("beam width must be >= 1");
  struct Hyp {
    std::vector<int> symbols;
    double score;
    State state;
    int last;
  };
  auto norm = [&](const BeamResult &r) {
    if (!length_norm)
      return r.score;
    return r.score / static_cast<double>(r.symbols.size() + (r.finished ? 1 : 0));
  };
  std::vector<Hyp> live{Hyp{{}, 0.0, init, start}};
  std::vector<BeamResult> done;
  for (std::size_t t = 0; t < max_len && !live.empty(); ++t) {
    struct Cand {
      double score;
      std::size_t hyp;
      int sym;
    };
    std::vector<Cand> cands;
    std::vector<State> next_states;
    next_states.reserve(live.size());
    for (std::size_t h = 0; h < live.size(); ++h) {
      auto [logp, ns] = step(live[h].state, live[h].last);
      next_states.push_back(std::move(ns));
      for (std::size_t v = 0; v < logp.size(); ++v)
        cands.push_back({live[h].score + logp[v], h, static_cast<int>(v)});
    }
    const std::size_t keep = std::min(width, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + keep, cands.end(),
                      [](const Cand &a, const Cand &b) {
                        if (a.score != b.score)
                          return a.score > b.score;
                        if (a.hyp != b.hyp)
                          return a.hyp < b.hyp;
                        return a.sym < b.sym;
                      });
    std::vector<Hyp> next;
    for (std::size_t k = 0; k < keep; ++k) {
      const Cand &c = cands[k];
      if (c.sym == stop) {
        done.push_back(BeamResult{live[c.hyp].symbols, c.score, true});
      } else {
        Hyp n{live[c.hyp].symbols, c.score, next_states[c.hyp], c.sym};
        n.symbols.push_back(c.sym);
        next.push_back(std::move(n));
      }
    }
    live = std::move(next);
  }
  const BeamResult *best = nullptr;
  for (const auto &r : done)
    if (!best || norm(r) > norm(*best))
      best = &r;
  if (best)
    return *best;
  BeamResult out;
  bool have = false;
  for (const auto &h : live) {
    BeamResult r{h.symbols, h.score, false};
    if (!have || norm(r) > norm(out)) {
      out = std::move(r);
      have = true;
    }
  }
  return out;
}

struct Analysis {
  std::string surface;
  std::string lemma;
  corpus::TagLabels tags;
  corpus::TagSet ids;
  std::array<std::vector<double>, corpus::kNumTags> probs;
  double lemma_score = 0.0;
  std::optional<std::string> error; // set when the token could not be analyzed
};

class MorphModel {
public:
  using Masks = std::array<lingfeat::FeatureMask, corpus::kNumTags>;

  /// Masks select each head's features from the full pool; head input
  /// sizes follow them, so they are fixed at construction.
  MorphModel(ModelConfig cfg, corpus::CharVocab vocab, corpus::TagDomains domains,
             Masks masks, std::uint64_t seed);
  MorphModel(ModelConfig cfg, corpus::CharVocab vocab, corpus::TagDomains domains,
             std::uint64_t seed)
      : MorphModel(cfg, std::move(vocab), std::move(domains), default_masks(cfg), seed) {}

  /// All pool slots, or none when use_features is off.
  static Masks default_masks(const ModelConfig &cfg);

  const ModelConfig &config() const { return cfg_; }
  const corpus::CharVocab &vocab() const { return vocab_; }
  const corpus::TagDomains &domains() const { return domains_; }
  ad::ParamStore &params() { return store_; }
  const ad::ParamStore &params() const { return store_; }

  const Masks &masks() const { return masks_; }
  const lingfeat::FeatureMask &mask(corpus::Tag t) const {
    return masks_[static_cast<std::size_t>(t)];
  }
  void set_phono_table(lingfeat::PhonoTable table) { table_ = std::move(table); }
  const lingfeat::PhonoTable &phono_table() const { return table_; }

  corpus::EncodeOptions encode_options() const {
    return corpus::EncodeOptions{cfg_.cw, cfg_.len_max, false};
  }

  /// Word representation Z for one padded id vector in context slot `slot`.
  Var word_z(Tape &t, std::span<const int> ids, std::size_t slot, bool training,
             Rng &rng) const;
  Var tag_rnn(Tape &t, const corpus::EncodedExample &ex, bool training, Rng &rng) const;
  TagProbs tag_forward(Tape &t, const corpus::EncodedExample &ex, bool training,
                       Rng &rng) const;

  /// Decoder targets: lemma chars then stop.
  std::vector<int> lemma_targets(const corpus::EncodedExample &ex) const;
  std::vector<Var> lemma_forward(Tape &t, const corpus::EncodedExample &ex,
                                 bool training, Rng &rng) const;

  BeamResult beam_decode(std::span<const int> word_ids, std::size_t width,
                         std::size_t max_len) const;
  BeamResult beam_decode(std::span<const int> word_ids) const {
    return beam_decode(word_ids, cfg_.beam_width, cfg_.max_decode_len());
  }

  /// Inference-mode analysis of one encoded example.
  Analysis analyze_example(const corpus::EncodedExample &ex) const;
  std::vector<Analysis> analyze(const corpus::Sentence &s) const;

  void save(const std::filesystem::path &path) const;
  std::string serialize() const;
  static MorphModel load(const std::filesystem::path &path);
  static MorphModel deserialize(std::string_view text);

private:
  struct SlotConvs {
    std::vector<nn::Conv1d> convs; // one per width
  };
  struct Decoder {
    nn::BiGRU encoder;
    nn::Dense init; // [last fwd | last bwd] -> dec
    nn::GRUCell cell;
    nn::LuongAttention attention;
    nn::Dense combine; // [context | h] -> dec
    nn::Dense out;     // dec -> vocab + 2
    ad::Parameter *start = nullptr; // 1 x emb
  };

  Var embed(Tape &t, std::span<const int> ids) const;
  Var masked_features(Tape &t, const corpus::EncodedExample &ex, std::size_t tag) const;
  Var encode_word(Tape &t, std::span<const int> chars, bool training, Rng &rng) const;
  Var decoder_init(Tape &t, Var enc_states) const;
  /// One decoder step; returns (probabilities, new hidden state).
  std::pair<Var, Var> decode_step(Tape &t, Var input, Var h, Var enc_states) const;

  ModelConfig cfg_;
  corpus::CharVocab vocab_;
  corpus::TagDomains domains_;
  Masks masks_;
  lingfeat::PhonoTable table_;
  ad::ParamStore store_;
  nn::Embedding embedding_;
  std::vector<SlotConvs> slots_;
  nn::BiGRU tag_rnn_;
  std::array<nn::DenseHead, corpus::kNumTags> heads_;
  Decoder dec_;
  std::uint64_t seed_ = 0;
};

/// Characters of the word proper (ids before the first pad).
std::vector<int> strip_pads(std::span<const int> ids);

} // namespace morphkit::model

#endif
