// SPDX-License-Identifier: Apache-2.0
#include "morphkit/model.hpp"

#include <sstream>

#include "morphkit/checkpoint.hpp"
#include "morphkit/text.hpp"

namespace morphkit::model {

using ad::Shape;
using ad::Tensor;
using corpus::kNumTags;

// ------------------------------------------------------------- config

std::string to_string(PoolVariant p) {
  switch (p) {
  case PoolVariant::MaxAvg: return "max_avg";
  case PoolVariant::MaxOnly: return "max_only";
  case PoolVariant::AvgOnly: return "avg_only";
  }
  return "?";
}

std::string to_string(AttentionKind a) {
  switch (a) {
  case AttentionKind::Luong: return "luong";
  case AttentionKind::Bahdanau: return "bahdanau";
  case AttentionKind::Monotonic: return "monotonic";
  }
  return "?";
}

PoolVariant pool_variant_from(std::string_view s) {
  if (s == "max_avg") return PoolVariant::MaxAvg;
  if (s == "max_only") return PoolVariant::MaxOnly;
  if (s == "avg_only") return PoolVariant::AvgOnly;
  throw ModelError("unknown pooling variant '" + std::string(s) +
                   "' (expected max_avg, max_only or avg_only)");
}

AttentionKind attention_from(std::string_view s) {
  if (s == "luong") return AttentionKind::Luong;
  if (s == "bahdanau") return AttentionKind::Bahdanau;
  if (s == "monotonic") return AttentionKind::Monotonic;
  throw ModelError("unknown attention '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
  auto positive = [](int v, const char *name) {
    if (v < 1)
      throw ModelError(std::string(name) + " must be >= 1");
  };
  positive(len_max, "len_max");
  positive(emb_dim, "emb_dim");
  positive(maps, "maps");
  positive(rnn_size, "rnn_size");
  positive(head1, "head1");
  positive(head2, "head2");
  positive(enc_size, "enc_size");
  positive(dec_size, "dec_size");
  positive(beam_width, "beam_width");
  if (cw < 0)
    throw ModelError("cw must be >= 0");
  if (widths.empty())
    throw ModelError("at least one convolution width is required");
  for (int w : widths) {
    positive(w, "conv width");
    if (conv_out(w) < 2)
      throw ModelError("len_max=" + std::to_string(len_max) + " is too short for width " +
                       std::to_string(w) + " followed by pooling");
    if (conv_out(w) / 2 != pooled_rows())
      throw ModelError("conv widths give different pooled lengths at len_max=" +
                       std::to_string(len_max) + "; use an even len_max");
  }
  for (double r : {emb_dropout, head_dropout})
    if (r < 0.0 || r >= 1.0)
      throw ModelError("dropout rates must lie in [0, 1)");
  if (noise_sigma < 0.0)
    throw ModelError("noise_sigma must be >= 0");
  if (attention != AttentionKind::Luong)
    throw ModelError("attention '" + to_string(attention) +
                     "' is reserved but not implemented; use luong");
}

int ModelConfig::z_size() const {
  const int per_width = pool == PoolVariant::MaxAvg ? 2 : 1;
  return pooled_rows() * maps * per_width * static_cast<int>(widths.size());
}

std::map<std::string, std::string> ModelConfig::to_map() const {
  std::map<std::string, std::string> m;
  auto d = [](double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
  };
  m["len_max"] = std::to_string(len_max);
  m["emb_dim"] = std::to_string(emb_dim);
  m["maps"] = std::to_string(maps);
  m["cw"] = std::to_string(cw);
  std::string ws;
  for (std::size_t i = 0; i < widths.size(); ++i)
    ws += (i ? "," : "") + std::to_string(widths[i]);
  m["widths"] = ws;
  m["rnn_size"] = std::to_string(rnn_size);
  m["head1"] = std::to_string(head1);
  m["head2"] = std::to_string(head2);
  m["enc_size"] = std::to_string(enc_size);
  m["dec_size"] = std::to_string(dec_size);
  m["emb_dropout"] = d(emb_dropout);
  m["head_dropout"] = d(head_dropout);
  m["noise_sigma"] = d(noise_sigma);
  m["beam_width"] = std::to_string(beam_width);
  m["length_norm"] = length_norm ? "true" : "false";
  m["pool"] = to_string(pool);
  m["tie_conv"] = tie_conv ? "true" : "false";
  m["attention"] = to_string(attention);
  m["use_features"] = use_features ? "true" : "false";
  return m;
}

namespace {

int to_int(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const int r = std::stoi(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return r;
  } catch (const std::exception &) {
    throw ModelError("config key '" + key + "': expected an integer, got '" + v + "'");
  }
}

double to_double(const std::string &key, const std::string &v) {
  try {
    std::size_t used = 0;
    const double r = std::stod(v, &used);
    if (used != v.size())
      throw std::invalid_argument(v);
    return r;
  } catch (const std::exception &) {
    throw ModelError("config key '" + key + "': expected a number, got '" + v + "'");
  }
}

bool to_bool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on")
    return true;
  if (v == "false" || v == "0" || v == "no" || v == "off")
    return false;
  throw ModelError("config key '" + key + "': expected true/false, got '" + v + "'");
}

} // namespace

ModelConfig ModelConfig::from_map(const std::map<std::string, std::string> &kv) {
  ModelConfig c;
  for (const auto &[k, v] : kv) {
    if (k == "len_max") c.len_max = to_int(k, v);
    else if (k == "emb_dim") c.emb_dim = to_int(k, v);
    else if (k == "maps") c.maps = to_int(k, v);
    else if (k == "cw") c.cw = to_int(k, v);
    else if (k == "widths") {
      c.widths.clear();
      for (const auto &w : text::split(v, ','))
        c.widths.push_back(to_int(k, std::string(text::trim(w))));
    } else if (k == "rnn_size") c.rnn_size = to_int(k, v);
    else if (k == "head1") c.head1 = to_int(k, v);
    else if (k == "head2") c.head2 = to_int(k, v);
    else if (k == "enc_size") c.enc_size = to_int(k, v);
    else if (k == "dec_size") c.dec_size = to_int(k, v);
    else if (k == "emb_dropout") c.emb_dropout = to_double(k, v);
    else if (k == "head_dropout") c.head_dropout = to_double(k, v);
    else if (k == "noise_sigma") c.noise_sigma = to_double(k, v);
    else if (k == "beam_width") c.beam_width = to_int(k, v);
    else if (k == "length_norm") c.length_norm = to_bool(k, v);
    else if (k == "pool") c.pool = pool_variant_from(v);
    else if (k == "tie_conv") c.tie_conv = to_bool(k, v);
    else if (k == "attention") c.attention = attention_from(v);
    else if (k == "use_features") c.use_features = to_bool(k, v);
    else throw ModelError("unknown model config key '" + k + "'");
  }
  return c;
}

std::vector<int> strip_pads(std::span<const int> ids) {
  std::vector<int> out;
  for (int id : ids) {
    if (id == corpus::CharVocab::kPad)
      break;
    out.push_back(id);
  }
  return out;
}

// -------------------------------------------------------------- model

MorphModel::Masks MorphModel::default_masks(const ModelConfig &cfg) {
  Masks m;
  for (auto &x : m)
    x = cfg.use_features ? lingfeat::FeatureMask::all(lingfeat::pool_size())
                         : lingfeat::FeatureMask::none(lingfeat::pool_size());
  return m;
}

MorphModel::MorphModel(ModelConfig cfg, corpus::CharVocab vocab,
                       corpus::TagDomains domains, Masks masks, std::uint64_t seed)
    : cfg_(std::move(cfg)), vocab_(std::move(vocab)), domains_(std::move(domains)),
      masks_(std::move(masks)), seed_(seed) {
  cfg_.validate();
  domains_.freeze();
  for (const auto &m : masks_)
    if (m.size() != lingfeat::pool_size())
      throw ModelError("feature mask has " + std::to_string(m.size()) +
                       " bits; the pool has " + std::to_string(lingfeat::pool_size()));
  Rng rng(seed);
  const auto E = static_cast<std::size_t>(cfg_.emb_dim);
  embedding_ = nn::Embedding::create(store_, "embedding", kEmbeddingGroup,
                                     static_cast<std::size_t>(vocab_.size()), E, rng);

  const int n_slots = cfg_.tie_conv ? 1 : cfg_.seq_len();
  for (int s = 0; s < n_slots; ++s) {
    SlotConvs sc;
    for (int w : cfg_.widths)
      sc.convs.push_back(nn::Conv1d::create(
          store_, "tag.slot" + std::to_string(s) + ".conv" + std::to_string(w), kTagGroup,
          static_cast<std::size_t>(w), E, static_cast<std::size_t>(cfg_.maps), rng));
    slots_.push_back(std::move(sc));
  }
  tag_rnn_ = nn::BiGRU::create(store_, "tag.bigru", kTagGroup,
                               static_cast<std::size_t>(cfg_.z_size()),
                               static_cast<std::size_t>(cfg_.rnn_size), rng);
  for (std::size_t j = 0; j < kNumTags; ++j) {
    const auto classes = domains_.at(j).size();
    if (classes < 2)
      throw ModelError("tag domain " + std::string(corpus::kTagNames[j]) +
                       " has only the Unk label; a head needs at least 2 classes");
    heads_[j] = nn::DenseHead::create(
        store_, "tag.head." + std::string(corpus::kTagNames[j]), kTagGroup,
        tag_rnn_.output_size(), masks_[j].count(), static_cast<std::size_t>(cfg_.head1),
        static_cast<std::size_t>(cfg_.head2), classes, cfg_.head_dropout, rng);
  }

  const auto enc = static_cast<std::size_t>(cfg_.enc_size);
  const auto dec = static_cast<std::size_t>(cfg_.dec_size);
  dec_.encoder = nn::BiGRU::create(store_, "lemma.encoder", kLemmaGroup, E, enc, rng);
  dec_.init = nn::Dense::create(store_, "lemma.init", kLemmaGroup, 2 * enc, dec, rng);
  dec_.cell = nn::GRUCell::create(store_, "lemma.decoder", kLemmaGroup, E, dec, rng);
  dec_.attention =
      nn::LuongAttention::create(store_, "lemma.attention", kLemmaGroup, dec, 2 * enc, rng);
  dec_.combine = nn::Dense::create(store_, "lemma.combine", kLemmaGroup, 2 * enc + dec, dec, rng);
  dec_.out = nn::Dense::create(store_, "lemma.out", kLemmaGroup, dec,
                               static_cast<std::size_t>(vocab_.output_size()), rng);
  std::normal_distribution<double> n01(0.0, 0.1);
  Tensor start(Shape{1, E});
  for (auto &v : start.data())
    v = n01(rng);
  dec_.start = &store_.add("lemma.start", kLemmaGroup, std::move(start));
}

Var MorphModel::embed(Tape &t, std::span<const int> ids) const {
  for (int id : ids)
    if (id < 0 || id >= vocab_.size())
      throw ModelError("character id " + std::to_string(id) + " outside the vocabulary");
  return embedding_.forward(t, ids);
}

Var MorphModel::word_z(Tape &t, std::span<const int> ids, std::size_t slot,
                       bool training, Rng &rng) const {
  if (ids.size() != static_cast<std::size_t>(cfg_.len_max))
    throw ModelError("word has " + std::to_string(ids.size()) + " ids; the model expects " +
                     std::to_string(cfg_.len_max));
  Var x = embed(t, ids);
  x = nn::dropout(x, cfg_.emb_dropout, training, rng);
  x = nn::gaussian_noise(x, cfg_.noise_sigma, training, rng);
  const SlotConvs &sc = slots_[cfg_.tie_conv ? 0 : slot];
  std::vector<Var> pooled;
  for (const auto &conv : sc.convs) {
    Var c = conv.forward(t, x);
    if (cfg_.pool != PoolVariant::AvgOnly)
      pooled.push_back(nn::pool(c, nn::PoolMode::Max));
    if (cfg_.pool != PoolVariant::MaxOnly)
      pooled.push_back(nn::pool(c, nn::PoolMode::Avg));
  }
  // Per width the order is max then avg, giving max4|avg4|max5|avg5.
  return nn::build_z(pooled);
}

Var MorphModel::tag_rnn(Tape &t, const corpus::EncodedExample &ex, bool training,
                        Rng &rng) const {
  const auto cw = static_cast<std::size_t>(cfg_.cw);
  if (ex.context_ids.size() != 2 * cw)
    throw ModelError("example has " + std::to_string(ex.context_ids.size()) +
                     " context slots; the model expects " + std::to_string(2 * cw));
  std::vector<Var> zs;
  for (std::size_t s = 0; s < 2 * cw + 1; ++s) {
    const std::vector<int> &ids =
        s < cw ? ex.context_ids[s] : s == cw ? ex.word_ids : ex.context_ids[s - 1];
    zs.push_back(word_z(t, ids, s, training, rng));
  }
  Var seq = nn::build_context_seq(zs, cfg_.cw);
  return tag_rnn_.forward(t, seq, nn::BiGruOutput::Last);
}

Var MorphModel::masked_features(Tape &t, const corpus::EncodedExample &ex,
                                std::size_t tag) const {
  if (ex.features.size() != lingfeat::pool_size())
    throw ModelError("example carries " + std::to_string(ex.features.size()) +
                     " feature slots; expected " + std::to_string(lingfeat::pool_size()));
  return t.constant(Tensor::row(lingfeat::apply_mask(ex.features, masks_[tag])));
}

TagProbs MorphModel::tag_forward(Tape &t, const corpus::EncodedExample &ex,
                                 bool training, Rng &rng) const {
  Var h = tag_rnn(t, ex, training, rng);
  TagProbs out;
  for (std::size_t j = 0; j < kNumTags; ++j) {
    std::optional<Var> f;
    if (masks_[j].count() > 0)
      f = masked_features(t, ex, j);
    out[j] = heads_[j].forward(t, h, f, training, rng);
  }
  return out;
}

std::vector<int> MorphModel::lemma_targets(const corpus::EncodedExample &ex) const {
  std::vector<int> tgt;
  for (std::size_t i = 1; i < ex.gold_lemma_ids.size(); ++i) {
    tgt.push_back(ex.gold_lemma_ids[i]);
    if (ex.gold_lemma_ids[i] == vocab_.stop_id())
      return tgt;
  }
  throw ModelError("gold lemma is not framed by a stop symbol");
}

Var MorphModel::encode_word(Tape &t, std::span<const int> chars, bool training,
                            Rng &rng) const {
  (void)training;
  (void)rng;
  if (chars.empty())
    throw ModelError("lemma predictor: empty word");
  return dec_.encoder.forward(t, embed(t, chars), nn::BiGruOutput::PerStep);
}

Var MorphModel::decoder_init(Tape &t, Var enc) const {
  const std::size_t S = enc.value().dim(0);
  const std::size_t h = dec_.encoder.fwd.hidden_size();
  Var last_f = ad::slice(ad::slice(enc, 0, S - 1, S), 1, 0, h);
  Var last_b = ad::slice(ad::slice(enc, 0, 0, 1), 1, h, 2 * h);
  return ad::tanh(dec_.init.forward(t, ad::concat({last_f, last_b}, 1)));
}

std::pair<Var, Var> MorphModel::decode_step(Tape &t, Var input, Var h, Var enc) const {
  Var h2 = dec_.cell.step(t, input, h);
  auto att = dec_.attention.attend(t, h2, enc);
  Var mixed = ad::tanh(dec_.combine.forward(t, ad::concat({att.context, h2}, 1)));
  return {ad::softmax(dec_.out.forward(t, mixed), 1), h2};
}

std::vector<Var> MorphModel::lemma_forward(Tape &t, const corpus::EncodedExample &ex,
                                           bool training, Rng &rng) const {
  const auto chars = strip_pads(std::span<const int>(ex.word_ids).first(
      static_cast<std::size_t>(std::max(0, ex.word_length))));
  Var enc = encode_word(t, chars, training, rng);
  Var h = decoder_init(t, enc);
  const std::vector<int> tgt = lemma_targets(ex);
  std::vector<Var> steps;
  for (std::size_t s = 0; s < tgt.size(); ++s) {
    Var in = s == 0 ? t.param(*dec_.start) : embed(t, std::span<const int>(&tgt[s - 1], 1));
    auto [probs, h2] = decode_step(t, in, h, enc);
    steps.push_back(probs);
    h = h2;
  }
  return steps;
}

BeamResult MorphModel::beam_decode(std::span<const int> word_ids, std::size_t width,
                                   std::size_t max_len) const {
  const auto chars = strip_pads(word_ids);
  Tape t;
  Rng unused(0);
  Var enc = encode_word(t, chars, false, unused);
  Var h0 = decoder_init(t, enc);
  const int start = vocab_.start_id(), stop = vocab_.stop_id();
  auto step = [&](const Var &h, int prev) {
    Var in = prev == start ? t.param(*dec_.start) : embed(t, std::span<const int>(&prev, 1));
    auto [probs, h2] = decode_step(t, in, h, enc);
    std::vector<double> logp(probs.value().numel());
    for (std::size_t v = 0; v < logp.size(); ++v)
      logp[v] = std::log(std::max(probs.value()[v], 1e-300));
    // Padding and the start symbol are never emitted.
    logp[static_cast<std::size_t>(corpus::CharVocab::kPad)] =
        -std::numeric_limits<double>::infinity();
    logp[static_cast<std::size_t>(start)] = -std::numeric_limits<double>::infinity();
    return std::pair<std::vector<double>, Var>{std::move(logp), h2};
  };
  return beam_search(h0, step, start, stop, width, max_len, cfg_.length_norm);
}

Analysis MorphModel::analyze_example(const corpus::EncodedExample &ex) const {
  Analysis a;
  Tape t;
  Rng unused(0);
  const TagProbs probs = tag_forward(t, ex, false, unused);
  for (std::size_t j = 0; j < kNumTags; ++j) {
    const auto p = probs[j].value().data();
    a.probs[j].assign(p.begin(), p.end());
    a.ids.ids[j] = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
  }
  a.tags = domains_.labels_of(a.ids);
  const BeamResult r = beam_decode(ex.word_ids);
  a.lemma = vocab_.decode(r.symbols);
  a.lemma_score = r.score;
  return a;
}

std::vector<Analysis> MorphModel::analyze(const corpus::Sentence &s) const {
  // Gold fields are irrelevant here; blank them so encoding never trips
  // over unseen labels or long lemmas.
  corpus::Sentence probe = s;
  for (auto &tok : probe.tokens) {
    tok.lemma.clear();
    tok.tags.fill(std::string(corpus::kUnk));
  }
  corpus::EncodeOptions opts = encode_options();
  opts.truncate = true; // overlong neighbours are cut; overlong targets are reported
  std::vector<Analysis> out;
  for (std::size_t i = 0; i < s.tokens.size(); ++i) {
    const std::string &surface = s.tokens[i].surface;
    Analysis a;
    try {
      const auto len = text::decode_utf8(surface).size();
      if (len > static_cast<std::size_t>(cfg_.len_max))
        throw ModelError("token '" + surface + "' has " + std::to_string(len) +
                         " characters; len_max is " + std::to_string(cfg_.len_max));
      if (len == 0)
        throw ModelError("empty token");
      auto ex = corpus::encode_token(probe, i, vocab_, domains_, opts);
      ex.features = lingfeat::extract(s, i, table_);
      a = analyze_example(ex);
    } catch (const std::exception &e) {
      a = Analysis{};
      a.tags.fill(std::string(corpus::kUnk));
      a.error = e.what();
    }
    a.surface = surface;
    out.push_back(std::move(a));
  }
  return out;
}

// --------------------------------------------------------- checkpoint

namespace {

constexpr const char *kModelMagic = "morphkit-model";
constexpr int kModelFormatVersion = 1;

std::string next_line(std::istringstream &is, std::string_view what) {
  std::string line;
  if (!std::getline(is, line))
    throw ModelError("checkpoint truncated while reading " + std::string(what));
  return line;
}

std::size_t count_after(const std::string &line, std::string_view key) {
  if (line.rfind(std::string(key) + " ", 0) != 0)
    throw ModelError("checkpoint: expected '" + std::string(key) + "', got '" + line + "'");
  return std::stoul(line.substr(key.size() + 1));
}

} // namespace

std::string MorphModel::serialize() const {
  std::ostringstream os;
  os << kModelMagic << ' ' << kModelFormatVersion << '\n';
  const auto kv = cfg_.to_map();
  os << "config " << kv.size() << '\n';
  for (const auto &[k, v] : kv)
    os << k << " = " << v << '\n';
  os << "seed " << seed_ << '\n';
  os << "vocab " << vocab_.chars().size() << '\n';
  for (char32_t c : vocab_.chars())
    os << std::hex << static_cast<std::uint32_t>(c) << std::dec << '\n';
  os << "vocab_fingerprint " << std::hex << vocab_.fingerprint() << std::dec << '\n';
  for (std::size_t j = 0; j < kNumTags; ++j) {
    const auto &d = domains_.at(j);
    os << "domain\t" << corpus::kTagNames[j] << '\t' << d.size();
    for (const auto &l : d.labels())
      os << '\t' << l;
    os << '\n';
  }
  for (std::size_t j = 0; j < kNumTags; ++j)
    os << "mask " << corpus::kTagNames[j] << ' ' << masks_[j].to_string() << '\n';
  const auto phono = text::split(table_.source(), '\n');
  os << "phono " << phono.size() << '\n';
  for (const auto &l : phono)
    os << l << '\n';
  ad::write_params(os, store_);
  return os.str();
}

void MorphModel::save(const std::filesystem::path &path) const {
  text::write_atomic(path, serialize());
}

MorphModel MorphModel::deserialize(std::string_view textv) {
  std::istringstream is{std::string(textv)};
  {
    std::istringstream hs(next_line(is, "header"));
    std::string magic;
    int version = 0;
    hs >> magic >> version;
    if (magic != kModelMagic)
      throw ModelError("not a morphkit model checkpoint");
    if (version != kModelFormatVersion)
      throw ModelError("unsupported model format version " + std::to_string(version));
  }
  std::map<std::string, std::string> kv;
  const std::size_t nkv = count_after(next_line(is, "config"), "config");
  for (std::size_t i = 0; i < nkv; ++i) {
    const std::string line = next_line(is, "config");
    const auto eq = line.find(" = ");
    if (eq == std::string::npos)
      throw ModelError("checkpoint: malformed config line '" + line + "'");
    kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  const ModelConfig cfg = ModelConfig::from_map(kv);
  const std::uint64_t seed = count_after(next_line(is, "seed"), "seed");
  const std::size_t nv = count_after(next_line(is, "vocab"), "vocab");
  std::vector<char32_t> chars;
  for (std::size_t i = 0; i < nv; ++i)
    chars.push_back(static_cast<char32_t>(std::stoul(next_line(is, "vocab"), nullptr, 16)));
  corpus::CharVocab vocab(chars);
  {
    const std::string line = next_line(is, "fingerprint");
    if (line.rfind("vocab_fingerprint ", 0) != 0)
      throw ModelError("checkpoint: expected vocab_fingerprint, got '" + line + "'");
    const auto fp = std::stoull(line.substr(line.find(' ') + 1), nullptr, 16);
    if (fp != vocab.fingerprint())
      throw ModelError("checkpoint: vocabulary fingerprint mismatch");
  }
  corpus::TagDomains domains;
  for (std::size_t j = 0; j < kNumTags; ++j) {
    const auto f = text::split(next_line(is, "domain"), '\t');
    if (f.size() < 3 || f[0] != "domain" || f[1] != corpus::kTagNames[j])
      throw ModelError("checkpoint: malformed domain record for " +
                       std::string(corpus::kTagNames[j]));
    for (std::size_t k = 3; k < f.size(); ++k)
      domains.at(j).intern(f[k]);
    if (domains.at(j).size() != std::stoul(f[2]))
      throw ModelError("checkpoint: domain size mismatch for " + f[1]);
  }
  Masks masks;
  for (std::size_t j = 0; j < kNumTags; ++j) {
    std::istringstream ms(next_line(is, "mask"));
    std::string word, tag, bits;
    ms >> word >> tag >> bits;
    if (word != "mask" || tag != corpus::kTagNames[j])
      throw ModelError("checkpoint: malformed mask record");
    masks[j] = lingfeat::FeatureMask::from_string(bits);
  }
  const std::size_t np = count_after(next_line(is, "phono"), "phono");
  std::string phono;
  for (std::size_t i = 0; i < np; ++i)
    phono += next_line(is, "phono") + (i + 1 < np ? "\n" : "");
  MorphModel m(cfg, std::move(vocab), std::move(domains), std::move(masks), seed);
  if (!text::trim(phono).empty())
    m.set_phono_table(lingfeat::PhonoTable::parse(phono));
  ad::read_params(is, m.store_);
  return m;
}

MorphModel MorphModel::load(const std::filesystem::path &path) {
  return deserialize(text::read_file(path));
}

} // namespace morphkit::model
