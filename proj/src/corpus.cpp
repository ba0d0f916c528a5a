// SPDX-License-Identifier: Apache-2.0
#include "morphkit/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include "morphkit/text.hpp"

namespace morphkit::corpus {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  for (char &c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

const std::vector<std::string> &known_columns() {
  static const std::vector<std::string> cols = {
      "surface", "lemma", "pos", "gender", "number", "person", "case", "tam", "_"};
  return cols;
}

std::string first_candidate(std::string_view field, bool &had_alternatives) {
  const auto bar = field.find('|');
  if (bar == std::string_view::npos)
    return std::string(field);
  had_alternatives = true;
  return std::string(field.substr(0, bar));
}

} // namespace

std::optional<Tag> tag_from_name(std::string_view name) {
  const std::string n = lower(name);
  if (n == "pos")
    return Tag::POS;
  if (n == "g" || n == "gender")
    return Tag::G;
  if (n == "n" || n == "number")
    return Tag::N;
  if (n == "p" || n == "person")
    return Tag::P;
  if (n == "c" || n == "case")
    return Tag::C;
  if (n == "tam")
    return Tag::TAM;
  return std::nullopt;
}

// ------------------------------------------------------------- TagDomain

TagDomain::TagDomain(std::string name) : name_(std::move(name)) {
  intern(kUnk);
}

std::optional<int> TagDomain::find(std::string_view label) const {
  auto it = index_.find(label);
  if (it == index_.end())
    return std::nullopt;
  return it->second;
}

int TagDomain::intern(std::string_view label) {
  if (auto id = find(label))
    return *id;
  const int id = static_cast<int>(labels_.size());
  labels_.emplace_back(label);
  index_.emplace(std::string(label), id);
  return id;
}

TagDomains::TagDomains() {
  for (std::size_t i = 0; i < kNumTags; ++i)
    domains_[i] = TagDomain(std::string(kTagNames[i]));
}

int TagDomains::resolve(Tag t, std::string_view label) {
  if (!frozen_)
    return (*this)[t].intern(label);
  return lookup(t, label);
}

int TagDomains::lookup(Tag t, std::string_view label) const {
  if (auto id = (*this)[t].find(label))
    return *id;
  throw UnknownLabelError("unknown " + std::string(kTagNames[static_cast<std::size_t>(t)]) +
                          " label '" + std::string(label) + "'");
}

TagSet TagDomains::resolve(const TagLabels &labels) {
  TagSet s;
  for (std::size_t i = 0; i < kNumTags; ++i)
    s.ids[i] = resolve(static_cast<Tag>(i), labels[i]);
  return s;
}

TagSet TagDomains::lookup(const TagLabels &labels) const {
  TagSet s;
  for (std::size_t i = 0; i < kNumTags; ++i)
    s.ids[i] = lookup(static_cast<Tag>(i), labels[i]);
  return s;
}

TagLabels TagDomains::labels_of(const TagSet &ids) const {
  TagLabels out;
  for (std::size_t i = 0; i < kNumTags; ++i)
    out[i] = domains_[i].label(ids.ids[i]);
  return out;
}

std::string normalize_label(std::string_view raw) {
  const auto t = text::trim(raw);
  if (t.empty() || t == "-")
    return std::string(kUnk);
  return std::string(t);
}

// ---------------------------------------------------------- ColumnSchema

ColumnSchema ColumnSchema::standard() {
  return ColumnSchema{{"surface", "lemma", "pos", "gender", "number", "person", "case", "tam"}};
}

ColumnSchema ColumnSchema::parse_manifest(std::string_view text) {
  ColumnSchema schema;
  std::size_t lineno = 0;
  for (const auto &raw : text::split(text, '\n')) {
    ++lineno;
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("manifest line " + std::to_string(lineno) +
                           ": expected key=value",
                       lineno);
    const auto key = text::trim(line.substr(0, eq));
    const auto value = text::trim(line.substr(eq + 1));
    if (key != "columns")
      continue;
    for (const auto &c : text::split(value, ',')) {
      std::string col = lower(text::trim(c));
      if (std::find(known_columns().begin(), known_columns().end(), col) ==
          known_columns().end())
        throw ParseError("manifest line " + std::to_string(lineno) +
                             ": unknown column '" + col + "'",
                         lineno);
      schema.columns.push_back(col);
    }
  }
  if (schema.columns.empty())
    throw ParseError("manifest declares no columns", 0);
  for (const char *req : {"surface", "lemma"})
    if (std::find(schema.columns.begin(), schema.columns.end(), req) ==
        schema.columns.end())
      throw ParseError(std::string("manifest lacks required column '") + req + "'", 0);
  return schema;
}

ColumnSchema ColumnSchema::from_manifest_file(const std::filesystem::path &path) {
  return parse_manifest(text::read_file(path));
}

// --------------------------------------------------------------- parsing

std::vector<Sentence> parse_treebank_text(std::string_view text,
                                          const ColumnSchema &schema,
                                          TagDomains *domains,
                                          ParseReport *report) {
  std::vector<Sentence> out;
  Sentence current;
  std::size_t lineno = 0;
  auto flush = [&] {
    if (!current.tokens.empty())
      out.push_back(std::move(current));
    current = Sentence{};
  };
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos)
      nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++lineno;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (text::trim(line).empty()) {
      flush();
      if (nl == text.size())
        break;
      continue;
    }
    if (line.front() == '#')
      continue;
    const auto fields = text::split(line, '\t');
    if (fields.size() != schema.width())
      throw ParseError("line " + std::to_string(lineno) + ": expected " +
                           std::to_string(schema.width()) + " columns, found " +
                           std::to_string(fields.size()),
                       lineno);
    Token tok;
    for (auto &t : tok.tags)
      t = std::string(kUnk);
    bool alternatives = false;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string &col = schema.columns[c];
      if (col == "_")
        continue;
      if (col == "surface") {
        tok.surface = std::string(text::trim(fields[c]));
        continue;
      }
      const std::string value = first_candidate(fields[c], alternatives);
      if (col == "lemma")
        tok.lemma = std::string(text::trim(value));
      else if (auto t = tag_from_name(col))
        tok.tags[static_cast<std::size_t>(*t)] = normalize_label(value);
    }
    if (tok.surface.empty())
      throw ParseError("line " + std::to_string(lineno) + ": empty surface form", lineno);
    try {
      (void)text::decode_utf8(tok.surface);
      (void)text::decode_utf8(tok.lemma);
    } catch (const text::Utf8Error &e) {
      throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
    }
    if (domains) {
      try {
        (void)domains->resolve(tok.tags);
      } catch (const UnknownLabelError &e) {
        throw ParseError("line " + std::to_string(lineno) + ": " + e.what(), lineno);
      }
    }
    if (alternatives && report) {
      ++report->multi_analysis_tokens;
      report->multi_analysis_lines.push_back(lineno);
    }
    current.tokens.push_back(std::move(tok));
    if (nl == text.size())
      break;
  }
  flush();
  return out;
}

std::vector<Sentence> parse_treebank(const std::filesystem::path &path,
                                     const ColumnSchema &schema,
                                     TagDomains *domains, ParseReport *report) {
  return parse_treebank_text(text::read_file(path), schema, domains, report);
}

std::string format_treebank(const std::vector<Sentence> &sentences) {
  std::ostringstream os;
  for (const auto &s : sentences) {
    for (const auto &t : s.tokens) {
      os << t.surface << '\t' << t.lemma;
      for (const auto &l : t.tags)
        os << '\t' << (l == kUnk ? std::string("-") : l);
      os << '\n';
    }
    os << '\n';
  }
  return os.str();
}

// ------------------------------------------------------------- CharVocab

CharVocab::CharVocab(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
  for (std::size_t i = 0; i < chars_.size(); ++i)
    index_.emplace(chars_[i], static_cast<int>(i) + 2);
}

int CharVocab::encode(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? kUnkChar : it->second;
}

std::vector<int> CharVocab::encode(std::string_view utf8) const {
  std::vector<int> out;
  for (char32_t c : text::decode_utf8(utf8))
    out.push_back(encode(c));
  return out;
}

char32_t CharVocab::decode(int id) const {
  if (id >= 2 && id < size())
    return chars_[static_cast<std::size_t>(id - 2)];
  return U'�';
}

std::string CharVocab::decode(const std::vector<int> &ids) const {
  std::u32string s;
  for (int id : ids) {
    if (id == kPad || id == start_id() || id == stop_id())
      continue;
    s.push_back(decode(id));
  }
  return text::encode_utf8(s);
}

std::uint64_t CharVocab::fingerprint() const {
  std::string s;
  for (char32_t c : chars_)
    s += text::encode_utf8(c) + '\x1f';
  return text::fnv1a(s);
}

CharVocab build_vocab(const std::vector<Sentence> &sentences) {
  std::set<char32_t> seen;
  for (const auto &s : sentences)
    for (const auto &t : s.tokens) {
      for (char32_t c : text::decode_utf8(t.surface))
        seen.insert(c);
      for (char32_t c : text::decode_utf8(t.lemma))
        seen.insert(c);
    }
  return CharVocab(std::vector<char32_t>(seen.begin(), seen.end()));
}

// -------------------------------------------------------------- encoding

int longest_word(const std::vector<Sentence> &sentences) {
  std::size_t best = 0;
  for (const auto &s : sentences)
    for (const auto &t : s.tokens)
      best = std::max({best, text::decode_utf8(t.surface).size(),
                       text::decode_utf8(t.lemma).size()});
  return static_cast<int>(best);
}

namespace {

std::vector<int> padded_ids(const std::string &word, const CharVocab &vocab,
                            const EncodeOptions &opts, const char *what) {
  std::vector<int> ids = vocab.encode(word);
  if (static_cast<int>(ids.size()) > opts.len_max) {
    if (!opts.truncate)
      throw IngestError(std::string(what) + " '" + word + "' has " +
                        std::to_string(ids.size()) +
                        " characters, longer than len_max=" +
                        std::to_string(opts.len_max));
    ids.resize(static_cast<std::size_t>(opts.len_max));
  }
  ids.resize(static_cast<std::size_t>(opts.len_max), vocab.pad_id());
  return ids;
}

} // namespace

EncodedExample encode_token(const Sentence &s, std::size_t position,
                            const CharVocab &vocab, const TagDomains &domains,
                            const EncodeOptions &opts) {
  if (opts.cw < 0 || opts.len_max < 1)
    throw std::invalid_argument("encode: need cw >= 0 and len_max >= 1");
  const Token &tok = s.tokens.at(position);
  EncodedExample ex;
  ex.position = position;
  ex.word_ids = padded_ids(tok.surface, vocab, opts, "word");
  ex.word_length = static_cast<int>(std::min<std::size_t>(
      text::decode_utf8(tok.surface).size(), static_cast<std::size_t>(opts.len_max)));
  const auto n = static_cast<long>(s.tokens.size());
  const auto here = static_cast<long>(position);
  const std::vector<int> pad_word(static_cast<std::size_t>(opts.len_max), vocab.pad_id());
  for (long off = -opts.cw; off <= opts.cw; ++off) {
    if (off == 0)
      continue;
    const long j = here + off;
    if (j < 0 || j >= n)
      ex.context_ids.push_back(pad_word);
    else
      ex.context_ids.push_back(
          padded_ids(s.tokens[static_cast<std::size_t>(j)].surface, vocab, opts, "word"));
  }
  ex.gold_tags = domains.lookup(tok.tags);
  std::vector<int> lemma = vocab.encode(tok.lemma);
  if (static_cast<int>(lemma.size()) > opts.len_max) {
    if (!opts.truncate)
      throw IngestError("lemma '" + tok.lemma + "' of word '" + tok.surface +
                        "' is longer than len_max=" + std::to_string(opts.len_max));
    lemma.resize(static_cast<std::size_t>(opts.len_max));
  }
  ex.gold_lemma_ids.push_back(vocab.start_id());
  ex.gold_lemma_ids.insert(ex.gold_lemma_ids.end(), lemma.begin(), lemma.end());
  ex.gold_lemma_ids.push_back(vocab.stop_id());
  ex.gold_lemma_ids.resize(static_cast<std::size_t>(opts.len_max) + 2, vocab.pad_id());
  return ex;
}

std::vector<EncodedExample> encode_examples(const std::vector<Sentence> &sentences,
                                            const CharVocab &vocab,
                                            const TagDomains &domains,
                                            const EncodeOptions &opts) {
  std::vector<EncodedExample> out;
  for (std::size_t si = 0; si < sentences.size(); ++si)
    for (std::size_t p = 0; p < sentences[si].tokens.size(); ++p) {
      EncodedExample ex = encode_token(sentences[si], p, vocab, domains, opts);
      ex.sentence = si;
      out.push_back(std::move(ex));
    }
  return out;
}

// ---------------------------------------------------------------- splits

SplitCorpus split_corpus(const std::vector<Sentence> &sentences,
                         std::array<double, 3> ratios, std::uint64_t seed) {
  const double total = ratios[0] + ratios[1] + ratios[2];
  if (std::abs(total - 1.0) > 1e-9 ||
      std::any_of(ratios.begin(), ratios.end(), [](double r) { return r < 0; }))
    throw std::invalid_argument("split ratios must be non-negative and sum to 1");
  std::vector<std::size_t> order(sentences.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n = static_cast<double>(sentences.size());
  const auto n_train = static_cast<std::size_t>(std::llround(n * ratios[0]));
  const auto n_dev = std::min(sentences.size() - n_train,
                              static_cast<std::size_t>(std::llround(n * ratios[1])));
  SplitCorpus out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    const Sentence &s = sentences[order[i]];
    if (i < n_train)
      out.train.push_back(s);
    else if (i < n_train + n_dev)
      out.dev.push_back(s);
    else
      out.test.push_back(s);
  }
  return out;
}

// ----------------------------------------------------------------- cache

namespace {

void write_ids(std::ostream &os, char tag, const std::vector<int> &ids) {
  os << tag;
  for (int id : ids)
    os << ' ' << id;
  os << '\n';
}

std::vector<int> read_ids(std::istream &is, char tag) {
  std::string line;
  if (!std::getline(is, line) || line.empty() || line[0] != tag)
    throw ParseError(std::string("encoded cache: expected '") + tag + "' record", 0);
  std::istringstream ls(line.substr(1));
  std::vector<int> ids;
  int v;
  while (ls >> v)
    ids.push_back(v);
  return ids;
}

std::string expect_line(std::istream &is, std::string_view key) {
  std::string line;
  if (!std::getline(is, line) || line.rfind(key, 0) != 0)
    throw ParseError("encoded cache: expected '" + std::string(key) + "' record", 0);
  return line.substr(key.size());
}

} // namespace

void write_encoded(std::ostream &os, const EncodedCorpus &c) {
  os << "morphkit-encoded " << kEncodedFormatVersion << '\n';
  os << "options " << c.options.cw << ' ' << c.options.len_max << '\n';
  os << "vocab " << c.vocab.chars().size() << '\n';
  for (std::size_t i = 0; i < c.vocab.chars().size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%zu %X", i + 2,
                  static_cast<unsigned>(c.vocab.chars()[i]));
    os << buf << '\n';
  }
  for (std::size_t t = 0; t < kNumTags; ++t) {
    const auto &d = c.domains.at(t);
    os << "domain\t" << kTagNames[t] << '\t' << d.size();
    for (const auto &l : d.labels())
      os << '\t' << l;
    os << '\n';
  }
  os << "examples " << c.examples.size() << '\n';
  for (const auto &ex : c.examples) {
    os << "example " << ex.sentence << ' ' << ex.position << ' ' << ex.word_length << '\n';
    write_ids(os, 'w', ex.word_ids);
    for (const auto &ctx : ex.context_ids)
      write_ids(os, 'c', ctx);
    write_ids(os, 't', std::vector<int>(ex.gold_tags.ids.begin(), ex.gold_tags.ids.end()));
    write_ids(os, 'l', ex.gold_lemma_ids);
    os << 'f';
    for (double v : ex.features) {
      char buf[40];
      std::snprintf(buf, sizeof buf, " %a", v);
      os << buf;
    }
    os << '\n';
  }
}

EncodedCorpus read_encoded(std::istream &is) {
  EncodedCorpus c;
  {
    std::istringstream hs(expect_line(is, "morphkit-encoded "));
    int version = 0;
    hs >> version;
    if (version != kEncodedFormatVersion)
      throw ParseError("encoded cache: unsupported version " + std::to_string(version), 1);
  }
  {
    std::istringstream os(expect_line(is, "options "));
    os >> c.options.cw >> c.options.len_max;
  }
  std::size_t nv = std::stoul(expect_line(is, "vocab "));
  std::vector<char32_t> chars;
  for (std::size_t i = 0; i < nv; ++i) {
    std::string line;
    std::getline(is, line);
    std::istringstream ls(line);
    std::size_t id;
    std::string hex;
    ls >> id >> hex;
    chars.push_back(static_cast<char32_t>(std::stoul(hex, nullptr, 16)));
  }
  c.vocab = CharVocab(chars);
  for (std::size_t t = 0; t < kNumTags; ++t) {
    const auto fields = text::split(expect_line(is, "domain\t"), '\t');
    if (fields.size() < 2 || fields.size() != 2 + std::stoul(fields[1]))
      throw ParseError("encoded cache: malformed domain record", 0);
    for (std::size_t k = 2; k < fields.size(); ++k)
      c.domains.at(t).intern(fields[k]);
  }
  c.domains.freeze();
  const std::size_t ne = std::stoul(expect_line(is, "examples "));
  const std::size_t slots = static_cast<std::size_t>(2 * c.options.cw);
  for (std::size_t e = 0; e < ne; ++e) {
    EncodedExample ex;
    std::istringstream es(expect_line(is, "example "));
    es >> ex.sentence >> ex.position >> ex.word_length;
    ex.word_ids = read_ids(is, 'w');
    for (std::size_t k = 0; k < slots; ++k)
      ex.context_ids.push_back(read_ids(is, 'c'));
    const auto tags = read_ids(is, 't');
    if (tags.size() != kNumTags)
      throw ParseError("encoded cache: tag record needs 6 ids", 0);
    std::copy(tags.begin(), tags.end(), ex.gold_tags.ids.begin());
    ex.gold_lemma_ids = read_ids(is, 'l');
    std::string fl;
    std::getline(is, fl);
    std::istringstream fs(fl.substr(1));
    std::string tok;
    while (fs >> tok)
      ex.features.push_back(std::strtod(tok.c_str(), nullptr));
    c.examples.push_back(std::move(ex));
  }
  return c;
}

} // namespace morphkit::corpus
