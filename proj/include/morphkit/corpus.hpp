// SPDX-License-Identifier: Apache-2.0
/**
 * @file   corpus.hpp
 * @brief  Treebank ingestion, character vocabulary, example encoding and
 *         corpus splits.
 *
 * Treebank files are UTF-8, one token per line, tab-separated, with blank
 * lines between sentences. The column order comes from a manifest:
 *
 *     columns=surface,lemma,pos,gender,number,person,case,tam
 *
 * Columns named `_` are ignored. Lines starting with `#` are comments.
 */
#ifndef MORPHKIT_CORPUS_HPP
#define MORPHKIT_CORPUS_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace morphkit::corpus {

inline constexpr std::size_t kNumTags = 6;
enum class Tag : std::size_t { POS = 0, G, N, P, C, TAM };
inline constexpr std::array<std::string_view, kNumTags> kTagNames = {
    "POS", "G", "N", "P", "C", "TAM"};
inline constexpr std::string_view kUnk = "Unk";

/// Parses "POS", "G"/"gender", ... (case-insensitive).
std::optional<Tag> tag_from_name(std::string_view name);

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string &what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  std::size_t line() const { return line_; }

private:
  std::size_t line_;
};

class UnknownLabelError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class IngestError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// One closed label set. Id 0 is always "Unk".
class TagDomain {
public:
  explicit TagDomain(std::string name = {});

  const std::string &name() const { return name_; }
  const std::vector<std::string> &labels() const { return labels_; }
  std::size_t size() const { return labels_.size(); }
  const std::string &label(int id) const { return labels_.at(static_cast<std::size_t>(id)); }
  std::optional<int> find(std::string_view label) const;
  int intern(std::string_view label);

private:
  std::string name_;
  std::vector<std::string> labels_;
  std::map<std::string, int, std::less<>> index_;
};

struct TagSet {
  std::array<int, kNumTags> ids{};
  int &operator[](Tag t) { return ids[static_cast<std::size_t>(t)]; }
  int operator[](Tag t) const { return ids[static_cast<std::size_t>(t)]; }
  bool operator==(const TagSet &) const = default;
};

using TagLabels = std::array<std::string, kNumTags>;

/// The six domains. While open, unseen labels are added; once frozen,
/// an unseen label is an error.
class TagDomains {
public:
  TagDomains();

  TagDomain &operator[](Tag t) { return domains_[static_cast<std::size_t>(t)]; }
  const TagDomain &operator[](Tag t) const { return domains_[static_cast<std::size_t>(t)]; }
  TagDomain &at(std::size_t i) { return domains_.at(i); }
  const TagDomain &at(std::size_t i) const { return domains_.at(i); }

  int resolve(Tag t, std::string_view label);
  int lookup(Tag t, std::string_view label) const;
  TagSet resolve(const TagLabels &labels);
  TagSet lookup(const TagLabels &labels) const;
  TagLabels labels_of(const TagSet &ids) const;

  void freeze() { frozen_ = true; }
  bool frozen() const { return frozen_; }

private:
  std::array<TagDomain, kNumTags> domains_;
  bool frozen_ = false;
};

/// Maps treebank notation onto domain labels: "-" and "" become "Unk".
std::string normalize_label(std::string_view raw);

struct Token {
  std::string surface;
  std::string lemma;
  TagLabels tags;
};

struct Sentence {
  std::vector<Token> tokens;
};

struct ColumnSchema {
  std::vector<std::string> columns;

  static ColumnSchema standard();
  static ColumnSchema parse_manifest(std::string_view text);
  static ColumnSchema from_manifest_file(const std::filesystem::path &path);

  std::size_t width() const { return columns.size(); }
};

struct ParseReport {
  /// Tokens whose lemma or tag fields carried '|'-separated alternatives;
  /// the first candidate is kept.
  std::size_t multi_analysis_tokens = 0;
  std::vector<std::size_t> multi_analysis_lines;
};

/// Parses treebank text. When `domains` is given, labels are interned
/// (open domains) or validated (frozen domains) as they are read.
std::vector<Sentence> parse_treebank_text(std::string_view text,
                                          const ColumnSchema &schema,
                                          TagDomains *domains = nullptr,
                                          ParseReport *report = nullptr);
std::vector<Sentence> parse_treebank(const std::filesystem::path &path,
                                     const ColumnSchema &schema,
                                     TagDomains *domains = nullptr,
                                     ParseReport *report = nullptr);

/// Serializes sentences back into the standard 8-column layout, with
/// "Unk" written as "-".
std::string format_treebank(const std::vector<Sentence> &sentences);

/// Character inventory. Id 0 is padding, id 1 the unknown-character
/// sentinel; real characters follow in codepoint order.
class CharVocab {
public:
  static constexpr int kPad = 0;
  static constexpr int kUnkChar = 1;

  CharVocab() = default;
  explicit CharVocab(std::vector<char32_t> chars);

  int pad_id() const { return kPad; }
  int unk_char_id() const { return kUnkChar; }
  int size() const { return static_cast<int>(chars_.size()) + 2; }
  /// Lemma framing symbols live just past the character ids.
  int start_id() const { return size(); }
  int stop_id() const { return size() + 1; }
  int output_size() const { return size() + 2; }

  int encode(char32_t c) const;
  std::vector<int> encode(std::string_view utf8) const;
  /// Inverse of encode for character ids; sentinels decode to U+FFFD.
  char32_t decode(int id) const;
  std::string decode(const std::vector<int> &ids) const;
  bool contains(char32_t c) const { return index_.count(c) != 0; }
  const std::vector<char32_t> &chars() const { return chars_; }
  std::uint64_t fingerprint() const;

private:
  std::vector<char32_t> chars_;
  std::map<char32_t, int> index_;
};

CharVocab build_vocab(const std::vector<Sentence> &sentences);

struct EncodeOptions {
  int cw = 4;
  int len_max = 18;
  /// Exploratory mode: cut overlong words instead of rejecting them.
  bool truncate = false;
};

struct EncodedExample {
  std::vector<int> word_ids;
  std::vector<std::vector<int>> context_ids; // 2*cw slots, left then right
  TagSet gold_tags;
  std::vector<int> gold_lemma_ids; // start, chars, stop, pads; len_max + 2
  std::size_t sentence = 0;
  std::size_t position = 0;
  int word_length = 0;
  /// Linguistic feature vector over the full pool; filled by lingfeat.
  std::vector<double> features;
};

/// Longest surface or lemma, in characters.
int longest_word(const std::vector<Sentence> &sentences);

/// Encodes one token of a sentence. Throws IngestError for overlong
/// words unless opts.truncate.
EncodedExample encode_token(const Sentence &s, std::size_t position,
                            const CharVocab &vocab, const TagDomains &domains,
                            const EncodeOptions &opts);

std::vector<EncodedExample> encode_examples(const std::vector<Sentence> &sentences,
                                            const CharVocab &vocab,
                                            const TagDomains &domains,
                                            const EncodeOptions &opts);

struct SplitCorpus {
  std::vector<Sentence> train, dev, test;
};

SplitCorpus split_corpus(const std::vector<Sentence> &sentences,
                         std::array<double, 3> ratios, std::uint64_t seed);

// Encoded-corpus cache. Line-based text:
//
//   morphkit-encoded 1
//   options <cw> <len_max>
//   vocab <n>            followed by n lines "<id> <hex codepoint>"
//   domain\t<tag>\t<n>\t<label_0>...  tab separated, six lines
//   examples <n>         followed by n records:
//     example <sentence> <position> <word_length>
//     w <ids>            word ids
//     c <ids>            one line per context slot
//     t <6 tag ids>
//     l <ids>            framed lemma ids
//     f <hex floats>     feature vector (may be empty)
inline constexpr int kEncodedFormatVersion = 1;

struct EncodedCorpus {
  EncodeOptions options;
  CharVocab vocab;
  TagDomains domains;
  std::vector<EncodedExample> examples;
};

void write_encoded(std::ostream &os, const EncodedCorpus &corpus);
EncodedCorpus read_encoded(std::istream &is);

} // namespace morphkit::corpus

#endif
