// SPDX-License-Identifier: Apache-2.0
/**
 * @file   eval.hpp
 * @brief  Tag accuracies, combined accuracies, character BLEU, Levenshtein
 *         distance and a heuristic error breakdown.
 */
#ifndef MORPHKIT_EVAL_HPP
#define MORPHKIT_EVAL_HPP

#include <array>
#include <cstddef>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "morphkit/corpus.hpp"

namespace morphkit::eval {

class EvalError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Six tags then the lemma.
enum class Field { POS, G, N, P, C, TAM, L };

struct Prediction {
  std::string lemma;
  corpus::TagLabels tags;
};

/// Parses "L + G + N + P" (spaces optional). Throws on unknown names.
std::vector<Field> parse_combo(std::string_view combo);
std::string combo_name(std::span<const Field> combo);

double tag_accuracy(const std::vector<Prediction> &pred, const std::vector<Prediction> &gold,
                    corpus::Tag tag);
/// Fraction of tokens where every listed field matches.
double combined_accuracy(const std::vector<Prediction> &pred,
                         const std::vector<Prediction> &gold, std::span<const Field> combo);

enum class EditUnit { Scalar, Grapheme };

std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::string_view a, std::string_view b,
                        EditUnit unit = EditUnit::Scalar);

/// Corpus-level BLEU over characters, 0..100, no smoothing. Orders for
/// which the hypotheses contain no n-gram at all are left out of the
/// geometric mean.
double char_bleu(const std::vector<std::string> &pred, const std::vector<std::string> &gold,
                 int max_n = 4);
/// Mean per-lemma BLEU with add-one smoothing on orders >= 2.
double mean_sentence_bleu(const std::vector<std::string> &pred,
                          const std::vector<std::string> &gold, int max_n = 4);

/// Heuristic buckets over tokens with at least one wrong field.
struct ErrorCounts {
  std::size_t erroneous = 0;
  std::size_t hyphenated = 0;
  std::size_t single_char = 0;
  std::size_t oov_char = 0;
  std::size_t repeated_last_char = 0;
  std::size_t lemma_off_by_one = 0;
};

/// `vocab` may be null, in which case oov_char stays 0.
ErrorCounts error_report(const std::vector<Prediction> &pred,
                         const std::vector<Prediction> &gold,
                         const std::vector<std::string> &surfaces,
                         const corpus::CharVocab *vocab = nullptr);

struct EvalOptions {
  EditUnit edit_unit = EditUnit::Scalar;
  int bleu_order = 4;
};

struct EvalReport {
  std::size_t tokens = 0;
  /// Accuracy rows in display order: L, POS, ..., TAM, then combinations.
  std::vector<std::pair<std::string, double>> rows;
  double bleu = 0.0;
  double sentence_bleu = 0.0;
  double mean_levenshtein = 0.0;
  EditUnit edit_unit = EditUnit::Scalar;
  ErrorCounts errors;

  double row(std::string_view label) const;
};

/// The combination rows reported alongside single fields.
const std::vector<std::string> &combination_rows();

EvalReport evaluate(const std::vector<Prediction> &pred, const std::vector<Prediction> &gold,
                    const std::vector<std::string> &surfaces, const EvalOptions &opts = {},
                    const corpus::CharVocab *vocab = nullptr);

std::string report_text(const EvalReport &r);
/// metric,value
std::string report_csv(const EvalReport &r);

/// Flattens sentences into per-token predictions.
std::vector<Prediction> predictions_of(const std::vector<corpus::Sentence> &sentences);
std::vector<std::string> surfaces_of(const std::vector<corpus::Sentence> &sentences);

} // namespace morphkit::eval

#endif
