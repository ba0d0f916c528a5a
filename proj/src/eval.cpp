// SPDX-License-Identifier: Apache-2.0
#include "morphkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "morphkit/text.hpp"

namespace morphkit::eval {

namespace {

constexpr std::array<std::string_view, 7> kFieldNames = {"POS", "G", "N", "P",
                                                         "C",   "TAM", "L"};

void check_aligned(const std::vector<Prediction> &pred, const std::vector<Prediction> &gold) {
  if (pred.size() != gold.size())
    throw EvalError("prediction and gold lists differ in length (" +
                    std::to_string(pred.size()) + " vs " + std::to_string(gold.size()) + ")");
  if (pred.empty())
    throw EvalError("nothing to evaluate");
}

bool field_matches(const Prediction &p, const Prediction &g, Field f) {
  if (f == Field::L)
    return p.lemma == g.lemma;
  const auto i = static_cast<std::size_t>(f);
  return corpus::normalize_label(p.tags[i]) == corpus::normalize_label(g.tags[i]);
}

template <class Seq>
std::size_t edit_distance(const Seq &a, const Seq &b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j)
    prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                         prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

using Counts = std::map<std::u32string, std::size_t>;

Counts ngrams(const std::u32string &s, int n) {
  Counts c;
  const auto k = static_cast<std::size_t>(n);
  for (std::size_t i = 0; i + k <= s.size(); ++i)
    ++c[s.substr(i, k)];
  return c;
}

// Clipped matches and hypothesis n-gram total at order n.
std::pair<std::size_t, std::size_t> order_stats(const std::u32string &h,
                                                const std::u32string &r, int n) {
  const Counts hc = ngrams(h, n), rc = ngrams(r, n);
  std::size_t match = 0, total = 0;
  for (const auto &[g, c] : hc) {
    total += c;
    auto it = rc.find(g);
    if (it != rc.end())
      match += std::min(c, it->second);
  }
  return {match, total};
}

void check_lists(const std::vector<std::string> &pred, const std::vector<std::string> &gold,
                 int max_n) {
  if (pred.size() != gold.size())
    throw EvalError("BLEU: prediction and gold lists differ in length");
  if (pred.empty())
    throw EvalError("BLEU: empty corpus");
  if (max_n < 1)
    throw EvalError("BLEU: max order must be >= 1");
}

} // namespace

std::vector<Field> parse_combo(std::string_view combo) {
  std::vector<Field> out;
  for (const auto &part : text::split(combo, '+')) {
    const auto name = text::trim(part);
    auto it = std::find(kFieldNames.begin(), kFieldNames.end(), name);
    if (it == kFieldNames.end())
      throw EvalError("unknown field '" + std::string(name) + "' in combination '" +
                      std::string(combo) + "'");
    out.push_back(static_cast<Field>(it - kFieldNames.begin()));
  }
  return out;
}

std::string combo_name(std::span<const Field> combo) {
  std::string s;
  for (std::size_t i = 0; i < combo.size(); ++i)
    s += (i ? " + " : "") + std::string(kFieldNames[static_cast<std::size_t>(combo[i])]);
  return s;
}

double tag_accuracy(const std::vector<Prediction> &pred, const std::vector<Prediction> &gold,
                    corpus::Tag tag) {
  const std::array<Field, 1> f{static_cast<Field>(tag)};
  return combined_accuracy(pred, gold, f);
}

double combined_accuracy(const std::vector<Prediction> &pred,
                         const std::vector<Prediction> &gold, std::span<const Field> combo) {
  check_aligned(pred, gold);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    ok += std::all_of(combo.begin(), combo.end(),
                      [&](Field f) { return field_matches(pred[i], gold[i], f); });
  return static_cast<double>(ok) / static_cast<double>(pred.size());
}

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  return edit_distance(a, b);
}

std::size_t levenshtein(std::string_view a, std::string_view b, EditUnit unit) {
  const auto ua = text::decode_utf8(a), ub = text::decode_utf8(b);
  if (unit == EditUnit::Scalar)
    return edit_distance(ua, ub);
  return edit_distance(text::graphemes(ua), text::graphemes(ub));
}

double char_bleu(const std::vector<std::string> &pred, const std::vector<std::string> &gold,
                 int max_n) {
  check_lists(pred, gold, max_n);
  std::vector<std::size_t> match(max_n, 0), total(max_n, 0);
  std::size_t hyp_len = 0, ref_len = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto h = text::decode_utf8(pred[i]), r = text::decode_utf8(gold[i]);
    hyp_len += h.size();
    ref_len += r.size();
    for (int n = 1; n <= max_n; ++n) {
      auto [m, t] = order_stats(h, r, n);
      match[n - 1] += m;
      total[n - 1] += t;
    }
  }
  if (hyp_len == 0)
    return ref_len == 0 ? 100.0 : 0.0;
  double log_sum = 0.0;
  int orders = 0;
  for (int n = 0; n < max_n; ++n) {
    if (total[n] == 0)
      continue;
    if (match[n] == 0)
      return 0.0;
    log_sum += std::log(static_cast<double>(match[n]) / static_cast<double>(total[n]));
    ++orders;
  }
  const double bp = hyp_len >= ref_len
                        ? 1.0
                        : std::exp(1.0 - static_cast<double>(ref_len) /
                                             static_cast<double>(hyp_len));
  return 100.0 * bp * std::exp(log_sum / orders);
}

double mean_sentence_bleu(const std::vector<std::string> &pred,
                          const std::vector<std::string> &gold, int max_n) {
  check_lists(pred, gold, max_n);
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const auto h = text::decode_utf8(pred[i]), r = text::decode_utf8(gold[i]);
    if (h.empty()) {
      sum += r.empty() ? 100.0 : 0.0;
      continue;
    }
    double log_sum = 0.0;
    bool zero = false;
    for (int n = 1; n <= max_n; ++n) {
      auto [m, t] = order_stats(h, r, n);
      double p;
      if (n == 1) {
        if (m == 0) {
          zero = true;
          break;
        }
        p = static_cast<double>(m) / static_cast<double>(t);
      } else {
        p = (m + 1.0) / (t + 1.0);
      }
      log_sum += std::log(p);
    }
    if (zero)
      continue;
    const double bp = h.size() >= r.size()
                          ? 1.0
                          : std::exp(1.0 - static_cast<double>(r.size()) /
                                               static_cast<double>(h.size()));
    sum += 100.0 * bp * std::exp(log_sum / max_n);
  }
  return sum / static_cast<double>(pred.size());
}

ErrorCounts error_report(const std::vector<Prediction> &pred,
                         const std::vector<Prediction> &gold,
                         const std::vector<std::string> &surfaces,
                         const corpus::CharVocab *vocab) {
  check_aligned(pred, gold);
  if (surfaces.size() != pred.size())
    throw EvalError("error report: surfaces are not aligned with predictions");
  ErrorCounts e;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    bool wrong = false;
    for (std::size_t f = 0; f < kFieldNames.size(); ++f)
      wrong |= !field_matches(pred[i], gold[i], static_cast<Field>(f));
    if (!wrong)
      continue;
    ++e.erroneous;
    const auto s = text::decode_utf8(surfaces[i]);
    if (s.find(U'-') != std::u32string::npos)
      ++e.hyphenated;
    if (s.size() == 1)
      ++e.single_char;
    if (vocab && std::any_of(s.begin(), s.end(), [&](char32_t c) { return !vocab->contains(c); }))
      ++e.oov_char;
    const auto p = text::decode_utf8(pred[i].lemma), g = text::decode_utf8(gold[i].lemma);
    if (!g.empty() && p == g + g.back())
      ++e.repeated_last_char;
    if (edit_distance(p, g) == 1)
      ++e.lemma_off_by_one;
  }
  return e;
}

const std::vector<std::string> &combination_rows() {
  static const std::vector<std::string> rows = {
      "L + C", "G + N + P", "G + N + P + C", "L + G + N + P", "L + G + N + P + C",
      "L + POS + G + N + P + C + TAM"};
  return rows;
}

double EvalReport::row(std::string_view label) const {
  for (const auto &[name, v] : rows)
    if (name == label)
      return v;
  throw EvalError("report has no row '" + std::string(label) + "'");
}

EvalReport evaluate(const std::vector<Prediction> &pred, const std::vector<Prediction> &gold,
                    const std::vector<std::string> &surfaces, const EvalOptions &opts,
                    const corpus::CharVocab *vocab) {
  check_aligned(pred, gold);
  EvalReport r;
  r.tokens = pred.size();
  r.edit_unit = opts.edit_unit;
  for (const char *single : {"L", "POS", "G", "N", "P", "C", "TAM"})
    r.rows.emplace_back(single, combined_accuracy(pred, gold, parse_combo(single)));
  for (const auto &combo : combination_rows())
    r.rows.emplace_back(combo, combined_accuracy(pred, gold, parse_combo(combo)));
  std::vector<std::string> pl, gl;
  double lev = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    pl.push_back(pred[i].lemma);
    gl.push_back(gold[i].lemma);
    lev += static_cast<double>(levenshtein(pred[i].lemma, gold[i].lemma, opts.edit_unit));
  }
  r.bleu = char_bleu(pl, gl, opts.bleu_order);
  r.sentence_bleu = mean_sentence_bleu(pl, gl, opts.bleu_order);
  r.mean_levenshtein = lev / static_cast<double>(pred.size());
  r.errors = error_report(pred, gold, surfaces, vocab);
  return r;
}

std::string report_text(const EvalReport &r) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2);
  os << "Analysis\tAccuracy (%)\n";
  for (const auto &[name, v] : r.rows)
    os << name << '\t' << 100.0 * v << '\n';
  os << std::setprecision(3);
  os << "\nTokens: " << r.tokens << '\n';
  os << "Character BLEU (corpus, 4-gram): " << r.bleu << '\n';
  os << "Character BLEU (mean per lemma, add-one): " << r.sentence_bleu << '\n';
  os << "Mean Levenshtein distance ("
     << (r.edit_unit == EditUnit::Scalar ? "code points" : "grapheme clusters")
     << "): " << r.mean_levenshtein << '\n';
  os << "\nError buckets (heuristic proxies, tokens with any wrong field)\n";
  os << "  erroneous tokens      " << r.errors.erroneous << '\n';
  os << "  hyphenated            " << r.errors.hyphenated << '\n';
  os << "  single character      " << r.errors.single_char << '\n';
  os << "  unseen character      " << r.errors.oov_char << '\n';
  os << "  lemma repeats last    " << r.errors.repeated_last_char << '\n';
  os << "  lemma off by one      " << r.errors.lemma_off_by_one << '\n';
  return os.str();
}

std::string report_csv(const EvalReport &r) {
  std::ostringstream os;
  os.precision(10);
  os << "metric,value\n";
  for (const auto &[name, v] : r.rows)
    os << name << ',' << v << '\n';
  os << "BLEU corpus," << r.bleu << '\n';
  os << "BLEU sentence mean," << r.sentence_bleu << '\n';
  os << "Levenshtein mean," << r.mean_levenshtein << '\n';
  os << "tokens," << r.tokens << '\n';
  os << "errors erroneous," << r.errors.erroneous << '\n';
  os << "errors hyphenated," << r.errors.hyphenated << '\n';
  os << "errors single_char," << r.errors.single_char << '\n';
  os << "errors oov_char," << r.errors.oov_char << '\n';
  os << "errors repeated_last_char," << r.errors.repeated_last_char << '\n';
  os << "errors lemma_off_by_one," << r.errors.lemma_off_by_one << '\n';
  return os.str();
}

std::vector<Prediction> predictions_of(const std::vector<corpus::Sentence> &sentences) {
  std::vector<Prediction> out;
  for (const auto &s : sentences)
    for (const auto &t : s.tokens)
      out.push_back(Prediction{t.lemma, t.tags});
  return out;
}

std::vector<std::string> surfaces_of(const std::vector<corpus::Sentence> &sentences) {
  std::vector<std::string> out;
  for (const auto &s : sentences)
    for (const auto &t : s.tokens)
      out.push_back(t.surface);
  return out;
}

} // namespace morphkit::eval
