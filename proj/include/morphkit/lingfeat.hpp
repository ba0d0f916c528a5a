// SPDX-License-Identifier: Apache-2.0
/**
 * @file   lingfeat.hpp
 * @brief  Surface and phonological feature extraction over a fixed slot pool.
 *
 * The pool has 64 slots in this order:
 *
 *   surface (12)   LoT is_first is_last pref-1 pref-2 pref-3
 *                  suff-1 suff-2 suff-3 suff-4 PW NW
 *   type (7)       #vowels #vowel_modifiers #consonants #punct #digits
 *                  #halant #nuktas
 *   Aspirated:V/VL  Origin:B/DV/DN  Is_diphthong  PoA:D/LD/G
 *   Modifier:AK/AV/VG  Height:F/M/B  Length:L/S/M
 *   Type-1:L/LM/UM/LH/H  Type-2:S/AS/AV/V/SN
 *   Place:DV/DN/D/V/T/M/KT/JM/SY  Manner:SP/N/PS/PK/SN/AS/PV/PR
 *
 * Phonological slots count the token's characters carrying each value.
 * Modifier "VG" is Visarga; it is renamed so it cannot be confused with
 * voiced aspiration "V".
 */
#ifndef MORPHKIT_LINGFEAT_HPP
#define MORPHKIT_LINGFEAT_HPP

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "morphkit/corpus.hpp"

namespace morphkit::lingfeat {

class FeatureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Slot names in pool order.
const std::vector<std::string> &pool_slot_names();
std::size_t pool_size();
std::optional<std::size_t> slot_index(std::string_view name);

inline constexpr std::size_t kSurfaceSlots = 12;

/// Categorical slots (prefixes, suffixes, neighbours): hashed codes for
/// the random forest, or the same code scaled into [0, 1) for the network.
enum class Encoding { Network, Raw };

bool is_categorical_slot(std::size_t slot);
double categorical_code(std::string_view value, Encoding enc);

inline constexpr std::string_view kBeginSentinel = "<s>";
inline constexpr std::string_view kEndSentinel = "</s>";

/// Per-character attributes. Empty strings mean "none".
struct PhonoRecord {
  std::string type; // vowel|vowel-modifier|consonant|punct|digit|halant|nukta
  std::string aspiration;
  std::string origin;
  bool diphthong = false;
  std::string poa;
  std::string modifier;
  std::string height;
  std::string length;
  std::string vowel1;
  std::string vowel2;
  std::string place;
  std::string manner;
};

/// Character attribute table loaded from
///
///     @schema name=<name> pool=<slot count>
///     # comment
///     <char or U+XXXX><TAB>key=value;key=value
///
/// A line with only the character declares the explicit no-attribute record.
class PhonoTable {
public:
  static PhonoTable parse(std::string_view text);
  static PhonoTable load(const std::filesystem::path &path);

  void set(char32_t c, PhonoRecord r) { records_[c] = std::move(r); }
  const PhonoRecord *find(char32_t c) const;
  std::size_t size() const { return records_.size(); }
  const std::string &schema() const { return schema_; }
  /// Source text, kept so checkpoints can embed the exact table.
  const std::string &source() const { return source_; }

private:
  std::map<char32_t, PhonoRecord> records_;
  std::string schema_ = "brahmi-phono";
  std::string source_;
};

/// Default seed table shipped in data/.
std::filesystem::path default_table_path();

using FeatureVector = std::vector<double>;

/// Fills only the surface slots. prev/next absent at sentence edges.
FeatureVector extract_surface(std::string_view token, std::size_t position,
                              std::optional<std::string_view> prev,
                              std::optional<std::string_view> next,
                              Encoding enc = Encoding::Network);

/// Fills only the phonological slots.
FeatureVector extract_phonological(std::string_view token, const PhonoTable &table);

/// Full pool vector for token i of a sentence.
FeatureVector extract(const corpus::Sentence &s, std::size_t i,
                      const PhonoTable &table, Encoding enc = Encoding::Network);

void attach_features(std::vector<corpus::EncodedExample> &examples,
                     const std::vector<corpus::Sentence> &sentences,
                     const PhonoTable &table);

/// One bit per pool slot.
struct FeatureMask {
  std::vector<bool> bits;

  static FeatureMask all(std::size_t n) { return FeatureMask{std::vector<bool>(n, true)}; }
  static FeatureMask none(std::size_t n) { return FeatureMask{std::vector<bool>(n, false)}; }
  static FeatureMask from_slots(std::size_t n, const std::vector<std::size_t> &slots);
  static FeatureMask from_string(std::string_view bits);

  std::size_t size() const { return bits.size(); }
  std::size_t count() const;
  std::vector<std::size_t> selected() const;
  std::vector<std::string> selected_names() const;
  std::string to_string() const;
  bool operator==(const FeatureMask &) const = default;
};

FeatureVector apply_mask(const FeatureVector &v, const FeatureMask &m);

/// Mask file, `features.<tag>.mask`:
///
///     # morphkit feature mask
///     pool=<n>
///     tag=<TAG>
///     bits=<0/1 string>
///     selected=<comma separated slot names>
std::string format_mask_file(const FeatureMask &m, std::string_view tag);
FeatureMask parse_mask_file(std::string_view text);

/// Resolves a tag-wise optimized feature list written in the compact
/// notation "Surface: LoT, pref-1/3; Type: #punct; Height: M/B; ..." to
/// pool slots. Throws FeatureError on any name that has no slot.
std::vector<std::size_t> resolve_feature_list(std::string_view list);

} // namespace morphkit::lingfeat

#endif
