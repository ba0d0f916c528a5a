// SPDX-License-Identifier: Apache-2.0
#include "morphkit/lingfeat.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "morphkit/text.hpp"

namespace morphkit::lingfeat {

namespace {

constexpr std::uint64_t kCodeSpace = 1u << 20;

struct AttrGroup {
  const char *prefix; // slot name prefix
  std::vector<std::string> values;
};

const std::vector<AttrGroup> &attr_groups() {
  static const std::vector<AttrGroup> groups = {
      {"Aspirated:", {"V", "VL"}},
      {"Origin:", {"B", "DV", "DN"}},
      {"PoA:", {"D", "LD", "G"}},
      {"Modifier:", {"AK", "AV", "VG"}},
      {"Height:", {"F", "M", "B"}},
      {"Length:", {"L", "S", "M"}},
      {"Type-1:", {"L", "LM", "UM", "LH", "H"}},
      {"Type-2:", {"S", "AS", "AV", "V", "SN"}},
      {"Place:", {"DV", "DN", "D", "V", "T", "M", "KT", "JM", "SY"}},
      {"Manner:", {"SP", "N", "PS", "PK", "SN", "AS", "PV", "PR"}},
  };
  return groups;
}

const std::vector<std::pair<std::string, std::string>> &type_slots() {
  static const std::vector<std::pair<std::string, std::string>> t = {
      {"vowel", "#vowels"},     {"vowel-modifier", "#vowel_modifiers"},
      {"consonant", "#consonants"}, {"punct", "#punct"},
      {"digit", "#digits"},     {"halant", "#halant"},
      {"nukta", "#nuktas"}};
  return t;
}

std::vector<std::string> build_pool() {
  std::vector<std::string> names = {"LoT",    "is_first", "is_last", "pref-1",
                                    "pref-2", "pref-3",   "suff-1",  "suff-2",
                                    "suff-3", "suff-4",   "PW",      "NW"};
  for (const auto &[type, slot] : type_slots())
    names.push_back(slot);
  for (const auto &g : attr_groups()) {
    for (const auto &v : g.values)
      names.push_back(std::string(g.prefix) + v);
    if (std::string_view(g.prefix) == "Origin:")
      names.push_back("Is_diphthong");
  }
  return names;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (char &c : out)
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::size_t require_slot(std::string_view name) {
  if (auto i = slot_index(name))
    return *i;
  throw FeatureError("no pool slot named '" + std::string(name) + "'");
}

std::u32string prefix_of(const std::u32string &w, std::size_t k) {
  return w.substr(0, std::min(k, w.size()));
}

std::u32string suffix_of(const std::u32string &w, std::size_t k) {
  return k >= w.size() ? w : w.substr(w.size() - k);
}

} // namespace

const std::vector<std::string> &pool_slot_names() {
  static const std::vector<std::string> names = build_pool();
  return names;
}

std::size_t pool_size() { return pool_slot_names().size(); }

std::optional<std::size_t> slot_index(std::string_view name) {
  const auto &names = pool_slot_names();
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end())
    return std::nullopt;
  return static_cast<std::size_t>(it - names.begin());
}

bool is_categorical_slot(std::size_t slot) { return slot >= 3 && slot < kSurfaceSlots; }

double categorical_code(std::string_view value, Encoding enc) {
  const auto code = static_cast<double>(text::fnv1a(value) % kCodeSpace);
  return enc == Encoding::Raw ? code : code / static_cast<double>(kCodeSpace);
}

// ------------------------------------------------------------ PhonoTable

namespace {

char32_t parse_char_field(std::string_view f, std::size_t lineno) {
  if (f.size() > 2 && (f.substr(0, 2) == "U+" || f.substr(0, 2) == "u+")) {
    try {
      return static_cast<char32_t>(std::stoul(std::string(f.substr(2)), nullptr, 16));
    } catch (const std::exception &) {
      throw FeatureError("phono table line " + std::to_string(lineno) +
                         ": bad codepoint '" + std::string(f) + "'");
    }
  }
  const auto cps = text::decode_utf8(f);
  if (cps.size() != 1)
    throw FeatureError("phono table line " + std::to_string(lineno) +
                       ": expected one character, got '" + std::string(f) + "'");
  return cps[0];
}

void check_value(const std::string &key, const std::string &value,
                 const std::vector<std::string> &allowed, std::size_t lineno) {
  if (std::find(allowed.begin(), allowed.end(), value) == allowed.end())
    throw FeatureError("phono table line " + std::to_string(lineno) + ": '" + value +
                       "' is not a valid " + key);
}

} // namespace

PhonoTable PhonoTable::parse(std::string_view textv) {
  PhonoTable t;
  t.source_ = std::string(textv);
  bool header = false;
  std::size_t lineno = 0;
  std::map<std::string, const AttrGroup *> groups;
  static const std::map<std::string, std::string> key_to_prefix = {
      {"aspiration", "Aspirated:"}, {"origin", "Origin:"}, {"poa", "PoA:"},
      {"modifier", "Modifier:"},    {"height", "Height:"}, {"length", "Length:"},
      {"vowel1", "Type-1:"},        {"vowel2", "Type-2:"}, {"place", "Place:"},
      {"manner", "Manner:"}};
  for (const auto &g : attr_groups())
    groups[g.prefix] = &g;
  std::vector<std::string> types;
  for (const auto &[ty, slot] : type_slots())
    types.push_back(ty);

  for (const auto &raw : text::split(textv, '\n')) {
    ++lineno;
    std::string_view line = raw;
    if (!line.empty() && line.back() == '\r')
      line.remove_suffix(1);
    if (text::trim(line).empty() || line.front() == '#')
      continue;
    if (line.front() == '@') {
      std::istringstream hs{std::string(line.substr(1))};
      std::string word;
      hs >> word;
      if (word != "schema")
        throw FeatureError("phono table line " + std::to_string(lineno) +
                           ": unknown directive");
      while (hs >> word) {
        const auto eq = word.find('=');
        if (eq == std::string::npos)
          continue;
        const std::string k = word.substr(0, eq), v = word.substr(eq + 1);
        if (k == "name")
          t.schema_ = v;
        else if (k == "pool" && std::stoul(v) != pool_size())
          throw FeatureError("phono table declares a pool of " + v +
                             " slots; this build defines " + std::to_string(pool_size()));
      }
      header = true;
      continue;
    }
    if (!header)
      throw FeatureError("phono table: missing '@schema' header before line " +
                         std::to_string(lineno));
    const auto tab = line.find('\t');
    const char32_t c = parse_char_field(text::trim(line.substr(0, tab)), lineno);
    PhonoRecord r;
    if (tab != std::string_view::npos) {
      for (const auto &kv : text::split(line.substr(tab + 1), ';')) {
        const auto item = text::trim(kv);
        if (item.empty())
          continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
          throw FeatureError("phono table line " + std::to_string(lineno) +
                             ": expected key=value, got '" + std::string(item) + "'");
        const std::string key = lower(text::trim(item.substr(0, eq)));
        const std::string value(text::trim(item.substr(eq + 1)));
        if (key == "type") {
          check_value(key, value, types, lineno);
          r.type = value;
        } else if (key == "diphthong") {
          r.diphthong = value == "yes" || value == "1" || value == "true";
        } else if (auto it = key_to_prefix.find(key); it != key_to_prefix.end()) {
          check_value(key, value, groups.at(it->second)->values, lineno);
          std::string *field = key == "aspiration" ? &r.aspiration
                               : key == "origin"   ? &r.origin
                               : key == "poa"      ? &r.poa
                               : key == "modifier" ? &r.modifier
                               : key == "height"   ? &r.height
                               : key == "length"   ? &r.length
                               : key == "vowel1"   ? &r.vowel1
                               : key == "vowel2"   ? &r.vowel2
                               : key == "place"    ? &r.place
                                                   : &r.manner;
          *field = value;
        } else {
          throw FeatureError("phono table line " + std::to_string(lineno) +
                             ": unknown attribute '" + key + "'");
        }
      }
    }
    t.records_[c] = std::move(r);
  }
  if (!header)
    throw FeatureError("phono table: missing '@schema' header");
  return t;
}

PhonoTable PhonoTable::load(const std::filesystem::path &path) {
  return parse(text::read_file(path));
}

const PhonoRecord *PhonoTable::find(char32_t c) const {
  auto it = records_.find(c);
  return it == records_.end() ? nullptr : &it->second;
}

std::filesystem::path default_table_path() {
  return std::filesystem::path(MORPHKIT_DATA_DIR) / "phono_brahmi.tsv";
}

// ------------------------------------------------------------ extraction

FeatureVector extract_surface(std::string_view token, std::size_t position,
                              std::optional<std::string_view> prev,
                              std::optional<std::string_view> next, Encoding enc) {
  if (token.empty())
    throw FeatureError("extract_surface: empty token");
  FeatureVector v(pool_size(), 0.0);
  const std::u32string w = text::decode_utf8(token);
  v[0] = static_cast<double>(w.size());
  v[1] = (position == 0 || !prev) ? 1.0 : 0.0;
  v[2] = next ? 0.0 : 1.0;
  for (std::size_t k = 1; k <= 3; ++k)
    v[2 + k] = categorical_code(text::encode_utf8(prefix_of(w, k)), enc);
  for (std::size_t k = 1; k <= 4; ++k)
    v[5 + k] = categorical_code(text::encode_utf8(suffix_of(w, k)), enc);
  v[10] = categorical_code(prev ? *prev : kBeginSentinel, enc);
  v[11] = categorical_code(next ? *next : kEndSentinel, enc);
  return v;
}

FeatureVector extract_phonological(std::string_view token, const PhonoTable &table) {
  static const std::size_t first_type = require_slot("#vowels");
  static const std::size_t diphthong = require_slot("Is_diphthong");
  FeatureVector v(pool_size(), 0.0);
  for (char32_t c : text::decode_utf8(token)) {
    const PhonoRecord *r = table.find(c);
    if (!r)
      continue;
    for (std::size_t k = 0; k < type_slots().size(); ++k)
      if (r->type == type_slots()[k].first)
        v[first_type + k] += 1.0;
    if (r->diphthong)
      v[diphthong] += 1.0;
    const std::pair<const char *, const std::string *> attrs[] = {
        {"Aspirated:", &r->aspiration}, {"Origin:", &r->origin},
        {"PoA:", &r->poa},              {"Modifier:", &r->modifier},
        {"Height:", &r->height},        {"Length:", &r->length},
        {"Type-1:", &r->vowel1},        {"Type-2:", &r->vowel2},
        {"Place:", &r->place},          {"Manner:", &r->manner}};
    for (const auto &[prefix, value] : attrs)
      if (!value->empty())
        v[require_slot(std::string(prefix) + *value)] += 1.0;
  }
  return v;
}

FeatureVector extract(const corpus::Sentence &s, std::size_t i,
                      const PhonoTable &table, Encoding enc) {
  const auto &toks = s.tokens;
  std::optional<std::string_view> prev, next;
  if (i > 0)
    prev = toks[i - 1].surface;
  if (i + 1 < toks.size())
    next = toks[i + 1].surface;
  FeatureVector v = extract_surface(toks.at(i).surface, i, prev, next, enc);
  const FeatureVector p = extract_phonological(toks[i].surface, table);
  for (std::size_t k = kSurfaceSlots; k < v.size(); ++k)
    v[k] = p[k];
  return v;
}

void attach_features(std::vector<corpus::EncodedExample> &examples,
                     const std::vector<corpus::Sentence> &sentences,
                     const PhonoTable &table) {
  for (auto &ex : examples)
    ex.features = extract(sentences.at(ex.sentence), ex.position, table);
}

// ----------------------------------------------------------------- masks

FeatureMask FeatureMask::from_slots(std::size_t n, const std::vector<std::size_t> &slots) {
  FeatureMask m = none(n);
  for (std::size_t s : slots)
    m.bits.at(s) = true;
  return m;
}

FeatureMask FeatureMask::from_string(std::string_view s) {
  FeatureMask m;
  for (char c : s) {
    if (c != '0' && c != '1')
      throw FeatureError("mask bits must be 0/1, got '" + std::string(1, c) + "'");
    m.bits.push_back(c == '1');
  }
  return m;
}

std::size_t FeatureMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
}

std::vector<std::size_t> FeatureMask::selected() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i])
      out.push_back(i);
  return out;
}

std::vector<std::string> FeatureMask::selected_names() const {
  std::vector<std::string> out;
  for (std::size_t i : selected())
    out.push_back(i < pool_size() ? pool_slot_names()[i] : "slot" + std::to_string(i));
  return out;
}

std::string FeatureMask::to_string() const {
  std::string s;
  for (bool b : bits)
    s.push_back(b ? '1' : '0');
  return s;
}

FeatureVector apply_mask(const FeatureVector &v, const FeatureMask &m) {
  if (v.size() != m.size())
    throw FeatureError("apply_mask: vector has " + std::to_string(v.size()) +
                       " slots, mask has " + std::to_string(m.size()));
  FeatureVector out;
  for (std::size_t i = 0; i < v.size(); ++i)
    if (m.bits[i])
      out.push_back(v[i]);
  return out;
}

std::string format_mask_file(const FeatureMask &m, std::string_view tag) {
  std::ostringstream os;
  os << "# morphkit feature mask\n";
  os << "pool=" << m.size() << '\n';
  os << "tag=" << tag << '\n';
  os << "bits=" << m.to_string() << '\n';
  os << "selected=";
  const auto names = m.selected_names();
  for (std::size_t i = 0; i < names.size(); ++i)
    os << (i ? "," : "") << names[i];
  os << '\n';
  return os.str();
}

FeatureMask parse_mask_file(std::string_view textv) {
  std::optional<std::size_t> pool;
  std::optional<FeatureMask> mask;
  for (const auto &raw : text::split(textv, '\n')) {
    const auto line = text::trim(raw);
    if (line.empty() || line.front() == '#')
      continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw FeatureError("mask file: expected key=value, got '" + std::string(line) + "'");
    const auto key = line.substr(0, eq), value = line.substr(eq + 1);
    if (key == "pool")
      pool = std::stoul(std::string(value));
    else if (key == "bits")
      mask = FeatureMask::from_string(value);
  }
  if (!mask)
    throw FeatureError("mask file: no bits= line");
  if (pool && *pool != mask->size())
    throw FeatureError("mask file: pool=" + std::to_string(*pool) + " but " +
                       std::to_string(mask->size()) + " bits");
  return *mask;
}

// ------------------------------------------------------ list resolution

namespace {

std::vector<std::string> expand_slashes(const std::string &item) {
  const auto parts = text::split(item, '/');
  std::vector<std::string> out{parts[0]};
  // "pref-1/3" -> pref-1, pref-3
  const auto dash = parts[0].rfind('-');
  for (std::size_t i = 1; i < parts.size(); ++i) {
    const bool numeric = !parts[i].empty() &&
                         std::all_of(parts[i].begin(), parts[i].end(),
                                     [](unsigned char c) { return std::isdigit(c); });
    if (numeric && dash != std::string::npos)
      out.push_back(parts[0].substr(0, dash + 1) + parts[i]);
    else
      out.push_back(parts[i]);
  }
  return out;
}

std::string resolve_in_category(const std::string &category, const std::string &item) {
  static const std::map<std::string, std::string> type_alias = {
      {"#punct", "#punct"},       {"#punctuations", "#punct"},
      {"#punctuation", "#punct"}, {"#digits", "#digits"},
      {"#cons", "#consonants"},   {"#consonants", "#consonants"},
      {"#vowels", "#vowels"},     {"#nuktas", "#nuktas"},
      {"#nukta", "#nuktas"},      {"#halant", "#halant"},
      {"#vowel-modifiers", "#vowel_modifiers"},
      {"#vowel_modifiers", "#vowel_modifiers"}};
  static const std::map<std::string, std::string> prefix = {
      {"aspirated", "Aspirated:"}, {"origin", "Origin:"}, {"poa", "PoA:"},
      {"modifier", "Modifier:"},   {"height", "Height:"}, {"length", "Length:"},
      {"type-1", "Type-1:"},       {"type-2", "Type-2:"}, {"place", "Place:"},
      {"manner", "Manner:"}};
  const std::string cat = lower(category);
  if (cat == "surface")
    return item;
  if (cat == "type") {
    auto it = type_alias.find(lower(item));
    if (it == type_alias.end())
      throw FeatureError("unknown type-count feature '" + item + "'");
    return it->second;
  }
  auto it = prefix.find(cat);
  if (it == prefix.end())
    throw FeatureError("unknown feature category '" + category + "'");
  // A bare "S" under Manner abbreviates Sangharshi.
  if (cat == "manner" && item == "S")
    return "Manner:SN";
  return it->second + item;
}

} // namespace

std::vector<std::size_t> resolve_feature_list(std::string_view list) {
  std::string flat(list);
  for (char &c : flat)
    if (c == ';' || c == ',')
      c = ' ';
  std::istringstream ts(flat);
  std::string tok, category;
  std::vector<std::size_t> out;
  while (ts >> tok) {
    if (tok.back() == ':') {
      while (!tok.empty() && tok.back() == ':')
        tok.pop_back();
      category = tok;
      continue;
    }
    for (const std::string &item : expand_slashes(tok)) {
      std::string name;
      if (lower(item) == "is_diphthong")
        name = "Is_diphthong";
      else if (category.empty())
        throw FeatureError("feature '" + item + "' appears before any category");
      else
        name = resolve_in_category(category, item);
      const std::size_t slot = require_slot(name);
      if (std::find(out.begin(), out.end(), slot) == out.end())
        out.push_back(slot);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

} // namespace morphkit::lingfeat
