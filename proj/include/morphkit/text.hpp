// SPDX-License-Identifier: Apache-2.0
// UTF-8 helpers, stable hashing and atomic file output.
#ifndef MORPHKIT_TEXT_HPP
#define MORPHKIT_TEXT_HPP

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace morphkit::text {

class Utf8Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

std::u32string decode_utf8(std::string_view s);
std::string encode_utf8(std::u32string_view s);
std::string encode_utf8(char32_t c);

/// True for combining marks that attach to the preceding scalar in
/// Devanagari and Perso-Arabic text (plus ZWJ/ZWNJ). Approximate: covers
/// the scripts this project handles, not all of Unicode.
bool is_combining(char32_t c);

/// Splits a scalar sequence into approximate grapheme clusters.
std::vector<std::u32string> graphemes(std::u32string_view s);

/// 64-bit FNV-1a. Stable across platforms and runs.
std::uint64_t fnv1a(std::string_view s);

std::string_view trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

/// Writes to a sibling temp file, then renames over the target.
void write_atomic(const std::filesystem::path &path, std::string_view content);
std::string read_file(const std::filesystem::path &path);

} // namespace morphkit::text

#endif
