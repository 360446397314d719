#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace stylo {

// Byte offsets of each UTF-8 code point in `text`, plus a final entry equal to
// text.size(). Invalid sequences are treated as single-byte characters.
std::vector<std::size_t> utf8_boundaries(std::string_view text);

// Decodes the code point starting at `pos`; advances `pos` past it.
char32_t utf8_next(std::string_view text, std::size_t& pos);

// Unicode White_Space property.
bool is_unicode_space(char32_t c);

// Punctuation (Unicode categories P*) and the ASCII symbol characters that
// tokenizers conventionally split off.
bool is_punctuation(char32_t c);

std::string_view trim(std::string_view s);
std::vector<std::string_view> split(std::string_view s, char sep);

// TSV cell escaping: `\t`, `\n`, `\r` and `\\` literals.
std::string tsv_unescape(std::string_view cell);
std::string tsv_escape(std::string_view cell);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double v);
// Strict parse of a whole string as a double; returns false on trailing junk.
bool parse_double(std::string_view s, double& out);
bool parse_u64(std::string_view s, std::uint64_t& out);
bool parse_i64(std::string_view s, std::int64_t& out);

}  // namespace stylo
