#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

// Minimal UTF-8 helpers: decoding, letter classification and simple case
// folding for Latin, Greek and Cyrillic. Invalid bytes decode to U+FFFD.
namespace qualit::unicode {

std::u32string decode(std::string_view utf8);
std::string encode(std::u32string_view text);

bool is_letter(char32_t cp);
char32_t fold_case(char32_t cp);

std::string to_lower(std::string_view utf8);

// Lowercases, then splits on every non-letter codepoint.
std::vector<std::string> letter_tokens(std::string_view utf8);

// Lowercase, trim and collapse internal whitespace runs to single spaces.
std::string normalize_phrase(std::string_view utf8);

std::size_t length(std::string_view utf8);

}  // namespace qualit::unicode
