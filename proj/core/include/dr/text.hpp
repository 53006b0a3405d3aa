#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dr::text {

/// Decodes UTF-8 into code points. Invalid bytes decode as U+FFFD, one per byte.
std::vector<char32_t> decode_utf8(std::string_view s);
void append_utf8(std::string& out, char32_t cp);
std::string encode_utf8(const std::vector<char32_t>& cps);

std::size_t code_point_count(std::string_view s);

/// Longest prefix of `s` that holds at most `max_code_points` code points and
/// ends on a code point boundary.
std::string_view utf8_prefix(std::string_view s, std::size_t max_code_points);

/// Simple case folding for ASCII, Latin-1, Latin Extended-A, Greek and Cyrillic.
char32_t fold_case(char32_t cp);
std::string fold_case(std::string_view s);

bool is_space(char32_t cp);
bool is_cjk(char32_t cp);
bool is_latin_letter(char32_t cp);
bool is_word_char(char32_t cp);

/// Collapses every whitespace run to one ASCII space and trims both ends.
std::string collapse_whitespace(std::string_view s);
std::string trim(std::string_view s);

/// Lexical tokens used by the search index: case-folded runs of word
/// characters; every CJK ideograph is its own token.
std::vector<std::string> tokenize(std::string_view s);

/// Lower-cased, punctuation-stripped, whitespace-collapsed form used for
/// answer matching.
std::string normalize_answer(std::string_view s);

bool contains_folded(std::string_view haystack, std::string_view needle);

/// Approximate token count used when a backend reports no usage:
/// ceil(code points / 4).
std::size_t approx_tokens(std::string_view s);

std::vector<std::string> split_lines(std::string_view s);

/// Splits on sentence terminators (. ! ? and their CJK forms) and newlines.
/// Each returned piece keeps its trailing whitespace so that concatenating the
/// pieces reproduces the input exactly.
std::vector<std::string> split_sentences(std::string_view s);

}  // namespace dr::text
