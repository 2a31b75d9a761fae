#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

// Code-point indexing over UTF-8 strings. All offsets exposed by the toolkit
// count Unicode code points, never bytes.
namespace whyqa::utf8 {

// Throws std::invalid_argument on malformed UTF-8.
std::u32string decode(std::string_view s);
std::string encode(std::u32string_view s);

bool is_valid(std::string_view s);

std::size_t length(std::string_view s);

// Substring of `count` code points starting at code point `begin`.
// Returns nullopt when the range does not fit inside `s`.
std::optional<std::string> substr(std::string_view s, std::size_t begin,
                                  std::size_t count);

// First occurrence of `needle` in `haystack`, as a code-point offset.
std::optional<std::size_t> find(std::string_view haystack,
                                std::string_view needle, std::size_t from = 0);

}  // namespace whyqa::utf8
