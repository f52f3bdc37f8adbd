#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace skillgym::text {

std::string to_lower(std::string_view s);
std::string trim(std::string_view s);

// Splits on whitespace, dropping empty pieces.
std::vector<std::string> split_words(std::string_view s);

// Splits on a single delimiter character; pieces are trimmed, empty pieces kept.
std::vector<std::string> split(std::string_view s, char delim);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool starts_with_ci(std::string_view s, std::string_view prefix);

// Lower-cases, maps every non-alphanumeric character to a space and splits.
// This is the tokenization shared by the agent vocabulary and command parsing.
std::vector<std::string> tokenize(std::string_view s);

// "Cooking Pasta!" -> "cooking_pasta"
std::string slugify(std::string_view s);

// 64-bit FNV-1a; used for stable content hashes in metadata files.
std::uint64_t fnv1a64(std::string_view s);
std::string hex64(std::uint64_t v);

}  // namespace skillgym::text
