#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace gecforge {

using Token = std::string;
using TokenSeq = std::vector<Token>;

/// Tokens joined by single spaces; the on-disk form of a tokenized sentence.
std::string join_tokens(const TokenSeq& tokens);

/// Inverse of join_tokens for lines written by this library: split on
/// single spaces, dropping empty fields.
TokenSeq split_tokens(std::string_view line);

bool is_space(char c);

std::string_view trim(std::string_view text);

std::vector<std::string> split_fields(std::string_view line, char sep);

}  // namespace gecforge
