#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace chatbot::utf8 {

inline constexpr char32_t kReplacement = U'�';

/// Decodes UTF-8; malformed sequences decode to U+FFFD, one per offending byte.
std::u32string decode(std::string_view text);

std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

/// Number of Unicode scalar values, counting malformed bytes as one each.
std::size_t length(std::string_view text);

}  // namespace chatbot::utf8
