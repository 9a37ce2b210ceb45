#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ynk::utf8 {

// Strict UTF-8 decode; throws Error("invalid_utf8") on malformed input.
std::u32string decode(std::string_view s);

void append(std::string& out, char32_t cp);
std::string encode(std::u32string_view cps);
std::string encode(char32_t cp);

// Combining marks we care about (U+0300..U+036F). Enough for this
// orthography; not a general UAX-29 implementation.
bool is_combining_mark(char32_t cp);

// Extended grapheme clusters under the simplified rule: one code point plus
// any following combining marks.
std::vector<std::string> grapheme_clusters(std::string_view s);

}  // namespace ynk::utf8
