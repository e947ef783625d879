#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace asim {

inline constexpr std::string_view kUrlToken = "urltok";
inline constexpr std::string_view kNumberToken = "numtok";

/// Removes HTML markup and normalizes the text of a post.
///
/// Tags are dropped, `<code>`/`<pre>` blocks are dropped with their content
/// when `strip_code` is set, URLs become "urltok", standalone numbers become
/// "numtok", punctuation is removed and whitespace collapsed. Case is kept
/// (camel-case splitting needs it). Never throws; unterminated markup is
/// treated as text.
std::string clean_text(std::string_view raw, bool strip_code = true);

/// Whitespace split, camel-case split (lower→Upper and letter→digit),
/// lowercase, stop-word removal, Porter stemming.
std::vector<std::string> tokenize(std::string_view cleaned);

/// Classic Porter (1980) stemmer on a lowercase ASCII word.
std::string porter_stem(std::string_view word);

/// The shipped English stop-word list (lowercase, apostrophe-free).
const std::vector<std::string>& stop_words();
bool is_stop_word(std::string_view token);

}  // namespace asim
