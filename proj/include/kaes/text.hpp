#pragma once

#include <string>
#include <string_view>

namespace kaes::text {

/// Decodes Windows-1252 bytes to UTF-8. The five bytes the code page leaves
/// undefined (0x81, 0x8D, 0x8F, 0x90, 0x9D) map to the C1 control with the
/// same value, so no byte is ever lost.
std::string decode_windows1252(std::string_view bytes);

/// Decodes UTF-8; invalid sequences map each offending byte to U+FFFD.
std::u32string utf8_to_u32(std::string_view utf8);
std::string u32_to_utf8(std::u32string_view s);

/// Simple case folding for ASCII, Latin-1 and the Latin-1 subset of
/// Windows-1252 extras. Other code points pass through.
char32_t to_lower(char32_t c) noexcept;

bool is_space(char32_t c) noexcept;

}  // namespace kaes::text
