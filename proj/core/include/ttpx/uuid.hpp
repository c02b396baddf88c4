#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace ttpx {

/// SHA-1 digest of `data` (FIPS 180-1). Used for name-based UUIDs only.
std::array<std::uint8_t, 20> sha1(std::string_view data);

/// RFC 4122 name-based UUID (version 5, SHA-1) rendered in canonical
/// lowercase hex form. `ns` is the namespace UUID as raw bytes.
std::string uuid_v5(const std::array<std::uint8_t, 16>& ns, std::string_view name);

/// Parses "xxxxxxxx-xxxx-..." into raw bytes; throws on malformed input.
std::array<std::uint8_t, 16> parse_uuid(std::string_view text);

/// True iff `text` is a canonical 8-4-4-4-12 lowercase-or-uppercase hex UUID.
bool is_valid_uuid(std::string_view text);

}  // namespace ttpx
