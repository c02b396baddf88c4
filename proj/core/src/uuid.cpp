#include "ttpx/uuid.hpp"

#include <cctype>
#include <cstring>

#include "ttpx/error.hpp"

namespace ttpx {

namespace {

std::uint32_t rotl(std::uint32_t value, int bits) {
    return (value << bits) | (value >> (32 - bits));
}

}  // namespace

std::array<std::uint8_t, 20> sha1(std::string_view data) {
    std::uint32_t h0 = 0x67452301, h1 = 0xEFCDAB89, h2 = 0x98BADCFE, h3 = 0x10325476,
                  h4 = 0xC3D2E1F0;

    // Pad to a multiple of 64 bytes: 0x80, zeros, 64-bit big-endian bit length.
    std::string padded(data);
    std::uint64_t bit_length = static_cast<std::uint64_t>(data.size()) * 8;
    padded.push_back(static_cast<char>(0x80));
    while (padded.size() % 64 != 56) padded.push_back('\0');
    for (int i = 7; i >= 0; --i) {
        padded.push_back(static_cast<char>((bit_length >> (8 * i)) & 0xff));
    }

    for (std::size_t chunk = 0; chunk < padded.size(); chunk += 64) {
        std::uint32_t w[80];
        for (int i = 0; i < 16; ++i) {
            w[i] = (static_cast<std::uint32_t>(static_cast<unsigned char>(padded[chunk + 4 * i]))
                    << 24) |
                   (static_cast<std::uint32_t>(
                        static_cast<unsigned char>(padded[chunk + 4 * i + 1]))
                    << 16) |
                   (static_cast<std::uint32_t>(
                        static_cast<unsigned char>(padded[chunk + 4 * i + 2]))
                    << 8) |
                   static_cast<std::uint32_t>(static_cast<unsigned char>(padded[chunk + 4 * i + 3]));
        }
        for (int i = 16; i < 80; ++i) {
            w[i] = rotl(w[i - 3] ^ w[i - 8] ^ w[i - 14] ^ w[i - 16], 1);
        }
        std::uint32_t a = h0, b = h1, c = h2, d = h3, e = h4;
        for (int i = 0; i < 80; ++i) {
            std::uint32_t f, k;
            if (i < 20) {
                f = (b & c) | ((~b) & d);
                k = 0x5A827999;
            } else if (i < 40) {
                f = b ^ c ^ d;
                k = 0x6ED9EBA1;
            } else if (i < 60) {
                f = (b & c) | (b & d) | (c & d);
                k = 0x8F1BBCDC;
            } else {
                f = b ^ c ^ d;
                k = 0xCA62C1D6;
            }
            std::uint32_t temp = rotl(a, 5) + f + e + k + w[i];
            e = d;
            d = c;
            c = rotl(b, 30);
            b = a;
            a = temp;
        }
        h0 += a;
        h1 += b;
        h2 += c;
        h3 += d;
        h4 += e;
    }

    std::array<std::uint8_t, 20> digest{};
    const std::uint32_t hs[5] = {h0, h1, h2, h3, h4};
    for (int i = 0; i < 5; ++i) {
        digest[4 * i] = static_cast<std::uint8_t>((hs[i] >> 24) & 0xff);
        digest[4 * i + 1] = static_cast<std::uint8_t>((hs[i] >> 16) & 0xff);
        digest[4 * i + 2] = static_cast<std::uint8_t>((hs[i] >> 8) & 0xff);
        digest[4 * i + 3] = static_cast<std::uint8_t>(hs[i] & 0xff);
    }
    return digest;
}

std::string uuid_v5(const std::array<std::uint8_t, 16>& ns, std::string_view name) {
    std::string material(reinterpret_cast<const char*>(ns.data()), ns.size());
    material.append(name);
    auto digest = sha1(material);

    std::array<std::uint8_t, 16> bytes{};
    std::memcpy(bytes.data(), digest.data(), 16);
    bytes[6] = static_cast<std::uint8_t>((bytes[6] & 0x0f) | 0x50);  // version 5
    bytes[8] = static_cast<std::uint8_t>((bytes[8] & 0x3f) | 0x80);  // RFC 4122 variant

    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(36);
    for (int i = 0; i < 16; ++i) {
        if (i == 4 || i == 6 || i == 8 || i == 10) out.push_back('-');
        out.push_back(hex[bytes[static_cast<std::size_t>(i)] >> 4]);
        out.push_back(hex[bytes[static_cast<std::size_t>(i)] & 0xf]);
    }
    return out;
}

bool is_valid_uuid(std::string_view text) {
    if (text.size() != 36) return false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (i == 8 || i == 13 || i == 18 || i == 23) {
            if (text[i] != '-') return false;
        } else if (!std::isxdigit(static_cast<unsigned char>(text[i]))) {
            return false;
        }
    }
    return true;
}

std::array<std::uint8_t, 16> parse_uuid(std::string_view text) {
    if (!is_valid_uuid(text)) {
        raise(ErrorKind::Parse, "malformed UUID: " + std::string(text));
    }
    std::array<std::uint8_t, 16> bytes{};
    std::size_t out = 0;
    for (std::size_t i = 0; i < text.size();) {
        if (text[i] == '-') {
            ++i;
            continue;
        }
        auto nibble = [](char c) -> std::uint8_t {
            if (c >= '0' && c <= '9') return static_cast<std::uint8_t>(c - '0');
            if (c >= 'a' && c <= 'f') return static_cast<std::uint8_t>(c - 'a' + 10);
            return static_cast<std::uint8_t>(c - 'A' + 10);
        };
        bytes[out++] = static_cast<std::uint8_t>((nibble(text[i]) << 4) | nibble(text[i + 1]));
        i += 2;
    }
    return bytes;
}

}  // namespace ttpx
