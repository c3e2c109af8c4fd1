#pragma once

// Reference computations shared by the tests. None of them call into sclab.

#include <array>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

// GF(2^8) modulo x^8 + x^4 + x^3 + x + 1.
inline std::uint8_t gf_mul(std::uint8_t a, std::uint8_t b) {
    std::uint8_t r = 0;
    while (b) {
        if (b & 1) r ^= a;
        a = static_cast<std::uint8_t>((a << 1) ^ ((a & 0x80) ? 0x1B : 0));
        b >>= 1;
    }
    return r;
}

inline std::uint8_t gf_inv(std::uint8_t a) {
    if (a == 0) return 0;
    for (int b = 1; b < 256; ++b)
        if (gf_mul(a, static_cast<std::uint8_t>(b)) == 1) return static_cast<std::uint8_t>(b);
    return 0;
}

inline std::uint8_t rotl8(std::uint8_t x, int s) { return static_cast<std::uint8_t>((x << s) | (x >> (8 - s))); }

// Field inverse followed by the affine map.
inline std::array<std::uint8_t, 256> aes_sbox() {
    std::array<std::uint8_t, 256> t{};
    for (int x = 0; x < 256; ++x) {
        const std::uint8_t b = gf_inv(static_cast<std::uint8_t>(x));
        t[x] = static_cast<std::uint8_t>(b ^ rotl8(b, 1) ^ rotl8(b, 2) ^ rotl8(b, 3) ^ rotl8(b, 4) ^ 0x63);
    }
    return t;
}

inline std::vector<std::uint8_t> bernoulli(std::size_t n, double q, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution d(q);
    std::vector<std::uint8_t> out(n);
    for (auto& b : out) b = d(rng) ? 1 : 0;
    return out;
}

}  // namespace oracle
