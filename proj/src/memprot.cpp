#include "sclab/memprot.hpp"

#include <bit>
#include <fstream>

#include "json.hpp"

#include "sclab/error.hpp"

namespace sclab {

namespace {
std::uint32_t mask_of(int bits) { return bits >= 32 ? 0xFFFFFFFFU : ((1U << bits) - 1U); }

constexpr std::uint8_t kSbox4[16] = {0xC, 0x5, 0x6, 0xB, 0x9, 0x0, 0xA, 0xD,
                                     0x3, 0xE, 0xF, 0x8, 0x4, 0x7, 0x1, 0x2};

std::uint32_t sp_round(std::uint32_t x, std::uint32_t rc) {
    std::uint32_t s = 0;
    for (int n = 0; n < 8; ++n) s |= static_cast<std::uint32_t>(kSbox4[(x >> (4 * n)) & 0xF]) << (4 * n);
    // Bit permutation: bit i -> 8 * (i % 4) + i / 4.
    std::uint32_t p = 0;
    for (int i = 0; i < 32; ++i)
        if ((s >> i) & 1U) p |= 1U << (8 * (i % 4) + i / 4);
    return p ^ rc;
}
}  // namespace

SessionKeys SessionKeys::random(std::mt19937_64& rng, int addr_bits, int word_bits, std::uint64_t session_id) {
    SessionKeys k;
    k.k_addr = static_cast<std::uint32_t>(rng()) & mask_of(addr_bits);
    k.k_data = static_cast<std::uint32_t>(rng()) & mask_of(word_bits);
    k.session_id = session_id;
    return k;
}

int BusEvent::hamming_weight() const { return std::popcount(phys_addr) + std::popcount(phys_data); }

std::uint32_t address_expansion(std::uint32_t addr, int word_bits) {
    std::uint32_t x = addr * 0x9E3779B1U;
    x = sp_round(x, 0x3C6EF372U);
    x = sp_round(x, 0xA54FF53AU);
    return x & mask_of(word_bits);
}

ProtectedMemory::ProtectedMemory(SessionKeys keys, int addr_bits, int word_bits, bool address_expansion,
                                 bool log_bus)
    : keys_(keys), addr_bits_(addr_bits), word_bits_(word_bits), expansion_(address_expansion), log_(log_bus) {
    if (addr_bits < 1 || addr_bits > 24) throw ConfigError("address width must be in [1, 24]");
    if (word_bits < 1 || word_bits > 32) throw ConfigError("word width must be in [1, 32]");
    addr_mask_ = mask_of(addr_bits);
    word_mask_ = mask_of(word_bits);
    keys_.k_addr &= addr_mask_;
    keys_.k_data &= word_mask_;
    mem_.assign(std::size_t{1} << addr_bits, 0);
}

void ProtectedMemory::check(std::uint32_t addr, std::uint32_t data) const {
    if (addr > addr_mask_) throw DataError("address " + std::to_string(addr) + " out of range");
    if (data > word_mask_) throw DataError("data word wider than memory word");
}

std::uint32_t ProtectedMemory::scramble(std::uint32_t addr) const { return addr ^ keys_.k_addr; }

std::uint32_t ProtectedMemory::expand(std::uint32_t addr) const {
    return expansion_ ? address_expansion(addr, word_bits_) : 0U;
}

void ProtectedMemory::write(std::uint32_t addr, std::uint32_t data) {
    check(addr, data);
    const std::uint32_t pa = scramble(addr);
    const std::uint32_t pd = data ^ keys_.k_data ^ expand(addr);
    mem_[pa] = pd;
    if (log_) bus_.push_back({true, pa, pd});
}

void ProtectedMemory::write_shares(std::uint32_t addr, std::uint32_t s0, std::uint32_t s1) {
    check(addr, s0);
    check(addr, s1);
    const std::uint32_t pa = scramble(addr);
    std::uint32_t e = s0 ^ keys_.k_data ^ expand(addr);
    e ^= s1;
    mem_[pa] = e;
    if (log_) bus_.push_back({true, pa, e});
}

std::uint32_t ProtectedMemory::read(std::uint32_t addr) {
    check(addr, 0);
    const std::uint32_t pa = scramble(addr);
    const std::uint32_t pd = mem_[pa];
    if (log_) bus_.push_back({false, pa, pd});
    return pd ^ keys_.k_data ^ expand(addr);
}

ProtectedMemory ProtectedMemory::rekey(const SessionKeys& keys) const {
    ProtectedMemory m(keys, addr_bits_, word_bits_, expansion_, log_);
    m.mem_ = mem_;
    return m;
}

void ProtectedMemory::save_image(const std::string& path, bool include_keys) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    for (std::uint32_t w : mem_) {
        const char b[4] = {static_cast<char>(w & 0xFF), static_cast<char>((w >> 8) & 0xFF),
                           static_cast<char>((w >> 16) & 0xFF), static_cast<char>((w >> 24) & 0xFF)};
        out.write(b, 4);
    }
    nlohmann::json j{{"addr_bits", addr_bits_},
                     {"word_bits", word_bits_},
                     {"address_expansion", expansion_},
                     {"session_id", keys_.session_id}};
    if (include_keys) j["keys"] = {{"k_addr", keys_.k_addr}, {"k_data", keys_.k_data}};
    std::ofstream(path + ".json") << j.dump(2) << '\n';
}

}  // namespace sclab
