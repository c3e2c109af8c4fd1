#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace sclab {

struct SessionKeys {
    std::uint32_t k_addr = 0;
    std::uint32_t k_data = 0;
    std::uint64_t session_id = 0;

    static SessionKeys random(std::mt19937_64& rng, int addr_bits, int word_bits, std::uint64_t session_id = 0);
    bool operator==(const SessionKeys&) const = default;
};

struct BusEvent {
    bool write = true;
    std::uint32_t phys_addr = 0;
    std::uint32_t phys_data = 0;
    [[nodiscard]] int hamming_weight() const;
};

/// Memory behind session-key address scrambling and data encryption:
/// physical address = addr ^ k_addr, physical data = data ^ k_data
/// (^ expand(addr) with address expansion enabled).
class ProtectedMemory {
public:
    ProtectedMemory(SessionKeys keys, int addr_bits = 10, int word_bits = 32, bool address_expansion = false,
                    bool log_bus = false);

    void write(std::uint32_t addr, std::uint32_t data);
    std::uint32_t read(std::uint32_t addr);

    /// Stores a two-share value. The first share is encrypted before the
    /// second is folded in, so the recombined value only exists encrypted.
    void write_shares(std::uint32_t addr, std::uint32_t s0, std::uint32_t s1);

    /// Same backing array under new keys; earlier contents become unreadable.
    [[nodiscard]] ProtectedMemory rekey(const SessionKeys& keys) const;

    [[nodiscard]] const SessionKeys& keys() const { return keys_; }
    [[nodiscard]] const std::vector<BusEvent>& bus_log() const { return bus_; }
    void clear_bus_log() { bus_.clear(); }
    [[nodiscard]] const std::vector<std::uint32_t>& physical() const { return mem_; }
    [[nodiscard]] int addr_bits() const { return addr_bits_; }
    [[nodiscard]] int word_bits() const { return word_bits_; }
    [[nodiscard]] std::uint32_t scramble(std::uint32_t addr) const;
    [[nodiscard]] std::uint32_t expand(std::uint32_t addr) const;

    /// Raw little-endian words plus a JSON sidecar; keys are written only when asked.
    void save_image(const std::string& path, bool include_keys = false) const;

private:
    void check(std::uint32_t addr, std::uint32_t data) const;

    SessionKeys keys_;
    int addr_bits_;
    int word_bits_;
    bool expansion_;
    bool log_;
    std::uint32_t addr_mask_;
    std::uint32_t word_mask_;
    std::vector<std::uint32_t> mem_;
    std::vector<BusEvent> bus_;
};

/// Fixed nonlinear 10-to-32 bit address expansion (two substitution-permutation
/// rounds of 4-bit S-boxes over the zero-extended address).
std::uint32_t address_expansion(std::uint32_t addr, int word_bits);

}  // namespace sclab
