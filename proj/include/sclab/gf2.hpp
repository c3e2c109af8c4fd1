#pragma once

#include <cstdint>
#include <vector>

namespace sclab {

/// Square matrix over GF(2) of dimension <= 64; row i is a bit mask of columns.
class Gf2Matrix {
public:
    explicit Gf2Matrix(std::size_t n) : n_(n), rows_(n, 0) {}
    static Gf2Matrix identity(std::size_t n);

    [[nodiscard]] std::size_t size() const { return n_; }
    [[nodiscard]] bool get(std::size_t r, std::size_t c) const { return (rows_[r] >> c) & 1U; }
    void set(std::size_t r, std::size_t c, bool v);
    [[nodiscard]] std::uint64_t row(std::size_t r) const { return rows_[r]; }

    /// y = M x, x and y as column bit masks.
    [[nodiscard]] std::uint64_t apply(std::uint64_t x) const;
    Gf2Matrix operator*(const Gf2Matrix& o) const;
    bool operator==(const Gf2Matrix&) const = default;
    [[nodiscard]] Gf2Matrix pow(std::uint64_t e) const;

private:
    std::size_t n_;
    std::vector<std::uint64_t> rows_;
};

/// Prime factorization by trial division (ascending, with multiplicity).
std::vector<std::uint64_t> factorize(std::uint64_t n);
bool is_prime(std::uint64_t n);

/// True when M^order == I and M^(order/p) != I for every prime p | order.
bool has_multiplicative_order(const Gf2Matrix& m, std::uint64_t order);

}  // namespace sclab
