#include "sclab/gf2.hpp"

#include <algorithm>

namespace sclab {

Gf2Matrix Gf2Matrix::identity(std::size_t n) {
    Gf2Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

void Gf2Matrix::set(std::size_t r, std::size_t c, bool v) {
    if (v)
        rows_[r] |= std::uint64_t{1} << c;
    else
        rows_[r] &= ~(std::uint64_t{1} << c);
}

std::uint64_t Gf2Matrix::apply(std::uint64_t x) const {
    std::uint64_t y = 0;
    for (std::size_t r = 0; r < n_; ++r)
        if (__builtin_parityll(rows_[r] & x)) y |= std::uint64_t{1} << r;
    return y;
}

Gf2Matrix Gf2Matrix::operator*(const Gf2Matrix& o) const {
    Gf2Matrix out(n_);
    for (std::size_t r = 0; r < n_; ++r) {
        std::uint64_t acc = 0;
        std::uint64_t bits = rows_[r];
        while (bits != 0) {
            const int k = __builtin_ctzll(bits);
            acc ^= o.rows_[static_cast<std::size_t>(k)];
            bits &= bits - 1;
        }
        out.rows_[r] = acc;
    }
    return out;
}

Gf2Matrix Gf2Matrix::pow(std::uint64_t e) const {
    Gf2Matrix result = identity(n_);
    Gf2Matrix base = *this;
    while (e != 0) {
        if (e & 1U) result = result * base;
        base = base * base;
        e >>= 1;
    }
    return result;
}

std::vector<std::uint64_t> factorize(std::uint64_t n) {
    std::vector<std::uint64_t> f;
    for (std::uint64_t p = 2; p * p <= n; p += (p == 2 ? 1 : 2)) {
        while (n % p == 0) {
            f.push_back(p);
            n /= p;
        }
    }
    if (n > 1) f.push_back(n);
    return f;
}

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    return factorize(n).size() == 1;
}

bool has_multiplicative_order(const Gf2Matrix& m, std::uint64_t order) {
    const auto id = Gf2Matrix::identity(m.size());
    if (m.pow(order) != id) return false;
    auto primes = factorize(order);
    primes.erase(std::unique(primes.begin(), primes.end()), primes.end());
    return std::all_of(primes.begin(), primes.end(),
                       [&](std::uint64_t p) { return m.pow(order / p) != id; });
}

}  // namespace sclab
