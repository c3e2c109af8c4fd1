#include "sclab/builtins.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <functional>

namespace sclab {

std::vector<std::string> bus(const std::string& name, int width) {
    std::vector<std::string> out;
    out.reserve(width);
    for (int i = 0; i < width; ++i) out.push_back(name + "[" + std::to_string(i) + "]");
    return out;
}

namespace {

// Tower-field arithmetic. An element of GF(2^8) is (h, l) in GF(2^4)^2 packed
// as h << 4 | l, GF(2^4) is GF(2^2)^2 packed the same way, GF(2^2) is (a1, a0).
// Each level is reduced by t^2 + t + c with c the level constant.
constexpr unsigned kPhi = 0b10;  // w, GF(2^2) constant for GF(2^4)

unsigned sw_gf4_mul(unsigned a, unsigned b) {
    unsigned a1 = a >> 1, a0 = a & 1, b1 = b >> 1, b0 = b & 1;
    unsigned hi = (a1 & b1) ^ (a1 & b0) ^ (a0 & b1);
    unsigned lo = (a1 & b1) ^ (a0 & b0);
    return hi << 1 | lo;
}

unsigned sw_gf16_mul(unsigned a, unsigned b) {
    unsigned ah = a >> 2, al = a & 3, bh = b >> 2, bl = b & 3;
    unsigned p2 = sw_gf4_mul(al, bl);
    unsigned hi = sw_gf4_mul(ah ^ al, bh ^ bl) ^ p2;
    unsigned lo = sw_gf4_mul(kPhi, sw_gf4_mul(ah, bh)) ^ p2;
    return hi << 2 | lo;
}

unsigned find_lambda() {
    for (unsigned c = 1; c < 16; ++c) {
        bool irreducible = true;
        for (unsigned t = 0; t < 16; ++t)
            if ((sw_gf16_mul(t, t) ^ t) == c) irreducible = false;
        if (irreducible) return c;
    }
    return 0;
}

const unsigned kLambda = find_lambda();

unsigned sw_gf256_mul(unsigned a, unsigned b) {
    unsigned ah = a >> 4, al = a & 15, bh = b >> 4, bl = b & 15;
    unsigned p2 = sw_gf16_mul(al, bl);
    unsigned hi = sw_gf16_mul(ah ^ al, bh ^ bl) ^ p2;
    unsigned lo = sw_gf16_mul(kLambda, sw_gf16_mul(ah, bh)) ^ p2;
    return hi << 4 | lo;
}

// Image of the AES polynomial-basis element x in the tower field: the smallest
// root of x^8 + x^4 + x^3 + x + 1.
unsigned find_aes_generator() {
    for (unsigned b = 2; b < 256; ++b) {
        std::array<unsigned, 9> pw{};
        pw[0] = 1;
        for (int i = 1; i <= 8; ++i) pw[i] = sw_gf256_mul(pw[i - 1], b);
        if ((pw[8] ^ pw[4] ^ pw[3] ^ pw[1] ^ pw[0]) == 0) return b;
    }
    return 0;
}

// Columns of an 8x8 GF(2) matrix; column i is the image of bit i.
using Matrix8 = std::array<unsigned, 8>;

unsigned mat_apply(const Matrix8& m, unsigned v) {
    unsigned r = 0;
    for (int i = 0; i < 8; ++i)
        if (v >> i & 1) r ^= m[i];
    return r;
}

Matrix8 invert(const Matrix8& m) {
    // Gauss-Jordan over rows of the augmented matrix [M | I].
    std::array<std::uint16_t, 8> rows{};
    for (int r = 0; r < 8; ++r) {
        unsigned row = 0;
        for (int c = 0; c < 8; ++c)
            if (m[c] >> r & 1) row |= 1u << c;
        rows[r] = static_cast<std::uint16_t>(row | (1u << (8 + r)));
    }
    for (int c = 0; c < 8; ++c) {
        int pivot = c;
        while (!(rows[pivot] >> c & 1)) ++pivot;
        std::swap(rows[c], rows[pivot]);
        for (int r = 0; r < 8; ++r)
            if (r != c && (rows[r] >> c & 1)) rows[r] ^= rows[c];
    }
    Matrix8 inv{};
    for (int c = 0; c < 8; ++c)
        for (int r = 0; r < 8; ++r)
            if (rows[r] >> (8 + c) & 1) inv[c] |= 1u << r;
    return inv;
}

unsigned aes_affine(unsigned b) {
    unsigned r = 0;
    for (int i = 0; i < 8; ++i) {
        unsigned bit = (b >> i) ^ (b >> ((i + 4) % 8)) ^ (b >> ((i + 5) % 8)) ^ (b >> ((i + 6) % 8)) ^
                       (b >> ((i + 7) % 8));
        r |= (bit & 1) << i;
    }
    return r;
}

using Bits = std::vector<std::string>;

// Emits gates with generated names into a NetlistBuilder.
class LogicEmitter {
public:
    explicit LogicEmitter(NetlistBuilder& b, std::string prefix) : b_(b), prefix_(std::move(prefix)) {}

    std::string gate(GateOp op, std::vector<std::string> ins, std::string out = {}) {
        if (out.empty()) out = prefix_ + "n" + std::to_string(next_net_++);
        b_.add_gate(prefix_ + "g" + std::to_string(next_gate_++), op, out, std::move(ins));
        return out;
    }

    std::string x(const std::string& a, const std::string& c) { return gate(GateOp::XOR, {a, c}); }
    std::string a(const std::string& p, const std::string& q) { return gate(GateOp::AND, {p, q}); }

    Bits xor_bits(const Bits& p, const Bits& q) {
        Bits r;
        for (std::size_t i = 0; i < p.size(); ++i) r.push_back(x(p[i], q[i]));
        return r;
    }

    /// Linear map over GF(2) defined by a software function (must be linear).
    /// Output bit i is the XOR chain of the inputs selected by row i.
    Bits linear(const Bits& in, std::size_t out_width, const std::function<unsigned(unsigned)>& fn,
                const std::vector<std::string>& names = {}, unsigned invert_mask = 0) {
        std::vector<unsigned> columns(in.size());
        for (std::size_t c = 0; c < in.size(); ++c) columns[c] = fn(1u << c);
        Bits out;
        for (std::size_t r = 0; r < out_width; ++r) {
            std::vector<std::string> terms;
            for (std::size_t c = 0; c < in.size(); ++c)
                if (columns[c] >> r & 1) terms.push_back(in[c]);
            bool inv = invert_mask >> r & 1;
            std::string want = r < names.size() ? names[r] : std::string{};
            if (terms.size() == 1 && !inv && !want.empty())
                throw InvariantError("linear layer row needs a buffer for '" + want + "'");
            std::string acc = terms.at(0);
            for (std::size_t t = 1; t < terms.size(); ++t) {
                bool last = t + 1 == terms.size();
                acc = gate(GateOp::XOR, {acc, terms[t]}, last && !inv ? want : std::string{});
            }
            if (inv) acc = gate(GateOp::NOT, {acc}, want);
            out.push_back(acc);
        }
        return out;
    }

    // GF(2^2) multiplier, Karatsuba form: 3 AND gates.
    Bits gf4_mul(const Bits& p, const Bits& q) {
        std::string t = a(p[1], q[1]);
        std::string u = a(p[0], q[0]);
        std::string s = a(x(p[1], p[0]), x(q[1], q[0]));
        return {x(t, u), x(s, u)};  // {lo, hi}
    }

    Bits gf16_mul(const Bits& p, const Bits& q) {
        Bits ph{p[2], p[3]}, pl{p[0], p[1]}, qh{q[2], q[3]}, ql{q[0], q[1]};
        Bits p1 = gf4_mul(xor_bits(ph, pl), xor_bits(qh, ql));
        Bits p2 = gf4_mul(pl, ql);
        Bits p3 = gf4_mul(ph, qh);
        Bits hi = xor_bits(p1, p2);
        Bits phi_p3 = linear(p3, 2, [](unsigned v) { return sw_gf4_mul(kPhi, v); });
        Bits lo = xor_bits(phi_p3, p2);
        return {lo[0], lo[1], hi[0], hi[1]};
    }

    Bits gf16_inv(const Bits& d) {
        Bits dh{d[2], d[3]}, dl{d[0], d[1]};
        Bits prod = gf4_mul(dh, dl);
        // phi*dh^2 + dl^2 over the 4 bits of d.
        Bits sq = linear(d, 2, [](unsigned v) {
            unsigned h = v >> 2, l = v & 3;
            return sw_gf4_mul(kPhi, sw_gf4_mul(h, h)) ^ sw_gf4_mul(l, l);
        });
        Bits e = xor_bits(prod, sq);
        Bits e_inv = linear(e, 2, [](unsigned v) { return sw_gf4_mul(v, v); });
        Bits hi = gf4_mul(dh, e_inv);
        Bits lo = gf4_mul(xor_bits(dh, dl), e_inv);
        return {lo[0], lo[1], hi[0], hi[1]};
    }

    Bits gf256_inv(const Bits& v) {
        Bits vh{v[4], v[5], v[6], v[7]}, vl{v[0], v[1], v[2], v[3]};
        Bits prod = gf16_mul(vh, vl);
        Bits sq = linear(v, 4, [](unsigned w) {
            unsigned h = w >> 4, l = w & 15;
            return sw_gf16_mul(kLambda, sw_gf16_mul(h, h)) ^ sw_gf16_mul(l, l);
        });
        Bits delta_inv = gf16_inv(xor_bits(prod, sq));
        Bits hi = gf16_mul(vh, delta_inv);
        Bits lo = gf16_mul(xor_bits(vh, vl), delta_inv);
        return {lo[0], lo[1], lo[2], lo[3], hi[0], hi[1], hi[2], hi[3]};
    }

private:
    NetlistBuilder& b_;
    std::string prefix_;
    int next_net_ = 0;
    int next_gate_ = 0;
};

// Appends the S-box logic from `in` to the named `out` nets.
void emit_sbox(NetlistBuilder& b, const Bits& in, const Bits& out, const std::string& prefix) {
    const unsigned gen = find_aes_generator();
    Matrix8 to_tower{};
    unsigned pw = 1;
    for (int i = 0; i < 8; ++i) {
        to_tower[i] = pw;
        pw = sw_gf256_mul(pw, gen);
    }
    const Matrix8 from_tower = invert(to_tower);

    LogicEmitter e(b, prefix);
    Bits t = e.linear(in, 8, [&](unsigned v) { return mat_apply(to_tower, v); });
    Bits r = e.gf256_inv(t);
    e.linear(r, 8, [&](unsigned v) { return aes_affine(mat_apply(from_tower, v)); }, out, 0x63);
}

}  // namespace

Netlist build_aes_sbox() {
    NetlistBuilder b("aes_sbox");
    Bits in = bus("x", 8), out = bus("s", 8);
    for (const auto& n : in) b.add_input(n);
    emit_sbox(b, in, out, "sb_");
    for (const auto& n : out) b.add_output(n);
    return b.build();
}

Netlist build_victim_round(int key_byte_width) {
    if (key_byte_width != 8) throw ConfigError("victim_round supports an 8-bit key byte only");
    NetlistBuilder b("victim_round");
    Bits p = bus("p", 8), k = bus("k", 8), pr = bus("pr", 8), a = bus("a", 8), sb = bus("sb", 8),
         od = bus("od", 8), q = bus("q", 8);
    for (const auto& n : p) b.add_input(n);
    for (const auto& n : k) b.add_input(n);
    b.add_input("clr");
    for (int i = 0; i < 8; ++i) {
        const auto idx = std::to_string(i);
        b.add_dff("rin" + idx, pr[i], p[i], ResetValue::zero);
        b.add_gate("kx" + idx, GateOp::XOR, a[i], {pr[i], k[i]});
    }
    emit_sbox(b, a, sb, "sb_");
    b.add_gate("nclr", GateOp::NOT, "clr_n", {"clr"});
    for (int i = 0; i < 8; ++i) {
        const auto idx = std::to_string(i);
        b.add_gate("clr" + idx, GateOp::AND, od[i], {"clr_n", sb[i]});
        b.add_dff("rout" + idx, q[i], od[i], ResetValue::zero);
    }
    for (const auto& n : q) b.add_output(n);
    return b.build();
}

Netlist builtin_netlist(const std::string& name) {
    if (name == "aes_sbox") return build_aes_sbox();
    if (name == "victim_round") return build_victim_round();
    throw ConfigError("unknown builtin netlist '" + name + "'");
}

}  // namespace sclab
