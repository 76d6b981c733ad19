#pragma once

#include "levelgraph/numtheory.hpp"

#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lg {

// Element of F_{p^D}: coefficients c0..c(D-1) in the polynomial basis.
struct Fe {
    std::vector<std::uint32_t> c;
    bool operator==(const Fe&) const = default;
};

class FieldCtx;
using Field = std::shared_ptr<const FieldCtx>;

// Fields are cached per (p, D); the modulus is the first irreducible monic
// polynomial when coefficient vectors are read as base-p numbers sum c_i p^i.
Field make_field(std::uint32_t p, int D);

// Dense polynomials over F_p, low degree first, no trailing zeros.
using Poly = std::vector<std::uint32_t>;
bool poly_is_irreducible(const Poly& f, std::uint32_t p);

class FieldCtx {
public:
    FieldCtx(std::uint32_t p, int D, Poly modulus);

    std::uint32_t p() const { return p_; }
    int degree() const { return D_; }
    const Poly& modulus() const { return mod_; }
    const BigInt& order() const { return q_; }  // p^D

    Fe zero() const;
    Fe one() const;
    Fe gen() const;  // the class of x
    Fe from_int(std::int64_t v) const;
    Fe constant(std::uint32_t v) const { return from_int(v); }

    bool is_zero(const Fe& a) const;
    bool is_one(const Fe& a) const;
    Fe add(const Fe& a, const Fe& b) const;
    Fe sub(const Fe& a, const Fe& b) const;
    Fe neg(const Fe& a) const;
    Fe mul(const Fe& a, const Fe& b) const;
    Fe sqr(const Fe& a) const { return mul(a, a); }
    Fe scale(const Fe& a, std::uint32_t k) const;
    Fe inv(const Fe& a) const;  // throws on zero
    Fe div(const Fe& a, const Fe& b) const { return mul(a, inv(b)); }
    Fe pow(const Fe& a, const BigInt& e) const;
    Fe pow(const Fe& a, std::uint64_t e) const;
    Fe frobenius(const Fe& a) const;  // a^p
    Fe frobenius(const Fe& a, int k) const;  // a^(p^k)

    std::optional<Fe> sqrt(const Fe& a) const;
    std::optional<Fe> cbrt(const Fe& a) const;
    // r-th root for a prime r; nullopt when a is not an r-th power.
    std::optional<Fe> root(const Fe& a, unsigned r) const;
    bool is_square(const Fe& a) const;

    // Elements with a^(p^k) = a, i.e. lying in the subfield of degree k.
    bool in_subfield(const Fe& a, int k) const { return frobenius(a, k) == a; }

    Fe random(std::mt19937_64& rng) const;
    // Integer encoding sum c_i p^i; only for small fields.
    std::uint64_t index(const Fe& a) const;
    Fe from_index(std::uint64_t idx) const;

    std::string serialize(const Fe& a) const;
    Fe parse(const std::string& s) const;

private:
    struct RootData {
        int s = 0;      // q-1 = r^s * t
        BigInt t;
        Fe gen;         // generator of the r-Sylow subgroup of F*
        bool ready = false;
    };
    const RootData& root_data(unsigned r) const;
    void reduce(std::vector<std::uint64_t>& buf, Fe& out) const;

    std::uint32_t p_;
    int D_;
    Poly mod_;
    std::vector<std::pair<int, std::uint32_t>> tail_;  // (i, p - f_i) for nonzero f_i, i < D
    BigInt q_;
    mutable std::once_flag once2_, once3_;
    mutable RootData rd2_, rd3_;
};

// Embedding of the degree-d base field into a field whose degree is a multiple of d.
class SubfieldEmbedding {
public:
    SubfieldEmbedding(Field base, Field big);
    const Field& base() const { return base_; }
    const Field& big() const { return big_; }
    Fe embed(const Fe& a) const;
    // Inverse on the image; nullopt when z is outside the subfield.
    std::optional<Fe> restrict(const Fe& z) const;

private:
    Field base_, big_;
    std::vector<Fe> powers_;  // images of 1, g, g^2, ... of the base generator
};

}  // namespace lg
