#pragma once

#include "levelgraph/qfield.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace lg {

// y^2 = x^3 + a x + b over F. When `trace` is set the curve is defined over the
// subfield of degree `base_degree` and `trace` is its Frobenius trace there.
struct Curve {
    Field F;
    Fe a, b;
    std::optional<std::int64_t> trace;
    int base_degree = 0;

    Curve() = default;
    Curve(Field f, Fe a_, Fe b_) : F(std::move(f)), a(std::move(a_)), b(std::move(b_)), base_degree(F->degree()) {}
};

struct Point {
    bool inf = true;
    Fe x, y;
    bool operator==(const Point&) const = default;
};

inline Point infinity() { return Point{}; }

bool is_singular(const Curve& E);
bool on_curve(const Curve& E, const Point& P);
Point neg(const Curve& E, const Point& P);
Point add(const Curve& E, const Point& P, const Point& Q);
Point dbl(const Curve& E, const Point& P);
Point sub(const Curve& E, const Point& P, const Point& Q);
Point mul(const Curve& E, const BigInt& n, const Point& P);
Point mul(const Curve& E, std::int64_t n, const Point& P);

Fe j_invariant(const Curve& E);
Curve curve_from_j(const Field& F, const Fe& j);
// curve_from_j over the base field, coefficients embedded into a larger field
Curve curve_from_j(const SubfieldEmbedding& emb, const Fe& j_base);

std::string serialize(const Curve& E, const Point& P);
Point parse_point(const Curve& E, const std::string& s);

// Random affine point, uniform over x with a square right-hand side.
Point random_point(const Curve& E, std::mt19937_64& rng);

// Brute-force trace over the curve's own field, which must have at most 10^6 elements.
std::int64_t trace_of_frobenius(const Curve& E);
// Independent method: exponents of random points on E and its quadratic twist.
std::int64_t trace_by_point_orders(const Curve& E, std::mt19937_64& rng);
// q^e + 1 - s_e with s_0 = 2, s_1 = t, s_e = t s_(e-1) - q s_(e-2); e >= 1.
BigInt count_points_ext(std::int64_t t, const BigInt& q, int e);
// #E(F) for a curve carrying base trace data.
BigInt group_order(const Curve& E);

// Smallest k >= 0 with l^k P = infinity, or -1 if not reached within max_k steps.
int ell_exponent(const Curve& E, const Point& P, std::int64_t l, int max_k);
// Exact order of P given a multiple of it.
std::int64_t point_order(const Curve& E, const Point& P, std::int64_t multiple);

// Structure of the l-Sylow subgroup: Z/l^a x Z/l^b with generators P1, P2.
struct SylowInfo {
    std::int64_t l = 0;
    int a = 0, b = 0;
    Point P1, P2;
};
SylowInfo sylow_structure(const Curve& E, const BigInt& order, std::int64_t l, std::mt19937_64& rng,
                          int budget = 400);

// E(F)[n] = Z/A x Z/B (B | A) generated by P1 (order A), P2 (order B).
struct TorsionInfo {
    std::int64_t n = 1;
    std::int64_t A = 1, B = 1;
    Point P1, P2;
    bool full = false;  // E[n] entirely rational
};
TorsionInfo torsion_generators(const Curve& E, const BigInt& order, std::int64_t n, std::mt19937_64& rng,
                               int budget = 400);

// Discrete log of Q in <G> (G of order n <= 10^4 by brute force), nullopt when Q is outside.
std::optional<std::int64_t> small_dlog(const Curve& E, const Point& G, std::int64_t n, const Point& Q);
// Coordinates of Q in the basis (G1, G2) of E[n]; nullopt when Q is outside.
std::optional<std::pair<std::int64_t, std::int64_t>> dlog2(const Curve& E, const Point& G1, const Point& G2,
                                                           std::int64_t n, const Point& Q);

// Isomorphisms (x, y) -> (u^2 x, u^3 y).
Point apply_scaling(const Curve& E, const Fe& u, const Point& P);
Curve scale_curve(const Curve& E, const Fe& u);

struct AutGroup {
    std::vector<Fe> scalings;  // u with u^4 a = a and u^6 b = b
    int expected = 2;          // 2, 4 or 6
    bool complete = false;
};
AutGroup aut_group(const Curve& E);

// u with scale_curve(from, u) == to; nullopt when j differs or u is not in the field.
std::optional<Fe> isomorphism_scalar(const Curve& from, const Curve& to);

// Canonical (E, P) class: j-invariant and the least point serial over the Aut-orbit
// on the standard model of that j.
struct Vertex {
    std::string j;
    std::string point;
    auto operator<=>(const Vertex&) const = default;
};
Vertex canonical_pair(const Curve& E, const Point& P);
bool are_equivalent(const Curve& E1, const Point& P1, const Curve& E2, const Point& P2);

}  // namespace lg
