#include "doctest.h"
#include "levelgraph/isogeny.hpp"

#include <set>

using namespace lg;

namespace {

// E_j over the smallest extension of F_p (up to max_e) where E[l] is rational.
struct Setup {
    Curve E;
    EllBasis basis;
    int e = 0;
};

std::optional<Setup> with_full_torsion(std::uint32_t p, std::uint32_t j, std::int64_t l, std::mt19937_64& rng,
                                       int max_e = 24) {
    Field B = make_field(p, 1);
    Curve Eb = curve_from_j(B, B->from_int(j));
    std::int64_t t = trace_of_frobenius(Eb);
    for (int e = 1; e <= max_e; ++e) {
        BigInt n = count_points_ext(t, p, e);
        if (n % (l * l) != 0 || (ipow(p, static_cast<unsigned>(e)) - 1) % l != 0) continue;
        Field G = make_field(p, e);
        SubfieldEmbedding emb(B, G);
        Curve E = curve_from_j(emb, B->from_int(j));
        E.trace = t;
        TorsionInfo T = torsion_generators(E, n, l, rng);
        if (!T.full) continue;
        return Setup{E, EllBasis{T.P1, T.P2}, e};
    }
    return std::nullopt;
}

}  // namespace

TEST_SUITE("isogeny") {

TEST_CASE("2-kernels of y^2 = x^3 + x over F5") {
    std::mt19937_64 rng(1);
    Field F = make_field(5, 1);
    Curve E = curve_from_j(F, F->from_int(1728));
    E.trace = 2;
    auto ks = enumerate_kernels(E, 2, rng);
    REQUIRE(ks.size() == 3);
    CHECK(serialize(E, ks[0]) == "5^1:0;5^1:0");
    CHECK(serialize(E, ks[1]) == "5^1:2;5^1:0");
    CHECK(serialize(E, ks[2]) == "5^1:3;5^1:0");
}

TEST_CASE("hand Velu over F5") {
    Field F = make_field(5, 1);
    Curve E = curve_from_j(F, F->from_int(1728));
    // a' = a - 5 v, b' = b - 7 w with v = 3 x0^2 + a and w = x0 v for a 2-torsion kernel (x0, 0)
    for (int x0 : {0, 2, 3}) {
        int v = (3 * x0 * x0 + 1) % 5;
        int w = x0 * v % 5;
        int a2 = ((1 - 5 * v) % 5 + 5) % 5, b2 = ((0 - 7 * w) % 5 + 5) % 5;
        IsogenyStep st = velu_isogeny(E, Point{false, F->from_int(x0), F->zero()}, 2);
        CHECK(st.codomain.a == F->from_int(a2));
        CHECK(st.codomain.b == F->from_int(b2));
    }
    IsogenyStep loop = velu_isogeny(E, Point{false, F->zero(), F->zero()}, 2);
    CHECK(loop.codomain.a == F->one());
    CHECK(F->is_zero(loop.codomain.b));
    IsogenyStep down = velu_isogeny(E, Point{false, F->from_int(2), F->zero()}, 2);
    CHECK(down.codomain.a == F->from_int(1));
    CHECK(down.codomain.b == F->from_int(3));
    CHECK(j_invariant(down.codomain) == F->one());
    CHECK_THROWS_AS(velu_isogeny(E, Point{false, F->from_int(2), F->zero()}, 3), ValidationError);
}

TEST_CASE("there are l+1 kernels with trivial pairwise intersection") {
    std::mt19937_64 rng(2);
    for (auto [p, j, l] : std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>>{
             {5, 3, 2}, {5, 1, 2}, {5, 1, 3}, {7, 2, 3}, {7, 3, 2}, {11, 4, 3}, {5, 2, 5 + 2}}) {
        if (l == static_cast<std::int64_t>(p)) continue;
        auto S = with_full_torsion(p, j, l, rng);
        if (!S) continue;
        auto ks = enumerate_kernels(S->E, l, S->basis);
        CHECK(ks.size() == static_cast<std::size_t>(l + 1));
        std::set<std::string> seen;
        std::size_t total = 0;
        for (const Point& G : ks) {
            auto pts = subgroup_points(S->E, G, l);
            CHECK(pts.size() == static_cast<std::size_t>(l - 1));
            for (auto& P : pts) seen.insert(serialize(S->E, P));
            total += pts.size();
        }
        CHECK(seen.size() == total);
        CHECK(total == static_cast<std::size_t>(l * l - 1));
    }
}

TEST_CASE("Velu maps are homomorphisms with l-torsion kernels") {
    std::mt19937_64 rng(3);
    for (auto [p, j, l] : std::vector<std::tuple<std::uint32_t, std::uint32_t, std::int64_t>>{
             {5, 1, 2}, {5, 1, 3}, {7, 2, 3}, {13, 5, 2}, {11, 4, 3}}) {
        auto S = with_full_torsion(p, j, l, rng);
        REQUIRE(S);
        const Curve& E = S->E;
        for (const Point& G : enumerate_kernels(E, l, S->basis)) {
            IsogenyStep st = velu_isogeny(E, G, l);
            CHECK_FALSE(is_singular(st.codomain));
            CHECK(evaluate(st, G).inf);
            // codomain j does not depend on the generator
            if (l > 2) CHECK(j_invariant(velu_isogeny(E, mul(E, 2, G), l).codomain) == j_invariant(st.codomain));
            for (int i = 0; i < 4; ++i) {
                Point P = random_point(E, rng), Q = random_point(E, rng);
                Point a = evaluate(st, add(E, P, Q));
                Point b = add(st.codomain, evaluate(st, P), evaluate(st, Q));
                CHECK(on_curve(st.codomain, evaluate(st, P)));
                CHECK(a == b);
            }
            CHECK(verify_dual(st, S->basis, rng));
        }
    }
}

TEST_CASE("orders prime to l are preserved") {
    std::mt19937_64 rng(4);
    auto S = with_full_torsion(7, 2, 3, rng);
    REQUIRE(S);
    const Curve& E = S->E;
    BigInt n = group_order(E);
    for (std::int64_t r : {2, 5, 7, 13}) {
        if (r == 3 || n % r != 0) continue;
        TorsionInfo T = torsion_generators(E, n, r, rng);
        for (const Point& G : enumerate_kernels(E, 3, S->basis)) {
            IsogenyStep st = velu_isogeny(E, G, 3);
            Point img = evaluate(st, T.P1);
            CHECK_FALSE(img.inf);
            CHECK(mul(st.codomain, T.A, img).inf);
        }
    }
}

TEST_CASE("dual of the loop at j = 1728 over F25") {
    std::mt19937_64 rng(5);
    Field B = make_field(5, 1), G = make_field(5, 2);
    SubfieldEmbedding emb(B, G);
    Curve E = curve_from_j(emb, B->from_int(1728));
    E.trace = 2;
    TorsionInfo T = torsion_generators(E, group_order(E), 4, rng);
    REQUIRE(T.full);
    EllBasis basis{mul(E, 2, T.P1), mul(E, 2, T.P2)};
    IsogenyStep loop = velu_isogeny(E, Point{false, G->zero(), G->zero()}, 2);
    CHECK(verify_dual(loop, basis, rng));
    IsogenyStep bad = loop;
    bad.terms[0].v = G->add(bad.terms[0].v, G->one());
    CHECK_FALSE(verify_dual(bad, basis, rng));
}

TEST_CASE("Frobenius eigenvalues on kernels") {
    std::mt19937_64 rng(6);
    std::set<std::int64_t> roots;
    for (std::int64_t x = 0; x < 13; ++x)
        if ((x * x - 2 * x + 5) % 13 == 0) roots.insert(x);
    CHECK(roots == std::set<std::int64_t>{4, 11});
    auto S = with_full_torsion(5, 1728 % 5, 13, rng, 12);
    REQUIRE(S);
    CHECK(S->e == 12);
    std::multiset<std::int64_t> got;
    for (const Point& G : enumerate_kernels(S->E, 13, S->basis))
        if (auto lam = frobenius_eigenvalue(S->E, G, 13, 1)) {
            CHECK(roots.count(*lam) == 1);
            got.insert(*lam);
        }
    CHECK(got == std::multiset<std::int64_t>{4, 11});

    // l = 3 is inert for t = 2, q = 5: no stable kernel
    int disc = ((4 - 20) % 3 + 3) % 3;
    CHECK(disc == 2);
    auto S3 = with_full_torsion(5, 1728 % 5, 3, rng);
    REQUIRE(S3);
    for (const Point& G : enumerate_kernels(S3->E, 3, S3->basis)) CHECK_FALSE(frobenius_eigenvalue(S3->E, G, 3, 1));

    Field F = make_field(5, 1);
    Curve E = curve_from_j(F, F->from_int(1728));
    CHECK(frobenius_eigenvalue(E, Point{false, F->zero(), F->zero()}, 2, 1) == 1);
}

}  // TEST_SUITE
