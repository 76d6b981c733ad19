#include "doctest.h"
#include "levelgraph/voltage.hpp"

#include <numeric>

using namespace lg;

namespace {

BuildParams level_params(int m) {
    BuildParams bp;
    bp.p = 5;
    bp.l = 2;
    bp.N = 1;
    bp.m = m;
    return bp;
}

struct Fixture {
    IsogenyGraph level, base;
    explicit Fixture(int m) : level(build_graph(level_params(m))), base(voltage_base(level)) {}

    const CurveData& curve(int base_vertex) const {
        return level.curves[level.curve_index(base.curves[base.vdata[base_vertex].curve].j)];
    }
    const KernelData& kernel(int e) const {
        const std::string& tag = base.curves[base.vdata[base.graph.edges[e].src].curve].kernels[base.edge_kernel[e]].tag;
        for (const KernelData& k : curve(base.graph.edges[e].src).kernels)
            if (k.tag == tag) return k;
        throw std::runtime_error("kernel missing");
    }
    Point basis(const VoltageBases& b, int v) const { return mul(curve(v).E, b.unit[v], curve(v).Gp); }
};

Fixture& fixture_m1() {
    static Fixture f(1);
    return f;
}

}  // namespace

TEST_SUITE("voltage") {

TEST_CASE("bases have exact order p^m and depend only on the seed") {
    Fixture& F = fixture_m1();
    VoltageBases a = choose_bases(F.base, F.level, 7), b = choose_bases(F.base, F.level, 7);
    CHECK(a.unit == b.unit);
    for (int v = 0; v < F.base.graph.size(); ++v) {
        const CurveData& c = F.curve(v);
        Point t = F.basis(a, v);
        CHECK_FALSE(t.inf);
        CHECK(mul(c.E, 5, t).inf);
    }
}

TEST_CASE("the assignment moves each basis onto the next") {
    Fixture& F = fixture_m1();
    VoltageBases b = choose_bases(F.base, F.level, 11);
    VoltageData vd = compute_assignment(F.base, F.level, b);
    REQUIRE(vd.alpha.size() == F.base.graph.edges.size());
    for (std::size_t e = 0; e < vd.alpha.size(); ++e) {
        const GEdge& x = F.base.graph.edges[e];
        const KernelData& k = F.kernel(static_cast<int>(e));
        const CurveData& t = F.curve(x.dst);
        Point image = apply_scaling(k.step.codomain, k.iso, evaluate(k.step, F.basis(b, x.src)));
        CHECK(gcd64(vd.alpha[e], 5) == 1);
        CHECK(serialize(t.E, image) == serialize(t.E, mul(t.E, vd.alpha[e], F.basis(b, x.dst))));
    }
}

TEST_CASE("the loop at j = 1728") {
    Fixture& F = fixture_m1();
    VoltageBases b = choose_bases(F.base, F.level, 0);
    VoltageData vd = compute_assignment(F.base, F.level, b);
    int loops = 0;
    for (std::size_t e = 0; e < vd.alpha.size(); ++e) {
        const GEdge& x = F.base.graph.edges[e];
        if (x.src != x.dst) continue;
        CHECK(vd.base_j[x.src] == "5^1:3");
        const CurveData& c = F.curve(x.src);
        const KernelData& k = F.kernel(static_cast<int>(e));
        Point t = F.basis(b, x.src);
        Point image = apply_scaling(k.step.codomain, k.iso, evaluate(k.step, t));
        std::int64_t found = -1;
        for (std::int64_t a = 1; a < 5; ++a)
            if (serialize(c.E, mul(c.E, a, t)) == serialize(c.E, image)) found = a;
        CHECK(found == vd.alpha[e]);
        MESSAGE("loop voltage " << vd.alpha[e]);
        ++loops;
    }
    CHECK(loops >= 1);
}

TEST_CASE("an edge and its dual multiply to l") {
    for (int m : {1, 2}) {
        Fixture F(m);
        VoltageData vd = compute_assignment(F.base, F.level, choose_bases(F.base, F.level, 5));
        std::int64_t pm = vd.pm;
        for (std::size_t e = 0; e < vd.alpha.size(); ++e) {
            const GEdge& x = F.base.graph.edges[e];
            bool found = false;
            for (std::size_t f = 0; f < vd.alpha.size(); ++f) {
                const GEdge& y = F.base.graph.edges[f];
                if (y.src != x.dst || y.dst != x.src) continue;
                std::int64_t prod = mod(vd.alpha[e] * vd.alpha[f], pm);
                for (std::int64_t u : vd.aut_units[x.src]) found |= prod == mod(u * 2, pm);
            }
            CHECK(found);
        }
    }
}

TEST_CASE("a change of seed is a coboundary") {
    Fixture& F = fixture_m1();
    VoltageBases b1 = choose_bases(F.base, F.level, 1), b2 = choose_bases(F.base, F.level, 2);
    VoltageData v1 = compute_assignment(F.base, F.level, b1), v2 = compute_assignment(F.base, F.level, b2);
    for (std::size_t e = 0; e < v1.alpha.size(); ++e) {
        const GEdge& x = F.base.graph.edges[e];
        std::int64_t ws = b2.unit[x.src] * invmod(b1.unit[x.src], 5);
        std::int64_t wd = b2.unit[x.dst] * invmod(b1.unit[x.dst], 5);
        CHECK(v2.alpha[e] == mod(v1.alpha[e] * ws % 5 * invmod(wd, 5), 5));
    }
    std::vector<int> f1, f2;
    MultiDiGraph d1 = derived_graph(v1, true, &f1), d2 = derived_graph(v2, true, &f2);
    CHECK(fibered_iso(d1, f1, d2, f2).has_value());
}

TEST_CASE("tree mode trivializes tree edges") {
    Fixture& F = fixture_m1();
    VoltageBases b = choose_bases(F.base, F.level, 3, true);
    VoltageData vd = compute_assignment(F.base, F.level, b);
    int n = F.base.graph.size();
    CHECK(static_cast<int>(b.tree_edges.size()) == n - static_cast<int>(components(F.base.graph).size()));
    for (int e : b.tree_edges) CHECK(vd.alpha[e] == 1);
}

TEST_CASE("derived graphs") {
    Fixture& F = fixture_m1();
    VoltageData vd = compute_assignment(F.base, F.level, choose_bases(F.base, F.level, 0));
    std::vector<int> fiber;
    MultiDiGraph D = derived_graph(vd, true, &fiber);
    CHECK(D.size() == F.base.graph.size() * 4);
    CHECK(D.edges.size() == F.base.graph.edges.size() * 4);
    CoverReport cr = verify_covering(D, F.base.graph, fiber);
    CHECK(cr.is_cover);
    CHECK(cr.degree == 4);

    Fixture Z(0);
    VoltageData vz = compute_assignment(Z.base, Z.level, choose_bases(Z.base, Z.level, 0));
    MultiDiGraph T = derived_graph(vz, true);
    CHECK(T.size() == Z.base.graph.size());
    std::vector<int> id(T.size());
    std::iota(id.begin(), id.end(), 0);
    CHECK(fibered_iso(T, id, Z.base.graph, id).has_value());
}

TEST_CASE("the level graph is the quotient voltage graph") {
    for (int m : {1, 2}) {
        Fixture F(m);
        for (bool tree : {false, true}) {
            VoltageData vd = compute_assignment(F.base, F.level, choose_bases(F.base, F.level, 9, tree));
            AppendixReport rep = verify_appendix(vd, F.level);
            CHECK(rep.quotient.isomorphic);
            CHECK(rep.quotient.identification_ok);
            CHECK_FALSE(rep.full.isomorphic);
            CHECK(rep.full.vertices > rep.level_vertices);
            CHECK(rep.matching == "aut-quotient");
        }
    }
}

TEST_CASE("fibered isomorphism search") {
    MultiDiGraph a;
    for (int i = 0; i < 4; ++i) a.add_vertex();
    a.add_edge(0, 1);
    a.add_edge(1, 2);
    a.add_edge(2, 3);
    a.add_edge(3, 0);
    a.add_edge(0, 0);
    MultiDiGraph b;
    for (int i = 0; i < 4; ++i) b.add_vertex();
    b.add_edge(2, 3);
    b.add_edge(3, 0);
    b.add_edge(0, 1);
    b.add_edge(1, 2);
    b.add_edge(2, 2);
    auto f = fibered_iso(a, {0, 0, 1, 1}, b, {1, 1, 0, 0});
    REQUIRE(f.has_value());
    CHECK((*f)[0] == 2);
    CHECK_FALSE(fibered_iso(a, {0, 0, 1, 1}, b, {0, 0, 1, 1}).has_value());
}

}  // TEST_SUITE
