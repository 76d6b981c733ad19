#include "levelgraph/isogeny.hpp"

#include <algorithm>

namespace lg {

EllBasis ell_torsion_basis(const Curve& E, std::int64_t l, std::mt19937_64& rng) {
    TorsionInfo T = torsion_generators(E, group_order(E), l, rng);
    if (!T.full) throw ValidationError("E[" + std::to_string(l) + "] is not rational over the working field");
    return EllBasis{T.P1, T.P2};
}

std::vector<Point> subgroup_points(const Curve& E, const Point& G, std::int64_t l) {
    std::vector<Point> pts;
    Point cur = G;
    for (std::int64_t k = 1; k < l; ++k) {
        pts.push_back(cur);
        cur = add(E, cur, G);
    }
    return pts;
}

Point canonical_generator(const Curve& E, const Point& G, std::int64_t l) {
    Point best;
    std::string bs;
    for (const Point& P : subgroup_points(E, G, l)) {
        std::string s = serialize(E, P);
        if (bs.empty() || s < bs) {
            bs = s;
            best = P;
        }
    }
    return best;
}

std::vector<Point> enumerate_kernels(const Curve& E, std::int64_t l, const EllBasis& basis) {
    if (!mul(E, l, basis.L1).inf || !mul(E, l, basis.L2).inf || basis.L1.inf)
        throw ValidationError("enumerate_kernels: basis is not l-torsion");
    std::vector<Point> gens = {canonical_generator(E, basis.L1, l)};
    Point cur = basis.L2;
    for (std::int64_t k = 0; k < l; ++k) {
        if (cur.inf) throw ValidationError("enumerate_kernels: basis points are dependent");
        gens.push_back(canonical_generator(E, cur, l));
        cur = add(E, cur, basis.L1);
    }
    std::sort(gens.begin(), gens.end(),
              [&](const Point& a, const Point& b) { return serialize(E, a) < serialize(E, b); });
    for (std::size_t i = 1; i < gens.size(); ++i)
        if (gens[i] == gens[i - 1]) throw ValidationError("enumerate_kernels: basis points are dependent");
    return gens;
}

std::vector<Point> enumerate_kernels(const Curve& E, std::int64_t l, std::mt19937_64& rng) {
    return enumerate_kernels(E, l, ell_torsion_basis(E, l, rng));
}

IsogenyStep velu_isogeny(const Curve& E, const Point& G, std::int64_t l) {
    if (G.inf || !mul(E, l, G).inf || !is_prime(l)) throw ValidationError("velu_isogeny: kernel generator must have prime order l");
    const FieldCtx& F = *E.F;
    IsogenyStep st;
    st.domain = E;
    st.kernel_gen = G;
    st.l = l;
    std::vector<Point> S;
    if (l == 2) {
        S.push_back(G);
    } else {
        Point cur = G;
        for (std::int64_t k = 1; k <= (l - 1) / 2; ++k) {
            S.push_back(cur);
            cur = add(E, cur, G);
        }
    }
    Fe v = F.zero(), w = F.zero();
    for (const Point& Q : S) {
        VeluTerm t;
        t.xQ = Q.x;
        t.yQ = Q.y;
        t.gx = F.add(F.scale(F.sqr(Q.x), 3), E.a);
        t.gy = F.scale(F.neg(Q.y), 2);
        t.v = F.is_zero(Q.y) ? t.gx : F.scale(t.gx, 2);
        t.u = F.sqr(t.gy);
        v = F.add(v, t.v);
        w = F.add(w, F.add(t.u, F.mul(Q.x, t.v)));
        st.terms.push_back(std::move(t));
    }
    st.codomain = Curve(E.F, F.sub(E.a, F.scale(v, 5)), F.sub(E.b, F.scale(w, 7)));
    st.codomain.base_degree = E.base_degree;
    return st;
}

Point evaluate(const IsogenyStep& st, const Point& P) {
    if (P.inf) return P;
    const FieldCtx& F = *st.domain.F;
    for (const auto& t : st.terms)
        if (t.xQ == P.x) return infinity();
    Fe X = P.x, Y = P.y;
    Fe two_y = F.scale(P.y, 2);
    for (const auto& t : st.terms) {
        Fe d1 = F.inv(F.sub(P.x, t.xQ));
        Fe d2 = F.sqr(d1), d3 = F.mul(d2, d1);
        X = F.add(X, F.add(F.mul(t.v, d1), F.mul(t.u, d2)));
        Fe s = F.mul(F.mul(t.u, two_y), d3);
        s = F.add(s, F.mul(F.mul(t.v, F.sub(P.y, t.yQ)), d2));
        s = F.sub(s, F.mul(F.mul(t.gx, t.gy), d2));
        Y = F.sub(Y, s);
    }
    return Point{false, std::move(X), std::move(Y)};
}

bool verify_dual(const IsogenyStep& st, const EllBasis& basis, std::mt19937_64& rng) {
    const Curve& E = st.domain;
    Point R = evaluate(st, basis.L1);
    if (R.inf) R = evaluate(st, basis.L2);
    if (R.inf || !on_curve(st.codomain, R)) return false;
    if (!mul(st.codomain, st.l, R).inf) return false;
    IsogenyStep dual = velu_isogeny(st.codomain, R, st.l);
    auto iota = isomorphism_scalar(dual.codomain, E);
    if (!iota) return false;
    AutGroup A = aut_group(E);
    std::vector<Point> tests = {basis.L1, basis.L2};
    for (int i = 0; i < 6; ++i) tests.push_back(random_point(E, rng));
    std::vector<Point> lhs, rhs;
    for (const Point& T : tests) {
        Point img = evaluate(st, T);
        if (!on_curve(st.codomain, img)) return false;
        Point back = evaluate(dual, img);
        if (!on_curve(dual.codomain, back)) return false;
        lhs.push_back(apply_scaling(dual.codomain, *iota, back));
        rhs.push_back(mul(E, st.l, T));
    }
    for (const Fe& a : A.scalings) {
        bool ok = true;
        for (std::size_t i = 0; i < lhs.size() && ok; ++i) ok = apply_scaling(E, a, lhs[i]) == rhs[i];
        if (ok) return true;
    }
    return false;
}

bool verify_dual(const IsogenyStep& st, std::mt19937_64& rng) {
    return verify_dual(st, ell_torsion_basis(st.domain, st.l, rng), rng);
}

std::optional<std::int64_t> frobenius_eigenvalue(const Curve& E, const Point& G, std::int64_t l, int base_degree) {
    if (G.inf) return std::nullopt;
    const FieldCtx& F = *E.F;
    Point piG{false, F.frobenius(G.x, base_degree), F.frobenius(G.y, base_degree)};
    Point cur = infinity();
    for (std::int64_t lam = 0; lam < l; ++lam) {
        if (cur == piG) return lam;
        cur = add(E, cur, G);
    }
    return std::nullopt;
}

}  // namespace lg
