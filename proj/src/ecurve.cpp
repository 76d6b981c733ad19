#include "levelgraph/ecurve.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>

namespace lg {

bool is_singular(const Curve& E) {
    const FieldCtx& F = *E.F;
    Fe d = F.add(F.scale(F.mul(F.sqr(E.a), E.a), 4), F.scale(F.sqr(E.b), 27));
    return F.is_zero(d);
}

bool on_curve(const Curve& E, const Point& P) {
    if (P.inf) return true;
    const FieldCtx& F = *E.F;
    Fe rhs = F.add(F.mul(F.add(F.sqr(P.x), E.a), P.x), E.b);
    return F.sqr(P.y) == rhs;
}

Point neg(const Curve& E, const Point& P) {
    if (P.inf) return P;
    return Point{false, P.x, E.F->neg(P.y)};
}

Point dbl(const Curve& E, const Point& P) {
    const FieldCtx& F = *E.F;
    if (P.inf || F.is_zero(P.y)) return infinity();
    Fe num = F.add(F.scale(F.sqr(P.x), 3), E.a);
    Fe lam = F.div(num, F.scale(P.y, 2));
    Fe x3 = F.sub(F.sqr(lam), F.scale(P.x, 2));
    Fe y3 = F.sub(F.mul(lam, F.sub(P.x, x3)), P.y);
    return Point{false, std::move(x3), std::move(y3)};
}

Point add(const Curve& E, const Point& P, const Point& Q) {
    if (P.inf) return Q;
    if (Q.inf) return P;
    const FieldCtx& F = *E.F;
    if (P.x == Q.x) {
        if (P.y == Q.y) return dbl(E, P);
        return infinity();
    }
    Fe lam = F.div(F.sub(Q.y, P.y), F.sub(Q.x, P.x));
    Fe x3 = F.sub(F.sub(F.sqr(lam), P.x), Q.x);
    Fe y3 = F.sub(F.mul(lam, F.sub(P.x, x3)), P.y);
    return Point{false, std::move(x3), std::move(y3)};
}

Point sub(const Curve& E, const Point& P, const Point& Q) { return add(E, P, neg(E, Q)); }

Point mul(const Curve& E, const BigInt& n, const Point& P) {
    if (n < 0) return mul(E, BigInt(-n), neg(E, P));
    if (n == 0 || P.inf) return infinity();
    Point R = P;
    for (int i = static_cast<int>(boost::multiprecision::msb(n)) - 1; i >= 0; --i) {
        R = dbl(E, R);
        if (boost::multiprecision::bit_test(n, static_cast<unsigned>(i))) R = add(E, R, P);
    }
    return R;
}

Point mul(const Curve& E, std::int64_t n, const Point& P) { return mul(E, BigInt(n), P); }

Fe j_invariant(const Curve& E) {
    const FieldCtx& F = *E.F;
    Fe a3 = F.scale(F.mul(F.sqr(E.a), E.a), 4);
    Fe den = F.add(a3, F.scale(F.sqr(E.b), 27));
    return F.div(F.scale(a3, 1728 % F.p()), den);
}

Curve curve_from_j(const Field& Fp, const Fe& j) {
    const FieldCtx& F = *Fp;
    if (F.is_zero(j)) return Curve(Fp, F.zero(), F.one());
    Fe k = F.from_int(1728);
    if (j == k) return Curve(Fp, F.one(), F.zero());
    Fe d = F.sub(k, j);
    Fe a = F.scale(F.mul(j, d), 3);
    Fe b = F.scale(F.mul(j, F.sqr(d)), 2);
    return Curve(Fp, a, b);
}

Curve curve_from_j(const SubfieldEmbedding& emb, const Fe& j_base) {
    Curve base = curve_from_j(emb.base(), j_base);
    Curve E(emb.big(), emb.embed(base.a), emb.embed(base.b));
    E.base_degree = emb.base()->degree();
    return E;
}

std::string serialize(const Curve& E, const Point& P) {
    if (P.inf) return "inf";
    return E.F->serialize(P.x) + ";" + E.F->serialize(P.y);
}

Point parse_point(const Curve& E, const std::string& s) {
    if (s == "inf") return infinity();
    auto pos = s.find(';');
    if (pos == std::string::npos) throw ValidationError("malformed point '" + s + "'");
    Point P{false, E.F->parse(s.substr(0, pos)), E.F->parse(s.substr(pos + 1))};
    if (!on_curve(E, P)) throw ValidationError("point '" + s + "' is not on the curve");
    return P;
}

Point random_point(const Curve& E, std::mt19937_64& rng) {
    const FieldCtx& F = *E.F;
    for (int tries = 0; tries < 10000; ++tries) {
        Fe x = F.random(rng);
        Fe rhs = F.add(F.mul(F.add(F.sqr(x), E.a), x), E.b);
        auto y = F.sqrt(rhs);
        if (!y) continue;
        if (rng() & 1) *y = F.neg(*y);
        return Point{false, std::move(x), std::move(*y)};
    }
    throw BudgetError("random_point: no point found");
}

namespace {

std::mutex g_sq_lock;
std::map<const FieldCtx*, std::shared_ptr<std::vector<char>>> g_sq_tables;

std::shared_ptr<std::vector<char>> square_table(const Field& Fp) {
    {
        std::lock_guard<std::mutex> g(g_sq_lock);
        auto it = g_sq_tables.find(Fp.get());
        if (it != g_sq_tables.end()) return it->second;
    }
    const FieldCtx& F = *Fp;
    std::uint64_t q = static_cast<std::uint64_t>(F.order());
    auto tab = std::make_shared<std::vector<char>>(q, 0);
    for (std::uint64_t i = 0; i < q; ++i) {
        Fe x = F.from_index(i);
        (*tab)[F.index(F.sqr(x))] = 1;
    }
    std::lock_guard<std::mutex> g(g_sq_lock);
    g_sq_tables[Fp.get()] = tab;
    return tab;
}

}  // namespace

std::int64_t trace_of_frobenius(const Curve& E) {
    const FieldCtx& F = *E.F;
    if (F.order() > 1000000) throw BudgetError("trace_of_frobenius: field larger than 10^6 elements");
    std::uint64_t q = static_cast<std::uint64_t>(F.order());
    auto tab = square_table(E.F);
    std::int64_t count = 1;
    for (std::uint64_t i = 0; i < q; ++i) {
        Fe x = F.from_index(i);
        Fe rhs = F.add(F.mul(F.add(F.sqr(x), E.a), x), E.b);
        std::uint64_t k = F.index(rhs);
        if (k == 0)
            count += 1;
        else if ((*tab)[k])
            count += 2;
    }
    return static_cast<std::int64_t>(q) + 1 - count;
}

std::int64_t point_order(const Curve& E, const Point& P, std::int64_t multiple) {
    std::int64_t ord = multiple;
    for (auto [l, e] : factorize(multiple)) {
        for (int i = 0; i < e; ++i) {
            if (mul(E, ord / l, P).inf)
                ord /= l;
            else
                break;
        }
    }
    return ord;
}

std::int64_t trace_by_point_orders(const Curve& E, std::mt19937_64& rng) {
    const FieldCtx& F = *E.F;
    if (F.order() > 1000000) throw BudgetError("trace_by_point_orders: field too large");
    std::int64_t q = static_cast<std::int64_t>(F.order());
    std::int64_t w = static_cast<std::int64_t>(std::floor(2.0 * std::sqrt(static_cast<double>(q))));
    std::int64_t lo = q + 1 - w, hi = q + 1 + w;
    // quadratic twist by a non-square d
    Fe d;
    for (std::uint64_t i = 2;; ++i) {
        d = F.from_index(i);
        if (!F.is_square(d)) break;
    }
    Curve T(E.F, F.mul(E.a, F.sqr(d)), F.mul(E.b, F.mul(F.sqr(d), d)));
    auto exponent_of = [&](const Curve& C, int samples) {
        std::int64_t ex = 1;
        for (int s = 0; s < samples; ++s) {
            Point P = random_point(C, rng);
            Point R = mul(C, lo, P);
            std::int64_t n = lo;
            while (!R.inf) {
                R = add(C, R, P);
                ++n;
            }
            ex = lcm64(ex, point_order(C, P, n));
        }
        return ex;
    };
    std::int64_t exE = 1, exT = 1;
    for (int round = 0; round < 20; ++round) {
        exE = lcm64(exE, exponent_of(E, 8));
        exT = lcm64(exT, exponent_of(T, 8));
        std::vector<std::int64_t> cands;
        for (std::int64_t n = lo; n <= hi; ++n) {
            std::int64_t nt = 2 * q + 2 - n;
            if (n % exE || nt % exT) continue;
            std::int64_t bE = n / exE, bT = nt / exT;
            if (exE % bE || (q - 1) % bE || exT % bT || (q - 1) % bT) continue;
            cands.push_back(n);
        }
        if (cands.size() == 1) return q + 1 - cands[0];
    }
    throw BudgetError("trace_by_point_orders: ambiguous group order");
}

BigInt count_points_ext(std::int64_t t, const BigInt& q, int e) {
    if (e < 1) throw ValidationError("count_points_ext: extension degree must be at least 1");
    BigInt s0 = 2, s1 = t;
    for (int i = 1; i < e; ++i) {
        BigInt s2 = BigInt(t) * s1 - q * s0;
        s0 = s1;
        s1 = s2;
    }
    BigInt qe = 1;
    for (int i = 0; i < e; ++i) qe *= q;
    return qe + 1 - s1;
}

BigInt group_order(const Curve& E) {
    if (!E.trace) throw ValidationError("group_order: curve has no trace data");
    int D = E.F->degree();
    if (D % E.base_degree) throw ValidationError("group_order: base degree does not divide field degree");
    return count_points_ext(*E.trace, ipow(E.F->p(), static_cast<unsigned>(E.base_degree)), D / E.base_degree);
}

int ell_exponent(const Curve& E, const Point& P, std::int64_t l, int max_k) {
    Point R = P;
    for (int k = 0; k <= max_k; ++k) {
        if (R.inf) return k;
        R = mul(E, l, R);
    }
    return -1;
}

namespace {

// x with x G = Q for G of order l^a, via base-l digits; nullopt if Q is outside <G>.
std::optional<BigInt> dlog_prime_power(const Curve& E, const Point& G, std::int64_t l, int a, const Point& Q) {
    if (a == 0) return Q.inf ? std::optional<BigInt>(0) : std::nullopt;
    Point gamma = mul(E, ipow(l, static_cast<unsigned>(a - 1)), G);
    BigInt x = 0, lp = 1;
    for (int i = 0; i < a; ++i) {
        Point h = sub(E, Q, mul(E, x, G));
        h = mul(E, ipow(l, static_cast<unsigned>(a - 1 - i)), h);
        Point cur = infinity();
        std::int64_t d = 0;
        for (; d < l; ++d) {
            if (cur == h) break;
            cur = add(E, cur, gamma);
        }
        if (d == l) return std::nullopt;
        x += lp * d;
        lp *= l;
    }
    if (!(mul(E, x, G) == Q)) return std::nullopt;
    return x;
}

}  // namespace

SylowInfo sylow_structure(const Curve& E, const BigInt& order, std::int64_t l, std::mt19937_64& rng, int budget) {
    SylowInfo S;
    S.l = l;
    int v = valuation(order, l);
    if (v == 0) return S;
    BigInt lv = ipow(l, static_cast<unsigned>(v));
    BigInt cof = order / lv;
    auto sample = [&] { return mul(E, cof, random_point(E, rng)); };
    int used = 0;
    // largest cyclic factor
    for (int i = 0; i < 30 && S.a < v; ++i, ++used) {
        Point R = sample();
        int k = ell_exponent(E, R, l, v);
        if (k < 0) throw std::logic_error("sylow_structure: cofactor multiple has order beyond the Sylow bound");
        if (k > S.a) {
            S.a = k;
            S.P1 = R;
        }
    }
    S.b = v - S.a;
    if (S.b == 0) return S;
    while (used++ < budget) {
        Point R = sample();
        int k = ell_exponent(E, R, l, v);
        if (k > S.a) {  // P1 was not of maximal order
            S.a = k;
            S.P1 = R;
            S.b = v - S.a;
            if (S.b == 0) return S;
            continue;
        }
        BigInt lb = ipow(l, static_cast<unsigned>(S.b));
        auto c = dlog_prime_power(E, S.P1, l, S.a, mul(E, lb, R));
        if (!c) continue;
        if (dlog_prime_power(E, S.P1, l, S.a, mul(E, BigInt(lb / l), R))) continue;
        if (*c % lb != 0) throw std::logic_error("sylow_structure: inconsistent reduction");
        Point P2 = sub(E, R, mul(E, BigInt(*c / lb), S.P1));
        if (ell_exponent(E, P2, l, S.b) != S.b) continue;
        S.P2 = P2;
        return S;
    }
    throw BudgetError("sylow_structure: sampling budget exhausted for l = " + std::to_string(l));
}

TorsionInfo torsion_generators(const Curve& E, const BigInt& order, std::int64_t n, std::mt19937_64& rng, int budget) {
    if (n < 1) throw ValidationError("torsion_generators: n must be positive");
    TorsionInfo T;
    T.n = n;
    for (auto [l, e] : factorize(n)) {
        SylowInfo S = sylow_structure(E, order, l, rng, budget);
        int ea = std::min(S.a, e), eb = std::min(S.b, e);
        Point Q1 = mul(E, ipow(l, static_cast<unsigned>(S.a - ea)), S.P1);
        Point Q2 = mul(E, ipow(l, static_cast<unsigned>(S.b - eb)), S.P2);
        T.P1 = add(E, T.P1, Q1);
        T.P2 = add(E, T.P2, Q2);
        T.A *= ipow64(l, static_cast<unsigned>(ea));
        T.B *= ipow64(l, static_cast<unsigned>(eb));
    }
    T.full = (T.B == n);
    return T;
}

std::optional<std::int64_t> small_dlog(const Curve& E, const Point& G, std::int64_t n, const Point& Q) {
    Point cur = infinity();
    for (std::int64_t k = 0; k < n; ++k) {
        if (cur == Q) return k;
        cur = add(E, cur, G);
    }
    return std::nullopt;
}

std::optional<std::pair<std::int64_t, std::int64_t>> dlog2(const Curve& E, const Point& G1, const Point& G2,
                                                           std::int64_t n, const Point& Q) {
    Point row = infinity();
    for (std::int64_t b = 0; b < n; ++b) {
        Point cur = row;
        for (std::int64_t a = 0; a < n; ++a) {
            if (cur == Q) return std::make_pair(a, b);
            cur = add(E, cur, G1);
        }
        row = add(E, row, G2);
    }
    return std::nullopt;
}

Point apply_scaling(const Curve& E, const Fe& u, const Point& P) {
    if (P.inf) return P;
    const FieldCtx& F = *E.F;
    Fe u2 = F.sqr(u);
    return Point{false, F.mul(u2, P.x), F.mul(F.mul(u2, u), P.y)};
}

Curve scale_curve(const Curve& E, const Fe& u) {
    const FieldCtx& F = *E.F;
    Fe u2 = F.sqr(u), u4 = F.sqr(u2);
    Curve C(E.F, F.mul(u4, E.a), F.mul(F.mul(u4, u2), E.b));
    C.trace = std::nullopt;
    C.base_degree = E.base_degree;
    return C;
}

AutGroup aut_group(const Curve& E) {
    const FieldCtx& F = *E.F;
    AutGroup G;
    G.scalings = {F.one(), F.neg(F.one())};
    if (F.is_zero(E.b)) {
        G.expected = 4;
        if (auto i = F.sqrt(F.neg(F.one()))) {
            G.scalings.push_back(*i);
            G.scalings.push_back(F.neg(*i));
        }
    } else if (F.is_zero(E.a)) {
        G.expected = 6;
        if (auto s = F.sqrt(F.from_int(-3))) {
            // primitive sixth root (1 + sqrt(-3)) / 2 and its powers
            Fe z = F.mul(F.add(F.one(), *s), F.inv(F.from_int(2)));
            Fe cur = z;
            for (int k = 1; k < 6; ++k) {
                if (k != 3) G.scalings.push_back(cur);
                cur = F.mul(cur, z);
            }
        }
    }
    G.complete = static_cast<int>(G.scalings.size()) == G.expected;
    return G;
}

std::optional<Fe> isomorphism_scalar(const Curve& from, const Curve& to) {
    const FieldCtx& F = *from.F;
    if (!(j_invariant(from) == j_invariant(to))) return std::nullopt;
    auto check = [&](const Fe& u) {
        Curve C = scale_curve(from, u);
        return C.a == to.a && C.b == to.b;
    };
    std::vector<Fe> cands;
    if (F.is_zero(from.b)) {
        // u^4 = a'/a
        Fe r = F.div(to.a, from.a);
        if (auto w = F.sqrt(r)) {
            for (const Fe& ww : {*w, F.neg(*w)})
                if (auto u = F.sqrt(ww)) cands.push_back(*u);
        }
    } else if (F.is_zero(from.a)) {
        // u^6 = b'/b
        Fe r = F.div(to.b, from.b);
        if (auto w = F.cbrt(r)) {
            std::vector<Fe> ws = {*w};
            if (auto s = F.sqrt(F.from_int(-3))) {
                Fe z3 = F.mul(F.sub(*s, F.one()), F.inv(F.from_int(2)));  // primitive cube root
                ws.push_back(F.mul(*w, z3));
                ws.push_back(F.mul(*w, F.sqr(z3)));
            }
            for (const Fe& ww : ws)
                if (auto u = F.sqrt(ww)) cands.push_back(*u);
        }
    } else {
        // u^2 = (b'/b) / (a'/a)
        Fe r = F.div(F.mul(to.b, from.a), F.mul(from.b, to.a));
        if (auto u = F.sqrt(r)) cands.push_back(*u);
    }
    for (const Fe& u : cands)
        if (check(u)) return u;
    return std::nullopt;
}

Vertex canonical_pair(const Curve& E, const Point& P) {
    const FieldCtx& F = *E.F;
    Fe j = j_invariant(E);
    Curve S = curve_from_j(E.F, j);
    auto u = isomorphism_scalar(E, S);
    if (!u) throw FieldTooSmall("canonical_pair: isomorphism to the standard model needs a larger field");
    AutGroup G = aut_group(S);
    if (!G.complete) throw FieldTooSmall("canonical_pair: automorphism group not rational over the working field");
    Point Q = apply_scaling(E, *u, P);
    std::string best;
    for (const Fe& a : G.scalings) {
        std::string s = serialize(S, apply_scaling(S, a, Q));
        if (best.empty() || s < best) best = s;
    }
    return Vertex{F.serialize(j), best};
}

bool are_equivalent(const Curve& E1, const Point& P1, const Curve& E2, const Point& P2) {
    return canonical_pair(E1, P1) == canonical_pair(E2, P2);
}

}  // namespace lg
