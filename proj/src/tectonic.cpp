#include "levelgraph/tectonic.hpp"

#include "levelgraph/crater.hpp"
#include "levelgraph/parallel.hpp"
#include "levelgraph/volcano.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

namespace lg {

void validate(const TectonicParams& tp) {
    if (tp.omega < 1 || tp.s < 1 || tp.t < 1 || tp.c < 1)
        throw ValidationError("tectonic parameters must be positive");
    if (gcd64(tp.c, tp.omega) != 1) throw ValidationError("c must be coprime to omega");
    if (tp.omega > 1000000 || tp.s > 1000000 || tp.t > 1000000 || tp.omega * tp.s * tp.t > 1000000)
        throw ValidationError("omega*s*t exceeds 10^6");
}

TectonicParams canonical(TectonicParams tp) {
    tp.c %= tp.omega;
    if (tp.c == 0) tp.c = tp.omega;
    return tp;
}

json params_to_json(const TectonicParams& tp) {
    return {{"omega", tp.omega}, {"s", tp.s}, {"t", tp.t}, {"c", tp.c}};
}

TectonicParams params_from_json(const json& j) {
    try {
        return {j.at("omega").get<std::int64_t>(), j.at("s").get<std::int64_t>(), j.at("t").get<std::int64_t>(),
                j.at("c").get<std::int64_t>()};
    } catch (const json::exception& e) {
        throw ValidationError(std::string("bad tectonic parameters: ") + e.what());
    }
}

MultiDiGraph generate(const TectonicParams& tp) {
    validate(tp);
    const std::int64_t s = tp.s, h = tp.t * tp.omega, ct = mod(tp.c * tp.t, h);
    auto index = [&](std::int64_t x, std::int64_t y) {
        std::int64_t q = x >= 0 ? x / s : -((-x + s - 1) / s);
        x -= q * s;
        y = mod(y + mulmod(mod(q, h), ct, h), h);
        return static_cast<int>(x * h + y);
    };
    MultiDiGraph G;
    for (std::int64_t x = 0; x < s; ++x)
        for (std::int64_t y = 0; y < h; ++y) {
            GVertex v;
            v.point = "(" + std::to_string(x) + "," + std::to_string(y) + ")";
            v.level = 0;
            G.add_vertex(std::move(v));
        }
    // lattice index is the determinant s * t * omega
    if (static_cast<std::int64_t>(G.size()) != s * h) throw VerificationError("lattice index mismatch");
    for (std::int64_t x = 0; x < s; ++x)
        for (std::int64_t y = 0; y < h; ++y) {
            int v = index(x, y);
            G.add_edge(v, index(x + 1, y), Color::blue);
            G.add_edge(v, index(x, y + 1), Color::green);
        }
    return G;
}

namespace {

std::int64_t cycle_length(const std::vector<int>& next, int v) {
    std::int64_t n = 1;
    for (int w = next[v]; w != v; w = next[w]) {
        if (n > static_cast<std::int64_t>(next.size())) return -1;
        ++n;
    }
    return n;
}

int walk(const std::vector<int>& next, int v, std::int64_t steps) {
    for (std::int64_t i = 0; i < steps; ++i) v = next[v];
    return v;
}

// Parameters read off the blue and green cycles through a.
std::optional<TectonicParams> extract(const std::vector<int>& blue, const std::vector<int>& green, int a,
                                      std::string& why) {
    std::int64_t h1 = cycle_length(blue, a), h2 = cycle_length(green, a);
    std::unordered_map<int, std::int64_t> gidx;
    int v = a;
    for (std::int64_t k = 0; k < h2; ++k, v = green[v]) gidx[v] = k;
    std::int64_t s = 0, k = 0;
    v = a;
    for (std::int64_t i = 1; i <= h1; ++i) {
        v = blue[v];
        if (auto it = gidx.find(v); it != gidx.end()) {
            s = i;
            k = it->second;
            break;
        }
    }
    if (s == 0) return why = "blue cycle never meets the green cycle", std::nullopt;
    if (h1 % s) return why = "s does not divide the blue cycle", std::nullopt;
    std::int64_t omega = h1 / s;
    if (h2 % omega) return why = "green cycle length is not a multiple of omega", std::nullopt;
    std::int64_t t = h2 / omega;
    if (k % t) return why = "meeting point is off the t-grid", std::nullopt;
    TectonicParams tp{omega, s, t, k / t};
    tp = canonical(tp);
    if (gcd64(tp.c, omega) != 1) return why = "c is not coprime to omega", std::nullopt;
    return tp;
}

bool satisfies(const std::vector<int>& blue, const std::vector<int>& green, const TectonicParams& tp,
               std::string& why) {
    const int n = static_cast<int>(blue.size());
    if (n != tp.omega * tp.s * tp.t) return why = "vertex count differs from omega*s*t", false;
    for (int v = 0; v < n; ++v) {
        if (cycle_length(blue, v) != tp.omega * tp.s) return why = "blue cycle of the wrong length", false;
        if (cycle_length(green, v) != tp.omega * tp.t) return why = "green cycle of the wrong length", false;
        int b = v, g = v;
        for (std::int64_t k = 1; k <= tp.omega; ++k) {
            b = walk(blue, b, tp.s);
            g = walk(green, g, tp.c * tp.t);
            if (b != g) return why = "blue and green walks do not meet on schedule", false;
        }
    }
    return true;
}

}  // namespace

Recognition recognize(const MultiDiGraph& G) {
    Recognition R;
    const int n = G.size();
    if (n == 0) return R.reason = "empty graph", R;
    std::vector<int> blue(n, -1), green(n, -1), in_b(n), in_g(n);
    for (const GEdge& e : G.edges) {
        if (e.color == Color::none) return R.reason = "uncolored edge", R;
        auto& next = e.color == Color::blue ? blue : green;
        if (next[e.src] >= 0) return R.reason = "two out-edges of one color", R;
        next[e.src] = e.dst;
        ++(e.color == Color::blue ? in_b : in_g)[e.dst];
    }
    for (int v = 0; v < n; ++v)
        if (blue[v] < 0 || green[v] < 0 || in_b[v] != 1 || in_g[v] != 1)
            return R.reason = "a vertex lacks exactly one in- and out-edge per color", R;
    if (components(G).size() != 1) return R.reason = "graph is not connected", R;

    std::map<TectonicParams, bool> tried;
    std::string why;
    for (int a = 0; a < n; ++a) {
        auto tp = extract(blue, green, a, why);
        if (!tp) {
            if (R.reason.empty()) R.reason = why;
            continue;
        }
        auto [it, fresh] = tried.emplace(*tp, false);
        if (fresh) {
            it->second = satisfies(blue, green, *tp, why);
            if (!it->second && R.reason.empty()) R.reason = why;
        }
    }
    for (const auto& [tp, good] : tried)
        if (good) {
            R.ok = true;
            R.params = tp;
            R.reason.clear();
            return R;
        }
    if (R.reason.empty()) R.reason = "no anchor yields consistent parameters";
    return R;
}

namespace {

// Square root data for one prime power: root of w's defining congruence.
std::int64_t lifted_root(std::int64_t D, std::int64_t prime, int e, std::optional<std::int64_t> hint) {
    auto roots = quadratic_roots_mod_prime_power(0, -D, prime, e);
    if (roots.size() != 2)
        throw ValidationError(std::to_string(prime) + " is not split for discriminant data " + std::to_string(D));
    std::sort(roots.begin(), roots.end());
    if (!hint) return roots[0] % prime <= roots[1] % prime ? roots[0] : roots[1];
    for (std::int64_t r : roots)
        if (mod(r - *hint, prime) == 0) return r;
    throw ValidationError("root hint " + std::to_string(*hint) + " is not a square root mod " + std::to_string(prime));
}

std::int64_t crt(std::int64_t r1, std::int64_t m1, std::int64_t r2, std::int64_t m2) {
    std::int64_t k = mulmod(mod(r2 - r1, m2), invmod(mod(m1, m2), m2), m2);
    return mod(r1 + static_cast<std::int64_t>(static_cast<__int128>(m1) * k % (static_cast<__int128>(m1) * m2)),
               m1 * m2);
}

std::int64_t order_mod_sign(std::int64_t u, std::int64_t M) {
    if (M <= 2) return 1;
    std::int64_t o = multiplicative_order(u, M);
    if (o % 2 == 0 && powmod(u, o / 2, M) == M - 1) return o / 2;
    return o;
}

}  // namespace

CMProfile cm_order_profile(const CMOracleInput& in) {
    if (!is_fundamental_discriminant(in.dK)) throw ValidationError("dK must be a negative fundamental discriminant");
    if (in.dK == -3 || in.dK == -4) throw ValidationError("dK = -3 and -4 carry extra units; not supported");
    if (!is_prime(in.p) || in.p == 2) throw ValidationError("p must be an odd prime");
    if (in.m < 1) throw ValidationError("m must be at least 1");
    if (kronecker(in.dK, in.p) != 1) throw ValidationError("p does not split in the CM field");
    const bool even = mod(in.dK, 4) == 0;
    const std::int64_t D = even ? in.dK / 4 : in.dK;

    std::int64_t M = ipow64(in.p, in.m);
    std::int64_t R = lifted_root(D, in.p, in.m, in.root_p);
    for (const SplitFactor& f : in.N) {
        if (!is_prime(f.prime) || f.prime == 2 || f.prime == in.p)
            throw ValidationError("level factors must be odd primes different from p");
        if (kronecker(in.dK, f.prime) != 1) throw ValidationError(std::to_string(f.prime) + " does not split");
        std::int64_t pe = ipow64(f.prime, f.exponent);
        if (M > (std::int64_t{1} << 40) / pe) throw ValidationError("modulus too large");
        R = crt(R, M, lifted_root(D, f.prime, f.exponent, f.root), pe);
        M *= pe;
    }
    auto image = [&](std::int64_t r) {
        std::int64_t w = even ? r : mulmod(mod(1 + r, M), invmod(2, M), M);
        return mod(mod(in.a, M) + mulmod(mod(in.b, M), w, M), M);
    };
    CMProfile P;
    P.modulus = M;
    P.u_x = image(R);
    P.u_xbar = image(mod(-R, M));
    if (gcd64(P.u_x, M) != 1 || gcd64(P.u_xbar, M) != 1)
        throw ValidationError("x is not a unit modulo N p^m");
    P.h1 = order_mod_sign(P.u_x, M);
    P.h2 = order_mod_sign(P.u_xbar, M);

    std::unordered_map<std::int64_t, std::int64_t> green;
    std::int64_t g = 1;
    for (std::int64_t j = 0; j < P.h2; ++j, g = mulmod(g, P.u_xbar, M)) {
        green.emplace(g, j);
        green.emplace(mod(-g, M), j);
    }
    std::int64_t b = 1, k = -1;
    for (std::int64_t i = 1; i <= P.h1; ++i) {
        b = mulmod(b, P.u_x, M);
        if (auto it = green.find(b); it != green.end()) {
            P.s = i;
            k = it->second;
            break;
        }
    }
    if (k < 0 || P.h1 % P.s) throw VerificationError("order data inconsistent: s does not divide h1");
    P.omega = P.h1 / P.s;
    if (P.h2 % P.omega) throw VerificationError("order data inconsistent: h1/s does not divide h2");
    P.t = P.h2 / P.omega;
    if (k % P.t) throw VerificationError("order data inconsistent: meeting index off the t-grid");
    P.c = canonical({P.omega, P.s, P.t, k / P.t}).c;
    return P;
}

json cm_profile_to_json(const CMProfile& P) {
    return {{"modulus", P.modulus}, {"u_x", P.u_x}, {"u_xbar", P.u_xbar}, {"h1", P.h1}, {"h2", P.h2},
            {"s", P.s},             {"t", P.t},     {"c", P.c},           {"omega", P.omega}};
}

namespace {

std::optional<std::pair<std::int64_t, std::int64_t>> principal_generator(std::int64_t dK, std::int64_t l) {
    const bool even = mod(dK, 4) == 0;
    const std::int64_t bmax = static_cast<std::int64_t>(std::sqrt(4.0 * l / std::fabs(double(dK)))) + 2;
    const std::int64_t amax = static_cast<std::int64_t>(std::sqrt(double(l))) + bmax + 2;
    for (std::int64_t b = 1; b <= bmax; ++b)
        for (std::int64_t a = -amax; a <= amax; ++a) {
            std::int64_t norm = even ? a * a - (dK / 4) * b * b : a * a + a * b + b * b * (1 - dK) / 4;
            if (norm == l) return std::make_pair(a, b);
        }
    return std::nullopt;
}

void confirm(Witness& w, const TectonicParams& target, const SearchBounds& bounds) {
    MultiDiGraph want = generate(target);
    bool budget = false;
    for (std::int64_t t = 1; t * t < 4 * w.p; ++t) {
        if (t % w.p == 0) continue;
        std::int64_t d = t * t - 4 * w.p;
        if (split_discriminant(d).fundamental != w.dK) continue;
        BuildParams bp;
        bp.p = static_cast<std::uint32_t>(w.p);
        bp.l = w.l;
        bp.N = w.N;
        bp.m = bounds.m;
        bp.disc_filter = d;
        bp.partial = true;
        bp.max_abs_degree = bounds.max_abs_degree;
        try {
            IsogenyGraph G = build_graph(bp);
            color_edges(G);
            Crater C = extract_crater(G);
            for (const auto& comp : C.components) {
                if (static_cast<std::int64_t>(comp.size()) != target.omega * target.s * target.t) continue;
                MultiDiGraph sub = induced_subgraph(C.graph, comp);
                MultiDiGraph flip = sub;
                for (GEdge& e : flip.edges) e.color = e.color == Color::blue ? Color::green : Color::blue;
                if (colored_digraph_iso(sub, want) || colored_digraph_iso(flip, want)) {
                    w.confirmation = "confirmed";
                    return;
                }
            }
        } catch (const BudgetError&) {
            budget = true;
        }
    }
    w.confirmation = budget ? "budget" : "not-found";
}

}  // namespace

std::vector<Witness> inverse_search(const TectonicParams& target_in, const SearchBounds& bounds) {
    validate(target_in);
    const TectonicParams target = canonical(target_in);
    if (bounds.m < 1) throw ValidationError("m must be at least 1");

    std::vector<std::pair<std::int64_t, std::int64_t>> cells;  // (dK, p)
    for (std::int64_t dK = -5; dK >= -bounds.max_dK; --dK) {
        if (!is_fundamental_discriminant(dK)) continue;
        for (std::int64_t p = 5; p <= bounds.max_p; ++p)
            if (is_prime(p) && kronecker(dK, p) == 1) cells.emplace_back(dK, p);
    }
    std::vector<std::vector<Witness>> found(cells.size());
    parallel_for(static_cast<int>(cells.size()), bounds.jobs, [&](int i) {
        auto [dK, p] = cells[i];
        const std::int64_t D = mod(dK, 4) == 0 ? dK / 4 : dK;
        for (std::int64_t l = 2; l <= bounds.max_l; ++l) {
            if (!is_prime(l) || l == p || kronecker(dK, l) != 1) continue;
            auto x = principal_generator(dK, l);
            if (!x) continue;
            for (std::int64_t N = 1; N <= bounds.max_N; ++N) {
                if (gcd64(N, 2 * p * l) != 1) continue;
                auto fac = factorize(N);
                bool ok = true;
                for (auto [q, e] : fac) ok &= kronecker(dK, q) == 1;
                if (!ok) continue;
                // both square roots at every prime of M
                std::vector<std::int64_t> primes{p};
                for (auto [q, e] : fac) primes.push_back(q);
                const std::size_t combos = std::size_t{1} << primes.size();
                for (std::size_t mask = 0; mask < combos; ++mask) {
                    CMOracleInput in;
                    in.dK = dK;
                    in.p = p;
                    in.m = bounds.m;
                    in.a = x->first;
                    in.b = x->second;
                    std::vector<std::int64_t> roots;
                    for (std::size_t k = 0; k < primes.size(); ++k) {
                        auto rs = quadratic_roots_mod_prime_power(0, -D, primes[k], 1);
                        std::sort(rs.begin(), rs.end());
                        roots.push_back(rs[(mask >> k) & 1]);
                    }
                    in.root_p = roots[0];
                    for (std::size_t k = 0; k < fac.size(); ++k)
                        in.N.push_back({fac[k].first, fac[k].second, roots[k + 1]});
                    CMProfile pr;
                    try {
                        pr = cm_order_profile(in);
                    } catch (const ValidationError&) {
                        continue;
                    }
                    if (pr.params() != target) continue;
                    Witness w;
                    w.dK = dK;
                    w.p = p;
                    w.N = N;
                    w.l = l;
                    w.a = x->first;
                    w.b = x->second;
                    w.root_p = roots[0];
                    w.roots_N.assign(roots.begin() + 1, roots.end());
                    w.profile = pr;
                    found[i].push_back(std::move(w));
                    break;  // one root choice per (dK, p, l, N)
                }
            }
        }
    });
    std::vector<Witness> out;
    for (auto& f : found)
        for (auto& w : f) out.push_back(std::move(w));
    if (bounds.confirm) {
        int n = 0;
        for (Witness& w : out) {
            if (n++ >= bounds.max_confirm) break;
            confirm(w, target, bounds);
        }
    }
    return out;
}

json witness_to_json(const Witness& w) {
    json roots = json::array();
    for (auto r : w.roots_N) roots.push_back(r);
    return {{"dK", w.dK},
            {"p", w.p},
            {"N", w.N},
            {"l", w.l},
            {"x", {w.a, w.b}},
            {"profile", cm_profile_to_json(w.profile)},
            {"root_p", w.root_p},
            {"roots_N", roots},
            {"confirmation", w.confirmation}};
}

}  // namespace lg
