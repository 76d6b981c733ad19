#include "levelgraph/volcano.hpp"

#include "levelgraph/parallel.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>
#include <sstream>

namespace lg {

namespace {

std::int64_t euler_phi(std::int64_t n) {
    std::int64_t r = n;
    for (auto [f, e] : factorize(n)) r = r / f * (f - 1);
    return r;
}

// Number of elements of exact order n in (Z/n)^2.
std::int64_t jordan2(std::int64_t n) {
    std::int64_t r = n * n;
    for (auto [f, e] : factorize(n)) r = r / (f * f) * (f * f - 1);
    return r;
}

std::uint64_t mix(std::uint64_t seed, const std::string& s) {
    std::uint64_t h = 1469598103934665603ull ^ seed;
    for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
    return h;
}

struct PlanCtx {
    const BuildParams& bp;
    BigInt q;
    Field B;
    std::mt19937_64 rng;
};

bool exceeds(const PlanCtx& c, std::int64_t e) { return e * c.bp.deg > c.bp.max_abs_degree; }

// E[ell^k] inside E(F_{q^e})?
bool full_torsion_at(PlanCtx& c, const Fe& j, std::int64_t t, std::int64_t ell, int k, int e) {
    BigInt n = count_points_ext(t, c.q, e);
    std::int64_t lk = ipow64(ell, static_cast<unsigned>(k));
    if (n % (lk * lk) != 0) return false;
    Field F = make_field(c.bp.p, c.bp.deg * e);
    SubfieldEmbedding emb(c.B, F);
    Curve E = curve_from_j(emb, j);
    E.trace = t;
    E.base_degree = c.bp.deg;
    SylowInfo S = sylow_structure(E, n, ell, c.rng);
    return S.b >= k;
}

// Smallest e with E[ell] rational over F_{q^e}, from the action of Frobenius on E[ell].
std::optional<int> ell_degree(PlanCtx& c, const Fe& j, std::int64_t t, std::int64_t ell) {
    std::int64_t tl = mod(t, ell), ql = static_cast<std::int64_t>(c.q % ell);
    std::int64_t disc = mod(tl * tl - 4 * ql, ell);
    if (ell == 2) disc = tl % 2;
    if (disc != 0) {
        // order of X in F_ell[X] / (X^2 - t X + q)
        std::int64_t a = 0, b = 1;
        for (std::int64_t e = 1; e <= ell * ell; ++e) {
            if (a == 1 && b == 0) return exceeds(c, e) ? std::nullopt : std::optional<int>(static_cast<int>(e));
            std::int64_t na = mod(-b * ql, ell), nb = mod(a + b * tl, ell);
            a = na;
            b = nb;
        }
        throw std::logic_error("ell_degree: Frobenius order not found");
    }
    std::int64_t lam = -1;
    for (std::int64_t x = 0; x < ell; ++x)
        if (mod(x * x - tl * x + ql, ell) == 0) lam = x;
    std::int64_t e0 = multiplicative_order(lam, ell);
    if (exceeds(c, e0)) return std::nullopt;
    if (full_torsion_at(c, j, t, ell, 1, static_cast<int>(e0))) return static_cast<int>(e0);
    if (exceeds(c, ell * e0)) return std::nullopt;
    return static_cast<int>(ell * e0);
}

std::optional<int> torsion_degree(PlanCtx& c, const Fe& j, std::int64_t t, std::int64_t n) {
    int e = 1;
    for (auto [ell, k] : factorize(n)) {
        auto el = ell_degree(c, j, t, ell);
        if (!el) return std::nullopt;
        int cur = *el;
        for (int i = 2; i <= k; ++i)
            if (!full_torsion_at(c, j, t, ell, i, cur)) {
                cur *= static_cast<int>(ell);
                if (exceeds(c, cur)) return std::nullopt;
            }
        e = static_cast<int>(lcm64(e, cur));
    }
    return e;
}

std::optional<int> p_power_degree(const PlanCtx& c, std::int64_t t, std::int64_t pm) {
    if (pm == 1) return 1;
    for (int e = 1; !exceeds(c, e); ++e)
        if (count_points_ext(t, c.q, e) % pm == 0) return e;
    return std::nullopt;
}

bool is_special(const Field& B, const Fe& j) { return B->is_zero(j) || j == B->from_int(1728); }

int special_degree(const BigInt& q, std::int64_t dK, int D) {
    std::int64_t m = dK == -4 ? 4 : 3;
    while (powmod(static_cast<std::int64_t>(q % m), D, m) != 1) D *= 2;
    return D;
}

std::vector<Fe> selected_j(const BuildParams& bp, const Field& B) {
    std::vector<Fe> out;
    if (bp.j_filter.empty()) {
        for (std::uint64_t i = 0; i < static_cast<std::uint64_t>(B->order()); ++i) out.push_back(B->from_index(i));
        return out;
    }
    std::set<std::string> seen;
    for (const std::string& s : bp.j_filter) {
        Fe j;
        if (s.find('^') != std::string::npos) {
            j = B->parse(s);
        } else {
            try {
                j = B->from_int(std::stoll(s));
            } catch (const std::exception&) {
                throw ValidationError("j-filter entry '" + s + "' is neither an integer nor an element serial");
            }
        }
        if (seen.insert(B->serialize(j)).second) out.push_back(j);
    }
    std::sort(out.begin(), out.end(),
              [&](const Fe& a, const Fe& b) { return B->serialize(a) < B->serialize(b); });
    return out;
}

std::int64_t lin(const std::int64_t M[2][2], std::int64_t a, std::int64_t b, int row, std::int64_t N) {
    return mod(M[row][0] * a + M[row][1] * b, N);
}

}  // namespace

void validate(const BuildParams& bp) {
    if (!is_prime(bp.p) || bp.p <= 3) throw ValidationError("p must be a prime greater than 3");
    if (bp.deg < 1) throw ValidationError("base degree must be at least 1");
    if (bp.deg > bp.max_abs_degree) throw ValidationError("base degree exceeds the absolute degree cap");
    if (ipow(bp.p, static_cast<unsigned>(bp.deg)) > 1000000)
        throw BudgetError("base field has more than 10^6 elements; trace computation is brute force");
    if (!is_prime(bp.l)) throw ValidationError("l must be prime");
    if (bp.l == static_cast<std::int64_t>(bp.p)) throw ValidationError("l must differ from p (standing hypothesis l != p)");
    if (bp.N < 1) throw ValidationError("N must be positive");
    if (gcd64(bp.N, static_cast<std::int64_t>(bp.p) * bp.l) != 1) throw ValidationError("N must be coprime to p*l");
    if (bp.m < 0) throw ValidationError("m must be non-negative");
    if (bp.N * bp.N > 10000 || ipow(bp.p, static_cast<unsigned>(bp.m)) > 10000)
        throw BudgetError("torsion tables above 10^4 points are out of budget");
    if (bp.max_abs_degree > 200) throw ValidationError("absolute degree cap cannot exceed 200");
}

std::int64_t level_order(const BuildParams& bp) { return bp.N * ipow64(bp.p, static_cast<unsigned>(bp.m)); }

DegreePlan plan_degrees(const BuildParams& bp) {
    validate(bp);
    PlanCtx c{bp, ipow(bp.p, static_cast<unsigned>(bp.deg)), make_field(bp.p, bp.deg), std::mt19937_64(bp.seed)};
    const FieldCtx& B = *c.B;
    std::int64_t q64 = static_cast<std::int64_t>(c.q);
    std::int64_t pm = ipow64(bp.p, static_cast<unsigned>(bp.m));
    DegreePlan plan;
    std::map<std::int64_t, int> group_of;
    for (const Fe& j : selected_j(bp, c.B)) {
        Curve E = curve_from_j(c.B, j);
        std::int64_t t = trace_of_frobenius(E);
        if (mod(t, bp.p) == 0) continue;  // supersingular
        bool special = is_special(c.B, j);
        if (special && bp.exclude_special_j) continue;
        std::int64_t d = t * t - 4 * q64;
        if (bp.disc_filter && d != *bp.disc_filter) continue;
        CurvePlan cp;
        cp.j = B.serialize(j);
        cp.trace = t;
        DiscriminantSplit ds = split_discriminant(d);
        cp.dK = ds.fundamental;
        cp.conductor = ds.conductor;
        cp.special = special;
        auto el = torsion_degree(c, j, t, bp.l);
        auto eN = bp.N > 1 ? torsion_degree(c, j, t, bp.N) : std::optional<int>(1);
        auto ep = p_power_degree(c, t, pm);
        if (el && eN && ep) {
            std::int64_t e = lcm64(lcm64(*el, *eN), *ep);
            if (!exceeds(c, e)) cp.degree = static_cast<int>(e);
        }
        auto it = group_of.find(cp.dK);
        if (it == group_of.end()) {
            it = group_of.emplace(cp.dK, static_cast<int>(plan.groups.size())).first;
            plan.groups.push_back(GroupPlan{cp.dK, {}, std::nullopt, 0, {}});
        }
        plan.groups[it->second].curves.push_back(static_cast<int>(plan.curves.size()));
        plan.curves.push_back(std::move(cp));
    }
    std::int64_t per_point = jordan2(bp.N) * euler_phi(pm);
    for (GroupPlan& g : plan.groups) {
        std::int64_t D = 1;
        bool ok = true, has_special = false;
        for (int ci : g.curves) {
            const CurvePlan& cp = plan.curves[ci];
            has_special |= cp.special;
            if (!cp.degree) {
                ok = false;
                g.reject_reason = "curve j=" + cp.j + " needs a working degree beyond the cap of " +
                                  std::to_string(bp.max_abs_degree / bp.deg);
                break;
            }
            D = lcm64(D, *cp.degree);
            std::int64_t orbit = level_order(bp) <= 2 ? 1 : (!cp.special ? 2 : (cp.dK == -4 ? 4 : 6));
            g.predicted_vertices += (per_point + orbit - 1) / orbit;
        }
        if (ok && has_special) D = special_degree(c.q, g.dK, static_cast<int>(D));
        if (ok) {
            auto f = bp.forced_degree.find(g.dK);
            if (f != bp.forced_degree.end()) {
                if (f->second % D != 0)
                    throw ValidationError("forced working degree " + std::to_string(f->second) +
                                          " is not a multiple of the required degree " + std::to_string(D));
                D = f->second;
            }
        }
        if (ok && D * bp.deg > bp.max_abs_degree) {
            ok = false;
            g.reject_reason = "working degree " + std::to_string(D) + " exceeds the cap";
        }
        if (ok && g.predicted_vertices > bp.max_vertices) {
            ok = false;
            g.reject_reason = "predicted " + std::to_string(g.predicted_vertices) + " vertices exceed the budget of " +
                              std::to_string(bp.max_vertices);
        }
        if (ok) {
            g.degree = static_cast<int>(D);
            plan.working_degree = std::max(plan.working_degree, static_cast<int>(D));
        }
    }
    return plan;
}

int working_degree(const BuildParams& bp) {
    DegreePlan plan = plan_degrees(bp);
    std::ostringstream report;
    bool rejected = false, any = false;
    for (const GroupPlan& g : plan.groups) {
        if (g.degree) {
            any = true;
        } else {
            rejected = true;
            report << "dK=" << g.dK << ": " << g.reject_reason << "; ";
        }
    }
    if (rejected && (!bp.partial || !any)) throw BudgetError("no admissible working degree: " + report.str());
    return plan.working_degree;
}

BigInt IsogenyGraph::q() const { return ipow(params.p, static_cast<unsigned>(params.deg)); }

Point IsogenyGraph::point_of(int v) const {
    const CurveData& c = curves[vdata[v].curve];
    std::int64_t pm = static_cast<std::int64_t>(c.tableP.size());
    std::int64_t ab = vdata[v].coord / pm, cc = vdata[v].coord % pm;
    return add(c.E, c.tableN[ab], c.tableP[cc]);
}

int IsogenyGraph::scalar_vertex(int v, std::int64_t k) const {
    const CurveData& c = curves[vdata[v].curve];
    std::int64_t N = params.N, pm = static_cast<std::int64_t>(c.tableP.size());
    if (gcd64(k, N * pm) != 1) throw ValidationError("scalar_vertex: multiplier must be prime to Np");
    std::int64_t ab = vdata[v].coord / pm, cc = vdata[v].coord % pm;
    std::int64_t a = ab / N, b = ab % N;
    std::int64_t idx = (mod(k * a, N) * N + mod(k * b, N)) * pm + mod(k * cc, pm);
    return c.canon[idx];
}

std::pair<int, int> IsogenyGraph::lookup(int curve, const Point& P) const {
    const CurveData& c = curves[curve];
    auto it = c.point_lookup.find(serialize(c.E, P));
    if (it == c.point_lookup.end()) throw ValidationError("lookup: point is not of exact order Np^m on this curve");
    return it->second;
}

int IsogenyGraph::curve_index(const std::string& j) const {
    for (std::size_t i = 0; i < curves.size(); ++i)
        if (curves[i].j == j) return static_cast<int>(i);
    return -1;
}

int IsogenyGraph::edge_from(int v, int kernel) const {
    for (int e : out_[v])
        if (edge_kernel[e] == kernel) return e;
    return -1;
}

int IsogenyGraph::stabilizer(int v) const {
    const CurveData& c = curves[vdata[v].curve];
    std::int64_t N = params.N, pm = static_cast<std::int64_t>(c.tableP.size());
    std::int64_t coord = vdata[v].coord, ab = coord / pm, cc = coord % pm, a = ab / N, b = ab % N;
    int n = 0;
    for (const AutData& ad : c.aut)
        if (lin(ad.M, a, b, 0, N) == a && lin(ad.M, a, b, 1, N) == b && mod(ad.mu * cc, pm) == cc) ++n;
    return n;
}

bool IsogenyGraph::horizontal(int e) const {
    const GEdge& x = graph.edges[e];
    return graph.vertices[x.src].level == 0 && graph.vertices[x.dst].level == 0;
}

int IsogenyGraph::crater_degree(int v) const {
    int d = static_cast<int>(out_[v].size());
    for (int e : in_[v])
        if (horizontal(e)) ++d;
    return d;
}

std::optional<int> IsogenyGraph::expected_crater_degree(int component) const {
    const ComponentData& cd = comps[component];
    std::int64_t l = params.l;
    int d = cd.depth;
    if (cd.has_special) {
        if (cd.dK == -4) {
            if (l == 2) return 4;
            if (l % 4 == 1) return d == 0 ? 4 : static_cast<int>(l + 3);
            return d == 0 ? 0 : static_cast<int>(l + 1);
        }
        if (cd.dK == -3) {
            if (l == 3) return 5;
            if (l % 3 == 1) return d == 0 ? 4 : static_cast<int>(l + 3);
            return d == 0 ? 0 : static_cast<int>(l + 1);
        }
    }
    switch (cd.kronecker) {
        case 1: return d == 0 ? 4 : static_cast<int>(l + 3);
        case 0: return d == 0 ? 2 : static_cast<int>(l + 2);
        default: return d == 0 ? 0 : static_cast<int>(l + 1);
    }
}

GraphMeta IsogenyGraph::meta() const {
    GraphMeta mt;
    mt.p = params.p;
    mt.l = params.l;
    mt.N = params.N;
    mt.m = params.m;
    mt.base_degree = params.deg;
    int wd = 0;
    json gd = json::object();
    for (const GroupData& g : groups) {
        wd = std::max(wd, g.degree);
        gd[std::to_string(g.dK)] = g.degree;
    }
    mt.working_degree = wd;
    mt.extra["group_degrees"] = gd;
    json cs = json::array();
    for (std::size_t i = 0; i < comps.size(); ++i) {
        const ComponentData& c = comps[i];
        cs.push_back(json{{"id", i},
                          {"size", c.vertices.size()},
                          {"trace", c.trace},
                          {"d_pi", c.d_pi},
                          {"dK", c.dK},
                          {"depth", c.depth},
                          {"kronecker", c.kronecker},
                          {"neighbors_distinct", c.neighbors_distinct}});
    }
    mt.extra["components"] = cs;
    if (!skipped.empty()) {
        json sk = json::array();
        for (const auto& s : skipped) sk.push_back(json{{"dK", s.dK}, {"reason", s.reason}});
        mt.extra["skipped_groups"] = sk;
    }
    return mt;
}

json IsogenyGraph::to_json() const { return lg::to_json(graph, meta()); }

namespace {

struct LocalVertex {
    int curve;
    std::int64_t coord;
    std::string point;
};

void prepare_curve(CurveData& c, const BuildParams& bp, const BigInt& order) {
    std::mt19937_64 rng(mix(bp.seed, c.j));
    const Curve& E = c.E;
    std::int64_t N = bp.N, pm = ipow64(bp.p, static_cast<unsigned>(bp.m));
    if (N > 1) {
        TorsionInfo T = torsion_generators(E, order, N, rng);
        if (!T.full) throw VerificationError("E[N] not rational at the planned degree for j=" + c.j);
        c.G1 = T.P1;
        c.G2 = T.P2;
    }
    if (pm > 1) {
        TorsionInfo T = torsion_generators(E, order, pm, rng);
        if (T.A != pm) throw VerificationError("p^m-torsion point missing at the planned degree for j=" + c.j);
        c.Gp = T.P1;
    }
    c.tableN.assign(N * N, infinity());
    c.indexN.clear();
    for (std::int64_t a = 0; a < N; ++a) {
        Point row = mul(E, a, c.G1);
        for (std::int64_t b = 0; b < N; ++b) {
            c.tableN[a * N + b] = row;
            c.indexN[serialize(E, row)] = static_cast<int>(a * N + b);
            row = add(E, row, c.G2);
        }
    }
    c.tableP.assign(pm, infinity());
    c.indexP.clear();
    Point cur = infinity();
    for (std::int64_t k = 0; k < pm; ++k) {
        c.tableP[k] = cur;
        c.indexP[serialize(E, cur)] = static_cast<int>(k);
        cur = add(E, cur, c.Gp);
    }

    EllBasis basis = ell_torsion_basis(E, bp.l, rng);
    std::vector<Point> gens = enumerate_kernels(E, bp.l, basis);
    c.kernels.clear();
    c.stable_kernels = 0;
    for (const Point& G : gens) {
        KernelData k;
        k.gen = G;
        k.tag = serialize(E, G);
        k.eigenvalue = frobenius_eigenvalue(E, G, bp.l, bp.deg);
        if (k.eigenvalue) ++c.stable_kernels;
        c.kernels.push_back(std::move(k));
    }
    auto kernel_index = [&](const Point& G) {
        std::string s = serialize(E, canonical_generator(E, G, bp.l));
        for (std::size_t i = 0; i < c.kernels.size(); ++i)
            if (c.kernels[i].tag == s) return static_cast<int>(i);
        throw VerificationError("kernel lookup failed");
    };

    AutGroup A = aut_group(E);
    if (!A.complete) throw FieldTooSmall("automorphisms of j=" + c.j + " need a larger field");
    c.aut.clear();
    auto coords = [&](const Point& P) {
        auto it = c.indexN.find(serialize(E, P));
        if (it == c.indexN.end()) throw VerificationError("point outside the N-torsion table");
        return std::pair<std::int64_t, std::int64_t>(it->second / N, it->second % N);
    };
    for (const Fe& u : A.scalings) {
        AutData ad;
        ad.u = u;
        auto [x11, x21] = coords(apply_scaling(E, u, c.G1));
        auto [x12, x22] = coords(apply_scaling(E, u, c.G2));
        ad.M[0][0] = x11;
        ad.M[1][0] = x21;
        ad.M[0][1] = x12;
        ad.M[1][1] = x22;
        auto it = c.indexP.find(serialize(E, apply_scaling(E, u, c.Gp)));
        if (it == c.indexP.end()) throw VerificationError("automorphism leaves the p^m-torsion table");
        ad.mu = it->second;
        for (const KernelData& k : c.kernels) ad.kernel_perm.push_back(kernel_index(apply_scaling(E, u, k.gen)));
        c.aut.push_back(std::move(ad));
    }
}

std::vector<LocalVertex> enumerate_vertices(CurveData& c, const BuildParams& bp) {
    std::int64_t N = bp.N, pm = static_cast<std::int64_t>(c.tableP.size());
    std::int64_t size = N * N * pm;
    c.canon.assign(size, -1);
    c.canon_aut.assign(size, -1);
    c.point_lookup.clear();
    const FieldCtx& F = *c.E.F;
    std::vector<LocalVertex> out;
    for (std::int64_t idx = 0; idx < size; ++idx) {
        std::int64_t ab = idx / pm, cc = idx % pm, a = ab / N, b = ab % N;
        if (gcd64(gcd64(a, b), N) != 1 || gcd64(cc, pm) != 1 || c.canon[idx] != -1) continue;
        std::vector<std::int64_t> orbit;
        std::vector<std::string> serials;
        for (const AutData& ad : c.aut) {
            std::int64_t a2 = lin(ad.M, a, b, 0, N), b2 = lin(ad.M, a, b, 1, N), c2 = mod(ad.mu * cc, pm);
            std::int64_t j = (a2 * N + b2) * pm + c2;
            orbit.push_back(j);
            serials.push_back(serialize(c.E, add(c.E, c.tableN[a2 * N + b2], c.tableP[c2])));
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < serials.size(); ++i)
            if (serials[i] < serials[best]) best = i;
        int local = static_cast<int>(out.size());
        out.push_back(LocalVertex{-1, orbit[best], serials[best]});
        // orbit[i] = aut_i(P); the vertex point is aut_best(P) = (u_best / u_i) orbit[i]
        for (std::size_t i = 0; i < orbit.size(); ++i) {
            if (c.canon[orbit[i]] != -1) continue;
            Fe ratio = F.div(c.aut[best].u, c.aut[i].u);
            int ai = -1;
            for (std::size_t k = 0; k < c.aut.size(); ++k)
                if (c.aut[k].u == ratio) ai = static_cast<int>(k);
            c.canon[orbit[i]] = local;
            c.canon_aut[orbit[i]] = static_cast<signed char>(ai);
            c.point_lookup[serials[i]] = {local, ai};
        }
    }
    return out;
}

void connect_kernels(std::vector<CurveData>& curves, int ci, const std::map<std::string, int>& by_j,
                     const SubfieldEmbedding& emb, const BuildParams& bp) {
    CurveData& c = curves[ci];
    std::int64_t N = bp.N;
    for (KernelData& k : c.kernels) {
        k.step = velu_isogeny(c.E, k.gen, bp.l);
        auto jb = emb.restrict(j_invariant(k.step.codomain));
        k.rational_j = jb.has_value();
        k.target = -1;
        if (!jb) continue;
        auto it = by_j.find(emb.base()->serialize(*jb));
        if (it == by_j.end()) continue;
        const CurveData& t = curves[it->second];
        auto u = isomorphism_scalar(k.step.codomain, t.E);
        if (!u) throw FieldTooSmall("isomorphism to the model of j=" + t.j + " needs a larger field");
        k.iso = *u;
        k.target = it->second;
        auto image = [&](const Point& P) { return apply_scaling(k.step.codomain, *u, evaluate(k.step, P)); };
        auto findN = [&](const Point& P) {
            auto f = t.indexN.find(serialize(t.E, P));
            if (f == t.indexN.end()) throw VerificationError("isogeny image outside the N-torsion table");
            return f->second;
        };
        int i1 = findN(image(c.G1)), i2 = findN(image(c.G2));
        k.M[0][0] = i1 / N;
        k.M[1][0] = i1 % N;
        k.M[0][1] = i2 / N;
        k.M[1][1] = i2 % N;
        auto f = t.indexP.find(serialize(t.E, image(c.Gp)));
        if (f == t.indexP.end()) throw VerificationError("isogeny image outside the p^m-torsion table");
        k.mu = f->second;
    }
}

// Levels on the curve graph of one CM group.
void assign_curve_levels(std::vector<CurveData>& curves, const GroupData& g, std::int64_t l) {
    std::map<std::int64_t, std::vector<int>> family;  // |t| -> generic curves
    for (int ci : g.curves) {
        CurveData& c = curves[ci];
        c.level = 0;
        if (!c.special) family[std::llabs(c.trace)].push_back(ci);
    }
    for (auto& [t, members] : family) {
        int d = curves[members[0]].family_depth;
        if (d == 0) continue;
        std::set<int> in_family(members.begin(), members.end());
        std::map<int, std::vector<int>> adj;
        for (int ci : members)
            for (const KernelData& k : curves[ci].kernels)
                if (k.target >= 0 && in_family.count(k.target) && k.target != ci) {
                    adj[ci].push_back(k.target);
                    adj[k.target].push_back(ci);
                }
        std::map<int, int> dist;
        std::deque<int> queue;
        for (int ci : members)
            if (curves[ci].stable_kernels < l + 1) {
                dist[ci] = 0;
                queue.push_back(ci);
            }
        while (!queue.empty()) {
            int v = queue.front();
            queue.pop_front();
            for (int w : adj[v])
                if (!dist.count(w)) {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
        }
        for (int ci : members) {
            auto it = dist.find(ci);
            if (it == dist.end())
                throw VerificationError("level assignment: curve j=" + curves[ci].j + " does not reach a floor curve");
            int level = d - it->second;
            if (level < 0 || level > d)
                throw VerificationError("level assignment: level out of range for j=" + curves[ci].j);
            curves[ci].level = level;
        }
    }
}

void compute_line_images(std::vector<CurveData>& curves, int ci, std::int64_t l) {
    CurveData& c = curves[ci];
    if (c.level != 0) return;
    for (KernelData& k : c.kernels) {
        k.line_image.assign(c.kernels.size(), -1);
        if (k.target < 0 || curves[k.target].level != 0) continue;
        const CurveData& t = curves[k.target];
        for (std::size_t k2 = 0; k2 < c.kernels.size(); ++k2) {
            const KernelData& other = c.kernels[k2];
            if (&other == &k || other.target < 0 || curves[other.target].level != 0) continue;
            Point img = apply_scaling(k.step.codomain, k.iso, evaluate(k.step, other.gen));
            std::string s = serialize(t.E, canonical_generator(t.E, img, l));
            for (std::size_t i = 0; i < t.kernels.size(); ++i)
                if (t.kernels[i].tag == s) k.line_image[k2] = static_cast<int>(i);
        }
    }
}

}  // namespace

IsogenyGraph build_graph(const BuildParams& bp) {
    DegreePlan plan = plan_degrees(bp);
    IsogenyGraph G;
    G.params = bp;
    Field B = make_field(bp.p, bp.deg);
    BigInt q = ipow(bp.p, static_cast<unsigned>(bp.deg));
    std::vector<std::vector<LocalVertex>> locals;

    for (const GroupPlan& gp : plan.groups) {
        if (!gp.degree) {
            if (!bp.partial) throw BudgetError("CM group dK=" + std::to_string(gp.dK) + ": " + gp.reject_reason);
            G.skipped.push_back(SkippedGroup{gp.dK, gp.reject_reason});
            continue;
        }
        int D = *gp.degree;
        bool forced = bp.forced_degree.count(gp.dK) > 0;
        std::vector<CurveData> built;
        std::vector<std::vector<LocalVertex>> group_locals;
        GroupData gd;
        for (;;) {
            try {
                Field F = make_field(bp.p, bp.deg * D);
                SubfieldEmbedding emb(B, F);
                built.assign(gp.curves.size(), CurveData{});
                std::map<std::string, int> by_j;
                for (std::size_t i = 0; i < gp.curves.size(); ++i) {
                    const CurvePlan& cp = plan.curves[gp.curves[i]];
                    CurveData& c = built[i];
                    c.j = cp.j;
                    c.j_base = B->parse(cp.j);
                    c.trace = cp.trace;
                    c.dK = cp.dK;
                    c.conductor = cp.conductor;
                    c.family_depth = valuation(cp.conductor, bp.l);
                    c.special = cp.special;
                    c.E = curve_from_j(emb, c.j_base);
                    c.E.trace = cp.trace;
                    c.E.base_degree = bp.deg;
                    c.G1 = c.G2 = c.Gp = infinity();
                    by_j[c.j] = static_cast<int>(i);
                }
                parallel_for(static_cast<int>(built.size()), bp.jobs, [&](int i) {
                    prepare_curve(built[i], bp, count_points_ext(built[i].trace, q, D));
                });
                parallel_for(static_cast<int>(built.size()), bp.jobs,
                             [&](int i) { connect_kernels(built, i, by_j, emb, bp); });
                gd = GroupData{gp.dK, D, F, {}};
                for (std::size_t i = 0; i < built.size(); ++i) gd.curves.push_back(static_cast<int>(i));
                assign_curve_levels(built, gd, bp.l);
                parallel_for(static_cast<int>(built.size()), bp.jobs,
                             [&](int i) { compute_line_images(built, i, bp.l); });
                group_locals.assign(built.size(), {});
                parallel_for(static_cast<int>(built.size()), bp.jobs,
                             [&](int i) { group_locals[i] = enumerate_vertices(built[i], bp); });
                break;
            } catch (const FieldTooSmall& e) {
                if (forced || 2 * D * bp.deg > bp.max_abs_degree) {
                    if (!bp.partial) throw;
                    G.skipped.push_back(SkippedGroup{gp.dK, e.what()});
                    built.clear();
                    break;
                }
                D *= 2;
            }
        }
        if (built.empty()) continue;
        int offset = static_cast<int>(G.curves.size());
        gd.curves.clear();
        for (std::size_t i = 0; i < built.size(); ++i) {
            built[i].group = static_cast<int>(G.groups.size());
            for (KernelData& k : built[i].kernels)
                if (k.target >= 0) k.target += offset;
            for (LocalVertex& lv : group_locals[i]) lv.curve = offset + static_cast<int>(i);
            gd.curves.push_back(offset + static_cast<int>(i));
            G.curves.push_back(std::move(built[i]));
            locals.push_back(std::move(group_locals[i]));
        }
        G.groups.push_back(std::move(gd));
    }

    // global vertex order: (j serial, point serial)
    struct Ref {
        int curve, local;
    };
    std::vector<Ref> refs;
    for (std::size_t c = 0; c < locals.size(); ++c)
        for (std::size_t i = 0; i < locals[c].size(); ++i) refs.push_back(Ref{static_cast<int>(c), static_cast<int>(i)});
    std::sort(refs.begin(), refs.end(), [&](const Ref& x, const Ref& y) {
        const std::string& jx = G.curves[x.curve].j;
        const std::string& jy = G.curves[y.curve].j;
        if (jx != jy) return jx < jy;
        return locals[x.curve][x.local].point < locals[y.curve][y.local].point;
    });
    std::vector<std::vector<int>> global(locals.size());
    for (std::size_t c = 0; c < locals.size(); ++c) global[c].assign(locals[c].size(), -1);
    for (std::size_t v = 0; v < refs.size(); ++v) {
        const LocalVertex& lv = locals[refs[v].curve][refs[v].local];
        global[refs[v].curve][refs[v].local] = static_cast<int>(v);
        GVertex gv;
        gv.j = G.curves[lv.curve].j;
        gv.point = lv.point;
        gv.level = G.curves[lv.curve].level;
        G.graph.add_vertex(std::move(gv));
        G.vdata.push_back(VertexData{lv.curve, lv.coord});
    }
    for (std::size_t c = 0; c < G.curves.size(); ++c) {
        CurveData& cd = G.curves[c];
        for (int& x : cd.canon)
            if (x >= 0) x = global[c][x];
        for (auto& [s, pr] : cd.point_lookup) pr.first = global[c][pr.first];
    }

    // edges, ordered by source vertex then kernel
    std::int64_t N = bp.N;
    for (int v = 0; v < G.graph.size(); ++v) {
        const CurveData& c = G.curves[G.vdata[v].curve];
        std::int64_t pm = static_cast<std::int64_t>(c.tableP.size());
        std::int64_t coord = G.vdata[v].coord, ab = coord / pm, cc = coord % pm, a = ab / N, b = ab % N;
        for (std::size_t k = 0; k < c.kernels.size(); ++k) {
            const KernelData& kd = c.kernels[k];
            if (kd.target < 0) continue;
            const CurveData& t = G.curves[kd.target];
            std::int64_t idx = (lin(kd.M, a, b, 0, N) * N + lin(kd.M, a, b, 1, N)) * pm + mod(kd.mu * cc, pm);
            int w = t.canon[idx];
            if (w < 0) throw VerificationError("edge target is not of exact order");
            G.graph.add_edge(v, w, Color::none, kd.tag);
            G.edge_kernel.push_back(static_cast<int>(k));
        }
    }
    G.out_ = G.graph.out_edges();
    G.in_ = G.graph.in_edges();

    // components
    std::int64_t q64 = static_cast<std::int64_t>(q);
    auto parts = components(G.graph);
    for (std::size_t ci = 0; ci < parts.size(); ++ci) {
        ComponentData cd;
        cd.vertices = parts[ci];
        int rep = -1;
        for (int v : cd.vertices) {
            G.graph.vertices[v].component = static_cast<int>(ci);
            const CurveData& c = G.curves[G.vdata[v].curve];
            cd.has_special |= c.special;
            cd.depth = std::max(cd.depth, c.level);
            if (rep < 0 || (G.curves[rep].special && !c.special)) rep = G.vdata[v].curve;
        }
        const CurveData& rc = G.curves[rep];
        cd.trace = rc.trace;
        cd.d_pi = rc.trace * rc.trace - 4 * q64;
        cd.dK = rc.dK;
        cd.conductor = rc.conductor;
        cd.kronecker = kronecker(cd.dK, bp.l);
        for (int v : cd.vertices) {
            if (G.graph.vertices[v].level != 0) continue;
            std::vector<int> nb;
            for (int e : G.out_[v])
                if (G.horizontal(e)) nb.push_back(G.graph.edges[e].dst);
            for (int e : G.in_[v])
                if (G.horizontal(e)) nb.push_back(G.graph.edges[e].src);
            std::sort(nb.begin(), nb.end());
            if (std::adjacent_find(nb.begin(), nb.end()) != nb.end() || std::binary_search(nb.begin(), nb.end(), v))
                cd.neighbors_distinct = false;
        }
        G.comps.push_back(std::move(cd));
    }
    return G;
}

IsogenyGraph build_projection_base(const IsogenyGraph& high, std::int64_t N_low, int m_low) {
    if (N_low < 1 || high.params.N % N_low != 0) throw ValidationError("projection: N' must divide N");
    if (m_low < 0 || m_low > high.params.m) throw ValidationError("projection: m' must lie in [0, m]");
    BuildParams bp = high.params;
    bp.N = N_low;
    bp.m = m_low;
    bp.forced_degree.clear();
    for (const GroupData& g : high.groups) bp.forced_degree[g.dK] = g.degree;
    return build_graph(bp);
}

Projection project(const IsogenyGraph& high, const IsogenyGraph& low) {
    const BuildParams &hp = high.params, &lp = low.params;
    if (hp.p != lp.p || hp.deg != lp.deg || hp.l != lp.l) throw ValidationError("projection: field or l mismatch");
    if (hp.N % lp.N != 0 || lp.m > hp.m) throw ValidationError("projection: divisibility violated");
    std::int64_t k = hp.N / lp.N * ipow64(hp.p, static_cast<unsigned>(hp.m - lp.m));
    Projection pr;
    pr.vertex_map.assign(high.graph.size(), -1);
    pr.edge_map.assign(high.graph.edges.size(), -1);
    std::vector<int> curve_map(high.curves.size(), -1);
    for (std::size_t c = 0; c < high.curves.size(); ++c) {
        int lc = low.curve_index(high.curves[c].j);
        if (lc < 0) continue;
        const GroupData& hg = high.groups[high.curves[c].group];
        const GroupData& lg_ = low.groups[low.curves[lc].group];
        if (hg.degree != lg_.degree) throw ValidationError("projection: working degrees differ for dK=" + std::to_string(hg.dK));
        curve_map[c] = lc;
    }
    for (int v = 0; v < high.graph.size(); ++v) {
        int c = high.vdata[v].curve, lc = curve_map[c];
        if (lc < 0) continue;
        const Curve& E = high.curves[c].E;
        Point Q = mul(E, k, high.point_of(v));
        auto [w, ai] = low.lookup(lc, Q);
        pr.vertex_map[v] = w;
        const CurveData& lcd = low.curves[lc];
        // the low vertex point is aut_ai(kP); the kernel K at v corresponds to aut_ai(K) at w
        for (int e : high.out_[v]) {
            int kh = high.edge_kernel[e];
            const std::string& tag = high.curves[c].kernels[kh].tag;
            int kl = -1;
            for (std::size_t i = 0; i < lcd.kernels.size(); ++i)
                if (lcd.kernels[i].tag == tag) kl = static_cast<int>(i);
            if (kl < 0) continue;
            kl = lcd.aut[ai].kernel_perm[kl];
            pr.edge_map[e] = low.edge_from(w, kl);
        }
    }
    return pr;
}

CoverReport verify_covering(const MultiDiGraph& cover, const MultiDiGraph& base, const std::vector<int>& vmap) {
    CoverReport rep;
    if (static_cast<int>(vmap.size()) != cover.size()) {
        rep.is_cover = false;
        rep.failures.push_back("vertex map size mismatch");
        return rep;
    }
    for (int v = 0; v < cover.size(); ++v)
        if (vmap[v] < 0 || vmap[v] >= base.size()) {
            rep.is_cover = false;
            rep.failures.push_back("vertex " + std::to_string(v) + " has no image");
            return rep;
        }
    auto cout_ = cover.out_edges(), cin_ = cover.in_edges(), bout = base.out_edges(), bin = base.in_edges();
    for (int v = 0; v < cover.size(); ++v) {
        int w = vmap[v];
        std::vector<int> a, b;
        for (int e : cout_[v]) a.push_back(vmap[cover.edges[e].dst]);
        for (int e : bout[w]) b.push_back(base.edges[e].dst);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        bool ok = a == b;
        a.clear();
        b.clear();
        for (int e : cin_[v]) a.push_back(vmap[cover.edges[e].src]);
        for (int e : bin[w]) b.push_back(base.edges[e].src);
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        ok = ok && a == b;
        if (!ok) {
            rep.is_cover = false;
            if (rep.failures.size() < 20) rep.failures.push_back("not a local bijection at vertex " + std::to_string(v));
        }
    }
    std::vector<int> label = component_labels(base);
    std::vector<int> fiber(base.size(), 0);
    for (int v = 0; v < cover.size(); ++v) fiber[vmap[v]]++;
    std::set<int> touched;
    for (int v = 0; v < cover.size(); ++v) touched.insert(label[vmap[v]]);
    for (int w = 0; w < base.size(); ++w) {
        if (!touched.count(label[w])) continue;
        auto it = rep.component_degree.find(label[w]);
        if (it == rep.component_degree.end()) {
            rep.component_degree[label[w]] = fiber[w];
        } else if (it->second != fiber[w]) {
            rep.is_cover = false;
            if (rep.failures.size() < 20)
                rep.failures.push_back("fiber sizes differ inside base component " + std::to_string(label[w]));
        }
        if (fiber[w] == 0) {
            rep.is_cover = false;
            if (rep.failures.size() < 20) rep.failures.push_back("base vertex " + std::to_string(w) + " not reached");
        }
    }
    std::set<int> degrees;
    for (auto& [c, d] : rep.component_degree) degrees.insert(d);
    rep.degree = degrees.size() == 1 ? *degrees.begin() : 0;
    return rep;
}

LemmaReport check_edge_count_lemmas(const IsogenyGraph& G) {
    LemmaReport rep;
    for (std::size_t ci = 0; ci < G.comps.size(); ++ci) {
        const ComponentData& cd = G.comps[ci];
        if (!cd.neighbors_distinct) {
            rep.skipped_components++;
            continue;
        }
        auto expect = G.expected_crater_degree(static_cast<int>(ci));
        for (int v : cd.vertices) {
            if (G.graph.vertices[v].level != 0) continue;
            rep.checked++;
            int got = G.crater_degree(v);
            if (expect && got == *expect) {
                rep.passed++;
            } else if (rep.failures.size() < 20) {
                std::ostringstream os;
                os << "vertex " << v << " (j=" << G.graph.vertices[v].j << ", component " << ci << ", dK=" << cd.dK
                   << ", depth " << cd.depth << "): " << got << " edges, expected " << (expect ? *expect : -1);
                rep.failures.push_back(os.str());
            }
        }
    }
    return rep;
}

bool dual_closed(const IsogenyGraph& G) {
    std::map<std::pair<int, int>, int> count;
    for (const GEdge& e : G.graph.edges) count[{e.src, e.dst}]++;
    for (const auto& [pr, n] : count) {
        int back = G.scalar_vertex(pr.first, G.params.l);
        auto it = count.find({pr.second, back});
        if (it == count.end() || it->second * G.stabilizer(pr.first) != n * G.stabilizer(pr.second)) return false;
    }
    return true;
}

}  // namespace lg
