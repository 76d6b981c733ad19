#include "levelgraph/voltage.hpp"

#include "levelgraph/parallel.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <random>
#include <set>

namespace lg {

namespace {

std::vector<std::int64_t> units_mod(std::int64_t pm) {
    if (pm == 1) return {0};
    std::vector<std::int64_t> u;
    for (std::int64_t a = 1; a < pm; ++a)
        if (gcd64(a, pm) == 1) u.push_back(a);
    return u;
}

int level_curve(const IsogenyGraph& base, const IsogenyGraph& level, int v) {
    int c = level.curve_index(base.curves[base.vdata[v].curve].j);
    if (c < 0) throw ValidationError("voltage: curve " + base.curves[base.vdata[v].curve].j + " missing at level m");
    return c;
}

int level_kernel(const IsogenyGraph& base, const IsogenyGraph& level, int e) {
    const GEdge& x = base.graph.edges[e];
    const std::string& tag = base.curves[base.vdata[x.src].curve].kernels[base.edge_kernel[e]].tag;
    const CurveData& c = level.curves[level_curve(base, level, x.src)];
    for (std::size_t k = 0; k < c.kernels.size(); ++k)
        if (c.kernels[k].tag == tag) return static_cast<int>(k);
    throw VerificationError("voltage: kernel " + tag + " missing at level m");
}

Point kernel_image(const KernelData& k, const Point& P) {
    return apply_scaling(k.step.codomain, k.iso, evaluate(k.step, P));
}

// k with Q = k T, by walking the multiples of T
std::int64_t discrete_log(const Curve& E, const Point& T, const Point& Q, std::int64_t order) {
    std::string want = serialize(E, Q);
    Point cur = infinity();
    for (std::int64_t k = 0; k < order; ++k) {
        if (serialize(E, cur) == want) return k;
        cur = add(E, cur, T);
    }
    throw VerificationError("voltage: discrete logarithm failed");
}

std::int64_t level_pm(const IsogenyGraph& level) {
    if (level.params.N != 1) throw ValidationError("voltage assignments need N = 1");
    return ipow64(level.params.p, static_cast<unsigned>(level.params.m));
}

using Mult = std::vector<std::map<int, int>>;

Mult out_mult(const MultiDiGraph& G) {
    Mult m(G.size());
    for (const GEdge& e : G.edges) m[e.src][e.dst]++;
    return m;
}

Mult in_mult(const MultiDiGraph& G) {
    Mult m(G.size());
    for (const GEdge& e : G.edges) m[e.dst][e.src]++;
    return m;
}

std::vector<std::pair<int, int>> sorted_pairs(const MultiDiGraph& G, const std::vector<int>& relabel) {
    std::vector<std::pair<int, int>> out;
    for (const GEdge& e : G.edges) out.emplace_back(relabel[e.src], relabel[e.dst]);
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

IsogenyGraph voltage_base(const IsogenyGraph& level) {
    level_pm(level);
    return build_projection_base(level, 1, 0);
}

VoltageBases choose_bases(const IsogenyGraph& base, const IsogenyGraph& level, std::uint64_t seed, bool tree_mode) {
    const std::int64_t pm = level_pm(level);
    const std::vector<std::int64_t> units = units_mod(pm);
    std::mt19937_64 rng(seed);
    VoltageBases b;
    b.tree_mode = tree_mode;
    int n = base.graph.size();
    b.unit.assign(n, 0);
    for (int v = 0; v < n; ++v) b.unit[v] = units[rng() % units.size()];
    if (!tree_mode) return b;

    std::vector<char> seen(n, 0);
    auto out = base.graph.out_edges(), in = base.graph.in_edges();
    for (int root = 0; root < n; ++root) {
        if (seen[root]) continue;
        seen[root] = 1;
        std::vector<int> queue{root};
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            int x = queue[qi];
            const CurveData& cx = level.curves[level_curve(base, level, x)];
            Point tx = cx.tableP[b.unit[x]];
            for (int e : out[x]) {
                int y = base.graph.edges[e].dst;
                if (seen[y]) continue;
                seen[y] = 1;
                const KernelData& k = cx.kernels[level_kernel(base, level, e)];
                const CurveData& cy = level.curves[k.target];
                b.unit[y] = discrete_log(cy.E, cy.Gp, kernel_image(k, tx), pm);
                b.tree_edges.push_back(e);
                queue.push_back(y);
            }
            for (int e : in[x]) {
                int y = base.graph.edges[e].src;
                if (seen[y]) continue;
                seen[y] = 1;
                // t_y with phi(t_y) = t_x: phi(Gp_y) = w t_x, so t_y = w^-1 Gp_y
                const CurveData& cy = level.curves[level_curve(base, level, y)];
                const KernelData& k = cy.kernels[level_kernel(base, level, e)];
                std::int64_t w = discrete_log(cx.E, tx, kernel_image(k, cy.Gp), pm);
                b.unit[y] = pm == 1 ? 0 : invmod(w, pm);
                b.tree_edges.push_back(e);
                queue.push_back(y);
            }
        }
    }
    std::sort(b.tree_edges.begin(), b.tree_edges.end());
    return b;
}

VoltageData compute_assignment(const IsogenyGraph& base, const IsogenyGraph& level, const VoltageBases& bases,
                               int jobs) {
    VoltageData vd;
    vd.pm = level_pm(level);
    vd.m = level.params.m;
    vd.base = base.graph;
    vd.basis_unit = bases.unit;
    vd.tree_edges = bases.tree_edges;
    int n = base.graph.size();
    if (static_cast<int>(bases.unit.size()) != n) throw ValidationError("voltage: one basis per base vertex");
    for (int v = 0; v < n; ++v) {
        const CurveData& c = level.curves[level_curve(base, level, v)];
        vd.base_j.push_back(c.j);
        std::set<std::int64_t> a;
        for (const AutData& ad : c.aut) a.insert(mod(ad.mu, vd.pm));
        vd.aut_units.emplace_back(a.begin(), a.end());
    }
    int ne = static_cast<int>(base.graph.edges.size());
    vd.alpha.assign(ne, 0);
    parallel_for(ne, jobs, [&](int e) {
        const GEdge& x = base.graph.edges[e];
        const CurveData& c = level.curves[level_curve(base, level, x.src)];
        const KernelData& k = c.kernels[level_kernel(base, level, e)];
        const CurveData& t = level.curves[k.target];
        Point src = c.tableP[bases.unit[x.src]];
        Point dst = t.tableP[bases.unit[x.dst]];
        std::int64_t a = discrete_log(t.E, dst, kernel_image(k, src), vd.pm);
        if (vd.pm > 1 && gcd64(a, vd.pm) != 1) throw VerificationError("voltage: assignment is not a unit");
        vd.alpha[e] = a;
    });
    return vd;
}

MultiDiGraph derived_graph(const VoltageData& vd, bool full_group, std::vector<int>* fiber) {
    const std::vector<std::int64_t> units = units_mod(vd.pm);
    int n = vd.base.size();
    // per base vertex: unit -> derived vertex, through the class representative
    std::vector<std::map<std::int64_t, int>> id(n);
    MultiDiGraph D;
    std::vector<int> fib;
    std::vector<std::int64_t> sigma;
    for (int v = 0; v < n; ++v) {
        for (std::int64_t s : units) {
            std::int64_t rep = s;
            if (!full_group)
                for (std::int64_t u : vd.aut_units[v]) rep = std::min(rep, mod(u * s, vd.pm));
            if (rep == s) {
                GVertex gv = vd.base.vertices[v];
                gv.name.clear();
                gv.point = std::to_string(s);
                id[v][s] = D.size();
                D.vertices.push_back(gv);
                fib.push_back(v);
                sigma.push_back(s);
            }
        }
        for (std::int64_t s : units) {
            std::int64_t rep = s;
            if (!full_group)
                for (std::int64_t u : vd.aut_units[v]) rep = std::min(rep, mod(u * s, vd.pm));
            id[v][s] = id[v][rep];
        }
    }
    auto out = vd.base.out_edges();
    for (int x = 0; x < D.size(); ++x)
        for (int e : out[fib[x]]) {
            const GEdge& be = vd.base.edges[e];
            D.add_edge(x, id[be.dst].at(mod(sigma[x] * vd.alpha[e], vd.pm)), be.color, be.kernel);
        }
    if (fiber) *fiber = fib;
    return D;
}

std::optional<std::vector<int>> fibered_iso(const MultiDiGraph& G, const std::vector<int>& fiber_g,
                                            const MultiDiGraph& H, const std::vector<int>& fiber_h,
                                            std::int64_t step_limit) {
    int n = G.size();
    if (n != H.size() || G.edges.size() != H.edges.size()) return std::nullopt;
    Mult og = out_mult(G), ig = in_mult(G), oh = out_mult(H), ih = in_mult(H);
    auto degree_sig = [](const Mult& o, const Mult& i, int v) {
        int a = 0, b = 0, loops = 0;
        for (auto [w, k] : o[v]) a += k, loops += w == v ? k : 0;
        for (auto [w, k] : i[v]) b += k;
        return std::array<int, 3>{a, b, loops};
    };
    std::map<int, std::vector<int>> by_fiber;
    for (int w = 0; w < n; ++w) by_fiber[fiber_h[w]].push_back(w);
    std::vector<int> order;
    std::vector<char> seen(n, 0);
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        seen[s] = 1;
        order.push_back(s);
        for (std::size_t i = order.size() - 1; i < order.size(); ++i) {
            for (const Mult* m : {&og, &ig})
                for (auto [w, k] : (*m)[order[i]])
                    if (!seen[w]) seen[w] = 1, order.push_back(w);
        }
    }
    std::vector<int> f(n, -1), finv(n, -1);
    std::int64_t steps = 0;
    bool out_of_budget = false;
    auto consistent = [&](int v, int w) {
        if (degree_sig(og, ig, v) != degree_sig(oh, ih, w)) return false;
        for (const auto& [mg, mh] : {std::pair{&og, &oh}, std::pair{&ig, &ih}}) {
            int mapped_g = 0, mapped_h = 0;
            for (auto [u, k] : (*mg)[v]) {
                int fu = u == v ? w : f[u];
                if (fu < 0) continue;
                mapped_g += k;
                auto it = (*mh)[w].find(fu);
                if (it == (*mh)[w].end() || it->second != k) return false;
            }
            for (auto [x, k] : (*mh)[w])
                if (x == w || finv[x] >= 0) mapped_h += k;
            if (mapped_g != mapped_h) return false;
        }
        return true;
    };
    std::function<bool(std::size_t)> rec = [&](std::size_t i) {
        if (i == order.size()) return true;
        if (++steps > step_limit) {
            out_of_budget = true;
            return false;
        }
        int v = order[i];
        auto it = by_fiber.find(fiber_g[v]);
        if (it == by_fiber.end()) return false;
        for (int w : it->second) {
            if (finv[w] >= 0 || !consistent(v, w)) continue;
            f[v] = w;
            finv[w] = v;
            if (rec(i + 1)) return true;
            f[v] = finv[w] = -1;
            if (out_of_budget) return false;
        }
        return false;
    };
    if (rec(0)) return f;
    if (out_of_budget) throw BudgetError("fibered isomorphism search exceeded its step limit");
    return std::nullopt;
}

AppendixReport verify_appendix(const VoltageData& vd, const IsogenyGraph& level) {
    if (level_pm(level) != vd.pm) throw ValidationError("verify_appendix: level mismatch");
    AppendixReport rep;
    rep.level_vertices = level.graph.size();
    rep.level_edges = static_cast<int>(level.graph.edges.size());
    std::map<std::string, int> base_of;
    for (int v = 0; v < vd.base.size(); ++v) base_of[vd.base_j[v]] = v;
    std::vector<int> fiber_h(level.graph.size(), -1);
    for (int w = 0; w < level.graph.size(); ++w) {
        auto it = base_of.find(level.curves[level.vdata[w].curve].j);
        fiber_h[w] = it == base_of.end() ? -1 : it->second;
    }
    for (bool full : {false, true}) {
        AppendixSide& side = full ? rep.full : rep.quotient;
        std::vector<int> fiber_g;
        MultiDiGraph D = derived_graph(vd, full, &fiber_g);
        side.vertices = D.size();
        side.edges = static_cast<int>(D.edges.size());
        if (side.vertices != rep.level_vertices || side.edges != rep.level_edges) {
            side.note = "derived graph has " + std::to_string(side.vertices) + " vertices and " +
                        std::to_string(side.edges) + " edges";
            continue;
        }
        // the identification (v, s) -> (E, s t_E)
        std::vector<int> ident(D.size());
        std::set<int> image;
        for (int x = 0; x < D.size(); ++x) {
            std::int64_t s = std::stoll(D.vertices[x].point);
            int v = fiber_g[x];
            int c = level.curve_index(vd.base_j[v]);
            const CurveData& cd = level.curves[c];
            ident[x] = level.lookup(c, cd.tableP[mod(s * vd.basis_unit[v], vd.pm)]).first;
            image.insert(ident[x]);
        }
        std::vector<int> id_h(level.graph.size());
        for (int w = 0; w < level.graph.size(); ++w) id_h[w] = w;
        side.identification_ok = static_cast<int>(image.size()) == D.size() &&
                                 sorted_pairs(D, ident) == sorted_pairs(level.graph, id_h);
        try {
            side.isomorphic = side.identification_ok || fibered_iso(D, fiber_g, level.graph, fiber_h).has_value();
            if (!side.isomorphic) side.note = "no fiber-preserving isomorphism";
        } catch (const BudgetError& e) {
            side.note = e.what();
        }
    }
    rep.matching = rep.quotient.isomorphic ? (rep.full.isomorphic ? "both" : "aut-quotient")
                                           : (rep.full.isomorphic ? "full" : "neither");
    return rep;
}

json voltage_to_json(const VoltageData& vd, const AppendixReport* rep) {
    json j = json::object();
    j["m"] = vd.m;
    j["p_power"] = vd.pm;
    json bases = json::object();
    for (int v = 0; v < vd.base.size(); ++v) bases[vd.base_j[v]] = vd.basis_unit[v];
    j["bases"] = std::move(bases);
    json alpha = json::object();
    for (std::size_t e = 0; e < vd.alpha.size(); ++e) {
        const GEdge& x = vd.base.edges[e];
        alpha[std::to_string(e)] = {{"src", vd.base_j[x.src]}, {"dst", vd.base_j[x.dst]}, {"alpha", vd.alpha[e]}};
    }
    j["alpha"] = std::move(alpha);
    j["tree_edges"] = vd.tree_edges;
    if (rep) {
        auto side = [](const AppendixSide& s) {
            json x = {{"isomorphic", s.isomorphic},
                      {"identification_ok", s.identification_ok},
                      {"vertices", s.vertices},
                      {"edges", s.edges}};
            if (!s.note.empty()) x["note"] = s.note;
            return x;
        };
        j["appendix"] = {{"level_vertices", rep->level_vertices},
                         {"level_edges", rep->level_edges},
                         {"aut_quotient", side(rep->quotient)},
                         {"full_group", side(rep->full)},
                         {"matching", rep->matching}};
    }
    return j;
}

}  // namespace lg
