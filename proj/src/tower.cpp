#include "levelgraph/tower.hpp"

#include "levelgraph/parallel.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace lg {

Stabilization stabilization_level(std::int64_t N, std::int64_t p, std::int64_t l) {
    if (N < 1 || p < 2 || gcd64(l, N * p) != 1) throw ValidationError("stabilization: need gcd(l, Np) = 1");
    std::vector<std::int64_t> ord{0};
    std::int64_t M = N;
    const std::int64_t limit = std::int64_t(1) << 50;
    while (M <= limit / p) {
        M *= p;
        ord.push_back(multiplicative_order(mod(l, M), M));
    }
    int top = static_cast<int>(ord.size()) - 1;
    if (top < 3) throw ValidationError("stabilization: N p^3 too large");
    int m0 = top;
    while (m0 > 1 && ord[m0] == p * ord[m0 - 1]) --m0;
    return {m0, ord[m0]};
}

bool TowerLevel::deck_ok(std::int64_t p) const {
    return deck_count == ipow64(p, static_cast<unsigned>(r)) && action_ok && action_free;
}

bool TowerReport::verified() const {
    if (levels.empty()) return false;
    for (const TowerLevel& L : levels) {
        if (!L.cover_ok || !L.unique_lift || !L.fibers_ok || !L.deck_ok(base.p) || L.kappa <= 0) return false;
        if (L.h_components != levels[0].h_components) return false;
    }
    return true;
}

IwasawaFit iwasawa_fit(const std::vector<std::int64_t>& ords, std::int64_t p) {
    IwasawaFit fit;
    int n = static_cast<int>(ords.size());
    if (n < 3 || p < 2 || n > 40) return fit;
    auto pw = [&](int k) { return static_cast<__int128>(ipow64(p, static_cast<unsigned>(k))); };
    int n0 = n - 3;
    __int128 d1 = ords[n0 + 1] - ords[n0], d2 = ords[n0 + 2] - ords[n0 + 1];
    __int128 den = pw(n0) * (p - 1) * (p - 1);
    if ((d2 - d1) % den != 0) return fit;
    __int128 mu = (d2 - d1) / den;
    __int128 lambda = d1 - mu * (pw(n0 + 1) - pw(n0));
    if (mu < 0 || lambda < 0) return fit;
    __int128 nu = ords[n0] - mu * pw(n0) - lambda * n0;
    int start = n0;
    while (start > 0 && mu * pw(start - 1) + lambda * (start - 1) + nu == ords[start - 1]) --start;
    fit.ok = true;
    fit.mu = static_cast<std::int64_t>(mu);
    fit.lambda = static_cast<std::int64_t>(lambda);
    fit.nu = static_cast<std::int64_t>(nu);
    fit.n_start = start;
    return fit;
}

namespace {

constexpr std::int64_t kTowerVertexBudget = 20000;

bool curve_isolated(const CurveData& c) {
    for (const KernelData& k : c.kernels)
        if (k.target >= 0) return false;
    return true;
}

int default_rmax(const BuildParams& base, int m0) {
    int best = 0;
    for (int r = 0; r <= 8; ++r) {
        BuildParams bp = base;
        bp.m = m0 + r;
        DegreePlan plan = plan_degrees(bp);
        std::int64_t total = 0;
        bool any = false, rejected = false;
        for (const GroupPlan& g : plan.groups) {
            if (g.degree) {
                any = true;
                total += g.predicted_vertices;
            } else {
                rejected = true;
            }
        }
        if (!any || (rejected && !base.partial) || total > kTowerVertexBudget) break;
        best = r;
    }
    return best;
}

std::string resolve_anchor(const BuildParams& bp, const std::string& j) {
    if (j.empty() || j.find('^') != std::string::npos) return j;
    try {
        return make_field(bp.p, bp.deg)->serialize(make_field(bp.p, bp.deg)->from_int(std::stoll(j)));
    } catch (const std::invalid_argument&) {
        throw ValidationError("anchor '" + j + "' is neither an integer nor an element serial");
    }
}

// vertices of G lying over the base component, provided they form one component
std::vector<int> lift_component(const IsogenyGraph& G, const std::vector<int>& vmap, const std::vector<char>& in_base,
                                bool& unique) {
    std::vector<int> label = component_labels(G.graph);
    std::set<int> hit;
    for (int v = 0; v < G.graph.size(); ++v)
        if (vmap[v] >= 0 && in_base[vmap[v]]) hit.insert(label[v]);
    unique = hit.size() == 1;
    std::vector<int> out;
    for (int v = 0; v < G.graph.size(); ++v)
        if (hit.count(label[v])) out.push_back(v);
    return out;
}

std::vector<std::pair<int, int>> edge_pairs(const IsogenyGraph& G, const std::vector<char>& inside,
                                            const std::vector<int>& relabel) {
    std::vector<std::pair<int, int>> out;
    for (const GEdge& e : G.graph.edges)
        if (inside[e.src]) out.emplace_back(relabel[e.src], relabel[e.dst]);
    std::sort(out.begin(), out.end());
    return out;
}

// Deck transformations of the anchor component over the bottom level, found by lifting
// paths from a single vertex.
std::int64_t count_deck(const IsogenyGraph& G, const std::vector<int>& comp, const Projection& pr) {
    int n = G.graph.size();
    std::vector<char> inside(n, 0);
    for (int v : comp) inside[v] = 1;
    std::vector<int> ident(n);
    for (int v = 0; v < n; ++v) ident[v] = v;
    auto original = edge_pairs(G, inside, ident);
    int v0 = comp.front();
    std::int64_t count = 0;
    for (int w : comp) {
        if (pr.vertex_map[w] != pr.vertex_map[v0]) continue;
        std::vector<int> psi(n, -1);
        psi[v0] = w;
        std::vector<int> queue{v0};
        bool ok = true;
        auto step = [&](int y, int image) {
            if (psi[y] < 0) {
                psi[y] = image;
                queue.push_back(y);
            } else if (psi[y] != image) {
                ok = false;
            }
        };
        for (std::size_t qi = 0; qi < queue.size() && ok; ++qi) {
            int x = queue[qi], fx = psi[x];
            for (int e : G.out_[x]) {
                int img = -1;
                for (int f : G.out_[fx])
                    if (pr.edge_map[f] == pr.edge_map[e]) img = G.graph.edges[f].dst;
                if (img < 0) ok = false;
                else step(G.graph.edges[e].dst, img);
            }
            for (int e : G.in_[x]) {
                int img = -1;
                for (int f : G.in_[fx])
                    if (pr.edge_map[f] == pr.edge_map[e]) img = G.graph.edges[f].src;
                if (img < 0) ok = false;
                else step(G.graph.edges[e].src, img);
            }
        }
        if (!ok || queue.size() != comp.size()) continue;
        std::set<int> image;
        for (int v : comp) {
            if (!inside[psi[v]] || pr.vertex_map[psi[v]] != pr.vertex_map[v]) ok = false;
            image.insert(psi[v]);
        }
        if (!ok || image.size() != comp.size()) continue;
        if (edge_pairs(G, inside, psi) != original) continue;
        ++count;
    }
    return count;
}

}  // namespace

TowerReport build_tower(const BuildParams& base, int r_max, const std::string& anchor_j) {
    validate(base);
    TowerReport rep;
    rep.base = base;
    rep.stab = stabilization_level(base.N, base.p, base.l);
    const int m0 = rep.stab.m0;
    if (r_max < 0) r_max = default_rmax(base, m0);

    std::vector<IsogenyGraph> G;
    for (int r = r_max; r >= 0 && G.empty(); --r) {
        BuildParams bp = base;
        bp.m = m0 + r;
        try {
            G.push_back(build_graph(bp));
            G.resize(r + 1);
            std::swap(G.front(), G.back());
        } catch (const BudgetError& e) {
            if (r == 0) throw;
            rep.truncated = true;
            rep.truncation_reason = "level m=" + std::to_string(m0 + r) + ": " + e.what();
        }
    }
    const int top = static_cast<int>(G.size()) - 1;
    for (int r = 0; r < top; ++r) G[r] = build_projection_base(G[top], base.N, m0 + r);

    const IsogenyGraph& B = G[0];
    std::set<std::string> live;
    for (const CurveData& c : B.curves) {
        if (curve_isolated(c)) rep.isolated_curves.push_back(c.j);
        else live.insert(c.j);
    }
    std::string want = resolve_anchor(base, anchor_j);
    int anchor_curve = -1;
    for (std::size_t c = 0; c < B.curves.size() && anchor_curve < 0; ++c)
        if (live.count(B.curves[c].j) && (want.empty() || B.curves[c].j == want)) anchor_curve = static_cast<int>(c);
    if (anchor_curve < 0)
        throw ValidationError(want.empty() ? "tower: every curve is isolated"
                                           : "tower: anchor " + want + " is absent or isolated");
    rep.anchor_j = B.curves[anchor_curve].j;

    int anchor_vertex = -1;
    for (int v = 0; v < B.graph.size() && anchor_vertex < 0; ++v)
        if (B.vdata[v].curve == anchor_curve) anchor_vertex = v;
    std::vector<int> base_label = component_labels(B.graph);
    std::vector<char> in_anchor(B.graph.size(), 0);
    for (int v = 0; v < B.graph.size(); ++v) in_anchor[v] = base_label[v] == base_label[anchor_vertex];

    std::vector<std::vector<int>> comp(top + 1);
    for (int v = 0; v < B.graph.size(); ++v)
        if (in_anchor[v]) comp[0].push_back(v);

    const std::int64_t p = base.p;
    const std::int64_t bottom_order = base.N * ipow64(p, static_cast<unsigned>(m0));
    rep.levels.resize(top + 1);
    for (int r = 0; r <= top; ++r) {
        const IsogenyGraph& H = G[r];
        TowerLevel& L = rep.levels[r];
        L.m = m0 + r;
        L.r = r;
        L.graph_vertices = H.graph.size();
        L.graph_edges = static_cast<int>(H.graph.edges.size());
        std::vector<int> label = component_labels(H.graph);
        std::set<int> hl;
        for (int v = 0; v < H.graph.size(); ++v)
            if (live.count(H.curves[H.vdata[v].curve].j)) {
                L.h_vertices++;
                hl.insert(label[v]);
            }
        L.h_components = static_cast<int>(hl.size());

        Projection down = r == 0 ? Projection{} : project(H, B);
        if (r == 0) {
            down.vertex_map.resize(H.graph.size());
            down.edge_map.resize(H.graph.edges.size());
            std::iota(down.vertex_map.begin(), down.vertex_map.end(), 0);
            std::iota(down.edge_map.begin(), down.edge_map.end(), 0);
        } else {
            comp[r] = lift_component(H, down.vertex_map, in_anchor, L.unique_lift);
            if (!L.unique_lift) L.failures.push_back("more than one component lies over the anchor");
        }
        L.vertices = static_cast<int>(comp[r].size());
        std::vector<char> inside(H.graph.size(), 0);
        for (int v : comp[r]) inside[v] = 1;
        for (const GEdge& e : H.graph.edges)
            if (inside[e.src]) L.edges++;

        const std::int64_t deg_expect = ipow64(p, static_cast<unsigned>(r));
        if (r > 0) {
            std::vector<int> o2n_hi, o2n_lo, o2n_b;
            MultiDiGraph cover = induced_subgraph(H.graph, comp[r], &o2n_hi);
            Projection prev = project(H, G[r - 1]);
            MultiDiGraph below = induced_subgraph(G[r - 1].graph, comp[r - 1], &o2n_lo);
            std::vector<int> vmap;
            for (int v : comp[r]) vmap.push_back(prev.vertex_map[v] < 0 ? -1 : o2n_lo[prev.vertex_map[v]]);
            CoverReport cr = verify_covering(cover, below, vmap);
            L.cover_degree = cr.degree;
            MultiDiGraph bottom = induced_subgraph(B.graph, comp[0], &o2n_b);
            vmap.clear();
            for (int v : comp[r]) vmap.push_back(down.vertex_map[v] < 0 ? -1 : o2n_b[down.vertex_map[v]]);
            CoverReport cb = verify_covering(cover, bottom, vmap);
            L.base_degree = cb.degree;
            L.cover_ok = cr.is_cover && cb.is_cover && cr.degree == p && cb.degree == deg_expect;
            if (!L.cover_ok) {
                L.failures.push_back("covering check failed");
                for (const auto& f : cr.failures) L.failures.push_back(f);
            }
        }

        // fibers over every non-isolated bottom vertex are orbits of l^c
        const std::int64_t order = H.order();
        std::map<int, std::vector<int>> fiber;
        for (int v = 0; v < H.graph.size(); ++v)
            if (down.vertex_map[v] >= 0 && live.count(B.curves[B.vdata[down.vertex_map[v]].curve].j))
                fiber[down.vertex_map[v]].push_back(v);
        for (int w = 0; w < B.graph.size(); ++w)
            if (live.count(B.curves[B.vdata[w].curve].j) && !fiber.count(w)) L.fibers_ok = false;
        const std::int64_t lc = powmod(mod(base.l, order), static_cast<std::uint64_t>(rep.stab.c), order);
        for (const auto& [w, f] : fiber) {
            std::set<int> orbit;
            std::int64_t k = 1;
            for (std::int64_t n = 0; n < deg_expect; ++n) {
                orbit.insert(H.scalar_vertex(f.front(), k));
                k = mulmod(k, lc, order);
            }
            if (static_cast<std::int64_t>(f.size()) != deg_expect || orbit != std::set<int>(f.begin(), f.end()))
                L.fibers_ok = false;
        }
        if (!L.fibers_ok) L.failures.push_back("a fiber differs from the predicted l^c orbit");

        // the subgroup U of units congruent to 1 modulo the bottom level
        std::vector<int> ident(H.graph.size());
        for (int v = 0; v < H.graph.size(); ++v) ident[v] = v;
        auto original = edge_pairs(H, inside, ident);
        for (std::int64_t k = 0; k < deg_expect; ++k) {
            std::int64_t a = 1 + k * bottom_order;
            std::vector<int> img(H.graph.size(), -1);
            std::set<int> seen;
            for (int v : comp[r]) {
                int w = H.scalar_vertex(v, a);
                img[v] = w;
                seen.insert(w);
                if (w < 0 || !inside[w] || down.vertex_map[w] != down.vertex_map[v]) L.action_ok = false;
                if (k > 0 && w == v) L.action_free = false;
            }
            if (seen.size() != comp[r].size()) L.action_ok = false;
            if (L.action_ok && edge_pairs(H, inside, img) != original) L.action_ok = false;
        }
        if (!L.action_ok) L.failures.push_back("the scalar action is not a deck transformation");
        if (!L.action_free) L.failures.push_back("the scalar action has a fixed point");
        L.deck_count = count_deck(H, comp[r], down);
        if (L.deck_count != deg_expect) L.failures.push_back("deck transformation count differs from p^r");
    }

    parallel_for(top + 1, base.jobs, [&](int r) {
        TowerLevel& L = rep.levels[r];
        L.kappa = spanning_tree_count(induced_subgraph(G[r].graph, comp[r]));
        L.ord_p_kappa = L.kappa > 0 ? valuation(L.kappa, p) : 0;
    });

    std::vector<std::int64_t> ords;
    for (const TowerLevel& L : rep.levels) ords.push_back(L.ord_p_kappa);
    rep.fit = iwasawa_fit(ords, p);
    return rep;
}

json tower_to_json(const TowerReport& rep) {
    json j = json::object();
    j["p"] = rep.base.p;
    j["deg"] = rep.base.deg;
    j["l"] = rep.base.l;
    j["N"] = rep.base.N;
    j["m0"] = rep.stab.m0;
    j["c"] = rep.stab.c;
    j["anchor"] = rep.anchor_j;
    j["isolated_curves"] = rep.isolated_curves;
    j["truncated"] = rep.truncated;
    if (rep.truncated) j["truncation_reason"] = rep.truncation_reason;
    json levels = json::array();
    for (const TowerLevel& L : rep.levels) {
        json x = json::object();
        x["m"] = L.m;
        x["r"] = L.r;
        x["graph_vertices"] = L.graph_vertices;
        x["graph_edges"] = L.graph_edges;
        x["h_vertices"] = L.h_vertices;
        x["h_components"] = L.h_components;
        x["vertices"] = L.vertices;
        x["edges"] = L.edges;
        x["cover_degree"] = L.cover_degree;
        x["base_degree"] = L.base_degree;
        x["cover_ok"] = L.cover_ok;
        x["deck"] = {{"count", L.deck_count},
                     {"expected", ipow64(rep.base.p, static_cast<unsigned>(L.r))},
                     {"action_ok", L.action_ok},
                     {"free", L.action_free},
                     {"verified", L.deck_ok(rep.base.p)}};
        x["fibers_ok"] = L.fibers_ok;
        x["kappa"] = L.kappa.str();
        x["ord_p_kappa"] = L.ord_p_kappa;
        x["failures"] = L.failures;
        levels.push_back(std::move(x));
    }
    j["levels"] = std::move(levels);
    if (rep.fit.ok) {
        j["fit"] = {{"mu", rep.fit.mu},
                    {"lambda", rep.fit.lambda},
                    {"nu", rep.fit.nu},
                    {"n_start", rep.fit.n_start},
                    {"n_end", static_cast<int>(rep.levels.size()) - 1}};
    } else {
        j["fit"] = "insufficient levels";
    }
    j["verified"] = rep.verified();
    return j;
}

}  // namespace lg
