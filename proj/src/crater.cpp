#include "levelgraph/crater.hpp"

#include <algorithm>
#include <deque>
#include <numeric>
#include <set>

namespace lg {

std::string kind_name(CraterKind k) {
    switch (k) {
        case CraterKind::inert_isolated: return "inert-isolated";
        case CraterKind::ramified_loop: return "ramified-loop";
        case CraterKind::ramified_cycle: return "ramified-cycle";
        case CraterKind::split: return "split";
    }
    return "?";
}

Crater extract_crater(const IsogenyGraph& G) {
    Crater cr;
    std::vector<int> local(G.graph.size(), -1);
    for (int v = 0; v < G.graph.size(); ++v) {
        if (G.graph.vertices[v].level != 0) continue;
        local[v] = cr.graph.add_vertex(G.graph.vertices[v]);
        cr.vertex_origin.push_back(v);
    }
    for (std::size_t e = 0; e < G.graph.edges.size(); ++e) {
        const GEdge& x = G.graph.edges[e];
        if (local[x.src] < 0 || local[x.dst] < 0) continue;
        GEdge y = x;
        y.src = local[x.src];
        y.dst = local[x.dst];
        cr.graph.edges.push_back(std::move(y));
        cr.edge_origin.push_back(static_cast<int>(e));
    }
    cr.components = components(cr.graph);
    return cr;
}

namespace {

std::vector<int> horizontal_kernels(const IsogenyGraph& G, int c) {
    std::vector<int> h;
    const CurveData& cd = G.curves[c];
    if (cd.level != 0) return h;
    for (std::size_t k = 0; k < cd.kernels.size(); ++k) {
        int t = cd.kernels[k].target;
        if (t >= 0 && G.curves[t].level == 0) h.push_back(static_cast<int>(k));
    }
    return h;
}

std::int64_t eigen_of(const IsogenyGraph& G, int c, int k) {
    const auto& e = G.curves[c].kernels[k].eigenvalue;
    if (!e) throw VerificationError("horizontal kernel of j=" + G.curves[c].j + " is not Frobenius-stable");
    return *e;
}

}  // namespace

int color_edges(IsogenyGraph& G, bool opposite) {
    for (GEdge& e : G.graph.edges) e.color = Color::none;
    const int nc = static_cast<int>(G.curves.size());
    const std::int64_t l = G.params.l;
    std::vector<int> blue(nc, -1), green(nc, -1);

    for (int a = 0; a < nc; ++a) {
        const CurveData& ca = G.curves[a];
        if (ca.level != 0 || blue[a] >= 0 || kronecker(ca.dK, l) != 1) continue;
        auto h = horizontal_kernels(G, a);
        if (h.size() != 2)
            throw VerificationError("split crater curve j=" + ca.j + " has " + std::to_string(h.size()) +
                                    " horizontal kernels");
        int b = h[0], g = h[1];
        if (std::make_pair(eigen_of(G, a, g), g) < std::make_pair(eigen_of(G, a, b), b)) std::swap(b, g);
        if (opposite) std::swap(b, g);
        blue[a] = b;
        green[a] = g;
        std::int64_t lam_b = eigen_of(G, a, b), lam_g = eigen_of(G, a, g);

        std::deque<int> todo{a};
        while (!todo.empty()) {
            int c = todo.front();
            todo.pop_front();
            const CurveData& cd = G.curves[c];
            if (lam_b != lam_g && std::llabs(cd.trace) == std::llabs(ca.trace)) {
                std::int64_t want = cd.trace == ca.trace ? lam_b : mod(-lam_b, l);
                if (eigen_of(G, c, blue[c]) != want)
                    throw VerificationError("blue eigenvalue drifts across the crater at j=" + cd.j);
            }
            for (int step = 0; step < 2; ++step) {
                int k = step == 0 ? blue[c] : green[c];
                int o = step == 0 ? green[c] : blue[c];
                const KernelData& kd = cd.kernels[k];
                int d = kd.target;
                int img = kd.line_image.empty() ? -1 : kd.line_image[o];
                auto hd = horizontal_kernels(G, d);
                if (img < 0 || hd.size() != 2 || (hd[0] != img && hd[1] != img))
                    throw VerificationError("kernel image missing on the crater at j=" + G.curves[d].j);
                int rest = hd[0] == img ? hd[1] : hd[0];
                int nb = step == 0 ? rest : img;
                int ng = step == 0 ? img : rest;
                if (blue[d] < 0) {
                    blue[d] = nb;
                    green[d] = ng;
                    todo.push_back(d);
                } else if (blue[d] != nb || green[d] != ng) {
                    throw VerificationError("inconsistent crater coloring at j=" + G.curves[d].j);
                }
            }
        }
    }

    int n = 0;
    for (std::size_t e = 0; e < G.graph.edges.size(); ++e) {
        if (!G.horizontal(static_cast<int>(e))) continue;
        int c = G.vdata[G.graph.edges[e].src].curve;
        if (blue[c] < 0) continue;
        int k = G.edge_kernel[e];
        if (k == blue[c]) G.graph.edges[e].color = Color::blue;
        else if (k == green[c]) G.graph.edges[e].color = Color::green;
        else continue;
        ++n;
    }
    return n;
}

namespace {

struct Walker {
    std::vector<int> id;  // local -> graph vertex
    std::vector<int> loc;
    std::vector<int> blue, green, plain;  // successors, local
};

void fail(const std::string& why) { throw VerificationError("crater classification: " + why); }

std::vector<int> cycle_from(const std::vector<int>& next, int a) {
    std::vector<int> cyc{a};
    for (int v = next[a]; v != a; v = next[v]) {
        cyc.push_back(v);
        if (cyc.size() > next.size()) fail("walk does not close");
    }
    return cyc;
}

}  // namespace

CraterProfile classify_component(const MultiDiGraph& C, const std::vector<int>& comp, int anchor) {
    if (comp.empty()) fail("empty component");
    CraterProfile P;
    P.vertices = comp;
    std::sort(P.vertices.begin(), P.vertices.end());
    const int n = static_cast<int>(P.vertices.size());
    P.vertex_count = n;
    P.anchor = anchor < 0 ? P.vertices.front() : anchor;

    Walker W;
    W.id = P.vertices;
    W.loc.assign(C.size(), -1);
    for (int i = 0; i < n; ++i) W.loc[W.id[i]] = i;
    if (W.loc[P.anchor] < 0) fail("anchor outside the component");
    W.blue.assign(n, -1);
    W.green.assign(n, -1);
    W.plain.assign(n, -1);
    std::vector<int> in_b(n), in_g(n), in_p(n);
    int colored = 0, uncolored = 0;
    for (const GEdge& e : C.edges) {
        if (e.src < 0 || e.src >= C.size() || W.loc[e.src] < 0) continue;
        int s = W.loc[e.src], d = W.loc[e.dst];
        if (d < 0) fail("edge leaves the component");
        if (e.src == e.dst) P.has_loops = true;
        std::vector<int>* next = &W.plain;
        std::vector<int>* in = &in_p;
        if (e.color == Color::blue) next = &W.blue, in = &in_b, ++colored;
        else if (e.color == Color::green) next = &W.green, in = &in_g, ++colored;
        else ++uncolored;
        if ((*next)[s] >= 0) fail("two out-edges of one color at " + C.vertex_name(e.src));
        (*next)[s] = d;
        ++(*in)[d];
    }
    const int a = W.loc[P.anchor];

    if (colored == 0) {
        if (uncolored == 0) {
            if (n != 1) fail("edgeless component with several vertices");
            P.kind = CraterKind::inert_isolated;
            return P;
        }
        for (int i = 0; i < n; ++i)
            if (W.plain[i] < 0 || in_p[i] != 1) fail("non-split component is not a directed cycle");
        auto cyc = cycle_from(W.plain, a);
        if (static_cast<int>(cyc.size()) != n) fail("non-split component is not a single cycle");
        P.kind = n == 1 ? CraterKind::ramified_loop : CraterKind::ramified_cycle;
        P.length = n;
        return P;
    }
    if (uncolored) fail("split component with uncolored edges");
    for (int i = 0; i < n; ++i)
        if (W.blue[i] < 0 || W.green[i] < 0 || in_b[i] != 1 || in_g[i] != 1)
            fail("split component outside the one-edge-per-color regime at " + C.vertex_name(W.id[i]));
    P.kind = CraterKind::split;

    auto bcyc = cycle_from(W.blue, a);
    auto gcyc = cycle_from(W.green, a);
    P.h1 = static_cast<std::int64_t>(bcyc.size());
    P.h2 = static_cast<std::int64_t>(gcyc.size());
    std::vector<int> gidx(n, -1);
    for (std::size_t k = 0; k < gcyc.size(); ++k) gidx[gcyc[k]] = static_cast<int>(k);
    std::int64_t k = -1;
    for (std::int64_t i = 1; i <= P.h1; ++i) {
        int v = bcyc[i % P.h1];
        if (gidx[v] >= 0) {
            P.s = i;
            k = gidx[v];
            break;
        }
    }
    if (P.h1 % P.s) fail("s does not divide h1");
    P.omega = P.h1 / P.s;
    if ((P.s * P.h2) % P.h1) fail("s*h2/h1 is not an integer");
    P.t = P.s * P.h2 / P.h1;
    if (P.h2 != P.t * P.omega) fail("h1/s differs from h2/t");
    if (k % P.t) fail("green index of the first meeting is not a multiple of t");
    P.c = (k / P.t) % P.omega;
    if (P.c == 0) P.c = P.omega;
    if (gcd64(P.c, P.omega) != 1) fail("c is not coprime to h2/t");

    // 0 central, 1 blue primary, 2 green primary, 3 secondary
    std::vector<int> cls(n, 3);
    std::set<int> central;
    for (std::int64_t i = 0; i < P.h1; i += P.s) central.insert(bcyc[i]);
    std::set<int> central_g;
    for (std::int64_t i = 0; i < P.h2; i += P.t) central_g.insert(gcyc[i]);
    if (central != central_g) fail("central vertices differ along blue and green cycles");
    for (int v : bcyc) cls[v] = central.count(v) ? 0 : 1;
    for (int v : gcyc) {
        if (central.count(v)) continue;
        if (cls[v] == 1) fail("vertex is both blue and green primary");
        cls[v] = 2;
    }
    // secondaries seen from either color must agree with the remainder
    auto interior = [&](const std::vector<int>& next, int ends) {
        std::set<int> out;
        for (int w = 0; w < n; ++w) {
            if (cls[w] != ends) continue;
            std::vector<int> path;
            int v = next[w];
            for (int steps = 0; cls[v] != ends && steps < n; ++steps) {
                path.push_back(v);
                v = next[v];
            }
            if (cls[v] != ends) fail("open path between primary vertices");
            out.insert(path.begin(), path.end());
        }
        return out;
    };
    std::set<int> bsec = interior(W.blue, 2), gsec = interior(W.green, 1), rest;
    for (int v = 0; v < n; ++v)
        if (cls[v] == 3) rest.insert(v);
    if (bsec != gsec) fail("blue and green secondary sets differ");
    if (bsec != rest) fail("secondary vertices do not fill the remainder");

    for (int v = 0; v < n; ++v) {
        switch (cls[v]) {
            case 0: ++P.census.central; break;
            case 1: ++P.census.blue_primary; break;
            case 2: ++P.census.green_primary; break;
            default: ++P.census.secondary; break;
        }
    }
    const Census& cs = P.census;
    if (cs.central != P.omega) fail("central count differs from h1/s");
    if (cs.blue_primary != P.h1 * (P.s - 1) / P.s) fail("blue primary count");
    if (cs.green_primary != P.h2 * (P.t - 1) / P.t) fail("green primary count");
    if (cs.secondary != P.h1 * (P.s - 1) * (P.t - 1) / P.s) fail("secondary count");
    if (n != P.s * P.t * P.omega) fail("vertex count differs from s*t*omega");

    static const char* names[] = {"central", "blue_primary", "green_primary", "secondary"};
    for (int v = 0; v < n; ++v) P.vertex_class.push_back(names[cls[v]]);
    P.principal = principal_case(C, comp, P);
    return P;
}

PrincipalCase principal_case(const MultiDiGraph& C, const std::vector<int>& comp, const CraterProfile& prof) {
    PrincipalCase none;
    if (prof.kind != CraterKind::split || prof.has_loops) return none;
    std::vector<int> verts = comp;
    std::sort(verts.begin(), verts.end());
    const std::int64_t u = static_cast<std::int64_t>(verts.size());
    std::vector<int> loc(C.size(), -1), blue(u, -1), green(u, -1);
    for (std::int64_t i = 0; i < u; ++i) loc[verts[i]] = static_cast<int>(i);
    for (const GEdge& e : C.edges) {
        if (loc[e.src] < 0) continue;
        (e.color == Color::blue ? blue : green)[loc[e.src]] = loc[e.dst];
    }
    const int a = loc[prof.anchor];
    const std::int64_t hi = std::max(prof.h1, prof.h2), lo = std::min(prof.h1, prof.h2);

    if (hi % lo == 0 && u == hi) {
        const auto& lng = prof.h1 >= prof.h2 ? blue : green;
        const auto& sht = prof.h1 >= prof.h2 ? green : blue;
        std::vector<std::int64_t> pos(u, -1);
        int v = a;
        for (std::int64_t i = 0; i < u; ++i, v = lng[v]) pos[v] = i;
        std::int64_t r = pos[sht[a]];
        if (r == 0) r = u;
        for (int w = 0; w < u; ++w)
            if (pos[sht[w]] != (pos[w] + r) % u) return none;
        PrincipalCase pc;
        pc.which = 1;
        pc.u = u;
        pc.r = r;
        return pc;
    }
    if (u != lcm64(prof.h1, prof.h2)) return none;

    const std::int64_t t1 = u / prof.h1, t2 = u / prof.h2, z = gcd64(prof.h1, prof.h2);
    int g = a;
    for (std::int64_t i = 0; i < t1; ++i) g = green[g];
    std::int64_t r0 = -1;
    int b = a;
    for (std::int64_t j = 0; j < prof.h1; ++j, b = blue[b])
        if (b == g && j % t2 == 0) {
            r0 = j / t2;
            break;
        }
    if (r0 < 0) return none;
    std::int64_t r = -1;
    for (std::int64_t x = r0; x < r0 + u * z + 1; x += z)
        if (x > 0 && gcd64(x, u) == 1) {
            r = x % u;
            break;
        }
    if (r < 0) return none;

    std::vector<std::int64_t> idx(u, -1);
    std::vector<char> used(u, 0);
    idx[a] = 0;
    used[0] = 1;
    std::deque<int> todo{a};
    while (!todo.empty()) {
        int v = todo.front();
        todo.pop_front();
        std::pair<int, std::int64_t> moves[2] = {{blue[v], t1}, {green[v], mulmod(r, t2, u)}};
        for (auto [w, step] : moves) {
            std::int64_t want = (idx[v] + step) % u;
            if (idx[w] < 0) {
                if (used[want]) return none;
                idx[w] = want;
                used[want] = 1;
                todo.push_back(w);
            } else if (idx[w] != want) {
                return none;
            }
        }
    }
    PrincipalCase pc;
    pc.which = 2;
    pc.u = u;
    pc.r = r;
    pc.t1 = t1;
    pc.t2 = t2;
    return pc;
}

json profile_to_json(const CraterProfile& P) {
    json j;
    j["kind"] = kind_name(P.kind);
    bool split = P.kind == CraterKind::split;
    auto num = [&](std::int64_t x) { return split ? json(x) : json(nullptr); };
    j["h1"] = num(P.h1);
    j["h2"] = num(P.h2);
    j["s"] = num(P.s);
    j["t"] = num(P.t);
    j["c"] = num(P.c);
    j["omega"] = num(P.omega);
    if (split)
        j["census"] = {{"central", P.census.central},
                       {"blue_primary", P.census.blue_primary},
                       {"green_primary", P.census.green_primary},
                       {"secondary", P.census.secondary}};
    else
        j["census"] = nullptr;
    json pc;
    switch (P.principal.which) {
        case 1: pc = {{"case", "case1"}, {"u", P.principal.u}, {"r", P.principal.r}}; break;
        case 2:
            pc = {{"case", "case2"}, {"u", P.principal.u}, {"t1", P.principal.t1},
                  {"t2", P.principal.t2}, {"r", P.principal.r}};
            break;
        default: pc = {{"case", "not-applicable"}}; break;
    }
    j["principal_case"] = pc;
    if (P.kind == CraterKind::ramified_cycle) j["length"] = P.length;
    j["vertex_count"] = P.vertex_count;
    j["anchor"] = P.anchor;
    j["has_loops"] = P.has_loops;
    return j;
}

std::vector<std::string> vertex_classes(const MultiDiGraph& C, const std::vector<CraterProfile>& profiles) {
    std::vector<std::string> out(C.size());
    for (const CraterProfile& P : profiles)
        for (std::size_t i = 0; i < P.vertex_class.size(); ++i) out[P.vertices[i]] = P.vertex_class[i];
    return out;
}

}  // namespace lg
