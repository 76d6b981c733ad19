#include "levelgraph/graphcore.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <tuple>

namespace lg {

std::string color_name(Color c) {
    switch (c) {
        case Color::blue: return "blue";
        case Color::green: return "green";
        default: return "none";
    }
}

Color parse_color(const std::string& s) {
    if (s == "blue") return Color::blue;
    if (s == "green") return Color::green;
    if (s == "none") return Color::none;
    throw ValidationError("unknown edge color '" + s + "'");
}

int MultiDiGraph::add_vertex(GVertex v) {
    vertices.push_back(std::move(v));
    return size() - 1;
}

int MultiDiGraph::add_edge(int src, int dst, Color c, std::string tag) {
    if (src < 0 || dst < 0 || src >= size() || dst >= size()) throw ValidationError("add_edge: endpoint out of range");
    edges.push_back(GEdge{src, dst, c, std::move(tag), {}});
    return static_cast<int>(edges.size()) - 1;
}

std::string MultiDiGraph::vertex_name(int v) const {
    const std::string& n = vertices[v].name;
    return n.empty() ? "v" + std::to_string(v) : n;
}

std::vector<std::vector<int>> MultiDiGraph::out_edges() const {
    std::vector<std::vector<int>> out(vertices.size());
    for (std::size_t e = 0; e < edges.size(); ++e) out[edges[e].src].push_back(static_cast<int>(e));
    return out;
}

std::vector<std::vector<int>> MultiDiGraph::in_edges() const {
    std::vector<std::vector<int>> in(vertices.size());
    for (std::size_t e = 0; e < edges.size(); ++e) in[edges[e].dst].push_back(static_cast<int>(e));
    return in;
}

std::vector<int> component_labels(const MultiDiGraph& G) {
    std::vector<int> parent(G.vertices.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (const auto& e : G.edges) {
        int a = find(e.src), b = find(e.dst);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    std::vector<int> label(G.vertices.size(), -1);
    int next = 0;
    std::map<int, int> root_label;
    for (int v = 0; v < G.size(); ++v) {
        int r = find(v);
        auto it = root_label.find(r);
        if (it == root_label.end()) it = root_label.emplace(r, next++).first;
        label[v] = it->second;
    }
    return label;
}

std::vector<std::vector<int>> components(const MultiDiGraph& G) {
    std::vector<int> label = component_labels(G);
    int n = label.empty() ? 0 : *std::max_element(label.begin(), label.end()) + 1;
    std::vector<std::vector<int>> out(n);
    for (int v = 0; v < G.size(); ++v) out[label[v]].push_back(v);
    return out;
}

MultiDiGraph induced_subgraph(const MultiDiGraph& G, const std::vector<int>& verts, std::vector<int>* old_to_new) {
    std::vector<int> map(G.vertices.size(), -1);
    MultiDiGraph H;
    for (int v : verts) map[v] = H.add_vertex(G.vertices[v]);
    for (const auto& e : G.edges)
        if (map[e.src] >= 0 && map[e.dst] >= 0) {
            GEdge f = e;
            f.src = map[e.src];
            f.dst = map[e.dst];
            H.edges.push_back(f);
        }
    if (old_to_new) *old_to_new = map;
    return H;
}

BigInt bareiss_determinant(std::vector<std::vector<BigInt>> M) {
    std::size_t n = M.size();
    if (n == 0) return 1;
    int sign = 1;
    BigInt prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (M[k][k] == 0) {
            std::size_t i = k + 1;
            while (i < n && M[i][k] == 0) ++i;
            if (i == n) return 0;
            std::swap(M[i], M[k]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) / prev;
            M[i][k] = 0;
        }
        prev = M[k][k];
    }
    return sign * M[n - 1][n - 1];
}

BigInt spanning_tree_count(const MultiDiGraph& G) {
    int n = G.size();
    if (n == 0) throw ValidationError("spanning_tree_count: empty graph");
    if (components(G).size() != 1) throw ValidationError("spanning_tree_count: graph is disconnected");
    if (n == 1) return 1;
    std::vector<std::vector<BigInt>> L(n - 1, std::vector<BigInt>(n - 1, 0));
    for (const auto& e : G.edges) {
        if (e.src == e.dst) continue;
        int a = e.src, b = e.dst;
        if (a < n - 1) L[a][a] += 1;
        if (b < n - 1) L[b][b] += 1;
        if (a < n - 1 && b < n - 1) {
            L[a][b] -= 1;
            L[b][a] -= 1;
        }
    }
    return bareiss_determinant(std::move(L));
}

namespace {

constexpr int kColors = 3;
int cidx(Color c) { return static_cast<int>(c); }

struct Adjacency {
    // per vertex, per color: list of out / in neighbours
    std::vector<std::array<std::vector<int>, kColors>> out, in;
    std::map<std::tuple<int, int, int>, int> mult;  // (src, dst, color) -> count
};

Adjacency adjacency(const MultiDiGraph& G) {
    Adjacency A;
    A.out.resize(G.vertices.size());
    A.in.resize(G.vertices.size());
    for (const auto& e : G.edges) {
        A.out[e.src][cidx(e.color)].push_back(e.dst);
        A.in[e.dst][cidx(e.color)].push_back(e.src);
        A.mult[{e.src, e.dst, cidx(e.color)}]++;
    }
    return A;
}

std::vector<int> signature(const Adjacency& A, int v) {
    std::vector<int> s;
    for (int c = 0; c < kColors; ++c) {
        s.push_back(static_cast<int>(A.out[v][c].size()));
        s.push_back(static_cast<int>(A.in[v][c].size()));
        auto it = A.mult.find({v, v, c});
        s.push_back(it == A.mult.end() ? 0 : it->second);
    }
    return s;
}

int multiplicity(const Adjacency& A, int u, int v, int c) {
    auto it = A.mult.find({u, v, c});
    return it == A.mult.end() ? 0 : it->second;
}

// Parallel walk from g -> h in the degree-one regime; extends `f`/`used` or fails.
bool rigid_walk(const Adjacency& AG, const Adjacency& AH, int g, int h, std::vector<int>& f, std::vector<int>& finv,
                std::vector<int>& touched) {
    std::vector<std::pair<int, int>> stack = {{g, h}};
    auto assign = [&](int a, int b) {
        if (f[a] == -1 && finv[b] == -1) {
            f[a] = b;
            finv[b] = a;
            touched.push_back(a);
            stack.emplace_back(a, b);
            return true;
        }
        return f[a] == b;
    };
    if (f[g] != -1 || finv[h] != -1) return false;
    f[g] = h;
    finv[h] = g;
    touched.push_back(g);
    while (!stack.empty()) {
        auto [a, b] = stack.back();
        stack.pop_back();
        for (int c = 0; c < kColors; ++c) {
            if (AG.out[a][c].size() != AH.out[b][c].size() || AG.in[a][c].size() != AH.in[b][c].size()) return false;
            if (!AG.out[a][c].empty() && !assign(AG.out[a][c][0], AH.out[b][c][0])) return false;
            if (!AG.in[a][c].empty() && !assign(AG.in[a][c][0], AH.in[b][c][0])) return false;
        }
    }
    return true;
}

}  // namespace

bool is_degree_one_regime(const MultiDiGraph& G) {
    Adjacency A = adjacency(G);
    for (int v = 0; v < G.size(); ++v)
        for (int c = 0; c < kColors; ++c)
            if (A.out[v][c].size() > 1 || A.in[v][c].size() > 1) return false;
    return true;
}

std::optional<std::vector<int>> colored_digraph_iso(const MultiDiGraph& G, const MultiDiGraph& H, int fallback_limit) {
    if (G.size() != H.size() || G.edges.size() != H.edges.size()) return std::nullopt;
    std::array<int, kColors> cg{}, ch{};
    for (const auto& e : G.edges) cg[cidx(e.color)]++;
    for (const auto& e : H.edges) ch[cidx(e.color)]++;
    if (cg != ch) return std::nullopt;
    int n = G.size();
    Adjacency AG = adjacency(G), AH = adjacency(H);
    std::vector<int> f(n, -1), finv(n, -1);

    if (is_degree_one_regime(G) && is_degree_one_regime(H)) {
        // components map greedily: isomorphic components are interchangeable
        for (const auto& comp : components(G)) {
            int g = comp[0];
            bool ok = false;
            for (int h = 0; h < n && !ok; ++h) {
                if (finv[h] != -1) continue;
                std::vector<int> touched;
                if (rigid_walk(AG, AH, g, h, f, finv, touched) && touched.size() == comp.size()) {
                    ok = true;
                } else {
                    for (int a : touched) {
                        finv[f[a]] = -1;
                        f[a] = -1;
                    }
                }
            }
            if (!ok) return std::nullopt;
        }
    } else {
        if (n > fallback_limit)
            throw ValidationError("colored_digraph_iso: graphs outside the degree-one regime exceed the fallback size");
        // BFS order over G so each vertex after the first of a component has a mapped neighbour
        std::vector<int> order;
        std::vector<char> seen(n, 0);
        auto out = G.out_edges(), in = G.in_edges();
        for (int s = 0; s < n; ++s) {
            if (seen[s]) continue;
            std::vector<int> q = {s};
            seen[s] = 1;
            for (std::size_t i = 0; i < q.size(); ++i) {
                order.push_back(q[i]);
                for (int e : out[q[i]])
                    if (!seen[G.edges[e].dst]) seen[G.edges[e].dst] = 1, q.push_back(G.edges[e].dst);
                for (int e : in[q[i]])
                    if (!seen[G.edges[e].src]) seen[G.edges[e].src] = 1, q.push_back(G.edges[e].src);
            }
        }
        std::vector<std::vector<int>> sigG(n), sigH(n);
        for (int v = 0; v < n; ++v) {
            sigG[v] = signature(AG, v);
            sigH[v] = signature(AH, v);
        }
        std::function<bool(std::size_t)> rec = [&](std::size_t k) {
            if (k == order.size()) return true;
            int v = order[k];
            for (int w = 0; w < n; ++w) {
                if (finv[w] != -1 || sigG[v] != sigH[w]) continue;
                bool ok = true;
                for (std::size_t i = 0; i < k && ok; ++i) {
                    int u = order[i], fu = f[u];
                    for (int c = 0; c < kColors && ok; ++c)
                        ok = multiplicity(AG, v, u, c) == multiplicity(AH, w, fu, c) &&
                             multiplicity(AG, u, v, c) == multiplicity(AH, fu, w, c);
                }
                if (!ok) continue;
                f[v] = w;
                finv[w] = v;
                if (rec(k + 1)) return true;
                f[v] = -1;
                finv[w] = -1;
            }
            return false;
        };
        if (!rec(0)) return std::nullopt;
    }
    // final verification of edge multiplicities
    for (const auto& [key, cnt] : AG.mult) {
        auto [a, b, c] = key;
        if (multiplicity(AH, f[a], f[b], c) != cnt) return std::nullopt;
    }
    return f;
}

json to_json(const MultiDiGraph& G, const GraphMeta& meta) {
    json j;
    j["p"] = meta.p;
    j["l"] = meta.l;
    j["N"] = meta.N;
    j["m"] = meta.m;
    j["base_degree"] = meta.base_degree;
    j["working_degree"] = meta.working_degree;
    json vs = json::array();
    for (int v = 0; v < G.size(); ++v) {
        const GVertex& x = G.vertices[v];
        json o;
        o["id"] = v;
        if (!x.name.empty()) o["name"] = x.name;
        o["j"] = x.j;
        o["point"] = x.point;
        o["level"] = x.level;
        o["component"] = x.component;
        vs.push_back(std::move(o));
    }
    j["vertices"] = std::move(vs);
    json es = json::array();
    for (const auto& e : G.edges) {
        json o;
        o["src"] = e.src;
        o["dst"] = e.dst;
        o["color"] = color_name(e.color);
        o["kernel"] = e.kernel;
        if (!e.style.empty()) o["style"] = e.style;
        es.push_back(std::move(o));
    }
    j["edges"] = std::move(es);
    for (auto it = meta.extra.begin(); it != meta.extra.end(); ++it) j[it.key()] = it.value();
    return j;
}

std::pair<MultiDiGraph, GraphMeta> graph_from_json(const json& j) {
    static const std::vector<std::string> core = {"p", "l", "N", "m", "base_degree", "working_degree", "vertices", "edges"};
    for (const auto& k : core)
        if (!j.contains(k)) throw ValidationError("graph JSON lacks key '" + k + "'");
    GraphMeta meta;
    meta.p = j["p"].get<std::int64_t>();
    meta.l = j["l"].get<std::int64_t>();
    meta.N = j["N"].get<std::int64_t>();
    meta.m = j["m"].get<std::int64_t>();
    meta.base_degree = j["base_degree"].get<int>();
    meta.working_degree = j["working_degree"].get<int>();
    for (auto it = j.begin(); it != j.end(); ++it)
        if (std::find(core.begin(), core.end(), it.key()) == core.end()) meta.extra[it.key()] = it.value();
    MultiDiGraph G;
    int expect = 0;
    for (const auto& o : j["vertices"]) {
        if (o.at("id").get<int>() != expect++) throw ValidationError("graph JSON: vertex ids must be 0..n-1 in order");
        GVertex v;
        if (o.contains("name")) v.name = o["name"].get<std::string>();
        v.j = o.at("j").get<std::string>();
        v.point = o.at("point").get<std::string>();
        v.level = o.at("level").get<int>();
        v.component = o.at("component").get<int>();
        G.add_vertex(std::move(v));
    }
    for (const auto& o : j["edges"]) {
        int e = G.add_edge(o.at("src").get<int>(), o.at("dst").get<int>(), parse_color(o.at("color").get<std::string>()),
                           o.at("kernel").get<std::string>());
        if (o.contains("style")) G.edges[e].style = o["style"].get<std::string>();
    }
    return {std::move(G), std::move(meta)};
}

std::string to_dot(const MultiDiGraph& G, const std::vector<std::string>& vertex_class) {
    std::ostringstream os;
    os << "digraph G {\n";
    for (int v = 0; v < G.size(); ++v) {
        os << "  " << G.vertex_name(v);
        std::string cls = v < static_cast<int>(vertex_class.size()) ? vertex_class[v] : "";
        if (cls == "central")
            os << " [class=central, style=filled, fillcolor=orange]";
        else if (cls == "blue_primary")
            os << " [class=blue_primary, style=filled, fillcolor=lightblue]";
        else if (cls == "green_primary")
            os << " [class=green_primary, style=filled, fillcolor=lightgreen]";
        else if (cls == "secondary")
            os << " [class=secondary, shape=box]";
        os << ";\n";
    }
    for (const auto& e : G.edges) {
        std::string col = e.color == Color::none ? "gray" : color_name(e.color);
        os << "  " << G.vertex_name(e.src) << " -> " << G.vertex_name(e.dst) << " [color=" << col;
        if (!e.style.empty()) os << ", style=" << e.style << ", class=" << e.style;
        os << "];\n";
    }
    os << "}\n";
    return os.str();
}

std::string export_graph(const MultiDiGraph& G, const GraphMeta& meta, const std::string& format) {
    if (format == "dot") return to_dot(G);
    if (format == "json") return to_json(G, meta).dump(1) + "\n";
    throw ValidationError("unknown export format '" + format + "'");
}

}  // namespace lg
