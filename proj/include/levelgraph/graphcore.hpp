#pragma once

#include "levelgraph/numtheory.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lg {

using json = nlohmann::ordered_json;

enum class Color { none, blue, green };
std::string color_name(Color c);
Color parse_color(const std::string& s);

struct GVertex {
    std::string name;  // DOT identifier; defaults to v<id>
    std::string j, point;
    int level = -1;
    int component = -1;
};

struct GEdge {
    int src = 0, dst = 0;
    Color color = Color::none;
    std::string kernel;  // distinguishes parallel edges
    std::string style;   // DOT only, e.g. "dashed"
};

struct MultiDiGraph {
    std::vector<GVertex> vertices;
    std::vector<GEdge> edges;

    int add_vertex(GVertex v = {});
    int add_edge(int src, int dst, Color c = Color::none, std::string tag = {});
    int size() const { return static_cast<int>(vertices.size()); }
    std::string vertex_name(int v) const;
    std::vector<std::vector<int>> out_edges() const;
    std::vector<std::vector<int>> in_edges() const;
};

// Undirected components, each sorted, ordered by least vertex.
std::vector<std::vector<int>> components(const MultiDiGraph& G);
std::vector<int> component_labels(const MultiDiGraph& G);
// Induced subgraph on `verts`, in that order.
MultiDiGraph induced_subgraph(const MultiDiGraph& G, const std::vector<int>& verts, std::vector<int>* old_to_new = nullptr);

BigInt bareiss_determinant(std::vector<std::vector<BigInt>> M);
// Matrix-tree count on the undirected view; loops dropped, parallel edges kept.
BigInt spanning_tree_count(const MultiDiGraph& G);

// Direction- and color-preserving bijection V(G) -> V(H), or nullopt.
std::optional<std::vector<int>> colored_digraph_iso(const MultiDiGraph& G, const MultiDiGraph& H,
                                                    int fallback_limit = 64);
bool is_degree_one_regime(const MultiDiGraph& G);

struct GraphMeta {
    std::int64_t p = 0, l = 0, N = 0, m = 0;
    int base_degree = 0, working_degree = 0;
    json extra = json::object();  // additional top-level keys, kept in order
};

json to_json(const MultiDiGraph& G, const GraphMeta& meta);
std::pair<MultiDiGraph, GraphMeta> graph_from_json(const json& j);

// Vertex classes map onto the crater census styling; empty entries get no style.
std::string to_dot(const MultiDiGraph& G, const std::vector<std::string>& vertex_class = {});
std::string export_graph(const MultiDiGraph& G, const GraphMeta& meta, const std::string& format);

}  // namespace lg
