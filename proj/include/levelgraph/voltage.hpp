#pragma once

#include "levelgraph/volcano.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lg {

// Generator t_E = unit[v] * Gp of E[p^m] for the curve of each base vertex.
struct VoltageBases {
    std::vector<std::int64_t> unit;
    std::vector<int> tree_edges;  // base edges along which bases were propagated
    bool tree_mode = false;
};

struct VoltageData {
    MultiDiGraph base;               // G_1^0
    std::vector<std::string> base_j;
    int m = 0;
    std::int64_t pm = 1;
    std::vector<std::int64_t> basis_unit;
    std::vector<std::int64_t> alpha;                  // per base edge, a unit mod p^m
    std::vector<std::vector<std::int64_t>> aut_units;  // per base vertex, action of Aut(E) on E[p^m]
    std::vector<int> tree_edges;
};

// Bottom of the tower for a level graph with N = 1, at the same working degrees.
IsogenyGraph voltage_base(const IsogenyGraph& level);

VoltageBases choose_bases(const IsogenyGraph& base, const IsogenyGraph& level, std::uint64_t seed,
                          bool tree_mode = false);
VoltageData compute_assignment(const IsogenyGraph& base, const IsogenyGraph& level, const VoltageBases& bases,
                               int jobs = 1);

// Units mod p^m, or their classes under the Aut action of each fiber when !full_group.
// fiber receives the base vertex of every derived vertex.
MultiDiGraph derived_graph(const VoltageData& vd, bool full_group, std::vector<int>* fiber = nullptr);

struct AppendixSide {
    bool isomorphic = false;
    bool identification_ok = false;  // (v, s) -> (E, s t_E) is itself an isomorphism
    int vertices = 0, edges = 0;
    std::string note;
};

struct AppendixReport {
    int level_vertices = 0, level_edges = 0;
    AppendixSide quotient, full;
    std::string matching;  // aut-quotient, full, both, neither
};
AppendixReport verify_appendix(const VoltageData& vd, const IsogenyGraph& level);

// Fiber-preserving isomorphism between directed multigraphs, by backtracking.
std::optional<std::vector<int>> fibered_iso(const MultiDiGraph& G, const std::vector<int>& fiber_g,
                                            const MultiDiGraph& H, const std::vector<int>& fiber_h,
                                            std::int64_t step_limit = 5000000);

json voltage_to_json(const VoltageData& vd, const AppendixReport* rep = nullptr);

}  // namespace lg
