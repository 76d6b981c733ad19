#pragma once

#include "levelgraph/volcano.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lg {

struct Stabilization {
    int m0 = 1;
    std::int64_t c = 1;  // ord of l mod N p^m is c p^(m - m0) for m >= m0
};
Stabilization stabilization_level(std::int64_t N, std::int64_t p, std::int64_t l);

struct TowerLevel {
    int m = 0, r = 0;
    int graph_vertices = 0, graph_edges = 0;  // whole G_N^m
    int h_vertices = 0, h_components = 0;     // subgraph on non-isolated curves
    int vertices = 0, edges = 0;              // anchor component
    int cover_degree = 1;                     // onto the previous level, 1 at r = 0
    int base_degree = 1;                      // onto the bottom level
    bool cover_ok = true;
    bool unique_lift = true;  // a single component of H maps onto the anchor
    std::int64_t deck_count = 1;   // deck transformations found by lifting
    bool action_ok = true;         // every a in U acts as a deck transformation
    bool action_free = true;
    bool fibers_ok = true;         // fibers are the orbits of l^c
    BigInt kappa = 0;
    int ord_p_kappa = 0;
    std::vector<std::string> failures;

    bool deck_ok(std::int64_t p) const;
};

struct IwasawaFit {
    bool ok = false;
    std::int64_t mu = 0, lambda = 0, nu = 0;
    int n_start = 0;  // first index of the fitted suffix
};
IwasawaFit iwasawa_fit(const std::vector<std::int64_t>& ords, std::int64_t p);

struct TowerReport {
    BuildParams base;
    Stabilization stab;
    std::string anchor_j;
    std::vector<std::string> isolated_curves;
    std::vector<TowerLevel> levels;
    bool truncated = false;
    std::string truncation_reason;
    IwasawaFit fit;

    bool verified() const;
};

// r_max < 0 picks the largest r whose predicted size stays within 20000 vertices.
// An empty anchor uses the first non-isolated curve.
TowerReport build_tower(const BuildParams& base, int r_max = -1, const std::string& anchor_j = "");
json tower_to_json(const TowerReport& rep);

}  // namespace lg
