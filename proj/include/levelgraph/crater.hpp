#pragma once

#include "levelgraph/graphcore.hpp"
#include "levelgraph/volcano.hpp"

#include <string>
#include <vector>

namespace lg {

enum class CraterKind { inert_isolated, ramified_loop, ramified_cycle, split };
std::string kind_name(CraterKind k);

struct Census {
    std::int64_t central = 0, blue_primary = 0, green_primary = 0, secondary = 0;
};

// which: 0 not applicable, 1 or 2. For case 1 only u and r are set.
struct PrincipalCase {
    int which = 0;
    std::int64_t u = 0, r = 0, t1 = 0, t2 = 0;
};

struct CraterProfile {
    CraterKind kind = CraterKind::inert_isolated;
    int anchor = -1;
    std::int64_t vertex_count = 0;
    std::int64_t length = 0;  // ramified cycles
    std::int64_t h1 = 0, h2 = 0, s = 0, t = 0, c = 0, omega = 0;
    bool has_loops = false;
    Census census;
    std::vector<int> vertices;
    std::vector<std::string> vertex_class;  // parallel to vertices; split only
    PrincipalCase principal;
};

struct Crater {
    MultiDiGraph graph;
    std::vector<int> vertex_origin;  // crater vertex -> vertex of the full graph
    std::vector<int> edge_origin;
    std::vector<std::vector<int>> components;
};

// Level-0 vertices and the edges between them. Colors are copied from G.
Crater extract_crater(const IsogenyGraph& G);

// Colors the horizontal edges of every split crater. Blue is the horizontal kernel of the
// anchor curve with the smaller eigenvalue (then smaller kernel index) and is carried to the
// rest of the crater through images of kernels. `opposite` swaps the two colors.
// Returns the number of colored edges.
int color_edges(IsogenyGraph& G, bool opposite = false);

// anchor < 0 picks the least vertex of comp. Throws VerificationError when a census
// invariant fails or the component has no recognised shape.
CraterProfile classify_component(const MultiDiGraph& C, const std::vector<int>& comp, int anchor = -1);

PrincipalCase principal_case(const MultiDiGraph& C, const std::vector<int>& comp, const CraterProfile& prof);

json profile_to_json(const CraterProfile& prof);

// Per-vertex DOT classes for a crater graph from its profiles.
std::vector<std::string> vertex_classes(const MultiDiGraph& C, const std::vector<CraterProfile>& profiles);

}  // namespace lg
