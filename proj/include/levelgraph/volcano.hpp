#pragma once

#include "levelgraph/graphcore.hpp"
#include "levelgraph/isogeny.hpp"

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace lg {

struct BuildParams {
    std::uint32_t p = 5;
    int deg = 1;  // base field F_q, q = p^deg
    std::int64_t l = 2;
    std::int64_t N = 1;
    int m = 0;
    bool exclude_special_j = false;
    std::vector<std::string> j_filter;         // integers or element serials; empty keeps all
    std::optional<std::int64_t> disc_filter;   // keep curves with t^2 - 4q equal to this
    std::uint64_t seed = 0;
    int max_abs_degree = 200;                  // cap on deg * working degree
    std::int64_t max_vertices = 200000;
    bool partial = false;                      // skip over-budget CM groups instead of failing
    std::map<std::int64_t, int> forced_degree; // fundamental discriminant -> working degree
    int jobs = 1;
};

// Throws ValidationError for l = p, gcd(N, pl) > 1 and similar.
void validate(const BuildParams& bp);

std::int64_t level_order(const BuildParams& bp);  // N p^m

struct CurvePlan {
    std::string j;
    std::int64_t trace = 0;
    std::int64_t dK = 0, conductor = 1;
    bool special = false;
    std::optional<int> degree;  // smallest e with the needed torsion over F_{q^e}; nullopt past the cap
};

struct GroupPlan {
    std::int64_t dK = 0;
    std::vector<int> curves;
    std::optional<int> degree;
    std::int64_t predicted_vertices = 0;
    std::string reject_reason;  // empty when accepted
};

struct DegreePlan {
    std::vector<CurvePlan> curves;
    std::vector<GroupPlan> groups;
    int working_degree = 0;  // largest accepted group degree
};

DegreePlan plan_degrees(const BuildParams& bp);
// Largest per-group degree; BudgetError with a sizing report if some group is rejected
// (or every group, when partial is set).
int working_degree(const BuildParams& bp);

struct KernelData {
    Point gen;
    std::string tag;
    std::optional<std::int64_t> eigenvalue;
    bool rational_j = false;
    int target = -1;  // curve index
    IsogenyStep step;
    Fe iso;                         // scaling from the Velu codomain to the target's model
    std::int64_t M[2][2] = {{1, 0}, {0, 1}};  // columns: images of G1, G2
    std::int64_t mu = 1;            // image of Gp
    std::vector<int> line_image;    // kernel index on the target, horizontal pairs only
};

struct AutData {
    Fe u;
    std::int64_t M[2][2] = {{1, 0}, {0, 1}};
    std::int64_t mu = 1;
    std::vector<int> kernel_perm;
};

struct CurveData {
    std::string j;
    Fe j_base;
    std::int64_t trace = 0, dK = 0, conductor = 1;
    int family_depth = 0;  // v_l of the conductor of Z[pi]
    bool special = false;
    int group = -1;
    int level = 0;
    Curve E;  // standard model over the group's working field
    Point G1, G2, Gp;
    std::vector<Point> tableN, tableP;
    std::unordered_map<std::string, int> indexN, indexP;
    std::vector<AutData> aut;
    std::vector<KernelData> kernels;
    std::vector<int> canon;             // coordinate -> vertex id, -1 if not of exact order
    std::vector<signed char> canon_aut;  // aut index sending the coordinate's point to the vertex point
    std::unordered_map<std::string, std::pair<int, int>> point_lookup;  // serial -> (vertex, aut index)
    int stable_kernels = 0;
};

struct GroupData {
    std::int64_t dK = 0;
    int degree = 0;
    Field F;
    std::vector<int> curves;
};

struct SkippedGroup {
    std::int64_t dK = 0;
    std::string reason;
};

struct VertexData {
    int curve = 0;
    std::int64_t coord = 0;
};

struct ComponentData {
    std::vector<int> vertices;
    std::int64_t trace = 0, d_pi = 0, dK = 0, conductor = 1;
    int depth = 0;
    int kronecker = 0;
    bool has_special = false;
    bool neighbors_distinct = true;
};

class IsogenyGraph {
public:
    BuildParams params;
    MultiDiGraph graph;
    std::vector<CurveData> curves;
    std::vector<GroupData> groups;
    std::vector<VertexData> vdata;
    std::vector<int> edge_kernel;  // per edge: kernel index on the source curve
    std::vector<ComponentData> comps;
    std::vector<SkippedGroup> skipped;

    std::int64_t order() const { return level_order(params); }
    BigInt q() const;
    Point point_of(int v) const;
    const Curve& curve_of(int v) const { return curves[vdata[v].curve].E; }
    // vertex of (E, kP) for k prime to Np
    int scalar_vertex(int v, std::int64_t k) const;
    // (vertex, aut index) of (E, P) for a point of exact order Np^m on curve c
    std::pair<int, int> lookup(int curve, const Point& P) const;
    int curve_index(const std::string& j) const;
    int edge_from(int v, int kernel) const;  // -1 if absent
    int stabilizer(int v) const;             // automorphisms fixing the vertex point

    bool horizontal(int e) const;
    int crater_degree(int v) const;  // out-degree plus horizontal in-degree
    std::optional<int> expected_crater_degree(int component) const;

    GraphMeta meta() const;
    json to_json() const;

    std::vector<std::vector<int>> out_, in_;  // edge ids per vertex
};

IsogenyGraph build_graph(const BuildParams& bp);

// Low graph for (N', m') with every CM group at the high graph's working degree.
IsogenyGraph build_projection_base(const IsogenyGraph& high, std::int64_t N_low, int m_low);

struct Projection {
    std::vector<int> vertex_map;
    std::vector<int> edge_map;
};
// (E, P) -> (E, (N p^r / N') P) with r = m_high - m_low.
Projection project(const IsogenyGraph& high, const IsogenyGraph& low);

struct CoverReport {
    bool is_cover = true;
    int degree = 0;  // common fiber size, 0 when fibers differ between components
    std::map<int, int> component_degree;  // base component -> fiber size
    std::vector<std::string> failures;
};
CoverReport verify_covering(const MultiDiGraph& cover, const MultiDiGraph& base, const std::vector<int>& vertex_map);

struct LemmaReport {
    int checked = 0, passed = 0, skipped_components = 0;
    std::vector<std::string> failures;
};
LemmaReport check_edge_count_lemmas(const IsogenyGraph& G);

// Edges (E,P)->(E',P') against reverse edges (E',P')->(E,lP), counted per vertex pair
// and weighted by stabilizer sizes.
bool dual_closed(const IsogenyGraph& G);

}  // namespace lg
