#pragma once

#include "levelgraph/graphcore.hpp"

#include <optional>
#include <string>
#include <vector>

namespace lg {

struct TectonicParams {
    std::int64_t omega = 1, s = 1, t = 1, c = 1;
    auto operator<=>(const TectonicParams&) const = default;
};

// Positive entries, gcd(c, omega) = 1, omega*s*t <= 1e6.
void validate(const TectonicParams& tp);
// c reduced into [1, omega].
TectonicParams canonical(TectonicParams tp);

json params_to_json(const TectonicParams& tp);
TectonicParams params_from_json(const json& j);

// Z^2 modulo <(s, -c t), (0, t omega)>; blue adds (1, 0), green adds (0, 1).
// Vertex ids follow the representatives (x, y), 0 <= x < s, 0 <= y < t omega, in row order.
MultiDiGraph generate(const TectonicParams& tp);

struct Recognition {
    bool ok = false;
    TectonicParams params;
    std::string reason;  // why the graph is not tectonic
};
Recognition recognize(const MultiDiGraph& G);

struct SplitFactor {
    std::int64_t prime = 0;
    int exponent = 1;
    std::optional<std::int64_t> root;  // square root of the discriminant data mod prime; lifted
};

// x = a + b w with w = sqrt(dK/4) for dK = 0 mod 4 and w = (1 + sqrt(dK))/2 otherwise.
struct CMOracleInput {
    std::int64_t dK = 0;
    std::int64_t p = 0;
    int m = 1;
    std::optional<std::int64_t> root_p;
    std::vector<SplitFactor> N;
    std::int64_t a = 0, b = 0;
};

struct CMProfile {
    std::int64_t modulus = 0;
    std::int64_t u_x = 0, u_xbar = 0;
    std::int64_t h1 = 0, h2 = 0, s = 0, t = 0, c = 0, omega = 0;
    std::int64_t vertices() const { return s * t * omega; }
    TectonicParams params() const { return {omega, s, t, c}; }
};
CMProfile cm_order_profile(const CMOracleInput& in);
json cm_profile_to_json(const CMProfile& pr);

struct SearchBounds {
    std::int64_t max_p = 50, max_l = 50, max_N = 1, max_dK = 50;
    int m = 1;
    bool confirm = false;      // build curve graphs for witnesses when the budget allows
    int max_abs_degree = 200;
    int max_confirm = 4;
    int jobs = 1;
};

struct Witness {
    std::int64_t dK = 0, p = 0, N = 1, l = 0;
    std::int64_t a = 0, b = 0;
    std::int64_t root_p = 0;
    std::vector<std::int64_t> roots_N;
    CMProfile profile;
    std::string confirmation = "unconfirmed";  // confirmed, not-found, budget
};
std::vector<Witness> inverse_search(const TectonicParams& target, const SearchBounds& bounds);
json witness_to_json(const Witness& w);

}  // namespace lg
