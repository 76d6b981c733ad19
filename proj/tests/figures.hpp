#pragma once

// Hand-encoded colored craters with 12 and 24 vertices (Omega = 3). Vertex i of the
// drawing is vertex i-1 here.

#include "levelgraph/graphcore.hpp"

#include <utility>
#include <vector>

namespace fig {

inline lg::MultiDiGraph from_lists(int n, const std::vector<std::pair<int, int>>& blue,
                                   const std::vector<std::pair<int, int>>& green) {
    lg::MultiDiGraph G;
    for (int i = 0; i < n; ++i) G.add_vertex();
    for (auto [a, b] : blue) G.add_edge(a - 1, b - 1, lg::Color::blue);
    for (auto [a, b] : green) G.add_edge(a - 1, b - 1, lg::Color::green);
    return G;
}

// h1 = h2 = 6, s = t = 2, c = 1
inline lg::MultiDiGraph twelve() {
    return from_lists(12,
                      {{1, 4}, {4, 2}, {2, 5}, {5, 3}, {3, 6}, {6, 1},
                       {10, 7}, {7, 11}, {11, 8}, {8, 12}, {12, 9}, {9, 10}},
                      {{10, 4}, {4, 11}, {11, 5}, {5, 12}, {12, 6}, {6, 10},
                       {9, 1}, {1, 7}, {7, 2}, {2, 8}, {8, 3}, {3, 9}});
}

// h1 = 12, h2 = 6, s = 4, t = 2, c = 1
inline lg::MultiDiGraph twenty_four() {
    return from_lists(24,
                      {{1, 4}, {4, 5}, {5, 6}, {6, 2}, {2, 7}, {7, 8}, {8, 9}, {9, 3},
                       {3, 10}, {10, 11}, {11, 12}, {12, 1},
                       {15, 16}, {16, 17}, {17, 18}, {18, 13}, {13, 19}, {19, 20}, {20, 21}, {21, 14},
                       {14, 22}, {22, 23}, {23, 24}, {24, 15}},
                      {{1, 13}, {13, 2}, {2, 14}, {14, 3}, {3, 15}, {15, 1},
                       {9, 24}, {24, 12}, {12, 18}, {18, 6}, {6, 21}, {21, 9},
                       {16, 4}, {4, 19}, {19, 7}, {7, 22}, {22, 10}, {10, 16},
                       {17, 5}, {5, 20}, {20, 8}, {8, 23}, {23, 11}, {11, 17}});
}

}  // namespace fig
