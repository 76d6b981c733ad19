#pragma once

#include "levelgraph/ecurve.hpp"

#include <optional>
#include <random>
#include <vector>

namespace lg {

// Per-point data of the Velu sums; one entry per 2-torsion kernel point and
// one per {Q, -Q} pair otherwise.
struct VeluTerm {
    Fe xQ, yQ, gx, gy, v, u;
};

struct IsogenyStep {
    Curve domain;
    Point kernel_gen;
    std::int64_t l = 0;
    Curve codomain;
    std::vector<VeluTerm> terms;
};

// Basis of E[l] over the working field.
struct EllBasis {
    Point L1, L2;
};
EllBasis ell_torsion_basis(const Curve& E, std::int64_t l, std::mt19937_64& rng);

// The l+1 cyclic subgroups of order l, each by its least serialized generator, sorted.
std::vector<Point> enumerate_kernels(const Curve& E, std::int64_t l, const EllBasis& basis);
std::vector<Point> enumerate_kernels(const Curve& E, std::int64_t l, std::mt19937_64& rng);

// All nonzero points of <G>, G of prime order l.
std::vector<Point> subgroup_points(const Curve& E, const Point& G, std::int64_t l);
Point canonical_generator(const Curve& E, const Point& G, std::int64_t l);

IsogenyStep velu_isogeny(const Curve& E, const Point& kernel_gen, std::int64_t l);
Point evaluate(const IsogenyStep& step, const Point& P);

// Dual check: some kernel on the codomain composes with the step to [l] up to an
// automorphism, tested on the E[l] basis and random points.
bool verify_dual(const IsogenyStep& step, const EllBasis& basis, std::mt19937_64& rng);
bool verify_dual(const IsogenyStep& step, std::mt19937_64& rng);

// pi(G) = lambda G for pi the q-power Frobenius, q = p^base_degree.
std::optional<std::int64_t> frobenius_eigenvalue(const Curve& E, const Point& G, std::int64_t l, int base_degree);

}  // namespace lg
