#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lg {

using BigInt = boost::multiprecision::cpp_int;

// Error kinds map onto CLI exit codes (1, 2, 3).
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct VerificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct BudgetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
// Raised when an isomorphism scalar is missing from the working field.
struct FieldTooSmall : BudgetError {
    using BudgetError::BudgetError;
};

bool is_prime(std::int64_t n);
std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n);

std::int64_t gcd64(std::int64_t a, std::int64_t b);
std::int64_t lcm64(std::int64_t a, std::int64_t b);
std::int64_t mod(std::int64_t a, std::int64_t m);
std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t m);
std::int64_t powmod(std::int64_t a, std::uint64_t e, std::int64_t m);
std::int64_t invmod(std::int64_t a, std::int64_t m);
std::int64_t multiplicative_order(std::int64_t a, std::int64_t m);

int valuation(std::int64_t n, std::int64_t l);
int valuation(BigInt n, std::int64_t l);
BigInt ipow(std::int64_t b, unsigned e);
std::int64_t ipow64(std::int64_t b, unsigned e);

// Kronecker symbol (d / l) for a prime l.
int kronecker(std::int64_t d, std::int64_t l);

// d = conductor^2 * fundamental, d < 0 and d = 0,1 mod 4.
struct DiscriminantSplit {
    std::int64_t fundamental = 0;
    std::int64_t conductor = 1;
};
DiscriminantSplit split_discriminant(std::int64_t d);
bool is_fundamental_discriminant(std::int64_t d);

// Roots of x^2 + b x + c modulo a prime power, lifted from simple roots mod prime.
std::vector<std::int64_t> quadratic_roots_mod_prime_power(std::int64_t b, std::int64_t c,
                                                          std::int64_t prime, int exponent);

}  // namespace lg
