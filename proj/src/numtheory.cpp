#include "levelgraph/numtheory.hpp"

#include <algorithm>
#include <cstdlib>

namespace lg {

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    if (n % 2 == 0) return n == 2;
    for (std::int64_t d = 3; d * d <= n; d += 2)
        if (n % d == 0) return false;
    return true;
}

std::vector<std::pair<std::int64_t, int>> factorize(std::int64_t n) {
    std::vector<std::pair<std::int64_t, int>> out;
    if (n < 0) n = -n;
    for (std::int64_t d = 2; d * d <= n; ++d) {
        if (n % d) continue;
        int e = 0;
        while (n % d == 0) {
            n /= d;
            ++e;
        }
        out.emplace_back(d, e);
    }
    if (n > 1) out.emplace_back(n, 1);
    return out;
}

std::int64_t gcd64(std::int64_t a, std::int64_t b) {
    a = std::llabs(a);
    b = std::llabs(b);
    while (b) {
        std::int64_t t = a % b;
        a = b;
        b = t;
    }
    return a;
}

std::int64_t lcm64(std::int64_t a, std::int64_t b) {
    if (a == 0 || b == 0) return 0;
    return std::llabs(a / gcd64(a, b) * b);
}

std::int64_t mod(std::int64_t a, std::int64_t m) {
    std::int64_t r = a % m;
    return r < 0 ? r + m : r;
}

std::int64_t mulmod(std::int64_t a, std::int64_t b, std::int64_t m) {
    return static_cast<std::int64_t>(static_cast<__int128>(mod(a, m)) * mod(b, m) % m);
}

std::int64_t powmod(std::int64_t a, std::uint64_t e, std::int64_t m) {
    if (m == 1) return 0;
    std::int64_t r = 1, b = mod(a, m);
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

std::int64_t invmod(std::int64_t a, std::int64_t m) {
    std::int64_t g = m, x = 0, x1 = 1, a1 = mod(a, m);
    while (a1) {
        std::int64_t q = g / a1;
        std::int64_t t = g - q * a1;
        g = a1;
        a1 = t;
        t = x - q * x1;
        x = x1;
        x1 = t;
    }
    if (g != 1) throw ValidationError("invmod: " + std::to_string(a) + " not invertible mod " + std::to_string(m));
    return mod(x, m);
}

std::int64_t multiplicative_order(std::int64_t a, std::int64_t m) {
    if (gcd64(a, m) != 1) throw ValidationError("multiplicative_order: not a unit");
    if (m == 1) return 1;
    // phi(m) via factorization, then strip prime factors
    std::int64_t phi = m;
    for (auto [q, e] : factorize(m)) phi = phi / q * (q - 1);
    std::int64_t ord = phi;
    for (auto [q, e] : factorize(phi)) {
        for (int i = 0; i < e && ord % q == 0; ++i) {
            if (powmod(a, ord / q, m) == 1)
                ord /= q;
            else
                break;
        }
    }
    return ord;
}

int valuation(std::int64_t n, std::int64_t l) {
    if (n == 0) throw ValidationError("valuation of zero");
    int v = 0;
    while (n % l == 0) {
        n /= l;
        ++v;
    }
    return v;
}

int valuation(BigInt n, std::int64_t l) {
    if (n == 0) throw ValidationError("valuation of zero");
    int v = 0;
    while (n % l == 0) {
        n /= l;
        ++v;
    }
    return v;
}

BigInt ipow(std::int64_t b, unsigned e) {
    BigInt r = 1;
    for (unsigned i = 0; i < e; ++i) r *= b;
    return r;
}

std::int64_t ipow64(std::int64_t b, unsigned e) {
    std::int64_t r = 1;
    for (unsigned i = 0; i < e; ++i) r *= b;
    return r;
}

int kronecker(std::int64_t d, std::int64_t l) {
    if (l == 2) {
        std::int64_t r = mod(d, 8);
        if (r % 2 == 0) return 0;
        return (r == 1 || r == 7) ? 1 : -1;
    }
    std::int64_t r = mod(d, l);
    if (r == 0) return 0;
    return powmod(r, (l - 1) / 2, l) == 1 ? 1 : -1;
}

bool is_fundamental_discriminant(std::int64_t d) {
    if (d == 0 || d == 1) return false;
    auto squarefree = [](std::int64_t n) {
        for (auto [q, e] : factorize(n))
            if (e > 1) return false;
        return true;
    };
    std::int64_t r = mod(d, 4);
    if (r == 1) return squarefree(d);
    if (r != 0) return false;
    std::int64_t m = d / 4;
    std::int64_t m4 = mod(m, 4);
    return (m4 == 2 || m4 == 3) && squarefree(m);
}

DiscriminantSplit split_discriminant(std::int64_t d) {
    if (d >= 0 || (mod(d, 4) != 0 && mod(d, 4) != 1))
        throw ValidationError("split_discriminant: need negative discriminant, got " + std::to_string(d));
    std::int64_t sf = -1, sq = 1;
    for (auto [q, e] : factorize(-d)) {
        if (e % 2) sf *= q;
        sq *= ipow64(q, static_cast<unsigned>(e / 2));
    }
    DiscriminantSplit out;
    if (mod(sf, 4) == 1) {
        out.fundamental = sf;
        out.conductor = sq;
    } else {
        out.fundamental = 4 * sf;
        out.conductor = sq / 2;
    }
    return out;
}

std::vector<std::int64_t> quadratic_roots_mod_prime_power(std::int64_t b, std::int64_t c,
                                                          std::int64_t prime, int exponent) {
    std::vector<std::int64_t> roots;
    for (std::int64_t r = 0; r < prime; ++r)
        if (mod(r * r + b * r + c, prime) == 0) roots.push_back(r);
    std::int64_t M = ipow64(prime, static_cast<unsigned>(exponent));
    std::vector<std::int64_t> out;
    for (std::int64_t r : roots) {
        std::int64_t deriv = mod(2 * r + b, prime);
        if (deriv == 0) continue;  // repeated root: no unique lift
        std::int64_t cur = r, pk = prime;
        for (int k = 1; k < exponent; ++k) {
            pk *= prime;
            std::int64_t f = mod(mulmod(cur, cur, pk) + mulmod(b, cur, pk) + c, pk);
            std::int64_t fp = mod(2 * cur + b, pk);
            cur = mod(cur - mulmod(f, invmod(fp, pk), pk), pk);
        }
        out.push_back(mod(cur, M));
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace lg
