#include "levelgraph/qfield.hpp"

#include <map>
#include <sstream>

namespace lg {

namespace {

using Vec = std::vector<std::int64_t>;

void trim(Vec& a) {
    while (!a.empty() && a.back() == 0) a.pop_back();
}

std::int64_t inv_p(std::int64_t a, std::int64_t p) { return powmod(a, static_cast<std::uint64_t>(p - 2), p); }

// Quotient and remainder of a by b over F_p.
void divmod(const Vec& a, const Vec& b, std::int64_t p, Vec& q, Vec& r) {
    r = a;
    trim(r);
    q.assign(r.size() >= b.size() ? r.size() - b.size() + 1 : 0, 0);
    std::int64_t lead_inv = inv_p(b.back(), p);
    while (!r.empty() && r.size() >= b.size()) {
        std::size_t shift = r.size() - b.size();
        std::int64_t c = r.back() * lead_inv % p;
        q[shift] = c;
        for (std::size_t i = 0; i < b.size(); ++i) r[shift + i] = mod(r[shift + i] - c * b[i], p);
        trim(r);
    }
}

Vec poly_gcd(Vec a, Vec b, std::int64_t p) {
    trim(a);
    trim(b);
    while (!b.empty()) {
        Vec q, r;
        divmod(a, b, p, q, r);
        a = std::move(b);
        b = std::move(r);
    }
    return a;
}

Vec to_vec(const Fe& a) { return Vec(a.c.begin(), a.c.end()); }
Vec to_vec(const Poly& a) { return Vec(a.begin(), a.end()); }

std::mutex g_field_lock;
std::map<std::pair<std::uint32_t, int>, Field> g_fields;

}  // namespace

FieldCtx::FieldCtx(std::uint32_t p, int D, Poly modulus) : p_(p), D_(D), mod_(std::move(modulus)) {
    for (int i = 0; i < D_; ++i)
        if (mod_[i] % p_) tail_.emplace_back(i, p_ - mod_[i] % p_);
    q_ = ipow(p_, static_cast<unsigned>(D_));
}

bool poly_is_irreducible(const Poly& f, std::uint32_t p) {
    int D = static_cast<int>(f.size()) - 1;
    if (D < 1) return false;
    if (D == 1) return true;
    if (f[0] == 0) return false;
    FieldCtx R(p, D, f);
    Fe x = R.gen();
    Fe h = x;
    Vec fv = to_vec(f);
    for (int i = 1; i <= D / 2; ++i) {
        h = R.pow(h, static_cast<std::uint64_t>(p));
        Vec g = poly_gcd(to_vec(R.sub(h, x)), fv, p);
        if (g.size() > 1) return false;
    }
    return true;
}

Field make_field(std::uint32_t p, int D) {
    if (!is_prime(p) || p <= 3) throw ValidationError("make_field: p must be a prime > 3, got " + std::to_string(p));
    if (p >= 65536) throw ValidationError("make_field: p must be below 65536");
    if (D < 1 || D > 200) throw ValidationError("make_field: degree must lie in [1, 200], got " + std::to_string(D));
    {
        std::lock_guard<std::mutex> g(g_field_lock);
        auto it = g_fields.find({p, D});
        if (it != g_fields.end()) return it->second;
    }
    Poly f(D + 1, 0);
    f[D] = 1;
    if (D == 1) {
        f[0] = 0;
    } else {
        // Counter over c0..c(D-1) read as a base-p number, c0 least significant.
        bool found = false;
        while (!found) {
            if (poly_is_irreducible(f, p)) {
                found = true;
                break;
            }
            int i = 0;
            while (i < D && ++f[i] == p) f[i++] = 0;
            if (i == D) break;
        }
        if (!found) throw std::logic_error("make_field: no irreducible polynomial found");
    }
    auto ctx = std::make_shared<const FieldCtx>(p, D, f);
    std::lock_guard<std::mutex> g(g_field_lock);
    return g_fields.emplace(std::make_pair(p, D), ctx).first->second;
}

Fe FieldCtx::zero() const { return Fe{std::vector<std::uint32_t>(D_, 0)}; }

Fe FieldCtx::one() const {
    Fe r = zero();
    r.c[0] = 1;
    return r;
}

Fe FieldCtx::gen() const {
    if (D_ == 1) return from_int(static_cast<std::int64_t>((p_ - mod_[0]) % p_));
    Fe r = zero();
    r.c[1] = 1;
    return r;
}

Fe FieldCtx::from_int(std::int64_t v) const {
    Fe r = zero();
    r.c[0] = static_cast<std::uint32_t>(mod(v, p_));
    return r;
}

bool FieldCtx::is_zero(const Fe& a) const {
    for (auto v : a.c)
        if (v) return false;
    return true;
}

bool FieldCtx::is_one(const Fe& a) const {
    if (a.c[0] != 1) return false;
    for (int i = 1; i < D_; ++i)
        if (a.c[i]) return false;
    return true;
}

Fe FieldCtx::add(const Fe& a, const Fe& b) const {
    Fe r{std::vector<std::uint32_t>(D_)};
    for (int i = 0; i < D_; ++i) {
        std::uint32_t s = a.c[i] + b.c[i];
        r.c[i] = s >= p_ ? s - p_ : s;
    }
    return r;
}

Fe FieldCtx::sub(const Fe& a, const Fe& b) const {
    Fe r{std::vector<std::uint32_t>(D_)};
    for (int i = 0; i < D_; ++i) r.c[i] = a.c[i] >= b.c[i] ? a.c[i] - b.c[i] : a.c[i] + p_ - b.c[i];
    return r;
}

Fe FieldCtx::neg(const Fe& a) const {
    Fe r{std::vector<std::uint32_t>(D_)};
    for (int i = 0; i < D_; ++i) r.c[i] = a.c[i] ? p_ - a.c[i] : 0;
    return r;
}

Fe FieldCtx::scale(const Fe& a, std::uint32_t k) const {
    Fe r{std::vector<std::uint32_t>(D_)};
    std::uint64_t kk = k % p_;
    for (int i = 0; i < D_; ++i) r.c[i] = static_cast<std::uint32_t>(a.c[i] * kk % p_);
    return r;
}

void FieldCtx::reduce(std::vector<std::uint64_t>& buf, Fe& out) const {
    for (int k = static_cast<int>(buf.size()) - 1; k >= D_; --k) {
        std::uint64_t c = buf[k] % p_;
        if (!c) continue;
        for (auto [i, fi] : tail_) buf[k - D_ + i] += c * fi;
    }
    out.c.resize(D_);
    for (int i = 0; i < D_; ++i) out.c[i] = static_cast<std::uint32_t>(buf[i] % p_);
}

Fe FieldCtx::mul(const Fe& a, const Fe& b) const {
    if (D_ == 1) return Fe{{static_cast<std::uint32_t>(static_cast<std::uint64_t>(a.c[0]) * b.c[0] % p_)}};
    std::vector<std::uint64_t> buf(2 * D_ - 1, 0);
    for (int i = 0; i < D_; ++i) {
        std::uint64_t ai = a.c[i];
        if (!ai) continue;
        for (int j = 0; j < D_; ++j) buf[i + j] += ai * b.c[j];
    }
    Fe r;
    reduce(buf, r);
    return r;
}

Fe FieldCtx::inv(const Fe& a) const {
    if (is_zero(a)) throw std::domain_error("FieldCtx::inv: zero has no inverse");
    std::int64_t p = p_;
    if (D_ == 1) return from_int(inv_p(a.c[0], p));
    Vec r0 = to_vec(mod_), r1 = to_vec(a), s0, s1{1};
    trim(r1);
    while (!r1.empty()) {
        Vec q, r;
        divmod(r0, r1, p, q, r);
        // s2 = s0 - q s1
        Vec s2(std::max(s0.size(), q.size() + s1.size()), 0);
        for (std::size_t i = 0; i < s0.size(); ++i) s2[i] = s0[i];
        for (std::size_t i = 0; i < q.size(); ++i)
            for (std::size_t j = 0; j < s1.size(); ++j) s2[i + j] = mod(s2[i + j] - q[i] * s1[j], p);
        trim(s2);
        r0 = std::move(r1);
        r1 = std::move(r);
        s0 = std::move(s1);
        s1 = std::move(s2);
    }
    // r0 is a nonzero constant
    std::int64_t ci = inv_p(r0[0], p);
    Fe out = zero();
    for (std::size_t i = 0; i < s0.size() && i < static_cast<std::size_t>(D_); ++i)
        out.c[i] = static_cast<std::uint32_t>(s0[i] * ci % p);
    return out;
}

Fe FieldCtx::pow(const Fe& a, const BigInt& e) const {
    if (e < 0) return pow(inv(a), BigInt(-e));
    if (e == 0) return one();
    Fe r = a;
    for (int i = static_cast<int>(boost::multiprecision::msb(e)) - 1; i >= 0; --i) {
        r = sqr(r);
        if (boost::multiprecision::bit_test(e, static_cast<unsigned>(i))) r = mul(r, a);
    }
    return r;
}

Fe FieldCtx::pow(const Fe& a, std::uint64_t e) const {
    Fe r = one(), b = a;
    while (e) {
        if (e & 1) r = mul(r, b);
        e >>= 1;
        if (e) b = sqr(b);
    }
    return r;
}

Fe FieldCtx::frobenius(const Fe& a) const { return pow(a, static_cast<std::uint64_t>(p_)); }

Fe FieldCtx::frobenius(const Fe& a, int k) const {
    Fe r = a;
    for (int i = 0; i < k; ++i) r = frobenius(r);
    return r;
}

const FieldCtx::RootData& FieldCtx::root_data(unsigned r) const {
    std::once_flag& flag = r == 2 ? once2_ : once3_;
    RootData& rd = r == 2 ? rd2_ : rd3_;
    std::call_once(flag, [&] {
        BigInt t = q_ - 1;
        int s = 0;
        while (t % r == 0) {
            t /= r;
            ++s;
        }
        rd.s = s;
        rd.t = t;
        if (s > 0) {
            BigInt e = (q_ - 1) / r;
            for (std::uint64_t i = 2;; ++i) {
                Fe z = from_index(i);
                if (is_zero(z)) continue;
                if (!is_one(pow(z, e))) {
                    rd.gen = pow(z, t);
                    break;
                }
            }
        }
        rd.ready = true;
    });
    return rd;
}

std::optional<Fe> FieldCtx::root(const Fe& a, unsigned r) const {
    if (r != 2 && r != 3) throw ValidationError("FieldCtx::root: only square and cube roots are supported");
    if (is_zero(a)) return a;
    const RootData& rd = root_data(r);
    auto inverse_of_r_mod = [&](const BigInt& m) {
        // e with r e = 1 mod m, found among (k m + 1) / r
        if (m == 1) return BigInt(0);
        for (unsigned k = 0; k < r; ++k) {
            BigInt v = BigInt(k) * m + 1;
            if (v % r == 0) return BigInt(v / r);
        }
        throw std::logic_error("root: r not invertible");
    };
    if (rd.s == 0) return pow(a, inverse_of_r_mod(q_ - 1));
    if (!is_one(pow(a, BigInt((q_ - 1) / r)))) return std::nullopt;
    BigInt e = inverse_of_r_mod(rd.t);
    Fe x0 = pow(a, e);
    Fe b = mul(pow(a, BigInt(e * r)), inv(a));  // a^(re-1), lies in the r-Sylow subgroup
    Fe c = inv(b);
    // discrete log of c to base gen (order r^s), digit by digit
    BigInt rs1 = ipow(r, static_cast<unsigned>(rd.s - 1));
    Fe gamma = pow(rd.gen, rs1);
    BigInt k = 0, rpow = 1;
    for (int i = 0; i < rd.s; ++i) {
        Fe h = mul(c, inv(pow(rd.gen, k)));
        h = pow(h, BigInt(ipow(r, static_cast<unsigned>(rd.s - 1 - i))));
        Fe cur = one();
        unsigned digit = 0;
        for (; digit < r; ++digit) {
            if (cur == h) break;
            cur = mul(cur, gamma);
        }
        if (digit == r) throw std::logic_error("root: discrete log failed");
        k += rpow * digit;
        rpow *= r;
    }
    if (k % r != 0) throw std::logic_error("root: Sylow element is not an r-th power");
    Fe y = pow(rd.gen, BigInt(k / r));
    Fe x = mul(x0, y);
    if (!(pow(x, static_cast<std::uint64_t>(r)) == a)) throw std::logic_error("root: verification failed");
    return x;
}

std::optional<Fe> FieldCtx::sqrt(const Fe& a) const { return root(a, 2); }
std::optional<Fe> FieldCtx::cbrt(const Fe& a) const { return root(a, 3); }

bool FieldCtx::is_square(const Fe& a) const {
    if (is_zero(a)) return true;
    return is_one(pow(a, BigInt((q_ - 1) / 2)));
}

Fe FieldCtx::random(std::mt19937_64& rng) const {
    Fe r{std::vector<std::uint32_t>(D_)};
    for (int i = 0; i < D_; ++i) r.c[i] = static_cast<std::uint32_t>(rng() % p_);
    return r;
}

std::uint64_t FieldCtx::index(const Fe& a) const {
    std::uint64_t v = 0;
    for (int i = D_ - 1; i >= 0; --i) v = v * p_ + a.c[i];
    return v;
}

Fe FieldCtx::from_index(std::uint64_t idx) const {
    Fe r = zero();
    for (int i = 0; i < D_ && idx; ++i) {
        r.c[i] = static_cast<std::uint32_t>(idx % p_);
        idx /= p_;
    }
    return r;
}

std::string FieldCtx::serialize(const Fe& a) const {
    std::string s = std::to_string(p_) + "^" + std::to_string(D_) + ":";
    for (int i = 0; i < D_; ++i) {
        if (i) s += ',';
        s += std::to_string(a.c[i]);
    }
    return s;
}

Fe FieldCtx::parse(const std::string& s) const {
    std::string head = std::to_string(p_) + "^" + std::to_string(D_) + ":";
    if (s.compare(0, head.size(), head) != 0) throw ValidationError("element '" + s + "' does not belong to field " + head);
    Fe r = zero();
    std::stringstream ss(s.substr(head.size()));
    std::string tok;
    int i = 0;
    while (std::getline(ss, tok, ',')) {
        if (i >= D_) throw ValidationError("element '" + s + "' has too many coefficients");
        long v = std::stol(tok);
        if (v < 0 || v >= static_cast<long>(p_)) throw ValidationError("coefficient out of range in '" + s + "'");
        r.c[i++] = static_cast<std::uint32_t>(v);
    }
    if (i != D_) throw ValidationError("element '" + s + "' has too few coefficients");
    return r;
}

SubfieldEmbedding::SubfieldEmbedding(Field base, Field big) : base_(std::move(base)), big_(std::move(big)) {
    int d = base_->degree(), D = big_->degree();
    if (base_->p() != big_->p() || D % d != 0) throw ValidationError("SubfieldEmbedding: degree does not divide");
    const FieldCtx& F = *big_;
    Fe g;
    const Poly& f = base_->modulus();
    if (d == 1) {
        g = F.from_int(static_cast<std::int64_t>((base_->p() - f[0]) % base_->p()));
    } else if (d == 2) {
        // roots of x^2 + f1 x + f0
        Fe f1 = F.from_int(f[1]), f0 = F.from_int(f[0]);
        Fe disc = F.sub(F.sqr(f1), F.scale(f0, 4));
        auto s = F.sqrt(disc);
        if (!s) throw std::logic_error("SubfieldEmbedding: quadratic modulus has no root");
        Fe half = F.inv(F.from_int(2));
        Fe r1 = F.mul(F.sub(*s, f1), half), r2 = F.mul(F.sub(F.neg(*s), f1), half);
        g = F.serialize(r1) < F.serialize(r2) ? r1 : r2;
    } else {
        // search the multiplicative group of the subfield for a root
        BigInt q = base_->order();
        BigInt cof = (F.order() - 1) / (q - 1);
        auto eval = [&](const Fe& z) {
            Fe acc = F.zero();
            for (int i = d; i >= 0; --i) acc = F.add(F.mul(acc, z), F.from_int(f[i]));
            return acc;
        };
        std::vector<std::string> found;
        std::vector<Fe> roots;
        for (std::uint64_t i = 2; roots.empty(); ++i) {
            Fe gamma = F.pow(F.from_index(i), cof);
            Fe cur = F.one();
            for (BigInt k = 0; k < q - 1; ++k) {
                if (F.is_zero(eval(cur))) roots.push_back(cur);
                cur = F.mul(cur, gamma);
            }
        }
        g = roots[0];
        for (auto& r : roots)
            if (F.serialize(r) < F.serialize(g)) g = r;
    }
    powers_.push_back(F.one());
    for (int i = 1; i < d; ++i) powers_.push_back(F.mul(powers_.back(), g));
}

Fe SubfieldEmbedding::embed(const Fe& a) const {
    const FieldCtx& F = *big_;
    Fe r = F.zero();
    for (std::size_t i = 0; i < powers_.size(); ++i)
        if (a.c[i]) r = F.add(r, F.scale(powers_[i], a.c[i]));
    return r;
}

std::optional<Fe> SubfieldEmbedding::restrict(const Fe& z) const {
    const std::int64_t p = big_->p();
    const int D = big_->degree();
    const int d = static_cast<int>(powers_.size());
    // augmented D x (d+1) system
    std::vector<Vec> M(D, Vec(d + 1));
    for (int r = 0; r < D; ++r) {
        for (int c = 0; c < d; ++c) M[r][c] = powers_[c].c[r];
        M[r][d] = z.c[r];
    }
    int row = 0;
    std::vector<int> pivcol;
    for (int c = 0; c < d && row < D; ++c) {
        int piv = -1;
        for (int r = row; r < D; ++r)
            if (M[r][c]) {
                piv = r;
                break;
            }
        if (piv < 0) continue;
        std::swap(M[row], M[piv]);
        std::int64_t iv = inv_p(M[row][c], p);
        for (auto& v : M[row]) v = v * iv % p;
        for (int r = 0; r < D; ++r) {
            if (r == row || !M[r][c]) continue;
            std::int64_t f = M[r][c];
            for (int k = 0; k <= d; ++k) M[r][k] = mod(M[r][k] - f * M[row][k], p);
        }
        pivcol.push_back(c);
        ++row;
    }
    for (int r = row; r < D; ++r)
        if (M[r][d]) return std::nullopt;
    Fe out = base_->zero();
    for (int i = 0; i < row; ++i) out.c[pivcol[i]] = static_cast<std::uint32_t>(M[i][d]);
    return out;
}

}  // namespace lg
