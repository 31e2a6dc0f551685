#include "qnr/pattern_search.hpp"

#include "qnr/errors.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>
#include <string>

namespace qnr {
namespace {

// Inverse of a mod m for coprime a, m (m small).
std::uint64_t inverse_mod(std::uint64_t a, std::uint64_t m) {
    std::int64_t t = 0, new_t = 1;
    std::int64_t r = static_cast<std::int64_t>(m), new_r = static_cast<std::int64_t>(a % m);
    while (new_r != 0) {
        const std::int64_t quot = r / new_r;
        t -= quot * new_t;
        std::swap(t, new_t);
        r -= quot * new_r;
        std::swap(r, new_r);
    }
    if (t < 0) t += static_cast<std::int64_t>(m);
    return static_cast<std::uint64_t>(t);
}

} // namespace

bool PatternClassSet::contains(std::uint64_t t) const noexcept {
    t %= q_;
    if (t % 2 == 0) return false;
    const std::uint64_t r8 = t % 8;
    const bool two_is_square = (r8 == 1 || r8 == 7);
    if ((eps2_ > 0) != two_is_square) return false;
    const bool one_mod_4 = (t % 4 == 1);
    for (const auto& f : odd_) {
        const std::uint64_t r = t % f.prime;
        if (r == 0) return false;
        const int symbol = f.is_square[r] ? 1 : -1;
        if (symbol != (one_mod_4 ? f.target_1mod4 : f.target_3mod4)) return false;
    }
    return true;
}

std::vector<std::uint64_t> PatternClassSet::classes(std::size_t max_count) const {
    if (size_ > max_count) {
        throw ResourceError("pattern class set has " + std::to_string(size_) + " classes; enumeration cap is " +
                            std::to_string(max_count));
    }
    std::vector<std::uint64_t> out;
    out.reserve(size_);
    const std::uint64_t mod8_choices[2][2] = {{1, 7}, {3, 5}};
    for (const std::uint64_t r8 : mod8_choices[eps2_ > 0 ? 0 : 1]) {
        const bool one_mod_4 = (r8 % 4 == 1);
        std::vector<std::uint64_t> partial{r8};
        std::uint64_t modulus = 8;
        for (const auto& f : odd_) {
            const int target = one_mod_4 ? f.target_1mod4 : f.target_3mod4;
            const std::uint64_t inv = inverse_mod(modulus % f.prime, f.prime);
            std::vector<std::uint64_t> next;
            next.reserve(partial.size() * (f.prime - 1) / 2);
            for (const std::uint64_t t : partial) {
                const std::uint64_t t_mod = t % f.prime;
                for (std::uint64_t r = 1; r < f.prime; ++r) {
                    if ((f.is_square[r] ? 1 : -1) != target) continue;
                    // x = t + modulus * ((r - t) / modulus mod p)
                    const std::uint64_t diff = (r + f.prime - t_mod) % f.prime;
                    const std::uint64_t lift = diff * inv % f.prime;
                    next.push_back(t + modulus * lift);
                }
            }
            partial = std::move(next);
            modulus *= f.prime;
        }
        out.insert(out.end(), partial.begin(), partial.end());
    }
    std::sort(out.begin(), out.end());
    return out;
}

PatternClassSet build_pattern_classes(const ResiduePattern& pattern, const PrimeTable& table) {
    const std::size_t n = pattern.size();
    if (n == 0) throw DomainError("pattern class construction needs a pattern of length >= 1");
    if (n > kMaxPatternLength) {
        throw ResourceError("modulus 8*p_2*...*p_" + std::to_string(n) +
                            " overflows 64 bits; the longest feasible pattern has length " +
                            std::to_string(kMaxPatternLength));
    }
    PrimeCursor primes(table);
    PatternClassSet set;
    set.pattern_ = pattern;
    set.eps2_ = pattern.at(1);
    set.q_ = 8;
    set.size_ = 2;
    set.phi_ = 4;
    for (std::size_t i = 2; i <= n; ++i) {
        const std::uint64_t p = primes.nth(i);
        const auto q_wide = static_cast<unsigned __int128>(set.q_) * p;
        if (q_wide > std::numeric_limits<std::uint64_t>::max()) {
            throw ResourceError("modulus overflows 64 bits at p_" + std::to_string(i) +
                                "; the longest feasible pattern has length " + std::to_string(i - 1));
        }
        set.q_ = static_cast<std::uint64_t>(q_wide);
        set.size_ *= (p - 1) / 2;
        set.phi_ *= p - 1;

        PatternClassSet::OddFactor f;
        f.prime = p;
        f.target_1mod4 = pattern.at(i);
        f.target_3mod4 = ((p - 1) / 2 % 2 == 0) ? pattern.at(i) : -pattern.at(i);
        f.is_square.assign(p, 0);
        for (std::uint64_t r = 1; r < p; ++r) f.is_square[r * r % p] = 1;
        set.odd_.push_back(std::move(f));
    }
    return set;
}

std::uint64_t default_search_limit(std::uint64_t q) noexcept {
    constexpr std::uint64_t cap = 1'000'000'000;
    if (q >= cap / 10'000) return cap;
    return std::min(cap, q * 10'000);
}

std::optional<std::uint64_t> find_prime_with_pattern(const ResiduePattern& pattern, std::uint64_t limit,
                                                     const PrimeTable& table) {
    const auto set = build_pattern_classes(pattern, table);
    PrimeCursor primes(table);
    const std::uint64_t p_n = primes.nth(pattern.size());
    std::vector<std::uint64_t> first(pattern.size());
    for (std::size_t i = 0; i < first.size(); ++i) first[i] = primes.nth(i + 1);

    std::optional<std::uint64_t> hit;
    for_each_prime(p_n + 1, limit, [&](std::uint64_t p) {
        if (!set.contains(p)) return true;
        hit = p;
        return false;
    });
    if (hit && residue_pattern_bits(*hit, first) != pattern.bits()) {
        throw std::logic_error("prime " + std::to_string(*hit) + " lies in the class set but fails direct verification");
    }
    return hit;
}

LargeMRecord large_m_construction(std::uint64_t y, std::uint64_t search_limit, const PrimeTable& table) {
    if (y < 4) throw DomainError("large_m_construction needs y >= 4");
    PrimeCursor primes(table);
    LargeMRecord rec;
    rec.y = y;
    rec.m_index = primes.pi(y / 2);
    rec.n_index = primes.pi(y);
    rec.p_m = primes.nth(rec.m_index);
    rec.p_n = primes.nth(rec.n_index);
    rec.guarantee = std::min(rec.p_m, rec.p_n - rec.p_m);

    std::vector<int> eps(rec.n_index, 1);
    eps[rec.m_index - 1] = -1;
    const ResiduePattern pattern(std::move(eps));
    const auto set = build_pattern_classes(pattern, table);
    rec.q = set.q();
    rec.search_limit = search_limit ? search_limit : default_search_limit(rec.q);

    rec.prime = find_prime_with_pattern(pattern, rec.search_limit, table);
    if (!rec.prime) return rec;

    const auto nk = nk_nonresidues(*rec.prime, 2, primes.table());
    rec.n1 = nk.values[0];
    rec.n2 = nk.values[1];
    rec.m_value = std::min(rec.n1, rec.n2 - rec.n1);
    if (rec.n1 != rec.p_m || rec.n2 <= rec.p_n || rec.m_value < rec.guarantee) {
        throw std::logic_error("constructed prime " + std::to_string(*rec.prime) +
                               " does not meet the M(p) guarantee");
    }
    return rec;
}

} // namespace qnr
