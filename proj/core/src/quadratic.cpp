#include "qnr/quadratic.hpp"

#include "qnr/errors.hpp"

#include <algorithm>
#include <bit>
#include <string>
#include <utility>

namespace qnr {

int jacobi(std::uint64_t a, std::uint64_t n) {
    if (n == 0 || n % 2 == 0) throw DomainError("jacobi symbol needs an odd positive modulus, got " + std::to_string(n));
    a %= n;
    int t = 1;
    while (a != 0) {
        const int tz = std::countr_zero(a);
        a >>= tz;
        // (2/n) = -1 exactly when n = 3, 5 mod 8
        if ((tz & 1) && ((n & 7) == 3 || (n & 7) == 5)) t = -t;
        if ((a & 3) == 3 && (n & 3) == 3) t = -t;
        std::swap(a, n);
        a %= n;
    }
    return n == 1 ? t : 0;
}

ResiduePattern::ResiduePattern(std::vector<int> epsilons) : eps_(std::move(epsilons)) {
    for (const int e : eps_) {
        if (e != 1 && e != -1) throw DomainError("residue pattern entries must be +1 or -1");
    }
}

ResiduePattern ResiduePattern::parse(std::string_view text) {
    std::vector<int> eps;
    eps.reserve(text.size());
    for (const char c : text) {
        if (c == '+') {
            eps.push_back(1);
        } else if (c == '-') {
            eps.push_back(-1);
        } else {
            throw DomainError("residue pattern must use only '+' and '-', got '" + std::string(text) + "'");
        }
    }
    return ResiduePattern(std::move(eps));
}

std::uint64_t ResiduePattern::bits() const noexcept {
    std::uint64_t b = 0;
    for (std::size_t i = 0; i < eps_.size() && i < 64; ++i) {
        if (eps_[i] < 0) b |= std::uint64_t{1} << i;
    }
    return b;
}

ResiduePattern ResiduePattern::from_bits(std::uint64_t bits, std::size_t n) {
    std::vector<int> eps(n);
    for (std::size_t i = 0; i < n; ++i) eps[i] = ((bits >> i) & 1) ? -1 : 1;
    return ResiduePattern(std::move(eps));
}

std::string ResiduePattern::to_string() const {
    std::string s;
    s.reserve(eps_.size());
    for (const int e : eps_) s.push_back(e > 0 ? '+' : '-');
    return s;
}

namespace {

void require_odd_prime(std::uint64_t p) {
    if (p == 2) throw DomainError("p = 2 has no quadratic non-residues; p must be an odd prime");
    if (!is_prime_u64(p)) throw DomainError(std::to_string(p) + " is not prime");
}

} // namespace

std::size_t nk_nonresidues_unchecked(std::uint64_t p, std::span<std::uint64_t> out, PrimeCursor& primes,
                                     std::size_t candidate_cap) {
    std::size_t found = 0;
    for (std::size_t i = 1; found < out.size(); ++i) {
        if (i > candidate_cap) return found;
        const std::uint64_t q = primes.nth(i);
        if (q == p) continue;
        if (jacobi(q, p) < 0) out[found++] = q;
    }
    return found;
}

NkResult nk_nonresidues(std::uint64_t p, std::size_t k, const PrimeTable& table, const NkOptions& options) {
    require_odd_prime(p);
    if (k == 0) throw DomainError("k must be >= 1");
    PrimeCursor cursor(table);
    NkResult result{p, std::vector<std::uint64_t>(k)};
    const auto found = nk_nonresidues_unchecked(p, result.values, cursor, options.candidate_cap);
    if (found < k) {
        throw ResourceError("n_" + std::to_string(k) + "(" + std::to_string(p) + ") not found within " +
                            std::to_string(options.candidate_cap) + " candidate primes");
    }
    return result;
}

std::uint64_t m_statistic(std::uint64_t p, const PrimeTable& table) {
    const auto nk = nk_nonresidues(p, 2, table);
    return std::min(nk.values[0], nk.values[1] - nk.values[0]);
}

std::uint64_t residue_pattern_bits(std::uint64_t p, std::span<const std::uint64_t> first_primes) {
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < first_primes.size(); ++i) {
        if (jacobi(first_primes[i], p) < 0) bits |= std::uint64_t{1} << i;
    }
    return bits;
}

ResiduePattern residue_pattern(std::uint64_t p, std::size_t n, const PrimeTable& table) {
    require_odd_prime(p);
    PrimeCursor cursor(table);
    std::vector<int> eps(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const std::uint64_t q = cursor.nth(k);
        if (q == p) {
            throw DomainError(std::to_string(p) + " is p_" + std::to_string(k) +
                              ", so its pattern of length " + std::to_string(n) + " contains a zero symbol");
        }
        eps[k - 1] = jacobi(q, p);
    }
    return ResiduePattern(std::move(eps));
}

} // namespace qnr
