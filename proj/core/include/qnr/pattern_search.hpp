#pragma once

/// @file pattern_search.hpp
/// @brief Residue classes mod q = 8 p_2 ... p_n that realise a residue
/// pattern, and the construction of primes with large M(p).
///
/// For p > p_n, quadratic reciprocity turns the conditions (p_i/p) = eps_i
/// into conditions on p itself:
///   (2/p) = eps_1            <=>  p mod 8 in {1,7} (eps_1 = +1) or {3,5}
///   (p_i/p) = eps_i, i >= 2  <=>  (p/p_i) = eps_i                  if p = 1 mod 4
///                                  (p/p_i) = (-1)^((p_i-1)/2) eps_i if p = 3 mod 4
/// so the admissible units mod q form a set of exactly phi(q)/2^n classes.

#include "qnr/primes.hpp"
#include "qnr/quadratic.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace qnr {

/// Longest pattern whose modulus 8 p_2 ... p_n fits in 64 bits.
inline constexpr std::size_t kMaxPatternLength = 15;

class PatternClassSet {
public:
    const ResiduePattern& pattern() const noexcept { return pattern_; }
    std::size_t n() const noexcept { return pattern_.size(); }
    std::uint64_t q() const noexcept { return q_; }

    /// phi(q)/2^n, computed from the product formula.
    std::uint64_t size() const noexcept { return size_; }
    /// phi(q) by direct factorisation of q.
    std::uint64_t phi_q() const noexcept { return phi_; }

    /// t mod q is a unit in the set.
    bool contains(std::uint64_t t) const noexcept;

    /// All classes in [1, q), ascending, built by CRT. Throws ResourceError
    /// when size() exceeds max_count.
    std::vector<std::uint64_t> classes(std::size_t max_count = std::size_t{1} << 24) const;

private:
    friend PatternClassSet build_pattern_classes(const ResiduePattern&, const PrimeTable&);

    struct OddFactor {
        std::uint64_t prime;
        int target_1mod4;       // required (t/p_i) when t = 1 mod 4
        int target_3mod4;       // required (t/p_i) when t = 3 mod 4
        std::vector<char> is_square;  // indexed by residue mod p_i
    };

    ResiduePattern pattern_;
    std::uint64_t q_ = 8;
    std::uint64_t size_ = 0;
    std::uint64_t phi_ = 0;
    int eps2_ = 1;
    std::vector<OddFactor> odd_;
};

/// Throws DomainError for an empty pattern, ResourceError (naming
/// kMaxPatternLength) when q would overflow 64 bits.
PatternClassSet build_pattern_classes(const ResiduePattern& pattern, const PrimeTable& table);

/// Smallest prime p in (p_n, limit] whose residue class lies in the set, or
/// nullopt. The hit is re-verified with direct symbol evaluation.
std::optional<std::uint64_t> find_prime_with_pattern(const ResiduePattern& pattern, std::uint64_t limit,
                                                     const PrimeTable& table);

/// Default search horizon: min(10^9, 10^4 q).
std::uint64_t default_search_limit(std::uint64_t q) noexcept;

struct LargeMRecord {
    std::uint64_t y = 0;
    std::uint64_t q = 0;
    std::size_t m_index = 0;     // p_m = largest prime <= y/2
    std::size_t n_index = 0;     // p_n = largest prime <= y
    std::uint64_t p_m = 0;
    std::uint64_t p_n = 0;
    std::uint64_t guarantee = 0; // min(p_m, p_n - p_m)
    std::uint64_t search_limit = 0;
    std::optional<std::uint64_t> prime;
    std::uint64_t n1 = 0;
    std::uint64_t n2 = 0;
    std::uint64_t m_value = 0;
};

/// Pattern with eps_m = -1 and every other eps_j = +1 (j <= n): every prime
/// up to p_n except p_m is a residue, so n_1 = p_m, n_2 > p_n and
/// M(p) >= min(p_m, p_n - p_m). Searches (p_n, search_limit]; a search_limit
/// of 0 selects default_search_limit(q). Throws DomainError for y < 4.
LargeMRecord large_m_construction(std::uint64_t y, std::uint64_t search_limit, const PrimeTable& table);

} // namespace qnr
