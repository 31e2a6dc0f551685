#pragma once

/// @file quadratic.hpp
/// @brief Jacobi symbols, prime quadratic non-residues n_k(p), M(p) and
/// residue patterns.

#include "qnr/primes.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace qnr {

/// Jacobi symbol (a/n) for odd n >= 1. Throws DomainError for even n or n == 0.
int jacobi(std::uint64_t a, std::uint64_t n);

/// The k smallest primes q != p with (q/p) = -1, ascending.
struct NkResult {
    std::uint64_t p = 0;
    std::vector<std::uint64_t> values;
};

/// Prescribed Legendre symbols (p_1/p), ..., (p_n/p), each +1 or -1.
///
/// Written as a string of '+' and '-' characters, one per prime, starting
/// with p_1 = 2. The empty pattern is valid and matches every prime.
class ResiduePattern {
public:
    ResiduePattern() = default;
    /// Throws DomainError when an entry is not +1 or -1.
    explicit ResiduePattern(std::vector<int> epsilons);

    /// Parses "+-+..."; throws DomainError on any other character.
    static ResiduePattern parse(std::string_view text);

    std::size_t size() const noexcept { return eps_.size(); }
    /// epsilon for p_k, k is 1-based.
    int at(std::size_t k) const { return eps_.at(k - 1); }
    const std::vector<int>& epsilons() const noexcept { return eps_; }

    /// Bit i set iff epsilon_{i+1} = -1.
    std::uint64_t bits() const noexcept;
    static ResiduePattern from_bits(std::uint64_t bits, std::size_t n);

    std::string to_string() const;

    auto operator<=>(const ResiduePattern&) const = default;

private:
    std::vector<int> eps_;
};

/// Options for the n_k(p) walk.
struct NkOptions {
    /// Maximum number of candidate primes q examined before giving up.
    std::size_t candidate_cap = 1'000'000;
};

/// n_1(p), ..., n_k(p) for an odd prime p. q = p is skipped. Candidates may
/// exceed p. The table is grown privately if the walk runs past its end.
/// Throws DomainError when p is not an odd prime or k == 0, ResourceError
/// when the candidate cap is reached.
NkResult nk_nonresidues(std::uint64_t p, std::size_t k, const PrimeTable& table, const NkOptions& options = {});

/// Same walk, without validating p. Used by scans that iterate sieved primes.
/// Returns the number of values written to out (== out.size() unless capped).
std::size_t nk_nonresidues_unchecked(std::uint64_t p, std::span<std::uint64_t> out, PrimeCursor& primes,
                                     std::size_t candidate_cap = NkOptions{}.candidate_cap);

/// M(p) = min(n_1(p), n_2(p) - n_1(p)).
std::uint64_t m_statistic(std::uint64_t p, const PrimeTable& table);

/// ((p_1/p), ..., (p_n/p)). Throws DomainError when p is among p_1..p_n or
/// is not an odd prime.
ResiduePattern residue_pattern(std::uint64_t p, std::size_t n, const PrimeTable& table);

/// Bitmask form of residue_pattern (bit i set iff (p_{i+1}/p) = -1) over
/// the supplied first primes; p must not be one of them.
std::uint64_t residue_pattern_bits(std::uint64_t p, std::span<const std::uint64_t> first_primes);

} // namespace qnr
