#pragma once

/// @file series.hpp
/// @brief Limit constants as truncated series with certified tail bounds.
///
/// Every evaluator returns a SeriesValue whose tail_bound is a proven upper
/// bound on the mass of the omitted terms. Bounds on the growth of p_n come
/// from explicit prime-gap results:
///   - Bertrand:  p_{n+1} < 2 p_n
///   - Nagura:    p_{n+1} < 6/5 p_n            for p_n >= 25
///   - Dusart:    p_{n+1} <= (1 + 1/p_n)(1 + 1/(2 ln^2 p_n)) p_n   for p_n >= 3275
/// Each bound is non-increasing in p_n, so a term ratio certified at index N
/// holds for every later index.

#include "qnr/primes.hpp"

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace qnr {

struct SeriesValue {
    double value = 0.0;
    double tail_bound = 0.0;
    std::size_t terms_used = 0;
};

/// Positive rational num/den in lowest terms.
class Rational {
public:
    /// Throws DomainError for a zero numerator or denominator.
    Rational(std::uint64_t num, std::uint64_t den);

    /// Accepts "a/b" or "a"; decimals are rejected so comparisons stay exact.
    static Rational parse(std::string_view text);

    std::uint64_t num() const noexcept { return num_; }
    std::uint64_t den() const noexcept { return den_; }
    bool exceeds_one() const noexcept { return num_ > den_; }
    double to_double() const noexcept { return static_cast<double>(num_) / static_cast<double>(den_); }
    std::string to_string() const;

    friend bool operator==(const Rational&, const Rational&) = default;
    friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
        const auto lhs = static_cast<unsigned __int128>(a.num_) * b.den_;
        const auto rhs = static_cast<unsigned __int128>(b.num_) * a.den_;
        return lhs <=> rhs;
    }

private:
    std::uint64_t num_;
    std::uint64_t den_;
};

/// mu_k = sum_{n>=k} p_n C(n-1,k-1) 2^-n, the limiting mean of n_k(p).
/// Stops at the first N > 3k with p_N >= 25 whose certified tail
/// t_{N+1}/(1-0.9) is <= eps.
SeriesValue mu_k(std::size_t k, double eps, const PrimeTable& table);

/// Largest n with p_n <= z p_m, by exact integer comparison. Requires z > 1.
std::size_t n_of_m_z(std::size_t m, const Rational& z, const PrimeTable& table);

/// sum_{m>=1} 2^-n(m,z): the limiting density of primes with n_2 > z n_1.
/// The tail after M terms is at most 2^-M because n(m,z) >= m.
SeriesValue gap_constant(const Rational& z, double eps, const PrimeTable& table);

/// First `terms` partial sum of gap_constant, tail_bound = 2^-terms.
SeriesValue gap_constant_terms(const Rational& z, std::size_t terms, const PrimeTable& table);

/// sum_{1<=m<k} min(p_m, p_k - p_m) 2^-k, the limiting mean of M(p).
/// Inner sums are closed exactly (p_k > 2 p_m makes the min equal p_m);
/// the outer tail is dominated by sum_{m>M} p_m 2^-m.
SeriesValue m_average(double eps, const PrimeTable& table);

/// |f(t_1..t_k)| <= bound * max(t_i)^exponent, with exponent < 4 sqrt(e).
struct GrowthCertificate {
    double bound = 1.0;
    double exponent = 1.0;
};

/// A statistic f(n_1(p), ..., n_k(p)) of the first k prime non-residues.
struct Statistic {
    std::size_t arity = 1;
    std::function<double(std::span<const std::uint64_t>)> f;
    std::optional<GrowthCertificate> growth;
};

/// sum over 1 <= m_1 < ... < m_k of f(p_{m_1}, ..., p_{m_k}) 2^-m_k.
///
/// Tuples are grouped by m_k. The tail over m_k > M is bounded by
/// B sum_{m>M} p_m^c m^{k-1} 2^-m, summed exactly up to the first index
/// where the certified term ratio drops to 0.9 and geometrically after.
/// Throws ContractError when the certificate is missing, out of range, or
/// contradicted by an evaluated term; DomainError for eps <= 0.
SeriesValue general_expectation(const Statistic& statistic, double eps, const PrimeTable& table);

/// sum_{n=k}^{N} C(n,k) 2^-n.
double binom_identity(std::size_t k, std::size_t N);

/// sum_{n>3k} n C(n,k) 2^-n, summed until a term is below 1e-15 of the total.
double binom_tail(std::size_t k);

/// mu_k / p_{2k}.
double mu_ratio_check(std::size_t k, const PrimeTable& table);

namespace detail {

/// Upper bound for p_{n+1}/p_n valid for every p_n >= p.
double prime_ratio_bound(std::uint64_t p) noexcept;

} // namespace detail

} // namespace qnr
