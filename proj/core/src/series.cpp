#include "qnr/series.hpp"

#include "qnr/errors.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace qnr {
namespace {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
public:
    void add(double x) noexcept {
        const double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x)) {
            comp_ += (sum_ - t) + x;
        } else {
            comp_ += (x - t) + sum_;
        }
        sum_ = t;
    }
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// mantissa * 2^exponent, renormalised after every product so that
// C(n,k) 2^-n style terms never underflow or overflow.
class ScaledDouble {
public:
    ScaledDouble(double mantissa, int exponent) : mant_(mantissa), exp_(exponent) { normalise(); }

    ScaledDouble& operator*=(double r) noexcept {
        mant_ *= r;
        normalise();
        return *this;
    }
    double to_double() const noexcept { return std::ldexp(mant_, exp_); }

private:
    void normalise() noexcept {
        int e = 0;
        mant_ = std::frexp(mant_, &e);
        exp_ += e;
    }

    double mant_;
    int exp_;
};

void require_positive_eps(double eps) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw DomainError("eps must be a finite positive number");
}

void require_gap_z(const Rational& z) {
    if (!z.exceeds_one()) throw DomainError("gap threshold z must exceed 1, got " + z.to_string());
}

// Ratio of successive mu_k terms: t_{n+1}/t_n.
double mu_term_ratio(std::uint64_t p_n, std::uint64_t p_next, std::size_t n, std::size_t k) {
    return (static_cast<double>(p_next) / static_cast<double>(p_n)) *
           (static_cast<double>(n) / static_cast<double>(n - k + 1)) / 2.0;
}

constexpr double kStopRatio = 0.9;

// Certified bound on sum_{m>M} p_m 2^-m (the mu_1 tail), using the mu_k
// stop rule with k = 1. Requires p_M >= 25.
double mu1_tail_after(std::size_t M, PrimeCursor& primes) {
    const double t_next = std::ldexp(static_cast<double>(primes.nth(M + 1)), -static_cast<int>(M + 1));
    return t_next / (1.0 - kStopRatio);
}

} // namespace

namespace detail {

double prime_ratio_bound(std::uint64_t p) noexcept {
    if (p >= 3275) {
        const double lp = std::log(static_cast<double>(p));
        return (1.0 + 1.0 / static_cast<double>(p)) * (1.0 + 1.0 / (2.0 * lp * lp));
    }
    if (p >= 25) return 1.2;
    return 2.0;
}

} // namespace detail

Rational::Rational(std::uint64_t num, std::uint64_t den) : num_(num), den_(den) {
    if (num == 0 || den == 0) throw DomainError("rational must have positive numerator and denominator");
    const auto g = std::gcd(num_, den_);
    num_ /= g;
    den_ /= g;
}

Rational Rational::parse(std::string_view text) {
    const auto slash = text.find('/');
    auto parse_part = [&](std::string_view part) {
        std::uint64_t v = 0;
        const auto* end = part.data() + part.size();
        const auto [ptr, ec] = std::from_chars(part.data(), end, v);
        if (part.empty() || ec != std::errc{} || ptr != end) {
            throw DomainError("malformed rational '" + std::string(text) + "'; expected num/den with integers");
        }
        return v;
    };
    if (slash == std::string_view::npos) return Rational(parse_part(text), 1);
    return Rational(parse_part(text.substr(0, slash)), parse_part(text.substr(slash + 1)));
}

std::string Rational::to_string() const { return std::to_string(num_) + "/" + std::to_string(den_); }

SeriesValue mu_k(std::size_t k, double eps, const PrimeTable& table) {
    if (k == 0) throw DomainError("mu_k needs k >= 1");
    require_positive_eps(eps);
    PrimeCursor primes(table);

    CompensatedSum sum;
    ScaledDouble term(static_cast<double>(primes.nth(k)), -static_cast<int>(k));  // t_k = p_k 2^-k
    for (std::size_t n = k;; ++n) {
        sum.add(term.to_double());
        const std::uint64_t p_n = primes.nth(n);
        const std::uint64_t p_next = primes.nth(n + 1);
        const double ratio = mu_term_ratio(p_n, p_next, n, k);
        term *= ratio;  // now t_{n+1}
        // Past n = 3k, n/(n-k+1) < 3/2, and Nagura gives p_{n+1}/p_n < 6/5
        // once p_n >= 25, so every later ratio is below 0.9.
        if (n > 3 * k && p_n >= 25 && ratio <= kStopRatio) {
            const double tail = term.to_double() / (1.0 - kStopRatio);
            if (tail <= eps) return {sum.value(), tail, n - k + 1};
        }
    }
}

std::size_t n_of_m_z(std::size_t m, const Rational& z, const PrimeTable& table) {
    require_gap_z(z);
    if (m == 0) throw DomainError("n(m,z) needs m >= 1");
    PrimeCursor primes(table);
    const auto scaled = static_cast<unsigned __int128>(z.num()) * primes.nth(m) / z.den();
    if (scaled > kMaxSieveLimit) throw ResourceError("z * p_m exceeds the sievable range");
    return primes.pi(static_cast<std::uint64_t>(scaled));
}

namespace {

SeriesValue gap_sum(const Rational& z, std::size_t terms, PrimeCursor& primes) {
    CompensatedSum sum;
    for (std::size_t m = 1; m <= terms; ++m) {
        const auto scaled = static_cast<unsigned __int128>(z.num()) * primes.nth(m) / z.den();
        if (scaled > kMaxSieveLimit) throw ResourceError("z * p_m exceeds the sievable range");
        const std::size_t n = primes.pi(static_cast<std::uint64_t>(scaled));
        sum.add(std::ldexp(1.0, -static_cast<int>(n)));
    }
    return {sum.value(), std::ldexp(1.0, -static_cast<int>(terms)), terms};
}

} // namespace

SeriesValue gap_constant(const Rational& z, double eps, const PrimeTable& table) {
    require_gap_z(z);
    require_positive_eps(eps);
    std::size_t terms = 1;
    while (std::ldexp(1.0, -static_cast<int>(terms)) > eps) ++terms;
    PrimeCursor primes(table);
    return gap_sum(z, terms, primes);
}

SeriesValue gap_constant_terms(const Rational& z, std::size_t terms, const PrimeTable& table) {
    require_gap_z(z);
    if (terms == 0) throw DomainError("need at least one term");
    PrimeCursor primes(table);
    return gap_sum(z, terms, primes);
}

SeriesValue m_average(double eps, const PrimeTable& table) {
    require_positive_eps(eps);
    PrimeCursor primes(table);
    CompensatedSum sum;
    for (std::size_t m = 1;; ++m) {
        const std::uint64_t pm = primes.nth(m);
        // Inner sum over k > m closes exactly: for p_k > 2 p_m the min is p_m
        // and sum_{k>K} p_m 2^-k = p_m 2^-K.
        const std::size_t last_small = primes.pi(2 * pm);
        CompensatedSum inner;
        for (std::size_t k = m + 1; k <= last_small; ++k) {
            inner.add(std::ldexp(static_cast<double>(primes.nth(k) - pm), -static_cast<int>(k)));
        }
        inner.add(std::ldexp(static_cast<double>(pm), -static_cast<int>(last_small)));
        sum.add(inner.value());

        if (pm >= 25) {
            const double tail = mu1_tail_after(m, primes);
            if (tail <= eps) return {sum.value(), tail, m};
        }
    }
}

namespace {

constexpr double kMaxGrowthExponent = 6.594885082800315;  // 4 sqrt(e)

// Dominating series s_m = B p_m^c m^{k-1} 2^-m for the general evaluator.
class DominatingTail {
public:
    DominatingTail(const GrowthCertificate& g, std::size_t k, PrimeCursor& primes)
        : bound_(g.bound), exponent_(g.exponent), k_(k), primes_(primes) {
        // First index L whose certified ratio bound is <= 0.9; the ratio bound
        // is non-increasing, so it holds for every index after L as well.
        for (std::size_t m = 1;; ++m) {
            if (ratio_bound_at(m) <= kStopRatio) {
                anchor_ = m;
                break;
            }
        }
        terms_.resize(anchor_ + 2, 0.0);
        for (std::size_t m = 1; m <= anchor_ + 1; ++m) terms_[m] = term(m);
        suffix_.assign(anchor_ + 2, 0.0);
        // suffix_[M] = sum_{M < m <= anchor} s_m + s_{anchor+1}/(1-rho)
        suffix_[anchor_] = terms_[anchor_ + 1] / (1.0 - ratio_bound_at(anchor_));
        for (std::size_t M = anchor_; M-- > 0;) suffix_[M] = suffix_[M + 1] + terms_[M + 1];
    }

    double after(std::size_t M) {
        if (M <= anchor_) return suffix_[M];
        return term(M + 1) / (1.0 - ratio_bound_at(M));
    }

private:
    double term(std::size_t m) {
        const double lp = std::log(static_cast<double>(primes_.nth(m)));
        const double lg = std::log(bound_) + exponent_ * lp + static_cast<double>(k_ - 1) * std::log(static_cast<double>(m)) -
                          static_cast<double>(m) * std::log(2.0);
        return std::exp(lg);
    }

    // Bound on s_{n+1}/s_n valid for all n >= m.
    double ratio_bound_at(std::size_t m) {
        const double rp = detail::prime_ratio_bound(primes_.nth(m));
        const double rm = static_cast<double>(m + 1) / static_cast<double>(m);
        return std::pow(rp, exponent_) * std::pow(rm, static_cast<double>(k_ - 1)) / 2.0;
    }

    double bound_;
    double exponent_;
    std::size_t k_;
    PrimeCursor& primes_;
    std::size_t anchor_ = 0;
    std::vector<double> terms_;
    std::vector<double> suffix_;
};

} // namespace

SeriesValue general_expectation(const Statistic& statistic, double eps, const PrimeTable& table) {
    require_positive_eps(eps);
    const std::size_t k = statistic.arity;
    if (k == 0) throw DomainError("statistic arity must be >= 1");
    if (!statistic.f) throw ContractError("statistic has no function");
    if (!statistic.growth) throw ContractError("general_expectation needs a growth certificate (bound, exponent)");
    const auto growth = *statistic.growth;
    if (!(growth.bound > 0.0) || !std::isfinite(growth.bound) || !(growth.exponent >= 0.0) ||
        !(growth.exponent < kMaxGrowthExponent)) {
        throw ContractError("growth certificate needs bound > 0 and 0 <= exponent < 4 sqrt(e)");
    }

    PrimeCursor primes(table);
    DominatingTail tail(growth, k, primes);

    CompensatedSum sum;
    std::vector<std::size_t> idx(k);
    std::vector<std::uint64_t> args(k);
    std::size_t evaluated = 0;
    for (std::size_t m = k;; ++m) {
        const std::uint64_t pm = primes.nth(m);
        const double cap = growth.bound * std::pow(static_cast<double>(pm), growth.exponent) * (1.0 + 1e-12);
        CompensatedSum inner;
        // Lexicographic walk over (k-1)-subsets of {1..m-1}.
        for (std::size_t i = 0; i + 1 < k; ++i) idx[i] = i + 1;
        idx[k - 1] = m;
        args[k - 1] = pm;
        for (;;) {
            for (std::size_t i = 0; i + 1 < k; ++i) args[i] = primes.nth(idx[i]);
            const double v = statistic.f(args);
            if (!std::isfinite(v) || std::fabs(v) > cap) {
                throw ContractError("statistic value " + std::to_string(v) + " at m_k = " + std::to_string(m) +
                                    " violates its growth certificate");
            }
            inner.add(v);
            ++evaluated;

            std::size_t i = k - 1;
            while (i > 0 && idx[i - 1] == m - k + i) --i;
            if (i == 0) break;
            ++idx[i - 1];
            for (std::size_t j = i; j + 1 < k; ++j) idx[j] = idx[j - 1] + 1;
        }
        sum.add(std::ldexp(inner.value(), -static_cast<int>(m)));

        const double bound = tail.after(m);
        if (bound <= eps) return {sum.value(), bound, evaluated};
    }
}

double binom_identity(std::size_t k, std::size_t N) {
    if (N < k) throw DomainError("binom_identity needs N >= k");
    CompensatedSum sum;
    ScaledDouble term(1.0, -static_cast<int>(k));  // C(k,k) 2^-k
    for (std::size_t n = k; n <= N; ++n) {
        sum.add(term.to_double());
        term *= static_cast<double>(n + 1) / static_cast<double>(n + 1 - k) / 2.0;
    }
    return sum.value();
}

double binom_tail(std::size_t k) {
    if (k == 0) throw DomainError("binom_tail needs k >= 1");
    ScaledDouble a(1.0, -static_cast<int>(k));  // C(n,k) 2^-n at n = k
    for (std::size_t n = k; n <= 3 * k; ++n) a *= static_cast<double>(n + 1) / static_cast<double>(n + 1 - k) / 2.0;
    CompensatedSum sum;
    for (std::size_t n = 3 * k + 1;; ++n) {
        const double t = static_cast<double>(n) * a.to_double();
        sum.add(t);
        if (t < 1e-15 * sum.value()) break;
        a *= static_cast<double>(n + 1) / static_cast<double>(n + 1 - k) / 2.0;
    }
    return sum.value();
}

double mu_ratio_check(std::size_t k, const PrimeTable& table) {
    const auto mu = mu_k(k, 1e-10, table);
    PrimeCursor primes(table);
    return mu.value / static_cast<double>(primes.nth(2 * k));
}

} // namespace qnr
