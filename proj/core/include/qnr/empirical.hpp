#pragma once

/// @file empirical.hpp
/// @brief Scans over odd primes p <= x with exact integer aggregates.
///
/// p = 2 is never scanned. Work is split into contiguous ranges of prime
/// indices ("shards"); every accumulator is an integer, so the merged result
/// does not depend on the shard count or on the order shards finish in.

#include "qnr/primes.hpp"
#include "qnr/quadratic.hpp"
#include "qnr/series.hpp"

#include <nlohmann/json.hpp>

#include <cstddef>
#include <cstdint>
#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace qnr {

struct ScanConfig {
    std::uint64_t x = 3;
    std::size_t k_max = 1;
    std::vector<Rational> z_list;
    /// Pattern depth; 0 disables pattern counting.
    std::size_t pattern_n = 0;
    std::size_t shards = 1;
    /// Worker threads; 0 means hardware concurrency.
    unsigned threads = 0;
    /// Extra bounds at which cumulative totals are recorded. Powers of ten
    /// below x and x itself are always recorded.
    std::vector<std::uint64_t> checkpoints;
    /// Test hook: accept z = 1, where n_2 > z n_1 holds for every p.
    bool allow_degenerate_z = false;

    /// Throws DomainError when the configuration is invalid.
    void validate() const;
};

/// Cumulative totals over odd primes p <= x.
struct ScanTotals {
    std::uint64_t x = 0;
    std::uint64_t primes_scanned = 0;
    std::vector<std::uint64_t> sum_nk;      // index k-1
    std::uint64_t sum_m = 0;
    std::vector<std::uint64_t> gap_counts;  // parallel to ScanConfig::z_list
};

struct MaxM {
    std::uint64_t p = 0;
    std::uint64_t m = 0;
};

struct ScanResult {
    std::uint64_t x = 0;
    std::size_t k_max = 0;
    std::vector<Rational> z_list;
    std::size_t pattern_n = 0;

    std::uint64_t primes_scanned = 0;
    std::vector<std::uint64_t> sum_nk;
    std::uint64_t sum_m = 0;
    std::vector<std::uint64_t> gap_counts;
    /// Keyed by ResiduePattern::bits(); only observed patterns are present.
    std::map<std::uint64_t, std::uint64_t> pattern_counts;
    /// Largest M(p); ties go to the smaller p.
    MaxM max_m;
    /// Totals at each checkpoint, ascending in x; the last entry is x itself.
    std::vector<ScanTotals> trace;
};

/// Runs the scan. The table is grown privately when x exceeds its limit.
ScanResult scan(const ScanConfig& config, const PrimeTable& table);

/// Counts for primes p <= x outside the first pattern.size() primes (and
/// p != 2) whose residue pattern equals `pattern`; expected = pi(x)/2^n.
struct PatternDensity {
    std::uint64_t count = 0;
    double expected = 0.0;
};
PatternDensity pattern_density(std::uint64_t x, const ResiduePattern& pattern, const PrimeTable& table);

/// Stable JSON form: primes_scanned, sum_nk, sum_m, gap_counts ("num/den"
/// keys), pattern_counts ("+-+" keys), max_m, plus x, k_max and pattern_n.
nlohmann::json to_json(const ScanResult& result);

/// Limit constants matching a scan's statistics, evaluated to `eps`.
struct TheoryValues {
    std::vector<double> mu;          // mu_1..mu_kmax
    double m_average = 0.0;
    std::vector<double> gap;         // gap_constant(z) per z; NaN for z <= 1
};
TheoryValues theoretical_values(const ScanConfig& config, double eps, const PrimeTable& table);

/// CSV with header x,stat_name,empirical,theoretical,abs_err; one row per
/// statistic per checkpoint of result.trace.
void write_convergence_csv(const ScanResult& result, const TheoryValues& theory, std::ostream& out);

/// %.{digits}g formatting, and the double that string parses back to.
std::string format_sig(double v, int digits = 12);
double round_sig(double v, int digits = 12);

} // namespace qnr
