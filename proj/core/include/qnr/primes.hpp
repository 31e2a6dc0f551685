#pragma once

/// @file primes.hpp
/// @brief Segmented sieve and the immutable PrimeTable.
///
/// Primes are indexed from 1 (p_1 = 2) everywhere in this library. A
/// PrimeTable never changes after construction; growing it produces a new
/// table that shares nothing mutable with the old one, so a table can be
/// handed to any number of threads.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace qnr {

struct SieveOptions {
    /// Odd numbers per segment (one flag byte each).
    std::size_t segment_odds = std::size_t{1} << 18;
    /// Upper bound on the bytes the resulting prime list may occupy.
    std::size_t memory_budget_bytes = std::size_t{1} << 31;
    /// Worker threads for segment processing; 0 means hardware concurrency.
    unsigned threads = 0;
};

/// Largest limit accepted by the sieve.
inline constexpr std::uint64_t kMaxSieveLimit = std::uint64_t{1} << 40;

class PrimeTable {
public:
    /// Empty table (limit 1, no primes).
    PrimeTable();

    std::uint64_t limit() const noexcept { return limit_; }
    std::size_t count() const noexcept { return primes_->size(); }
    std::span<const std::uint64_t> primes() const noexcept { return *primes_; }

    /// p_n, 1-indexed. Throws RangeError when n > count().
    std::uint64_t nth(std::size_t n) const;

    /// pi(x) by binary search. Throws RangeError when x > limit().
    std::size_t pi(std::uint64_t x) const;

    /// True when x is prime; x must not exceed limit().
    bool contains(std::uint64_t x) const;

    friend bool operator==(const PrimeTable& a, const PrimeTable& b) {
        return a.limit_ == b.limit_ && *a.primes_ == *b.primes_;
    }

private:
    friend PrimeTable make_prime_table(std::uint64_t, std::vector<std::uint64_t>);

    PrimeTable(std::uint64_t limit, std::shared_ptr<const std::vector<std::uint64_t>> primes)
        : limit_(limit), primes_(std::move(primes)) {}

    std::uint64_t limit_ = 1;
    std::shared_ptr<const std::vector<std::uint64_t>> primes_;
};

/// Wraps an already-validated ascending prime list (used by the cache loader).
PrimeTable make_prime_table(std::uint64_t limit, std::vector<std::uint64_t> primes);

/// All primes <= limit. Throws DomainError for limit < 2 and ResourceError
/// when the estimated table size exceeds the memory budget.
PrimeTable sieve_primes(std::uint64_t limit, const SieveOptions& options = {});

/// 1-indexed p_n; forwards to PrimeTable::nth.
std::uint64_t nth_prime(const PrimeTable& table, std::size_t n);

/// pi(x); forwards to PrimeTable::pi.
std::size_t prime_count(const PrimeTable& table, std::uint64_t x);

/// Table equal to sieve_primes(new_limit). Only (limit, new_limit] is sieved.
PrimeTable extend(const PrimeTable& table, std::uint64_t new_limit, const SieveOptions& options = {});

/// Primes in [lo, hi], ascending, without building a table.
std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi,
                                           const SieveOptions& options = {});

/// Calls visit(p) for each prime in [lo, hi] in ascending order, one
/// segment at a time. Stops early when visit returns false.
void for_each_prime(std::uint64_t lo, std::uint64_t hi,
                    const std::function<bool(std::uint64_t)>& visit,
                    const SieveOptions& options = {});

/// Deterministic Miller-Rabin, exact for all 64-bit inputs.
bool is_prime_u64(std::uint64_t n) noexcept;

/// Read-through view of a table that sieves further on demand.
///
/// Holds its own grown copy; the caller's table is never modified. Growth
/// doubles the limit and stops with ResourceError at max_limit.
class PrimeCursor {
public:
    explicit PrimeCursor(PrimeTable table, std::uint64_t max_limit = kMaxSieveLimit);

    /// p_n, growing the table as needed.
    std::uint64_t nth(std::size_t n);

    /// pi(x), growing the table as needed.
    std::size_t pi(std::uint64_t x);

    const PrimeTable& table() const noexcept { return table_; }

private:
    void grow_to(std::uint64_t limit);

    PrimeTable table_;
    std::uint64_t max_limit_;
};

/// Prime-list cache file.
///
/// Layout (all integers little-endian):
///   8 bytes  magic "QNRPRIME"
///   u32      format version (1)
///   u32      reserved, zero
///   u64      limit
///   u64      count
///   count x u64 primes, ascending
namespace cache {

inline constexpr std::uint32_t kFormatVersion = 1;

/// Writes atomically (temporary file + rename). Throws IoError.
void save(const PrimeTable& table, const std::filesystem::path& path);

/// Validates header, size, ordering of the spot-checked entries and the
/// primality of 16 random entries. Throws IoError on any mismatch.
PrimeTable load(const std::filesystem::path& path);

} // namespace cache

} // namespace qnr
