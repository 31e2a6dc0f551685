#include "qnr/primes.hpp"

#include "qnr/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace qnr {
namespace {

std::uint64_t isqrt(std::uint64_t n) {
    auto r = static_cast<std::uint64_t>(std::sqrt(static_cast<long double>(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// Odd primes <= limit by a plain odd-only sieve; limit is at most ~2^20 here.
std::vector<std::uint32_t> small_odd_primes(std::uint64_t limit) {
    std::vector<std::uint32_t> out;
    if (limit < 3) return out;
    const std::size_t n = static_cast<std::size_t>((limit - 1) / 2);  // index i <-> 2i+1
    std::vector<char> composite(n + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        if (composite[i]) continue;
        const std::uint64_t p = 2 * i + 1;
        out.push_back(static_cast<std::uint32_t>(p));
        for (std::uint64_t m = p * p; m <= limit; m += 2 * p) composite[(m - 1) / 2] = 1;
    }
    return out;
}

std::size_t estimated_count(std::uint64_t x) {
    if (x < 17) return 8;
    const double lx = std::log(static_cast<double>(x));
    return static_cast<std::size_t>(1.25506 * static_cast<double>(x) / lx) + 1;
}

void check_budget(std::uint64_t limit, const SieveOptions& options) {
    if (limit > kMaxSieveLimit) {
        throw ResourceError("sieve limit " + std::to_string(limit) + " exceeds 2^40");
    }
    const std::size_t bytes = estimated_count(limit) * sizeof(std::uint64_t);
    if (bytes > options.memory_budget_bytes) {
        throw ResourceError("prime table up to " + std::to_string(limit) + " needs ~" +
                            std::to_string(bytes) + " bytes, budget is " +
                            std::to_string(options.memory_budget_bytes));
    }
}

// Sieves the odd numbers in [seg_lo, seg_hi] (both odd) and appends primes.
void sieve_segment(std::uint64_t seg_lo, std::uint64_t seg_hi, std::span<const std::uint32_t> base,
                   std::vector<char>& flags, std::vector<std::uint64_t>& out) {
    const std::size_t len = static_cast<std::size_t>((seg_hi - seg_lo) / 2 + 1);
    flags.assign(len, 0);
    for (const std::uint64_t q : base) {
        if (q * q > seg_hi) break;
        std::uint64_t start = std::max(q * q, (seg_lo + q - 1) / q * q);
        if (start % 2 == 0) start += q;
        for (std::uint64_t m = start; m <= seg_hi; m += 2 * q) flags[(m - seg_lo) / 2] = 1;
    }
    for (std::size_t i = 0; i < len; ++i) {
        if (!flags[i]) out.push_back(seg_lo + 2 * i);
    }
}

struct Segment {
    std::uint64_t lo;
    std::uint64_t hi;
};

// Odd-number segments covering [lo, hi]; lo, hi clipped to odd values >= 3.
std::vector<Segment> plan_segments(std::uint64_t lo, std::uint64_t hi, std::size_t segment_odds) {
    std::vector<Segment> segs;
    lo = std::max<std::uint64_t>(lo, 3);
    if (lo % 2 == 0) ++lo;
    if (hi % 2 == 0) --hi;
    if (hi < lo) return segs;
    const std::uint64_t span = 2 * static_cast<std::uint64_t>(std::max<std::size_t>(segment_odds, 64));
    for (std::uint64_t a = lo; a <= hi;) {
        const std::uint64_t b = (hi - a < span) ? hi : a + span - 2;
        segs.push_back({a, b});
        if (b == hi) break;
        a = b + 2;
    }
    return segs;
}

std::vector<std::uint64_t> sieve_range(std::uint64_t lo, std::uint64_t hi, const SieveOptions& options) {
    std::vector<std::uint64_t> out;
    if (hi < 2 || hi < lo) return out;
    if (lo <= 2) out.push_back(2);

    const auto base = small_odd_primes(isqrt(hi));
    const auto segs = plan_segments(lo, hi, options.segment_odds);
    if (segs.empty()) return out;

    unsigned workers = options.threads ? options.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, segs.size()));

    if (workers <= 1) {
        std::vector<char> flags;
        for (const auto& s : segs) sieve_segment(s.lo, s.hi, base, flags, out);
        return out;
    }

    // Contiguous blocks of segments per worker; concatenation restores order.
    std::vector<std::vector<std::uint64_t>> parts(workers);
    std::vector<std::thread> pool;
    const std::size_t per = (segs.size() + workers - 1) / workers;
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            std::vector<char> flags;
            const std::size_t first = w * per;
            const std::size_t last = std::min(segs.size(), first + per);
            for (std::size_t i = first; i < last; ++i) sieve_segment(segs[i].lo, segs[i].hi, base, flags, parts[w]);
        });
    }
    for (auto& t : pool) t.join();
    for (auto& part : parts) out.insert(out.end(), part.begin(), part.end());
    return out;
}

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t b, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1 % m;
    b %= m;
    while (e) {
        if (e & 1) r = mulmod(r, b, m);
        b = mulmod(b, b, m);
        e >>= 1;
    }
    return r;
}

} // namespace

PrimeTable::PrimeTable() : primes_(std::make_shared<const std::vector<std::uint64_t>>()) {}

std::uint64_t PrimeTable::nth(std::size_t n) const {
    if (n == 0) throw DomainError("prime index is 1-based; got 0");
    if (n > count()) {
        throw RangeError("p_" + std::to_string(n) + " is beyond the table (count " + std::to_string(count()) +
                         ", limit " + std::to_string(limit_) + "); extend the table");
    }
    return (*primes_)[n - 1];
}

std::size_t PrimeTable::pi(std::uint64_t x) const {
    if (x > limit_) {
        throw RangeError("pi(" + std::to_string(x) + ") requested but table limit is " + std::to_string(limit_));
    }
    return static_cast<std::size_t>(std::upper_bound(primes_->begin(), primes_->end(), x) - primes_->begin());
}

bool PrimeTable::contains(std::uint64_t x) const {
    if (x > limit_) throw RangeError("membership query above table limit");
    return std::binary_search(primes_->begin(), primes_->end(), x);
}

PrimeTable make_prime_table(std::uint64_t limit, std::vector<std::uint64_t> primes) {
    return PrimeTable(limit, std::make_shared<const std::vector<std::uint64_t>>(std::move(primes)));
}

PrimeTable sieve_primes(std::uint64_t limit, const SieveOptions& options) {
    if (limit < 2) throw DomainError("sieve limit must be >= 2, got " + std::to_string(limit));
    check_budget(limit, options);
    auto primes = sieve_range(2, limit, options);
    return make_prime_table(limit, std::move(primes));
}

std::uint64_t nth_prime(const PrimeTable& table, std::size_t n) { return table.nth(n); }

std::size_t prime_count(const PrimeTable& table, std::uint64_t x) { return table.pi(x); }

PrimeTable extend(const PrimeTable& table, std::uint64_t new_limit, const SieveOptions& options) {
    if (new_limit <= table.limit()) {
        throw DomainError("extend needs new_limit > " + std::to_string(table.limit()) + ", got " +
                          std::to_string(new_limit));
    }
    if (new_limit < 2) throw DomainError("sieve limit must be >= 2");
    check_budget(new_limit, options);
    std::vector<std::uint64_t> primes;
    primes.reserve(estimated_count(new_limit));
    primes.assign(table.primes().begin(), table.primes().end());
    auto fresh = sieve_range(table.limit() + 1, new_limit, options);
    primes.insert(primes.end(), fresh.begin(), fresh.end());
    return make_prime_table(new_limit, std::move(primes));
}

std::vector<std::uint64_t> primes_in_range(std::uint64_t lo, std::uint64_t hi, const SieveOptions& options) {
    if (hi > kMaxSieveLimit) throw ResourceError("range end exceeds 2^40");
    return sieve_range(lo, hi, options);
}

void for_each_prime(std::uint64_t lo, std::uint64_t hi, const std::function<bool(std::uint64_t)>& visit,
                    const SieveOptions& options) {
    if (hi > kMaxSieveLimit) throw ResourceError("range end exceeds 2^40");
    if (hi < 2 || hi < lo) return;
    if (lo <= 2 && !visit(2)) return;
    const auto base = small_odd_primes(isqrt(hi));
    std::vector<char> flags;
    std::vector<std::uint64_t> found;
    for (const auto& s : plan_segments(lo, hi, options.segment_odds)) {
        found.clear();
        sieve_segment(s.lo, s.hi, base, flags, found);
        for (const auto p : found) {
            if (!visit(p)) return;
        }
    }
}

bool is_prime_u64(std::uint64_t n) noexcept {
    if (n < 2) return false;
    for (const std::uint64_t p : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    for (const std::uint64_t a : {2u, 3u, 5u, 7u, 11u, 13u, 17u, 19u, 23u, 29u, 31u, 37u}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

PrimeCursor::PrimeCursor(PrimeTable table, std::uint64_t max_limit)
    : table_(std::move(table)), max_limit_(std::min(max_limit, kMaxSieveLimit)) {}

void PrimeCursor::grow_to(std::uint64_t limit) {
    if (limit <= table_.limit()) return;
    if (table_.limit() >= max_limit_) {
        throw ResourceError("prime table exhausted at limit " + std::to_string(table_.limit()) +
                            " and not extendable further");
    }
    const std::uint64_t target = std::min(max_limit_, std::max({limit, 2 * table_.limit(), std::uint64_t{1024}}));
    table_ = extend(table_, target);
}

std::uint64_t PrimeCursor::nth(std::size_t n) {
    while (table_.count() < n) grow_to(2 * table_.limit());
    return table_.nth(n);
}

std::size_t PrimeCursor::pi(std::uint64_t x) {
    if (x > table_.limit()) {
        if (x > max_limit_) {
            throw ResourceError("pi(" + std::to_string(x) + ") needs primes beyond the cursor limit " +
                                std::to_string(max_limit_));
        }
        grow_to(x);
    }
    return table_.pi(x);
}

} // namespace qnr
