#include "qnr/empirical.hpp"

#include "qnr/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <limits>
#include <thread>
#include <unordered_map>

namespace qnr {

void ScanConfig::validate() const {
    if (x < 3) throw DomainError("scan bound x must be >= 3");
    if (k_max < 1) throw DomainError("k_max must be >= 1");
    if (pattern_n > 20) throw DomainError("pattern depth is limited to 20");
    if (shards < 1) throw DomainError("shards must be >= 1");
    for (const auto& z : z_list) {
        if (!z.exceeds_one() && !(allow_degenerate_z && z.num() == z.den())) {
            throw DomainError("gap threshold z must exceed 1, got " + z.to_string());
        }
    }
}

namespace {

struct Delta {
    std::uint64_t scanned = 0;
    std::vector<std::uint64_t> sum_nk;
    std::uint64_t sum_m = 0;
    std::vector<std::uint64_t> gaps;

    Delta(std::size_t k, std::size_t z) : sum_nk(k, 0), gaps(z, 0) {}

    void add(const Delta& o) {
        scanned += o.scanned;
        for (std::size_t i = 0; i < sum_nk.size(); ++i) sum_nk[i] += o.sum_nk[i];
        sum_m += o.sum_m;
        for (std::size_t i = 0; i < gaps.size(); ++i) gaps[i] += o.gaps[i];
    }
};

struct ShardState {
    std::vector<Delta> buckets;
    std::unordered_map<std::uint64_t, std::uint64_t> patterns;
    MaxM max_m;
};

bool better_max(const MaxM& cand, const MaxM& cur) {
    return cand.m > cur.m || (cand.m == cur.m && cand.p < cur.p);
}

std::vector<std::uint64_t> checkpoint_list(const ScanConfig& config) {
    std::vector<std::uint64_t> cps;
    for (std::uint64_t t = 10; t < config.x; t *= 10) {
        cps.push_back(t);
        if (t > std::numeric_limits<std::uint64_t>::max() / 10) break;
    }
    for (const auto c : config.checkpoints) {
        if (c >= 3 && c <= config.x) cps.push_back(c);
    }
    cps.push_back(config.x);
    std::sort(cps.begin(), cps.end());
    cps.erase(std::unique(cps.begin(), cps.end()), cps.end());
    return cps;
}

void scan_shard(const ScanConfig& config, const PrimeTable& table, std::span<const std::uint64_t> odd_primes,
                std::span<const std::uint64_t> cps, ShardState& state) {
    const std::size_t k_eff = std::max<std::size_t>(config.k_max, 2);
    const std::size_t nz = config.z_list.size();
    state.buckets.assign(cps.size(), Delta(config.k_max, nz));

    PrimeCursor cursor(table);
    std::vector<std::uint64_t> nk(k_eff);
    const auto first = table.primes().first(std::min(config.pattern_n, table.count()));
    const std::uint64_t last_pattern_prime = config.pattern_n ? first.back() : 0;

    std::size_t b = 0;
    for (const std::uint64_t p : odd_primes) {
        while (cps[b] < p) ++b;
        Delta& d = state.buckets[b];

        if (nk_nonresidues_unchecked(p, nk, cursor) < k_eff) {
            throw ResourceError("n_k(" + std::to_string(p) + ") candidate cap reached");
        }
        ++d.scanned;
        for (std::size_t i = 0; i < config.k_max; ++i) d.sum_nk[i] += nk[i];
        const std::uint64_t m = std::min(nk[0], nk[1] - nk[0]);
        d.sum_m += m;
        for (std::size_t i = 0; i < nz; ++i) {
            const auto& z = config.z_list[i];
            const auto lhs = static_cast<unsigned __int128>(z.den()) * nk[1];
            const auto rhs = static_cast<unsigned __int128>(z.num()) * nk[0];
            if (lhs > rhs) ++d.gaps[i];
        }
        if (config.pattern_n && p > last_pattern_prime) ++state.patterns[residue_pattern_bits(p, first)];
        if (better_max({p, m}, state.max_m)) state.max_m = {p, m};
    }
}

} // namespace

ScanResult scan(const ScanConfig& config, const PrimeTable& table_in) {
    config.validate();
    const PrimeTable table = table_in.limit() >= config.x ? table_in : extend(table_in, config.x);
    if (config.pattern_n > table.count()) throw DomainError("pattern depth exceeds available primes");

    const std::size_t n_primes = table.pi(config.x);
    const auto odd = table.primes().subspan(1, n_primes - 1);
    const auto cps = checkpoint_list(config);

    const std::size_t shards = config.shards;
    std::vector<ShardState> states(shards);
    std::vector<std::exception_ptr> errors(shards);
    auto run = [&](std::size_t s) {
        const std::size_t lo = odd.size() * s / shards;
        const std::size_t hi = odd.size() * (s + 1) / shards;
        try {
            scan_shard(config, table, odd.subspan(lo, hi - lo), cps, states[s]);
        } catch (...) {
            errors[s] = std::current_exception();
        }
    };

    unsigned workers = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, shards));
    if (workers <= 1) {
        for (std::size_t s = 0; s < shards; ++s) run(s);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t s; (s = next.fetch_add(1)) < shards;) run(s);
            });
        }
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    ScanResult r;
    r.x = config.x;
    r.k_max = config.k_max;
    r.z_list = config.z_list;
    r.pattern_n = config.pattern_n;

    std::vector<Delta> buckets(cps.size(), Delta(config.k_max, config.z_list.size()));
    for (const auto& st : states) {
        for (std::size_t b = 0; b < cps.size(); ++b) buckets[b].add(st.buckets[b]);
        for (const auto& [bits, c] : st.patterns) r.pattern_counts[bits] += c;
        if (st.max_m.m != 0 && better_max(st.max_m, r.max_m)) r.max_m = st.max_m;
    }

    Delta running(config.k_max, config.z_list.size());
    for (std::size_t b = 0; b < cps.size(); ++b) {
        running.add(buckets[b]);
        r.trace.push_back({cps[b], running.scanned, running.sum_nk, running.sum_m, running.gaps});
    }
    r.primes_scanned = running.scanned;
    r.sum_nk = running.sum_nk;
    r.sum_m = running.sum_m;
    r.gap_counts = running.gaps;
    return r;
}

PatternDensity pattern_density(std::uint64_t x, const ResiduePattern& pattern, const PrimeTable& table_in) {
    const std::size_t n = pattern.size();
    if (n > 63) throw DomainError("pattern too long");
    PrimeCursor cursor(table_in);
    if (n > 0 && x < cursor.nth(n)) throw DomainError("pattern_density needs x >= p_n");
    const std::size_t pi_x = cursor.pi(x);
    const PrimeTable& table = cursor.table();
    const auto first = table.primes().first(n);
    const std::uint64_t target = pattern.bits();

    PatternDensity out;
    out.expected = std::ldexp(static_cast<double>(pi_x), -static_cast<int>(n));
    const std::size_t start = std::max<std::size_t>(1, n);  // skip p = 2 and p_1..p_n
    for (std::size_t i = start; i < pi_x; ++i) {
        const std::uint64_t p = table.primes()[i];
        if (residue_pattern_bits(p, first) == target) ++out.count;
    }
    return out;
}

nlohmann::json to_json(const ScanResult& r) {
    nlohmann::json j;
    j["x"] = r.x;
    j["k_max"] = r.k_max;
    j["pattern_n"] = r.pattern_n;
    j["primes_scanned"] = r.primes_scanned;
    j["sum_nk"] = r.sum_nk;
    j["sum_m"] = r.sum_m;
    nlohmann::json gaps = nlohmann::json::object();
    for (std::size_t i = 0; i < r.z_list.size(); ++i) gaps[r.z_list[i].to_string()] = r.gap_counts[i];
    j["gap_counts"] = gaps;
    nlohmann::json pats = nlohmann::json::object();
    for (const auto& [bits, c] : r.pattern_counts) pats[ResiduePattern::from_bits(bits, r.pattern_n).to_string()] = c;
    j["pattern_counts"] = pats;
    j["max_m"] = {{"p", r.max_m.p}, {"m", r.max_m.m}};
    return j;
}

TheoryValues theoretical_values(const ScanConfig& config, double eps, const PrimeTable& table) {
    TheoryValues t;
    for (std::size_t k = 1; k <= config.k_max; ++k) t.mu.push_back(mu_k(k, eps, table).value);
    t.m_average = m_average(eps, table).value;
    for (const auto& z : config.z_list) {
        t.gap.push_back(z.exceeds_one() ? gap_constant(z, eps, table).value : std::nan(""));
    }
    return t;
}

std::string format_sig(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

double round_sig(double v, int digits) {
    if (!std::isfinite(v)) return v;
    return std::strtod(format_sig(v, digits).c_str(), nullptr);
}

void write_convergence_csv(const ScanResult& r, const TheoryValues& theory, std::ostream& out) {
    out << "x,stat_name,empirical,theoretical,abs_err\n";
    auto row = [&](std::uint64_t x, const std::string& name, double emp, double th) {
        out << x << ',' << name << ',' << format_sig(emp) << ',' << format_sig(th) << ','
            << format_sig(std::fabs(emp - th)) << '\n';
    };
    for (const auto& t : r.trace) {
        if (t.primes_scanned == 0) continue;
        const double n = static_cast<double>(t.primes_scanned);
        for (std::size_t k = 0; k < t.sum_nk.size() && k < theory.mu.size(); ++k) {
            row(t.x, "mean_n" + std::to_string(k + 1), static_cast<double>(t.sum_nk[k]) / n, theory.mu[k]);
        }
        row(t.x, "mean_M", static_cast<double>(t.sum_m) / n, theory.m_average);
        for (std::size_t i = 0; i < t.gap_counts.size() && i < theory.gap.size(); ++i) {
            row(t.x, "gap_freq_" + r.z_list[i].to_string(), static_cast<double>(t.gap_counts[i]) / n, theory.gap[i]);
        }
    }
}

} // namespace qnr
