#include "cli.hpp"

#include "qnr/qnr.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

namespace qnr::cli {

using nlohmann::json;

std::uint64_t parse_count(std::string_view text) {
    auto fail = [&]() -> std::uint64_t {
        throw DomainError("expected a non-negative integer (e.g. 1000000 or 1e6), got '" + std::string(text) + "'");
    };
    std::string digits;
    std::size_t i = 0;
    std::int64_t frac = 0;
    while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) digits.push_back(text[i++]);
    if (i < text.size() && text[i] == '.') {
        ++i;
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            digits.push_back(text[i++]);
            ++frac;
        }
    }
    if (digits.empty()) return fail();
    std::int64_t exponent = 0;
    if (i < text.size() && (text[i] == 'e' || text[i] == 'E')) {
        ++i;
        if (i < text.size() && text[i] == '+') ++i;
        if (i == text.size()) return fail();
        while (i < text.size() && std::isdigit(static_cast<unsigned char>(text[i]))) {
            exponent = exponent * 10 + (text[i++] - '0');
            if (exponent > 40) return fail();
        }
    }
    if (i != text.size()) return fail();
    std::int64_t shift = exponent - frac;
    while (shift < 0) {
        if (digits.empty() || digits.back() != '0') return fail();
        digits.pop_back();
        ++shift;
    }
    digits.append(static_cast<std::size_t>(shift), '0');
    std::uint64_t v = 0;
    for (const char c : digits) {
        const std::uint64_t d = static_cast<std::uint64_t>(c - '0');
        if (v > (std::numeric_limits<std::uint64_t>::max() - d) / 10) return fail();
        v = v * 10 + d;
    }
    return v;
}

namespace {

json number(double v) { return round_sig(v, 12); }

json series_json(const SeriesValue& s) {
    return {{"value", number(s.value)}, {"tail_bound", number(s.tail_bound)}, {"terms_used", s.terms_used}};
}

json envelope(const std::string& command, json params, json result) {
    return {{"command", command}, {"params", std::move(params)}, {"result", std::move(result)}, {"version", kVersion}};
}

void emit(std::ostream& out, const json& j) { out << j.dump(2) << '\n'; }

void write_atomically(const std::filesystem::path& path, const std::string& contents) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw IoError("cannot write " + tmp.string());
        f << contents;
        f.flush();
        if (!f) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot move output into place at " + path.string());
    }
}

// Prime table covering `limit`, read through QNR_PRIME_CACHE when set.
PrimeTable load_table(std::uint64_t limit, std::ostream& err) {
    limit = std::max<std::uint64_t>(limit, 1 << 16);
    const char* cache_path = std::getenv("QNR_PRIME_CACHE");
    if (!cache_path || !*cache_path) return sieve_primes(limit);

    const std::filesystem::path path(cache_path);
    std::optional<PrimeTable> cached;
    if (std::filesystem::exists(path)) {
        try {
            cached = cache::load(path);
        } catch (const IoError& e) {
            err << "warning: ignoring prime cache: " << e.what() << '\n';
        }
    }
    if (cached && cached->limit() >= limit) return *cached;
    PrimeTable table = cached ? extend(*cached, limit) : sieve_primes(limit);
    try {
        cache::save(table, path);
    } catch (const IoError& e) {
        err << "warning: could not update prime cache: " << e.what() << '\n';
    }
    return table;
}

struct Options {
    // nkp
    std::string p = "3";
    std::size_t k = 1;
    // series
    std::string series_name;
    double eps = 1e-9;
    std::string z = "3/2";
    std::size_t terms = 0;
    std::size_t big_n = 400;
    // scan
    std::string x = "1000";
    std::size_t kmax = 1;
    std::vector<std::string> z_list;
    std::size_t pattern_n = 0;
    std::size_t shards = 1;
    unsigned threads = 0;
    std::string out_path = "scan.json";
    std::string csv_path;
    std::vector<std::string> checkpoints;
    // pattern / largem / density
    std::string eps_string;
    std::string limit;
    std::string y = "20";
};

int cmd_nkp(const Options& o, std::ostream& out, std::ostream& err) {
    const auto p = parse_count(o.p);
    const auto table = load_table(1 << 16, err);
    const auto r = nk_nonresidues(p, o.k, table);
    json result = {{"p", r.p}, {"values", r.values}};
    if (o.k >= 2) result["m"] = std::min(r.values[0], r.values[1] - r.values[0]);
    emit(out, envelope("nkp", {{"p", p}, {"k", o.k}}, result));
    return kOk;
}

int cmd_series(const Options& o, std::ostream& out, std::ostream& err) {
    const auto table = load_table(1 << 16, err);
    const std::string& name = o.series_name;
    json params = {{"name", name}};
    json result;
    if (name == "mu") {
        params["k"] = o.k;
        params["eps"] = o.eps;
        result = series_json(mu_k(o.k, o.eps, table));
    } else if (name == "gap") {
        const auto z = Rational::parse(o.z);
        params["z"] = z.to_string();
        const auto s = o.terms ? gap_constant_terms(z, o.terms, table) : gap_constant(z, o.eps, table);
        if (o.terms) {
            params["terms"] = o.terms;
        } else {
            params["eps"] = o.eps;
        }
        result = series_json(s);
        result["complement"] = number(1.0 - s.value);
    } else if (name == "mavg") {
        params["eps"] = o.eps;
        result = series_json(m_average(o.eps, table));
    } else if (name == "binom-identity") {
        params["k"] = o.k;
        params["N"] = o.big_n;
        result = {{"value", number(binom_identity(o.k, o.big_n))}};
    } else if (name == "binom-tail") {
        params["k"] = o.k;
        const double v = binom_tail(o.k);
        result = {{"value", number(v)}, {"ratio_to_29_32_pow_k", number(v / std::pow(29.0 / 32.0, static_cast<double>(o.k)))}};
    } else if (name == "ratio") {
        params["k"] = o.k;
        result = {{"value", number(mu_ratio_check(o.k, table))}};
    } else {
        throw DomainError("unknown series '" + name + "'");
    }
    emit(out, envelope("series", params, result));
    return kOk;
}

int cmd_scan(const Options& o, std::ostream& out, std::ostream& err) {
    ScanConfig config;
    config.x = parse_count(o.x);
    config.k_max = o.kmax;
    for (const auto& z : o.z_list) config.z_list.push_back(Rational::parse(z));
    config.pattern_n = o.pattern_n;
    config.shards = o.shards;
    config.threads = o.threads;
    for (const auto& c : o.checkpoints) config.checkpoints.push_back(parse_count(c));
    config.validate();

    const auto table = load_table(config.x, err);
    const auto result = scan(config, table);
    const auto theory = theoretical_values(config, o.eps, table);

    json zs = json::array();
    for (const auto& z : config.z_list) zs.push_back(z.to_string());
    const json params = {{"x", config.x}, {"k_max", config.k_max}, {"z", zs}, {"pattern_n", config.pattern_n}};
    const auto doc = envelope("scan", params, to_json(result));
    write_atomically(o.out_path, doc.dump(2) + "\n");

    std::ostringstream csv;
    write_convergence_csv(result, theory, csv);
    std::string csv_path = o.csv_path;
    if (csv_path.empty()) {
        std::filesystem::path p(o.out_path);
        p.replace_extension(".csv");
        csv_path = p.string();
    }
    write_atomically(csv_path, csv.str());

    const double n = static_cast<double>(result.primes_scanned);
    auto line = [&](const std::string& name, double emp, double th) {
        out << std::left << std::setw(18) << name << std::setw(20) << format_sig(emp) << std::setw(20)
            << format_sig(th) << format_sig(std::fabs(emp - th)) << '\n';
    };
    out << "odd primes p <= " << config.x << ": " << result.primes_scanned << "\n\n";
    out << std::left << std::setw(18) << "statistic" << std::setw(20) << "empirical" << std::setw(20) << "theoretical"
        << "abs_err\n";
    for (std::size_t k = 0; k < config.k_max; ++k) {
        line("mean_n" + std::to_string(k + 1), static_cast<double>(result.sum_nk[k]) / n, theory.mu[k]);
    }
    line("mean_M", static_cast<double>(result.sum_m) / n, theory.m_average);
    for (std::size_t i = 0; i < config.z_list.size(); ++i) {
        line("gap_freq_" + config.z_list[i].to_string(), static_cast<double>(result.gap_counts[i]) / n, theory.gap[i]);
    }
    out << "\nmax M(p) = " << result.max_m.m << " at p = " << result.max_m.p << '\n';
    out << "wrote " << o.out_path << " and " << csv_path << '\n';
    return kOk;
}

int cmd_pattern(const Options& o, std::ostream& out, std::ostream& err) {
    const auto pattern = ResiduePattern::parse(o.eps_string);
    const auto table = load_table(1 << 16, err);
    const auto set = build_pattern_classes(pattern, table);
    const std::uint64_t limit = o.limit.empty() ? default_search_limit(set.q()) : parse_count(o.limit);

    json result = {{"q", set.q()},
                   {"n", set.n()},
                   {"class_count", set.size()},
                   {"phi_q_over_2_pow_n", set.phi_q() >> set.n()},
                   {"limit", limit}};
    if (set.size() <= 64) result["classes"] = set.classes();
    const auto prime = find_prime_with_pattern(pattern, limit, table);
    result["prime"] = prime ? json(*prime) : json(nullptr);
    emit(out, envelope("pattern", {{"eps", pattern.to_string()}, {"limit", limit}}, result));
    return kOk;
}

int cmd_density(const Options& o, std::ostream& out, std::ostream& err) {
    const auto pattern = ResiduePattern::parse(o.eps_string);
    const auto x = parse_count(o.x);
    const auto table = load_table(x, err);
    const auto d = pattern_density(x, pattern, table);
    json result = {{"count", d.count}, {"expected", number(d.expected)}};
    result["ratio"] = d.expected > 0 ? number(static_cast<double>(d.count) / d.expected) : json(nullptr);
    emit(out, envelope("density", {{"eps", pattern.to_string()}, {"x", x}}, result));
    return kOk;
}

int cmd_largem(const Options& o, std::ostream& out, std::ostream& err) {
    const auto y = parse_count(o.y);
    const std::uint64_t limit = o.limit.empty() ? 0 : parse_count(o.limit);
    const auto table = load_table(1 << 16, err);
    const auto r = large_m_construction(y, limit, table);
    json result = {{"y", r.y},
                   {"q", r.q},
                   {"m_index", r.m_index},
                   {"n_index", r.n_index},
                   {"p_m", r.p_m},
                   {"p_n", r.p_n},
                   {"guarantee", r.guarantee},
                   {"search_limit", r.search_limit}};
    if (r.prime) {
        result["prime"] = *r.prime;
        result["n1"] = r.n1;
        result["n2"] = r.n2;
        result["m_value"] = r.m_value;
    } else {
        result["prime"] = nullptr;
        result["m_value"] = nullptr;
    }
    emit(out, envelope("largem", {{"y", y}, {"limit", r.search_limit}}, result));
    return kOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Prime quadratic non-residues: n_k(p), M(p), limit constants and residue patterns", "qnr"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);
    Options o;

    auto* nkp = app.add_subcommand("nkp", "k smallest prime quadratic non-residues of an odd prime p");
    nkp->add_option("--p", o.p, "odd prime modulus")->required();
    nkp->add_option("--k", o.k, "how many non-residues")->check(CLI::PositiveNumber);

    auto* series = app.add_subcommand("series", "evaluate a limit constant with a certified tail bound");
    series->add_option("name", o.series_name, "mu | gap | mavg | binom-identity | binom-tail | ratio")
        ->required()
        ->check(CLI::IsMember({"mu", "gap", "mavg", "binom-identity", "binom-tail", "ratio"}));
    series->add_option("--k", o.k, "index k");
    series->add_option("--z", o.z, "gap threshold as num/den");
    series->add_option("--eps", o.eps, "tail tolerance");
    series->add_option("--terms", o.terms, "gap: fixed number of terms instead of --eps");
    series->add_option("--N", o.big_n, "binom-identity: last index");

    auto* scan_cmd = app.add_subcommand("scan", "scan odd primes p <= x and compare with the limit constants");
    scan_cmd->add_option("--x", o.x, "scan bound (accepts 1e6)")->required();
    scan_cmd->add_option("--kmax", o.kmax, "compute n_1..n_kmax")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--z", o.z_list, "gap threshold num/den (repeatable)");
    scan_cmd->add_option("--pattern-n", o.pattern_n, "residue pattern depth (0 disables)");
    scan_cmd->add_option("--shards", o.shards, "number of prime-index shards")->check(CLI::PositiveNumber);
    scan_cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
    scan_cmd->add_option("--out", o.out_path, "ScanResult JSON path");
    scan_cmd->add_option("--csv", o.csv_path, "convergence CSV path (default: --out with .csv)");
    scan_cmd->add_option("--checkpoint", o.checkpoints, "extra trace bound (repeatable)");
    scan_cmd->add_option("--eps", o.eps, "tail tolerance of the theoretical column");

    auto* pattern = app.add_subcommand("pattern", "residue classes realising a pattern, and the least such prime");
    pattern->add_option("--eps", o.eps_string, "pattern over {+,-}, first entry is (2/p)")->required();
    pattern->add_option("--limit", o.limit, "search bound (default min(1e9, 1e4 q))");

    auto* density = app.add_subcommand("density", "count primes p <= x with a given residue pattern");
    density->add_option("--eps", o.eps_string, "pattern over {+,-}");
    density->add_option("--x", o.x, "bound (accepts 1e6)")->required();

    auto* largem = app.add_subcommand("largem", "construct a prime with M(p) >= min(p_m, p_n - p_m)");
    largem->add_option("--y", o.y, "scale y >= 4")->required();
    largem->add_option("--limit", o.limit, "search bound (default min(1e9, 1e4 q))");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    if (!rev.empty()) rev.pop_back();
    try {
        app.parse(rev);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    }

    try {
        if (*nkp) return cmd_nkp(o, out, err);
        if (*series) return cmd_series(o, out, err);
        if (*scan_cmd) return cmd_scan(o, out, err);
        if (*pattern) return cmd_pattern(o, out, err);
        if (*density) return cmd_density(o, out, err);
        if (*largem) return cmd_largem(o, out, err);
    } catch (const DomainError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const ContractError& e) {
        err << "error: " << e.what() << '\n';
        return kBadInput;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    } catch (const ResourceError& e) {
        err << "error: " << e.what() << '\n';
        return kResource;
    } catch (const RangeError& e) {
        err << "error: " << e.what() << '\n';
        return kResource;
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kInternal;
    }
    return kInternal;
}

} // namespace qnr::cli
