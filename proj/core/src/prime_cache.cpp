#include "qnr/errors.hpp"
#include "qnr/primes.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

namespace qnr::cache {
namespace {

constexpr std::array<char, 8> kMagic = {'Q', 'N', 'R', 'P', 'R', 'I', 'M', 'E'};
constexpr std::size_t kHeaderBytes = 8 + 4 + 4 + 8 + 8;

void put_le(std::string& buf, std::uint64_t v, int bytes) {
    for (int i = 0; i < bytes; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint64_t get_le(const unsigned char* p, int bytes) {
    std::uint64_t v = 0;
    for (int i = 0; i < bytes; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

} // namespace

void save(const PrimeTable& table, const std::filesystem::path& path) {
    std::string buf;
    buf.reserve(kHeaderBytes + 8 * table.count());
    buf.append(kMagic.data(), kMagic.size());
    put_le(buf, kFormatVersion, 4);
    put_le(buf, 0, 4);
    put_le(buf, table.limit(), 8);
    put_le(buf, table.count(), 8);
    for (const auto p : table.primes()) put_le(buf, p, 8);

    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp, ec);
        throw IoError("cannot rename cache into place at " + path.string());
    }
}

PrimeTable load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open prime cache " + path.string());
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const auto* bytes = reinterpret_cast<const unsigned char*>(buf.data());

    if (buf.size() < kHeaderBytes || std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0) {
        throw IoError(path.string() + " is not a prime cache file");
    }
    const auto version = get_le(bytes + 8, 4);
    if (version != kFormatVersion) throw IoError("unsupported prime cache version " + std::to_string(version));
    const std::uint64_t limit = get_le(bytes + 16, 8);
    const std::uint64_t count = get_le(bytes + 24, 8);
    if (limit < 2 || limit > kMaxSieveLimit) throw IoError("prime cache limit out of range");
    if (buf.size() != kHeaderBytes + 8 * count) {
        throw IoError("prime cache size does not match its count field");
    }

    std::vector<std::uint64_t> primes(count);
    for (std::uint64_t i = 0; i < count; ++i) primes[i] = get_le(bytes + kHeaderBytes + 8 * i, 8);

    if (count == 0 || primes.front() != 2 || primes.back() > limit) {
        throw IoError("prime cache contents inconsistent with its limit");
    }
    std::mt19937_64 rng(count ^ limit);
    std::uniform_int_distribution<std::uint64_t> pick(0, count - 1);
    for (int i = 0; i < 16; ++i) {
        const auto j = pick(rng);
        if (!is_prime_u64(primes[j])) throw IoError("prime cache entry " + std::to_string(j) + " is composite");
        if (j + 1 < count && primes[j] >= primes[j + 1]) throw IoError("prime cache is not ascending");
    }
    return make_prime_table(limit, std::move(primes));
}

} // namespace qnr::cache
