#pragma once

// Shared utilities: error types, string helpers and a deterministic RNG.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace exonalign {

// Malformed user input (bad FASTA, bad TSV, bad flag values).
// The CLI maps this to exit code 2.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A broken internal invariant. The CLI maps this to exit code 1.
class InternalError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline std::string trim(std::string_view s)
{
    size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
    return std::string(s.substr(b, e - b));
}

inline std::vector<std::string> split(std::string_view s, char sep)
{
    std::vector<std::string> out;
    size_t start = 0;
    for (size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == sep) {
            out.emplace_back(s.substr(start, i - start));
            start = i + 1;
        }
    }
    return out;
}

inline bool starts_with(std::string_view s, std::string_view prefix)
{
    return s.size() >= prefix.size() && s.substr(0, prefix.size()) == prefix;
}

// Parses a non-negative integer, rejecting anything else.
inline int parse_int(const std::string& tok, const std::string& what)
{
    if (tok.empty()) throw InputError("empty integer field for " + what);
    size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(tok, &pos);
    } catch (const std::exception&) {
        throw InputError("invalid integer '" + tok + "' for " + what);
    }
    if (pos != tok.size()) throw InputError("invalid integer '" + tok + "' for " + what);
    return static_cast<int>(v);
}

// Deterministic 64-bit generator (splitmix64). Draw helpers are hand rolled
// so that generated bytes do not depend on the standard library
// implementation of distributions.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64()
    {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n). n must be > 0.
    std::uint64_t next_below(std::uint64_t n)
    {
        // Multiply-shift; bias is negligible for the ranges used here and the
        // mapping is identical on every platform.
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Uniform integer in [lo, hi], inclusive.
    int next_int(int lo, int hi)
    {
        if (hi < lo) throw InternalError("Rng::next_int: empty range");
        return lo + static_cast<int>(next_below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    // Uniform in [0, 1).
    double next_unit()
    {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    bool bernoulli(double p)
    {
        return next_unit() < p;
    }

private:
    std::uint64_t state_;
};

} // namespace exonalign
