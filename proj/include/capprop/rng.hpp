#ifndef CAPPROP_RNG_HPP
#define CAPPROP_RNG_HPP

#include <cstdint>
#include <random>

namespace capprop {

/// Seed for the library's fixed generator. The algorithm is pinned to
/// std::mt19937_64 with an explicit bit mapping to doubles (below), so the
/// same seed produces bit-identical streams on every platform and compiler.
struct RngSpec {
    std::uint64_t seed = 0;
};

/// splitmix64 step; used to derive independent sub-streams deterministically.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline RngSpec derive_stream(const RngSpec& base, std::uint64_t salt) {
    return RngSpec{splitmix64(base.seed ^ splitmix64(salt))};
}

class Rng {
public:
    explicit Rng(const RngSpec& spec) : eng_(spec.seed) {}
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    /// Uniform on (0, 1]: ((x >> 11) + 1) * 2^-53. Avoids the
    /// implementation-defined std::uniform_real_distribution.
    double uniform_open01() {
        return static_cast<double>((next() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double sign() { return (next() & 1) ? 1.0 : -1.0; }

private:
    std::mt19937_64 eng_;
};

} // namespace capprop

#endif
