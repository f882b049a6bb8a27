#ifndef SABCI_RNG_HPP
#define SABCI_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace sabci {

// splitmix64: used to derive independent child seeds from a master seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return splitmix64(master ^ splitmix64(stream + 1));
}

// Deterministic random source. The engine (std::mt19937_64) and every
// transform below are fully specified, so sequences are identical across
// platforms and standard library implementations. std::*_distribution is
// deliberately not used anywhere: its output is implementation-defined.
class DetRng {
public:
    explicit DetRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1) with 53-bit resolution
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // uniform in (0, 1]
    double uniform01_open_low() { return 1.0 - uniform01(); }

    // standard normal via Box-Muller, second value cached
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = uniform01_open_low();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    double exponential(double rate) {
        return -std::log(uniform01_open_low()) / rate;
    }

    // uniform integer in [0, bound), rejection sampled (no modulo bias)
    std::uint64_t below(std::uint64_t bound) {
        if (bound < 2) return 0;
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    bool bernoulli(double p) { return uniform01() < p; }

    // Fisher-Yates
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace sabci

#endif
