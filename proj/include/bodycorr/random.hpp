#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>

namespace bodycorr {

// Seeded random stream with fully pinned output. std::mt19937_64 is
// bit-specified by the standard; the distributions here are written out
// explicitly because the standard library distribution objects are
// implementation-defined and would break bit-level reproducibility of runs.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Uniform integer in [0, n), rejection-sampled so all values are equally likely.
    int uniform_int(int n) {
        if (n <= 0) throw std::invalid_argument("uniform_int: n must be positive");
        const std::uint64_t un = static_cast<std::uint64_t>(n);
        const std::uint64_t bound = UINT64_MAX - UINT64_MAX % un;
        std::uint64_t r;
        do {
            r = gen_();
        } while (r >= bound);
        return static_cast<int>(r % un);
    }

    // Standard normal via Box-Muller; the cosine/sine pair is cached.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * M_PI * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    // Derives an independent stream for a named sub-task.
    RandomStream fork(std::uint64_t salt) {
        return RandomStream(gen_() ^ (salt * 0x9e3779b97f4a7c15ULL));
    }

private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace bodycorr
