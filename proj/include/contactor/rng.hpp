#ifndef CONTACTOR_RNG_HPP
#define CONTACTOR_RNG_HPP

#include <cstdint>

#include "contactor/linalg.hpp"

namespace contactor {

// SplitMix64. Self-contained so that seeded sample boxes are byte-identical
// across standard library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [lo, hi).
    double uniform(double lo = -1.0, double hi = 1.0) {
        double u = static_cast<double>(next() >> 11) * 0x1.0p-53;
        return lo + (hi - lo) * u;
    }

    Vec uniform_vec(int dim, double lo = -1.0, double hi = 1.0) {
        Vec v(dim);
        for (int i = 0; i < dim; ++i)
            v(i) = uniform(lo, hi);
        return v;
    }

    int uniform_int(int n) { return static_cast<int>(next() % static_cast<std::uint64_t>(n)); }

private:
    std::uint64_t state_;
};

} // namespace contactor

#endif
