#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace specdist {

/** Seedable RNG with bit-portable output mappings (std distributions are not
 *  reproducible across standard libraries, so the mappings are explicit). */
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /** Uniform double in [0, 1). */
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /** Uniform double in [lo, hi). */
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /** Uniform integer in [0, n). */
    int uniform_index(int n) {
        return static_cast<int>(uniform() * static_cast<double>(n));
    }

    /** k distinct indices from [0, n), in selection order. */
    std::vector<int> sample_without_replacement(int n, int k) {
        std::vector<int> pool(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
        std::vector<int> out;
        out.reserve(static_cast<std::size_t>(k));
        for (int i = 0; i < k && i < n; ++i) {
            int j = i + uniform_index(n - i);
            std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
            out.push_back(pool[static_cast<std::size_t>(i)]);
        }
        return out;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace specdist
