#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace qtwtt {

// Child-seed derivation used by every stochastic stage.
//
// child = finalize(fnv1a(master, label bytes) xor index)
// where finalize is the splitmix64 mixer. The exact construction is part
// of the reproducibility contract: identical (master, label, index) give
// identical child sequences no matter how blocks are scheduled, so runs
// are bit-identical for any worker count.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index);

// Thin sampling wrapper so every module draws through one generator type.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return uni_(gen_); } // [0,1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uni_(gen_); }
    double normal(double mean, double sd)
    {
        return mean + sd * std::normal_distribution<double>()(gen_);
    }
    // Gaussian with hard support bounds (redraws the ~1e-30 tail overshoots).
    double bounded_normal(double mean, double sd, double half_range)
    {
        double v = normal(mean, sd);
        while (std::abs(v - mean) > half_range) v = normal(mean, sd);
        return v;
    }
    double exponential(double rate)
    {
        return std::exponential_distribution<double>(rate)(gen_);
    }
    std::uint64_t poisson(double mean)
    {
        if (mean <= 0.0) return 0;
        return std::poisson_distribution<std::uint64_t>(mean)(gen_);
    }
    bool bernoulli(double p) { return uni_(gen_) < p; }

    std::mt19937_64& engine() { return gen_; }

private:
    std::mt19937_64 gen_;
    std::uniform_real_distribution<double> uni_{0.0, 1.0};
};

inline Rng make_rng(std::uint64_t master, std::string_view label, std::uint64_t index)
{
    return Rng(derive_seed(master, label, index));
}

} // namespace qtwtt
