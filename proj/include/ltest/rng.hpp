#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace ltest {

/// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed for the stream addressed by (master, path...). Distinct paths give
/// statistically independent streams, and the mapping does not depend on the
/// order in which streams are requested, so parallel callers reproduce
/// serial results bit for bit.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> path) noexcept {
    std::uint64_t h = mix64(master);
    for (auto p : path) h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    /// Child stream addressed by `path`, independent of this stream's state.
    Rng stream(std::initializer_list<std::uint64_t> path) const { return Rng(derive_seed(seed_, path)); }

    std::uint64_t seed() const noexcept { return seed_; }
    std::mt19937_64& engine() noexcept { return engine_; }

    double normal() { return normal_(engine_); }
    double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }

    Eigen::VectorXd normal_vector(Eigen::Index size) {
        Eigen::VectorXd v(size);
        for (Eigen::Index i = 0; i < size; ++i) v[i] = normal();
        return v;
    }

    /// Uniform draw on the unit sphere in R^dim (normalized Gaussian vector).
    Eigen::VectorXd unit_sphere(Eigen::Index dim) {
        for (;;) {
            Eigen::VectorXd v = normal_vector(dim);
            const double norm = v.norm();
            if (norm > 0.0) return v / norm;
        }
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

}  // namespace ltest
