#pragma once

#include <cmath>
#include <cstdint>

#include <Eigen/Dense>

namespace mai::rng {

// SplitMix64. Used both as a mixer for seed derivation and as the
// generator behind the distribution helpers below, so that runs are
// reproducible byte for byte on a given platform.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Seed splitting scheme: every random draw in the artifact flows from one
/// master seed through subseed(master, a, b, salt). The engine uses
/// a = epoch, b = episode; generators use the salt to separate purposes.
inline std::uint64_t subseed(std::uint64_t master, std::uint64_t a = 0,
                             std::uint64_t b = 0, std::uint64_t salt = 0) {
    std::uint64_t s = splitmix64(master ^ 0x6a09e667f3bcc908ULL);
    s = splitmix64(s ^ (a * 0xd6e8feb86659fd93ULL));
    s = splitmix64(s ^ (b * 0xa0761d6478bd642fULL));
    return splitmix64(s ^ (salt * 0xe7037ed1a0b428dbULL));
}

/// Small deterministic generator; std:: distributions are avoided because
/// their output is not pinned by the standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(splitmix64(seed ^ 0x5851f42d4c957f2dULL)) {}

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ULL;
        std::uint64_t x = state_;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    }

    /// Uniform in [0, 1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Modulo bias is irrelevant at the n used here (n << 2^64).
        return n == 0 ? 0 : next_u64() % n;
    }

    /// Standard normal via Box-Muller.
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    Eigen::VectorXd normal_vector(int dim) {
        Eigen::VectorXd v(dim);
        for (int i = 0; i < dim; ++i) v[i] = normal();
        return v;
    }

    /// Uniform draw from the closed L2 ball of the given radius.
    Eigen::VectorXd ball(int dim, double radius) {
        Eigen::VectorXd dir = normal_vector(dim);
        double n = dir.norm();
        if (n < 1e-300) return Eigen::VectorXd::Zero(dim);
        double r = radius * std::pow(uniform(), 1.0 / static_cast<double>(dim));
        return dir * (r / n);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::uint64_t state_;
};

}  // namespace mai::rng
