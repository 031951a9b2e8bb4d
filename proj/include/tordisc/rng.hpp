#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <span>

#include <Eigen/Dense>

namespace tordisc {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Combine a key with further words; order-sensitive.
inline constexpr std::uint64_t mix_key(std::uint64_t key, std::uint64_t word) {
    return splitmix64(key ^ splitmix64(word + 0x632be59bd9b4e019ULL));
}

/// Stream tags keep independent uses of one sample index apart.
enum class StreamTag : std::uint64_t {
    orbit = 1,
    limit = 2,
    phase_b = 3,
    phase_b_prime = 4,
    haar = 5,
    flow = 6,
    kesten = 7,
    equidistribution = 8,
};

/// xoshiro256** seeded from (master seed, tag, index). Output is identical on
/// every platform, unlike the std:: distributions.
class RandomStream {
public:
    RandomStream(std::uint64_t seed, StreamTag tag, std::uint64_t index) {
        std::uint64_t k = mix_key(mix_key(seed, static_cast<std::uint64_t>(tag)), index);
        for (auto& s : state_) {
            k = splitmix64(k);
            s = k;
        }
    }

    explicit RandomStream(std::uint64_t seed) : RandomStream(seed, StreamTag::orbit, 0) {}

    std::uint64_t next() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (one value per call, second discarded).
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    Eigen::VectorXd uniform_torus(int d) {
        Eigen::VectorXd v(d);
        for (int i = 0; i < d; ++i) v[i] = uniform();
        return v;
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::array<std::uint64_t, 4> state_{};
};

/// Deterministic uniform phase attached to an integer vector: b_m in [0, 1).
/// Depends only on (key, m), so phases agree across different truncations.
class PhaseMap {
public:
    PhaseMap() = default;
    explicit PhaseMap(std::uint64_t key) : key_(key) {}

    template <typename IntVec>
    double operator()(const IntVec& m) const {
        std::uint64_t h = key_;
        for (Eigen::Index i = 0; i < m.size(); ++i) {
            h = mix_key(h, static_cast<std::uint64_t>(static_cast<std::int64_t>(m[i])));
        }
        return static_cast<double>(splitmix64(h) >> 11) * 0x1.0p-53;
    }

    std::uint64_t key() const { return key_; }

private:
    std::uint64_t key_ = 0;
};

}  // namespace tordisc
