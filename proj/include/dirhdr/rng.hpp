#pragma once

#include <cstdint>
#include <random>

namespace dirhdr {

namespace detail {
//! splitmix64 finalizer; used to decorrelate derived stream seeds.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
} // namespace detail

//! Seeded random stream with reproducible uniform doubles and cheap substream
//! derivation. Substreams depend only on (base seed, index), never on how much
//! of the parent stream has been consumed, so parallel and serial replicate
//! schedules draw identical numbers.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : seed_(seed), eng_(seed) {}

    //! Uniform double in [0, 1).
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    //! Uniform double in (0, 1] (safe as a log argument).
    double uniform_pos() { return 1.0 - uniform(); }

    //! Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n) {
        // Rejection-free scaling is fine here: n is tiny against 2^53.
        auto idx = static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
        return idx >= n ? n - 1 : idx;
    }

    std::uint64_t raw() { return eng_(); }

    std::uint64_t seed() const { return seed_; }

    //! Stream for task `index`, independent of this stream's position.
    RandomStream substream(std::uint64_t index) const {
        return RandomStream(detail::mix64(seed_ + 0x9E3779B97F4A7C15ULL * (index + 1)));
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 eng_;
};

} // namespace dirhdr
