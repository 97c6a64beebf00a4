#pragma once

#include <cstdint>
#include <vector>

namespace pod {

/// Counter-based random stream. Every draw is a stateless hash of
/// (key, counter), and sub-streams are derived by hashing the parent key with
/// a child id. Replications, folds, and learner fits each own a derived
/// stream, so parallel and serial schedules produce identical draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix(seed ^ kSalt)) {}

    Rng child(std::uint64_t id) const {
        Rng r = *this;
        r.key_ = mix(key_ ^ mix(id + kSalt));
        r.counter_ = 0;
        r.has_cached_normal_ = false;
        return r;
    }

    Rng child(std::uint64_t a, std::uint64_t b) const { return child(a).child(b); }
    Rng child(std::uint64_t a, std::uint64_t b, std::uint64_t c) const {
        return child(a).child(b).child(c);
    }

    std::uint64_t next_u64() { return mix(key_ + kGolden * ++counter_); }

    /// Uniform on [0, 1) with 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform on (0, 1], used where log(u) must stay finite.
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /// Standard normal via Box-Muller; the second variate of each pair is cached.
    double next_normal();

    /// Unbiased integer in [0, n) by rejection.
    std::uint64_t next_below(std::uint64_t n);

    /// Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(next_below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    static constexpr std::uint64_t kSalt = 0x9e3779b97f4a7c15ull;
    static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

    // splitmix64 finalizer
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

// Stream ids for the engine/sim derivation scheme. Kept in one place so the
// mapping from (replication, fold, dimension, candidate, phase) to a stream
// is stable across releases.
namespace stream {
constexpr std::uint64_t kFoldPlan = 1;
constexpr std::uint64_t kFoldSplit = 2;
constexpr std::uint64_t kReducer = 3;
constexpr std::uint64_t kLearner = 4;
constexpr std::uint64_t kInnerCv = 5;
constexpr std::uint64_t kRefit = 6;
constexpr std::uint64_t kDataset = 7;
constexpr std::uint64_t kEngine = 8;
constexpr std::uint64_t kSubsample = 9;
}  // namespace stream

}  // namespace pod
