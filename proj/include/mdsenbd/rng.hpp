#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mdsenbd {

/// Seeded, splittable random stream. Children are derived from the parent key
/// and a caller-chosen id only, so a stream tree is reproducible no matter in
/// which order (or on which thread) the children are created.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed);

    [[nodiscard]] RandomStream split(std::uint64_t id) const;

    [[nodiscard]] std::mt19937_64& engine() noexcept { return engine_; }
    [[nodiscard]] std::uint64_t key() const noexcept { return key_; }

    /// Uniform double in [0, 1).
    double uniform();

private:
    RandomStream(std::uint64_t key, int);

    std::uint64_t key_;
    std::mt19937_64 engine_;
};

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// FNV-1a, used to key substreams by name.
[[nodiscard]] std::uint64_t stable_hash(std::string_view text) noexcept;

}  // namespace mdsenbd
