#include "mdsenbd/rng.hpp"

#include <string_view>

namespace mdsenbd {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t stable_hash(std::string_view text) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

std::mt19937_64 make_engine(std::uint64_t key) {
    std::seed_seq seq{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32),
                      static_cast<std::uint32_t>(splitmix64(key)), static_cast<std::uint32_t>(splitmix64(key) >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed) : RandomStream(splitmix64(seed), 0) {}

RandomStream::RandomStream(std::uint64_t key, int) : key_(key), engine_(make_engine(key)) {}

RandomStream RandomStream::split(std::uint64_t id) const {
    return RandomStream(splitmix64(key_ ^ splitmix64(id + 0x632BE59BD9B4E019ULL)), 0);
}

double RandomStream::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

}  // namespace mdsenbd
