#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

namespace specshift {

// Stable 64-bit mixing (splitmix64 finalizer). Used for every derived seed
// so that outputs do not depend on call order across threads.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag, std::uint64_t index = 0);

// FNV-1a, for content hashes recorded in provenance fields.
class Fnv1a {
public:
    void update(std::span<const std::uint8_t> bytes);
    void update(std::string_view text);
    std::uint64_t value() const { return state_; }
    std::string hex() const;

private:
    std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

// Seeded generator. The engine is std::mt19937_64, whose output sequence is
// fixed by the standard; the conversions below are written out so results
// do not depend on the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    double uniform();                           // [0,1)
    double uniform(double lo, double hi);       // [lo,hi)
    std::uint64_t below(std::uint64_t bound);   // [0,bound), bound > 0
    int range(int lo, int hi_inclusive);        // [lo,hi]
    double normal();                            // standard normal, Box-Muller
    bool coin() { return (next() >> 63) != 0; }

private:
    std::mt19937_64 engine_;
};

}  // namespace specshift
