// Counter-based SplitMix64 stream: value k of (seed, stream) is a pure function
// of its coordinates, so initialization never depends on call order.
#pragma once

#include <cstdint>

namespace beacons {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

class CounterRng {
public:
    CounterRng(uint64_t seed, uint64_t stream = 0)
        : key_(splitmix64(seed) ^ splitmix64(stream * 0xD1B54A32D192ED03ull + 1)) {}

    uint64_t at(uint64_t k) const { return splitmix64(key_ ^ splitmix64(k)); }
    uint64_t next() { return at(counter_++); }

    // [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

private:
    uint64_t key_;
    uint64_t counter_ = 0;
};

}  // namespace beacons
