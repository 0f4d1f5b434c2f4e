#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace protoeval::rng {

// SplitMix64-based stream. Every random choice in the harness derives from a
// single seed through named sub-streams, so identical configs replay exactly
// on any platform (std::mt19937 distributions are not portable across
// standard libraries).
class Stream {
public:
    explicit Stream(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform in [0, n); n must be positive.
    std::uint64_t below(std::uint64_t n) {
        // rejection sampling keeps the distribution exact
        std::uint64_t threshold = (0 - n) % n;
        while (true) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    // Uniform in [0, 1) with 53 bits.
    double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    bool next_bool() { return (next_u64() & 1) != 0; }

    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            using std::swap;
            swap(items[i - 1], items[j]);
        }
    }

    // Independent child stream; mixing the salt keeps siblings uncorrelated.
    Stream derive(std::uint64_t salt) const {
        Stream child(state_ ^ (salt + 0x9e3779b97f4a7c15ULL + (state_ << 6) + (state_ >> 2)));
        child.next_u64();
        return child;
    }

    Stream derive(std::string_view name) const { return derive(fnv1a(name)); }

    static std::uint64_t fnv1a(std::string_view data) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : data) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

private:
    std::uint64_t state_;
};

}  // namespace protoeval::rng
