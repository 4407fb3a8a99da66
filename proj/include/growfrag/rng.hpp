#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace growfrag {

// splitmix64 finalizer; used only to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = mix64(root ^ 0x6a09e667f3bcc909ULL);
    for (auto t : tags) h = mix64(h ^ mix64(t + 0x3c6ef372fe94f82bULL));
    return h;
}

// Stream tags keeping the different consumers of one replica apart.
enum class Domain : std::uint64_t {
    particles = 1,
    spine = 2,
    immigration = 3,
    killing = 4,
    forward = 5,
    backward = 6,
    levy = 7,
    rerun = 8,
};

inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t replica, Domain d) {
    return derive_seed(root, {replica, static_cast<std::uint64_t>(d)});
}

class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1).
    double uniform() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    double exponential(double rate) { return -std::log(uniform()) / rate; }

    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace growfrag
