#include "sqlab/rng.hpp"

#include <bit>
#include <stdexcept>

namespace sqlab {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

Rng::Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
}

Rng Rng::derive(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    std::uint64_t sm = master;
    std::uint64_t a = splitmix64(sm);
    sm ^= stream * 0x9e3779b97f4a7c15ULL;
    std::uint64_t b = splitmix64(sm);
    sm ^= index * 0xd1b54a32d192ed03ULL;
    std::uint64_t c = splitmix64(sm);
    return Rng(a ^ std::rotl(b, 17) ^ std::rotl(c, 31));
}

std::uint64_t Rng::u64() {
    const std::uint64_t result = std::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = std::rotl(s_[3], 45);
    return result;
}

std::uint64_t Rng::below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be nonzero");
    const std::uint64_t threshold = -bound % bound;
    for (;;) {
        std::uint64_t r = u64();
        if (r >= threshold) return r % bound;
    }
}

std::uint32_t Rng::bits(int k) {
    if (k == 0) return 0;
    return static_cast<std::uint32_t>(u64() >> (64 - k));
}

double Rng::real() {
    return static_cast<double>(u64() >> 11) * 0x1.0p-53;
}

bool Rng::bernoulli(double p) {
    return real() < p;
}

Rng Rng::split(std::uint64_t stream) {
    return derive(u64(), stream);
}

std::uint64_t stream_tag(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char ch : label) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace sqlab
