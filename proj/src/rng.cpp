#include <saptlem/rng.hpp>

#include <cmath>
#include <numbers>

namespace saptlem {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t derive_stream_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t state = master;
    std::uint64_t mixed = splitmix64(state);
    state = mixed ^ (index * 0x9e3779b97f4a7c15ULL + 0x85ebca6bULL);
    return splitmix64(state);
}

double RngStream::normal() {
    // 1 - uniform() keeps the log argument strictly positive.
    double u1 = 1.0 - uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::below(std::uint64_t n) {
    // Rejection-free modulo is fine here: n is tiny against 2^64, bias < 1e-15.
    return engine_() % n;
}

} // namespace saptlem
