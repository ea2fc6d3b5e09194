#include "qtwtt/seed.hpp"

namespace qtwtt {

namespace {

std::uint64_t splitmix64_finalize(std::uint64_t x)
{
    x ^= x >> 30;
    x *= 0xbf58476d1ce4e5b9ULL;
    x ^= x >> 27;
    x *= 0x94d049bb133111ebULL;
    x ^= x >> 31;
    return x;
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                          std::uint64_t index)
{
    std::uint64_t h = master ^ 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL; // FNV-1a prime
    }
    h = splitmix64_finalize(h);
    h ^= splitmix64_finalize(index + 0x9e3779b97f4a7c15ULL);
    return splitmix64_finalize(h);
}

} // namespace qtwtt
