#ifndef PAIRWISE_EM_RNG_HPP
#define PAIRWISE_EM_RNG_HPP

#include <cstdint>
#include <random>
#include <string_view>

namespace pairwise_em {

/// Engine used for every random draw in the library. Distributions come from the
/// standard library, so streams are reproducible for a fixed toolchain.
using Rng = std::mt19937_64;

inline constexpr std::string_view rng_name = "std::mt19937_64";
inline constexpr std::string_view seed_rule =
    "seed = splitmix64 chain over (base_seed, grid_index, rep, purpose_tag)";

/// What a derived stream is used for; keeps instance and initialisation draws disjoint.
enum class Purpose : std::uint64_t {
    Instance = 1,
    Init = 2,
    Probe = 3,
};

namespace detail {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Derive an independent 64-bit seed for one (grid point, repetition, purpose) cell.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t grid_index,
                                    std::uint64_t rep, Purpose purpose) noexcept {
    std::uint64_t h = detail::splitmix64(base_seed);
    h = detail::splitmix64(h ^ grid_index);
    h = detail::splitmix64(h ^ rep);
    h = detail::splitmix64(h ^ static_cast<std::uint64_t>(purpose));
    return h;
}

} // namespace pairwise_em

#endif // PAIRWISE_EM_RNG_HPP
