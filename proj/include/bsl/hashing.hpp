#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>

namespace bsl {

using ElementKey = std::uint64_t;
using Level = std::uint32_t;
using SlotIndex = std::uint64_t;

/// The front sentinel. It is smaller than every user key and appears in every level.
inline constexpr ElementKey front_key = 0;

/// Names one partition: its smallest node and the level it lives on.
struct PartitionLabel {
  ElementKey min_element = front_key;
  Level level = 1;

  /// Canonical 9-byte encoding: element big-endian, then the level byte.
  [[nodiscard]] std::array<std::uint8_t, 9> bytes() const noexcept;

  friend auto operator<=>(const PartitionLabel&, const PartitionLabel&) = default;
};

/// Raised for out-of-range arguments to the hash family or for invalid parameters.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Seed material for every hash in the structure. Fixed at creation.
struct HashSeeds {
  std::uint64_t level = 0;
  std::uint64_t h1 = 0;
  // Coefficients a0..a4 of the degree-4 polynomial behind h2; reduced mod p on use.
  std::array<std::uint64_t, 5> h2{};

  /// Derives all sub-seeds from one master seed by fixed-index mixing.
  [[nodiscard]] static HashSeeds from_master(std::uint64_t master) noexcept;

  friend bool operator==(const HashSeeds&, const HashSeeds&) = default;
};

struct Params {
  std::uint64_t capacity = 1;   // N
  std::uint64_t gamma = 2;      // expected partition size
  Level beta = 2;               // ceil(log_gamma N) + 2
  std::uint64_t block_size = 2; // B, in slots
  std::uint64_t slots = 2;      // p, prime
  double alpha_max = 0.9;

  /// Builds a validated parameter set. `slots == 0` picks the smallest prime
  /// that satisfies the sizing rule; an explicit value must be prime and large enough.
  [[nodiscard]] static Params make(std::uint64_t capacity, std::uint64_t gamma,
                                   std::uint64_t block_size, std::uint64_t slots = 0,
                                   double alpha_max = 0.9);

  /// Smallest table size allowed for (capacity, gamma, beta, alpha_max).
  [[nodiscard]] std::uint64_t min_slots() const;
  /// Largest number of occupied slots that keeps the load at or below alpha_max.
  [[nodiscard]] std::uint64_t slot_limit() const noexcept;

  /// Throws DomainError when any invariant fails.
  void validate() const;

  friend bool operator==(const Params&, const Params&) = default;
};

/// ceil(log_base(n)) computed with integers only; 0 for n <= 1.
[[nodiscard]] std::uint64_t ceil_log(std::uint64_t base, std::uint64_t n);
[[nodiscard]] Level beta_for(std::uint64_t capacity, std::uint64_t gamma);

[[nodiscard]] bool is_prime(std::uint64_t n) noexcept;
[[nodiscard]] std::uint64_t next_prime(std::uint64_t n);

/// SplitMix64 finalizer.
[[nodiscard]] constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Maps a 64-bit value uniformly onto [0, range) by multiply-high.
[[nodiscard]] constexpr std::uint64_t reduce_range(std::uint64_t v, std::uint64_t range) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(v) * range) >> 64);
}

/// 32-bit chunk `index` of the level stream for element `x`.
[[nodiscard]] std::uint32_t level_chunk(ElementKey x, std::uint64_t seed, std::uint64_t index) noexcept;

/// Level in [1, beta]; Pr[level = k] = q^(k-1)(1-q) below beta, q^(beta-1) at beta, q = 1/gamma.
/// The front sentinel always gets beta.
[[nodiscard]] Level level_of(ElementKey x, const HashSeeds& seeds, std::uint64_t gamma, Level beta) noexcept;
[[nodiscard]] inline Level level_of(ElementKey x, const HashSeeds& seeds, const Params& params) noexcept {
  return level_of(x, seeds, params.gamma, params.beta);
}

/// Seeded hash of the canonical label bytes onto [0, p).
[[nodiscard]] SlotIndex h1(const PartitionLabel& label, const HashSeeds& seeds, std::uint64_t p) noexcept;

/// Degree-4 polynomial over GF(p). Throws DomainError when slot >= p.
[[nodiscard]] SlotIndex h2(SlotIndex slot, const HashSeeds& seeds, std::uint64_t p);

/// h2(h1(label)).
[[nodiscard]] SlotIndex label_hash(const PartitionLabel& label, const HashSeeds& seeds, std::uint64_t p);

}  // namespace bsl
