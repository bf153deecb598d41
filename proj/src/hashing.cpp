#include "bsl/hashing.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bsl {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) noexcept {
  return static_cast<std::uint64_t>((static_cast<unsigned __int128>(a) * b) % m);
}

std::uint64_t powmod(std::uint64_t base, std::uint64_t exp, std::uint64_t m) noexcept {
  std::uint64_t result = 1 % m;
  base %= m;
  while (exp != 0) {
    if (exp & 1U) result = mulmod(result, base, m);
    base = mulmod(base, base, m);
    exp >>= 1U;
  }
  return result;
}

}  // namespace

std::array<std::uint8_t, 9> PartitionLabel::bytes() const noexcept {
  std::array<std::uint8_t, 9> out{};
  for (int i = 0; i < 8; ++i) {
    out[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(min_element >> (56 - 8 * i));
  }
  out[8] = static_cast<std::uint8_t>(level);
  return out;
}

HashSeeds HashSeeds::from_master(std::uint64_t master) noexcept {
  auto derive = [master](std::uint64_t index) { return mix64(master + kGolden * (index + 1)); };
  HashSeeds seeds;
  seeds.level = derive(0);
  seeds.h1 = derive(1);
  for (std::size_t i = 0; i < seeds.h2.size(); ++i) seeds.h2[i] = derive(2 + i);
  return seeds;
}

std::uint64_t ceil_log(std::uint64_t base, std::uint64_t n) {
  if (base < 2) throw DomainError("ceil_log: base must be at least 2");
  std::uint64_t k = 0;
  unsigned __int128 power = 1;
  while (power < n) {
    power *= base;
    ++k;
  }
  return k;
}

Level beta_for(std::uint64_t capacity, std::uint64_t gamma) {
  return static_cast<Level>(ceil_log(gamma, capacity) + 2);
}

bool is_prime(std::uint64_t n) noexcept {
  if (n < 2) return false;
  for (std::uint64_t small : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    if (n % small == 0) return n == small;
  }
  std::uint64_t d = n - 1;
  int r = 0;
  while ((d & 1U) == 0) {
    d >>= 1U;
    ++r;
  }
  // This witness set is deterministic for all 64-bit n.
  for (std::uint64_t a : {2ULL, 3ULL, 5ULL, 7ULL, 11ULL, 13ULL, 17ULL, 19ULL, 23ULL, 29ULL, 31ULL, 37ULL}) {
    std::uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < r; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

std::uint64_t next_prime(std::uint64_t n) {
  if (n <= 2) return 2;
  for (std::uint64_t candidate = n | 1U; candidate >= n; candidate += 2) {
    if (is_prime(candidate)) return candidate;
  }
  throw DomainError("next_prime: overflow");
}

Params Params::make(std::uint64_t capacity, std::uint64_t gamma, std::uint64_t block_size,
                    std::uint64_t slots, double alpha_max) {
  if (gamma < 2) throw DomainError("gamma must be at least 2");
  if (capacity < 1) throw DomainError("capacity must be at least 1");
  Params params;
  params.capacity = capacity;
  params.gamma = gamma;
  params.beta = beta_for(capacity, gamma);
  params.block_size = block_size;
  params.alpha_max = alpha_max;
  params.slots = slots == 0 ? next_prime(params.min_slots()) : slots;
  params.validate();
  return params;
}

std::uint64_t Params::min_slots() const {
  const long double nodes = 2.0L * static_cast<long double>(capacity) * static_cast<long double>(gamma) /
                            static_cast<long double>(gamma - 1);
  const long double needed = (nodes + 2.0L * static_cast<long double>(beta)) / static_cast<long double>(alpha_max);
  return static_cast<std::uint64_t>(std::ceil(needed));
}

std::uint64_t Params::slot_limit() const noexcept {
  return static_cast<std::uint64_t>(std::floor(alpha_max * static_cast<double>(slots)));
}

void Params::validate() const {
  if (gamma < 2) throw DomainError("gamma must be at least 2");
  if (capacity < 1) throw DomainError("capacity must be at least 1");
  if (block_size < 2) throw DomainError("block size must be at least 2");
  if (!(alpha_max > 0.0) || alpha_max > 0.9) throw DomainError("alpha_max must lie in (0, 0.9]");
  if (beta != beta_for(capacity, gamma)) throw DomainError("beta must equal ceil(log_gamma N) + 2");
  if (beta > 255) throw DomainError("beta does not fit the one-byte level field");
  if (!is_prime(slots)) throw DomainError("table size " + std::to_string(slots) + " is not prime");
  if (slots < min_slots()) {
    throw DomainError("table size " + std::to_string(slots) + " is below the minimum " +
                      std::to_string(min_slots()));
  }
}

std::uint32_t level_chunk(ElementKey x, std::uint64_t seed, std::uint64_t index) noexcept {
  const std::uint64_t base = mix64(x ^ seed);
  return static_cast<std::uint32_t>(mix64(base + kGolden * (index + 1)) >> 32);
}

Level level_of(ElementKey x, const HashSeeds& seeds, std::uint64_t gamma, Level beta) noexcept {
  if (x == front_key) return beta;
  // A chunk below floor(2^32 / gamma) is a "tail": the element climbs one more level.
  const std::uint64_t threshold = (std::uint64_t{1} << 32) / gamma;
  Level level = 1;
  while (level < beta && level_chunk(x, seeds.level, level - 1) < threshold) ++level;
  return level;
}

SlotIndex h1(const PartitionLabel& label, const HashSeeds& seeds, std::uint64_t p) noexcept {
  const auto bytes = label.bytes();
  std::uint64_t word = 0;
  for (std::size_t i = 0; i < 8; ++i) word = (word << 8U) | bytes[i];
  std::uint64_t h = mix64(word ^ seeds.h1);
  h = mix64(h + kGolden * (static_cast<std::uint64_t>(bytes[8]) + 1));
  return reduce_range(h, p);
}

SlotIndex h2(SlotIndex slot, const HashSeeds& seeds, std::uint64_t p) {
  if (slot >= p) throw DomainError("h2: slot " + std::to_string(slot) + " outside [0, p)");
  std::uint64_t acc = 0;
  for (std::size_t i = seeds.h2.size(); i-- > 0;) {
    acc = (mulmod(acc, slot, p) + seeds.h2[i] % p) % p;
  }
  return acc;
}

SlotIndex label_hash(const PartitionLabel& label, const HashSeeds& seeds, std::uint64_t p) {
  return h2(h1(label, seeds, p), seeds, p);
}

}  // namespace bsl
