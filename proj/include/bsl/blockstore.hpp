#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bsl/hashing.hpp"

namespace bsl {

inline constexpr std::size_t kSlotBytes = 10;
inline constexpr std::size_t kHeaderBytes = 64;
inline constexpr std::uint16_t kFormatVersion = 1;

enum class SlotTag : std::uint8_t { empty = 0, node = 1, end = 2 };

struct SlotRecord {
  SlotTag tag = SlotTag::empty;
  ElementKey element = 0;
  std::uint8_t level = 0;

  static constexpr SlotRecord empty() noexcept { return {}; }
  static constexpr SlotRecord end() noexcept { return {SlotTag::end, 0, 0}; }
  static constexpr SlotRecord node(ElementKey element, Level level) noexcept {
    return {SlotTag::node, element, static_cast<std::uint8_t>(level)};
  }

  [[nodiscard]] bool is_empty() const noexcept { return tag == SlotTag::empty; }
  [[nodiscard]] bool is_node() const noexcept { return tag == SlotTag::node; }
  [[nodiscard]] bool is_end() const noexcept { return tag == SlotTag::end; }

  /// tag byte, element big-endian, level byte. Non-node slots encode zero payload.
  void encode(std::span<std::uint8_t, kSlotBytes> out) const noexcept;
  [[nodiscard]] static SlotRecord decode(std::span<const std::uint8_t, kSlotBytes> in);

  friend bool operator==(const SlotRecord&, const SlotRecord&) = default;
};

struct IoStats {
  std::uint64_t reads = 0;
  std::uint64_t writes = 0;

  [[nodiscard]] std::uint64_t total() const noexcept { return reads + writes; }
  friend bool operator==(const IoStats&, const IoStats&) = default;
};

using Digest = std::array<std::uint8_t, 32>;
[[nodiscard]] std::string to_hex(const Digest& digest);

class StoreError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed 64-byte file header.
struct StoreHeader {
  std::uint64_t capacity = 0;
  std::uint64_t gamma = 0;
  std::uint64_t beta = 0;
  std::uint64_t block_size = 0;
  std::uint64_t slots = 0;
  std::uint64_t master_seed = 0;

  [[nodiscard]] static StoreHeader from(const Params& params, std::uint64_t master_seed) noexcept;
  [[nodiscard]] std::array<std::uint8_t, kHeaderBytes> encode() const noexcept;
  [[nodiscard]] static StoreHeader decode(std::span<const std::uint8_t, kHeaderBytes> in);

  friend bool operator==(const StoreHeader&, const StoreHeader&) = default;
};

/// Raw slot storage. Accounting lives in BlockStore, so every backend reports the same I/O.
class SlotBackend {
 public:
  virtual ~SlotBackend() = default;

  [[nodiscard]] virtual std::uint64_t slot_count() const noexcept = 0;
  virtual void load(SlotIndex slot, std::span<std::uint8_t, kSlotBytes> out) const = 0;
  virtual void store(SlotIndex slot, std::span<const std::uint8_t, kSlotBytes> in) = 0;
  /// Copies `count` consecutive slots starting at `first` into `out`.
  virtual void load_range(SlotIndex first, std::uint64_t count, std::span<std::uint8_t> out) const = 0;
};

class MemoryBackend final : public SlotBackend {
 public:
  explicit MemoryBackend(std::uint64_t slots);

  [[nodiscard]] std::uint64_t slot_count() const noexcept override { return slots_; }
  void load(SlotIndex slot, std::span<std::uint8_t, kSlotBytes> out) const override;
  void store(SlotIndex slot, std::span<const std::uint8_t, kSlotBytes> in) override;
  void load_range(SlotIndex first, std::uint64_t count, std::span<std::uint8_t> out) const override;

 private:
  std::uint64_t slots_;
  std::vector<std::uint8_t> bytes_;
};

/// Flat file: 64-byte header followed by the slot area. No journaling.
class FileBackend final : public SlotBackend {
 public:
  /// Creates (or truncates) `path` and writes a zeroed slot area.
  [[nodiscard]] static std::unique_ptr<FileBackend> create(const std::filesystem::path& path,
                                                           const StoreHeader& header);
  /// Opens an existing file and validates magic, version and size.
  [[nodiscard]] static std::unique_ptr<FileBackend> open(const std::filesystem::path& path);

  ~FileBackend() override;
  FileBackend(const FileBackend&) = delete;
  FileBackend& operator=(const FileBackend&) = delete;

  [[nodiscard]] const StoreHeader& header() const noexcept { return header_; }
  [[nodiscard]] std::uint64_t slot_count() const noexcept override { return header_.slots; }
  void load(SlotIndex slot, std::span<std::uint8_t, kSlotBytes> out) const override;
  void store(SlotIndex slot, std::span<const std::uint8_t, kSlotBytes> in) override;
  void load_range(SlotIndex first, std::uint64_t count, std::span<std::uint8_t> out) const override;

 private:
  FileBackend(int fd, StoreHeader header) : fd_(fd), header_(header) {}

  int fd_;
  StoreHeader header_;
};

/// The p-slot external memory, grouped into blocks of B slots. Counts distinct
/// blocks read and written between begin_op() and end_op(); accesses outside an
/// operation are not charged.
class BlockStore {
 public:
  BlockStore(std::unique_ptr<SlotBackend> backend, std::uint64_t block_size);

  [[nodiscard]] static BlockStore in_memory(std::uint64_t slots, std::uint64_t block_size);

  [[nodiscard]] std::uint64_t slot_count() const noexcept { return slots_; }
  [[nodiscard]] std::uint64_t block_size() const noexcept { return block_size_; }
  [[nodiscard]] std::uint64_t block_count() const noexcept { return (slots_ + block_size_ - 1) / block_size_; }
  [[nodiscard]] std::uint64_t block_of(SlotIndex slot) const noexcept { return slot / block_size_; }

  [[nodiscard]] SlotRecord read_slot(SlotIndex slot) const;
  void write_slot(SlotIndex slot, const SlotRecord& record);

  void begin_op();
  IoStats end_op();
  [[nodiscard]] bool in_op() const noexcept { return in_op_; }
  /// Counts accumulated so far in the current operation.
  [[nodiscard]] IoStats current() const noexcept { return current_; }

  /// SHA-256 of the p x 10-byte slot image.
  [[nodiscard]] Digest image_digest() const;
  [[nodiscard]] std::vector<std::uint8_t> image() const;
  /// True when every slot is EMPTY.
  [[nodiscard]] bool is_blank() const;

  [[nodiscard]] SlotBackend& backend() noexcept { return *backend_; }
  [[nodiscard]] const SlotBackend& backend() const noexcept { return *backend_; }

 private:
  void check_index(SlotIndex slot) const;
  void charge(SlotIndex slot, std::vector<std::uint64_t>& stamps, std::uint64_t& counter) const;

  std::unique_ptr<SlotBackend> backend_;
  std::uint64_t slots_;
  std::uint64_t block_size_;
  bool in_op_ = false;
  std::uint64_t epoch_ = 0;
  // Per-block epoch of the last charge; equal to epoch_ means already counted.
  mutable std::vector<std::uint64_t> read_stamp_;
  mutable std::vector<std::uint64_t> write_stamp_;
  mutable IoStats current_;
};

/// Digest of an image produced by BlockStore::image().
[[nodiscard]] Digest sha256(std::span<const std::uint8_t> bytes);

}  // namespace bsl
