#include "bsl/blockstore.hpp"

#include <fcntl.h>
#include <openssl/evp.h>
#include <sys/stat.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace bsl {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic{'B', 'S', 'L', '1'};

void put_be(std::uint8_t* out, std::uint64_t value, int width) noexcept {
  for (int i = 0; i < width; ++i) out[i] = static_cast<std::uint8_t>(value >> (8 * (width - 1 - i)));
}

std::uint64_t get_be(const std::uint8_t* in, int width) noexcept {
  std::uint64_t value = 0;
  for (int i = 0; i < width; ++i) value = (value << 8U) | in[i];
  return value;
}

[[noreturn]] void throw_errno(const std::string& what) {
  throw StoreError(what + ": " + std::strerror(errno));
}

void pread_all(int fd, std::uint8_t* out, std::size_t count, off_t offset) {
  while (count > 0) {
    const ssize_t got = ::pread(fd, out, count, offset);
    if (got < 0) {
      if (errno == EINTR) continue;
      throw_errno("pread");
    }
    if (got == 0) throw StoreError("pread: unexpected end of file");
    out += got;
    count -= static_cast<std::size_t>(got);
    offset += got;
  }
}

void pwrite_all(int fd, const std::uint8_t* in, std::size_t count, off_t offset) {
  while (count > 0) {
    const ssize_t put = ::pwrite(fd, in, count, offset);
    if (put < 0) {
      if (errno == EINTR) continue;
      throw_errno("pwrite");
    }
    in += put;
    count -= static_cast<std::size_t>(put);
    offset += put;
  }
}

off_t slot_offset(SlotIndex slot) noexcept {
  return static_cast<off_t>(kHeaderBytes + slot * kSlotBytes);
}

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new()) {
    if (ctx_ == nullptr || EVP_DigestInit_ex(ctx_, EVP_sha256(), nullptr) != 1) {
      EVP_MD_CTX_free(ctx_);
      throw StoreError("sha256: init failed");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(ctx_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(std::span<const std::uint8_t> bytes) {
    if (EVP_DigestUpdate(ctx_, bytes.data(), bytes.size()) != 1) throw StoreError("sha256: update failed");
  }

  Digest finish() {
    Digest out{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_, out.data(), &len) != 1 || len != out.size()) {
      throw StoreError("sha256: final failed");
    }
    return out;
  }

 private:
  EVP_MD_CTX* ctx_;
};

}  // namespace

// --- SlotRecord -------------------------------------------------------------

void SlotRecord::encode(std::span<std::uint8_t, kSlotBytes> out) const noexcept {
  std::fill(out.begin(), out.end(), std::uint8_t{0});
  out[0] = static_cast<std::uint8_t>(tag);
  if (tag == SlotTag::node) {
    put_be(out.data() + 1, element, 8);
    out[9] = level;
  }
}

SlotRecord SlotRecord::decode(std::span<const std::uint8_t, kSlotBytes> in) {
  if (in[0] > static_cast<std::uint8_t>(SlotTag::end)) {
    throw StoreError("corrupt slot tag " + std::to_string(in[0]));
  }
  SlotRecord record;
  record.tag = static_cast<SlotTag>(in[0]);
  if (record.tag == SlotTag::node) {
    record.element = get_be(in.data() + 1, 8);
    record.level = in[9];
  }
  return record;
}

std::string to_hex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(digest.size() * 2);
  for (std::uint8_t byte : digest) {
    out.push_back(kHex[byte >> 4U]);
    out.push_back(kHex[byte & 0xFU]);
  }
  return out;
}

Digest sha256(std::span<const std::uint8_t> bytes) {
  Sha256 hasher;
  hasher.update(bytes);
  return hasher.finish();
}

// --- StoreHeader ------------------------------------------------------------

StoreHeader StoreHeader::from(const Params& params, std::uint64_t master_seed) noexcept {
  return {params.capacity, params.gamma, params.beta, params.block_size, params.slots, master_seed};
}

std::array<std::uint8_t, kHeaderBytes> StoreHeader::encode() const noexcept {
  std::array<std::uint8_t, kHeaderBytes> out{};
  std::copy(kMagic.begin(), kMagic.end(), out.begin());
  put_be(out.data() + 4, kFormatVersion, 2);
  std::uint8_t* cursor = out.data() + 6;
  for (std::uint64_t field : {capacity, gamma, beta, block_size, slots, master_seed}) {
    put_be(cursor, field, 8);
    cursor += 8;
  }
  return out;
}

StoreHeader StoreHeader::decode(std::span<const std::uint8_t, kHeaderBytes> in) {
  if (!std::equal(kMagic.begin(), kMagic.end(), in.begin())) throw StoreError("bad magic: not a BSL1 file");
  const auto version = get_be(in.data() + 4, 2);
  if (version != kFormatVersion) throw StoreError("unsupported format version " + std::to_string(version));
  const std::uint8_t* cursor = in.data() + 6;
  StoreHeader header;
  for (std::uint64_t* field : {&header.capacity, &header.gamma, &header.beta, &header.block_size, &header.slots,
                               &header.master_seed}) {
    *field = get_be(cursor, 8);
    cursor += 8;
  }
  return header;
}

// --- MemoryBackend ----------------------------------------------------------

MemoryBackend::MemoryBackend(std::uint64_t slots) : slots_(slots), bytes_(slots * kSlotBytes, 0) {}

void MemoryBackend::load(SlotIndex slot, std::span<std::uint8_t, kSlotBytes> out) const {
  std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(slot * kSlotBytes), kSlotBytes, out.begin());
}

void MemoryBackend::store(SlotIndex slot, std::span<const std::uint8_t, kSlotBytes> in) {
  std::copy(in.begin(), in.end(), bytes_.begin() + static_cast<std::ptrdiff_t>(slot * kSlotBytes));
}

void MemoryBackend::load_range(SlotIndex first, std::uint64_t count, std::span<std::uint8_t> out) const {
  std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(first * kSlotBytes), count * kSlotBytes, out.begin());
}

// --- FileBackend ------------------------------------------------------------

std::unique_ptr<FileBackend> FileBackend::create(const std::filesystem::path& path, const StoreHeader& header) {
  const int fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0644);
  if (fd < 0) throw_errno("open " + path.string());
  std::unique_ptr<FileBackend> backend(new FileBackend(fd, header));
  const auto bytes = header.encode();
  pwrite_all(fd, bytes.data(), bytes.size(), 0);
  if (::ftruncate(fd, slot_offset(header.slots)) != 0) throw_errno("ftruncate");
  return backend;
}

std::unique_ptr<FileBackend> FileBackend::open(const std::filesystem::path& path) {
  const int fd = ::open(path.c_str(), O_RDWR);
  if (fd < 0) throw_errno("open " + path.string());
  std::array<std::uint8_t, kHeaderBytes> raw{};
  try {
    pread_all(fd, raw.data(), raw.size(), 0);
  } catch (...) {
    ::close(fd);
    throw;
  }
  std::unique_ptr<FileBackend> backend(new FileBackend(fd, StoreHeader{}));
  backend->header_ = StoreHeader::decode(raw);
  struct stat info {};
  if (::fstat(fd, &info) != 0) throw_errno("fstat");
  if (info.st_size != slot_offset(backend->header_.slots)) {
    throw StoreError("file size does not match the slot count in its header");
  }
  return backend;
}

FileBackend::~FileBackend() { ::close(fd_); }

void FileBackend::load(SlotIndex slot, std::span<std::uint8_t, kSlotBytes> out) const {
  pread_all(fd_, out.data(), kSlotBytes, slot_offset(slot));
}

void FileBackend::store(SlotIndex slot, std::span<const std::uint8_t, kSlotBytes> in) {
  pwrite_all(fd_, in.data(), kSlotBytes, slot_offset(slot));
}

void FileBackend::load_range(SlotIndex first, std::uint64_t count, std::span<std::uint8_t> out) const {
  pread_all(fd_, out.data(), count * kSlotBytes, slot_offset(first));
}

// --- BlockStore -------------------------------------------------------------

BlockStore::BlockStore(std::unique_ptr<SlotBackend> backend, std::uint64_t block_size)
    : backend_(std::move(backend)), slots_(backend_->slot_count()), block_size_(block_size) {
  if (block_size_ < 1) throw StoreError("block size must be positive");
  if (slots_ < 1) throw StoreError("store must have at least one slot");
  read_stamp_.assign(block_count(), 0);
  write_stamp_.assign(block_count(), 0);
}

BlockStore BlockStore::in_memory(std::uint64_t slots, std::uint64_t block_size) {
  return BlockStore(std::make_unique<MemoryBackend>(slots), block_size);
}

void BlockStore::check_index(SlotIndex slot) const {
  if (slot >= slots_) {
    throw std::out_of_range("slot " + std::to_string(slot) + " outside table of " + std::to_string(slots_));
  }
}

void BlockStore::charge(SlotIndex slot, std::vector<std::uint64_t>& stamps, std::uint64_t& counter) const {
  if (!in_op_) return;
  auto& stamp = stamps[block_of(slot)];
  if (stamp != epoch_) {
    stamp = epoch_;
    ++counter;
  }
}

SlotRecord BlockStore::read_slot(SlotIndex slot) const {
  check_index(slot);
  charge(slot, read_stamp_, current_.reads);
  std::array<std::uint8_t, kSlotBytes> raw{};
  backend_->load(slot, raw);
  return SlotRecord::decode(raw);
}

void BlockStore::write_slot(SlotIndex slot, const SlotRecord& record) {
  check_index(slot);
  charge(slot, write_stamp_, current_.writes);
  std::array<std::uint8_t, kSlotBytes> raw{};
  record.encode(raw);
  backend_->store(slot, raw);
}

void BlockStore::begin_op() {
  if (in_op_) throw StoreError("begin_op: an operation is already open");
  in_op_ = true;
  ++epoch_;
  current_ = {};
}

IoStats BlockStore::end_op() {
  if (!in_op_) throw StoreError("end_op: no operation is open");
  in_op_ = false;
  return current_;
}

std::vector<std::uint8_t> BlockStore::image() const {
  std::vector<std::uint8_t> out(slots_ * kSlotBytes);
  backend_->load_range(0, slots_, out);
  return out;
}

Digest BlockStore::image_digest() const {
  constexpr std::uint64_t kChunk = 1U << 16U;
  Sha256 hasher;
  std::vector<std::uint8_t> buffer(kChunk * kSlotBytes);
  for (std::uint64_t first = 0; first < slots_; first += kChunk) {
    const std::uint64_t count = std::min(kChunk, slots_ - first);
    std::span<std::uint8_t> view(buffer.data(), count * kSlotBytes);
    backend_->load_range(first, count, view);
    hasher.update(view);
  }
  return hasher.finish();
}

bool BlockStore::is_blank() const {
  const auto bytes = image();
  return std::all_of(bytes.begin(), bytes.end(), [](std::uint8_t b) { return b == 0; });
}

}  // namespace bsl
