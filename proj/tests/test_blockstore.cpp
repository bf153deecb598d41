#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "bsl/blockstore.hpp"

using namespace bsl;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("bsl_test_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST_CASE("slot record encoding") {
  std::array<std::uint8_t, kSlotBytes> raw{};
  SlotRecord::node(0x0102030405060708ULL, 3).encode(raw);
  const std::array<std::uint8_t, kSlotBytes> want{1, 1, 2, 3, 4, 5, 6, 7, 8, 3};
  CHECK(raw == want);
  CHECK(SlotRecord::decode(raw) == SlotRecord::node(0x0102030405060708ULL, 3));

  SlotRecord::end().encode(raw);
  CHECK(raw == std::array<std::uint8_t, kSlotBytes>{2, 0, 0, 0, 0, 0, 0, 0, 0, 0});
  SlotRecord::empty().encode(raw);
  CHECK(raw == std::array<std::uint8_t, kSlotBytes>{});

  raw[0] = 7;
  CHECK_THROWS_AS((void)SlotRecord::decode(raw), StoreError);
}

TEST_CASE("fresh store reads EMPTY") {
  BlockStore store = BlockStore::in_memory(101, 8);
  for (SlotIndex i = 0; i < 101; ++i) REQUIRE(store.read_slot(i).is_empty());
  CHECK(store.block_count() == 13);
  CHECK_THROWS_AS((void)store.read_slot(101), std::out_of_range);
}

TEST_CASE("distinct-block accounting") {
  BlockStore store = BlockStore::in_memory(1009, 16);

  store.begin_op();
  CHECK(store.end_op() == IoStats{0, 0});

  store.begin_op();
  (void)store.read_slot(5);
  CHECK(store.end_op() == IoStats{1, 0});

  store.begin_op();
  (void)store.read_slot(32);
  (void)store.read_slot(33);
  CHECK(store.end_op().reads == 1);

  // [i, i+l) touches floor((i+l-1)/B) - floor(i/B) + 1 blocks
  for (SlotIndex i = 0; i < 64; ++i) {
    for (std::uint64_t l = 1; l <= 40; ++l) {
      store.begin_op();
      for (SlotIndex j = i; j < i + l; ++j) (void)store.read_slot(j);
      REQUIRE(store.end_op().reads == (i + l - 1) / 16 - i / 16 + 1);
    }
  }

  store.begin_op();
  for (SlotIndex j = 48; j < 60; ++j) store.write_slot(j, SlotRecord::node(j, 1));
  CHECK(store.end_op() == IoStats{0, 1});

  // Outside an operation nothing is charged.
  (void)store.read_slot(0);
  store.begin_op();
  CHECK(store.end_op() == IoStats{0, 0});
}

TEST_CASE("a string of length B spans at most two blocks from any offset") {
  const std::uint64_t B = 16;
  BlockStore store = BlockStore::in_memory(1009, B);
  for (SlotIndex offset = 0; offset < B; ++offset) {
    store.begin_op();
    for (SlotIndex j = 0; j < B; ++j) (void)store.read_slot(64 + offset + j);
    REQUIRE(store.end_op().reads <= 2);
  }
}

TEST_CASE("operation scoping") {
  BlockStore store = BlockStore::in_memory(11, 4);
  store.begin_op();
  CHECK(store.in_op());
  CHECK_THROWS_AS(store.begin_op(), StoreError);
  (void)store.end_op();
  CHECK_THROWS_AS((void)store.end_op(), StoreError);
}

TEST_CASE("write, read back, digest behaviour") {
  BlockStore a = BlockStore::in_memory(257, 16);
  BlockStore b = BlockStore::in_memory(257, 16);
  const Digest fresh = a.image_digest();
  CHECK(fresh == b.image_digest());
  CHECK(a.is_blank());

  a.write_slot(100, SlotRecord::node(42, 2));
  CHECK(a.read_slot(100) == SlotRecord::node(42, 2));
  CHECK(a.image_digest() != fresh);
  CHECK_FALSE(a.is_blank());

  a.write_slot(100, SlotRecord::empty());
  CHECK(a.image_digest() == fresh);
  CHECK(a.image() == std::vector<std::uint8_t>(257 * kSlotBytes, 0));

  // digest is SHA-256 of the raw slot image
  CHECK(to_hex(sha256({})) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  const std::string abc = "abc";
  CHECK(to_hex(sha256({reinterpret_cast<const std::uint8_t*>(abc.data()), abc.size()})) ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(a.image_digest() == sha256(a.image()));
}

TEST_CASE("header round trip and layout") {
  const Params params = Params::make(1000, 16, 16);
  const StoreHeader header = StoreHeader::from(params, 0xfeedULL);
  const auto raw = header.encode();
  CHECK(raw[0] == 'B');
  CHECK(raw[3] == '1');
  CHECK(raw[4] == 0);
  CHECK(raw[5] == 1);  // version, big-endian
  CHECK(raw[6 + 7] == 0xe8);  // N = 1000 = 0x3e8
  CHECK(raw[6 + 6] == 0x03);
  for (std::size_t i = 6 + 6 * 8; i < kHeaderBytes; ++i) REQUIRE(raw[i] == 0);
  const StoreHeader back = StoreHeader::decode(raw);
  CHECK(back.capacity == 1000);
  CHECK(back.gamma == 16);
  CHECK(back.beta == 5);
  CHECK(back.block_size == 16);
  CHECK(back.slots == params.slots);
  CHECK(back.master_seed == 0xfeedULL);

  auto bad = raw;
  bad[0] = 'X';
  CHECK_THROWS_AS((void)StoreHeader::decode(bad), StoreError);
  bad = raw;
  bad[5] = 2;
  CHECK_THROWS_AS((void)StoreHeader::decode(bad), StoreError);
}

TEST_CASE("file backend matches memory and survives reopen") {
  const Params params = Params::make(100, 4, 8);
  const auto path = temp_path("store.bsl");
  std::filesystem::remove(path);
  BlockStore mem = BlockStore::in_memory(params.slots, params.block_size);
  {
    BlockStore file(FileBackend::create(path, StoreHeader::from(params, 9)), params.block_size);
    for (SlotIndex i = 0; i < params.slots; i += 7) {
      const SlotRecord r = i % 2 ? SlotRecord::node(i * 3, 2) : SlotRecord::end();
      file.write_slot(i, r);
      mem.write_slot(i, r);
    }
    CHECK(file.image() == mem.image());
    CHECK(file.image_digest() == mem.image_digest());
  }
  CHECK(std::filesystem::file_size(path) == kHeaderBytes + params.slots * kSlotBytes);
  {
    auto backend = FileBackend::open(path);
    CHECK(backend->header().master_seed == 9);
    BlockStore file(std::move(backend), params.block_size);
    CHECK(file.image_digest() == mem.image_digest());
  }
  // truncated file is rejected
  std::filesystem::resize_file(path, kHeaderBytes + 10);
  CHECK_THROWS_AS((void)FileBackend::open(path), StoreError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS((void)FileBackend::open(path), StoreError);
}
