#pragma once

#include <sodium.h>

#include <array>
#include <cstring>
#include <stdexcept>

#include "vmpc/common.hpp"
#include "vmpc/ring.hpp"

namespace vmpc {

inline void sodium_ready() {
  static const int rc = sodium_init();
  if (rc < 0) throw std::runtime_error("libsodium init failed");
}

/// Deterministic ChaCha20 stream keyed from a 64-bit seed (BLAKE2b-expanded).
/// One instance per logical stream; not shared across threads.
class SeededPrg {
 public:
  explicit SeededPrg(u64 seed) {
    sodium_ready();
    u8 seed_bytes[8];
    store_le(seed_bytes, seed);
    crypto_generichash(key_.data(), key_.size(), seed_bytes, sizeof(seed_bytes),
                       nullptr, 0);
  }

  /// Independent stream derived from (seed, label).
  static u64 derive(u64 seed, u64 label) {
    sodium_ready();
    u8 in[16], out[8];
    store_le(in, seed);
    store_le(in + 8, label);
    crypto_generichash(out, sizeof(out), in, sizeof(in), nullptr, 0);
    u64 r;
    std::memcpy(&r, out, 8);
    return r;
  }

  u64 next_u64() {
    if (pos_ + 8 > kBlock) refill();
    u64 r;
    std::memcpy(&r, block_.data() + pos_, 8);
    pos_ += 8;
    return r;
  }

  RingElement next_element(const Ring& ring) { return ring.reduce(next_u64()); }

  u64 next_bit() { return next_u64() & 1ull; }

  /// Uniform double in [0, 1).
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  static constexpr size_t kBlock = 512;

  static void store_le(u8* p, u64 x) {
    for (int i = 0; i < 8; i++) p[i] = static_cast<u8>(x >> (8 * i));
  }

  void refill() {
    u8 nonce[crypto_stream_chacha20_NONCEBYTES];
    store_le(nonce, counter_++);
    crypto_stream_chacha20(block_.data(), kBlock, nonce, key_.data());
    pos_ = 0;
  }

  std::array<u8, crypto_stream_chacha20_KEYBYTES> key_{};
  std::array<u8, kBlock> block_{};
  size_t pos_ = kBlock;
  u64 counter_ = 0;
};

}  // namespace vmpc
