#pragma once

#include <cstdint>
#include <cstdlib>
#include <stdexcept>
#include <string>

namespace vmpc {

using u8 = std::uint8_t;
using u32 = std::uint32_t;
using u64 = std::uint64_t;
using i64 = std::int64_t;

// Session aborts caused by the peer or the wire.
struct transport_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Both sides alive but the protocol contract was violated (length mismatch,
// bad frame kind, tampered payload).
struct protocol_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct handshake_error : protocol_error {
  using protocol_error::protocol_error;
};

// Online phase ran out of preprocessed material.
struct dealer_exhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Verbosity from VMPC_LOG: quiet (default) | info | debug.
inline int log_level() {
  static const int level = [] {
    const char* v = std::getenv("VMPC_LOG");
    if (!v) return 0;
    std::string s(v);
    if (s == "debug") return 2;
    if (s == "info") return 1;
    return 0;
  }();
  return level;
}

}  // namespace vmpc
