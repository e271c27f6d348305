#pragma once

#include <cstring>
#include <filesystem>
#include <fstream>
#include <utility>
#include <vector>

#include "vmpc/prg.hpp"
#include "vmpc/ring.hpp"

namespace vmpc {

enum class PartyId : int { p1 = 1, p2 = 2 };

inline PartyId other(PartyId p) { return p == PartyId::p1 ? PartyId::p2 : PartyId::p1; }
inline int party_index(PartyId p) { return static_cast<int>(p); }

/// One party's additive share of a single secret.
struct Share {
  PartyId owner = PartyId::p1;
  RingElement value;
};

/// One party's shares of a logical secret vector.
struct SharedVector {
  PartyId owner = PartyId::p1;
  std::vector<RingElement> values;

  size_t size() const { return values.size(); }
};

namespace detail {
inline void require_same_owner(PartyId a, PartyId b) {
  if (a != b) throw std::invalid_argument("share ops need a matching owner");
}
}  // namespace detail

/// x -> (x1, x2) with x1 uniform and x1 + x2 = x mod 2^q.
inline std::pair<Share, Share> split(const Ring& ring, RingElement x, SeededPrg& prg) {
  RingElement x1 = prg.next_element(ring);
  return {{PartyId::p1, x1}, {PartyId::p2, ring.sub(x, x1)}};
}

inline std::pair<SharedVector, SharedVector> split(const Ring& ring,
                                                   const std::vector<RingElement>& xs,
                                                   SeededPrg& prg) {
  SharedVector a{PartyId::p1, {}}, b{PartyId::p2, {}};
  a.values.reserve(xs.size());
  b.values.reserve(xs.size());
  for (RingElement x : xs) {
    auto [s1, s2] = split(ring, x, prg);
    a.values.push_back(s1.value);
    b.values.push_back(s2.value);
  }
  return {std::move(a), std::move(b)};
}

inline RingElement reconstruct(const Ring& ring, const Share& a, const Share& b) {
  if (a.owner == b.owner)
    throw std::invalid_argument("reconstruct needs shares from distinct parties");
  return ring.add(a.value, b.value);
}

inline std::vector<RingElement> reconstruct(const Ring& ring, const SharedVector& a,
                                            const SharedVector& b) {
  if (a.owner == b.owner)
    throw std::invalid_argument("reconstruct needs shares from distinct parties");
  if (a.size() != b.size())
    throw std::invalid_argument("reconstruct: length mismatch");
  std::vector<RingElement> out(a.size());
  for (size_t i = 0; i < out.size(); i++) out[i] = ring.add(a.values[i], b.values[i]);
  return out;
}

inline Share add_local(const Ring& ring, const Share& a, const Share& b) {
  detail::require_same_owner(a.owner, b.owner);
  return {a.owner, ring.add(a.value, b.value)};
}

inline Share sub_local(const Ring& ring, const Share& a, const Share& b) {
  detail::require_same_owner(a.owner, b.owner);
  return {a.owner, ring.sub(a.value, b.value)};
}

/// Share of c * a for a public ring constant c (raw scaling, no rescale).
inline Share scale_public(const Ring& ring, const Share& a, RingElement c) {
  return {a.owner, ring.mul(a.value, c)};
}

/// Share of a + c for a public constant: party 1 adds, party 2 is unchanged.
inline Share add_public(const Ring& ring, const Share& a, RingElement c) {
  return {a.owner, a.owner == PartyId::p1 ? ring.add(a.value, c) : a.value};
}

/// Share of the public constant c itself (party 1 holds c, party 2 holds 0).
inline Share public_share(PartyId owner, RingElement c) {
  return {owner, owner == PartyId::p1 ? c : RingElement{0}};
}

// ---------------------------------------------------------------------------
// Share files: "VMPC1" staging format.
// Header: 8-byte magic "VMPC1\0\0\0", then q, f, length as 64-bit LE,
// then the elements as 64-bit LE words.
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kShareMagic[8] = {'V', 'M', 'P', 'C', '1', 0, 0, 0};

inline void put_u64(std::ostream& os, u64 x) {
  u8 b[8];
  for (int i = 0; i < 8; i++) b[i] = static_cast<u8>(x >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline u64 get_u64(std::istream& is) {
  u8 b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("share file: truncated");
  u64 x = 0;
  for (int i = 0; i < 8; i++) x |= static_cast<u64>(b[i]) << (8 * i);
  return x;
}

}  // namespace detail

inline void write_share_file(const std::filesystem::path& path, const Ring& ring,
                             const SharedVector& v) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw std::runtime_error("cannot open share file for writing: " + path.string());
  os.write(detail::kShareMagic, 8);
  detail::put_u64(os, static_cast<u64>(ring.q()));
  detail::put_u64(os, static_cast<u64>(ring.f()));
  detail::put_u64(os, v.size());
  for (RingElement e : v.values) detail::put_u64(os, e.v);
  if (!os) throw std::runtime_error("share file write failed: " + path.string());
}

inline SharedVector read_share_file(const std::filesystem::path& path, const Ring& ring,
                                    PartyId owner) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open share file: " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, detail::kShareMagic, 8) != 0)
    throw std::runtime_error("share file: bad magic: " + path.string());
  u64 q = detail::get_u64(is), f = detail::get_u64(is), n = detail::get_u64(is);
  if (q != static_cast<u64>(ring.q()) || f != static_cast<u64>(ring.f()))
    throw std::runtime_error("share file: ring parameter mismatch: " + path.string());
  SharedVector v{owner, {}};
  v.values.resize(n);
  for (u64 i = 0; i < n; i++) v.values[i].v = detail::get_u64(is) & ring.mask();
  return v;
}

}  // namespace vmpc
