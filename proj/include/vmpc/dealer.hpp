#pragma once

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <utility>
#include <vector>

#include "vmpc/config.hpp"
#include "vmpc/prg.hpp"
#include "vmpc/ring.hpp"
#include "vmpc/sharing.hpp"

namespace vmpc {

/// One party's shares of a multiplication triple c = a*b (raw ring product).
struct BeaverTripleShare {
  RingElement a, b, c;
};

/// One party's share of a random bit b in {0,1}, stored at unit scale.
/// The fixed-point embedding encode(b) = b * 2^f is the local shift by f.
struct RandomBitShare {
  RingElement bit;
};

/// One party's shares of (r, r >> m) for the dealer-assisted truncation.
/// r is uniform in [0, 2^(q-1)) so the masked opening never wraps.
struct TruncPairShare {
  RingElement r, r_shifted;
};

/// Counts of preprocessed material, per type. Truncation pairs come in two
/// sections keyed by shift amount: m = f and m = f + 1.
struct DealerBudget {
  u64 triples = 0;
  u64 bits = 0;
  u64 pairs_f = 0;
  u64 pairs_f1 = 0;

  DealerBudget& operator+=(const DealerBudget& o) {
    triples += o.triples;
    bits += o.bits;
    pairs_f += o.pairs_f;
    pairs_f1 += o.pairs_f1;
    return *this;
  }
  friend DealerBudget operator+(DealerBudget a, const DealerBudget& b) { return a += b; }
  bool operator==(const DealerBudget&) const = default;

  u64 total() const { return triples + bits + pairs_f + pairs_f1; }

  bool covers(const DealerBudget& need) const {
    return triples >= need.triples && bits >= need.bits && pairs_f >= need.pairs_f &&
           pairs_f1 >= need.pairs_f1;
  }
};

struct MaterialSet {
  std::vector<BeaverTripleShare> triples;
  std::vector<RandomBitShare> bits;
  std::vector<TruncPairShare> pairs_f;
  std::vector<TruncPairShare> pairs_f1;
};

/// Sequential consumption interface used by the online phase. A cursor only
/// moves forward; running past the generated budget raises dealer_exhausted.
class MaterialSource {
 public:
  explicit MaterialSource(int f) : f_(f) {}
  virtual ~MaterialSource() = default;

  virtual BeaverTripleShare next_triple() = 0;
  virtual RandomBitShare next_bit() = 0;
  virtual TruncPairShare next_pair(int m) = 0;

  const DealerBudget& consumed() const { return consumed_; }
  int fractional_bits() const { return f_; }

 protected:
  void note_pair(int m) {
    if (m == f_)
      consumed_.pairs_f++;
    else if (m == f_ + 1)
      consumed_.pairs_f1++;
    else
      throw std::invalid_argument("material: unsupported truncation shift");
  }

  DealerBudget consumed_;
  int f_;
};

class MemoryMaterials final : public MaterialSource {
 public:
  MemoryMaterials(int f, MaterialSet set) : MaterialSource(f), set_(std::move(set)) {}

  BeaverTripleShare next_triple() override {
    if (it_ >= set_.triples.size()) throw dealer_exhausted("out of triples");
    consumed_.triples++;
    return set_.triples[it_++];
  }
  RandomBitShare next_bit() override {
    if (ib_ >= set_.bits.size()) throw dealer_exhausted("out of random bits");
    consumed_.bits++;
    return set_.bits[ib_++];
  }
  TruncPairShare next_pair(int m) override {
    note_pair(m);
    auto& sec = m == f_ ? set_.pairs_f : set_.pairs_f1;
    auto& idx = m == f_ ? ipf_ : ipf1_;
    if (idx >= sec.size()) throw dealer_exhausted("out of truncation pairs");
    return sec[idx++];
  }

 private:
  MaterialSet set_;
  size_t it_ = 0, ib_ = 0, ipf_ = 0, ipf1_ = 0;
};

// ---------------------------------------------------------------------------
// Material generation. Both parties' records are derived from one seeded
// stream, so a fixed seed reproduces identical files. Record order matches
// the file section order (triples, bits, pairs_f, pairs_f1).
// ---------------------------------------------------------------------------

template <class Sink1, class Sink2>
void generate_records(const Ring& ring, const DealerBudget& budget, u64 seed,
                      Sink1&& sink1, Sink2&& sink2) {
  SeededPrg prg(seed);
  const int f = ring.f();
  for (u64 i = 0; i < budget.triples; i++) {
    RingElement a = prg.next_element(ring), b = prg.next_element(ring);
    RingElement c = ring.mul(a, b);
    auto [a1, a2] = split(ring, a, prg);
    auto [b1, b2] = split(ring, b, prg);
    auto [c1, c2] = split(ring, c, prg);
    sink1.triple({a1.value, b1.value, c1.value});
    sink2.triple({a2.value, b2.value, c2.value});
  }
  for (u64 i = 0; i < budget.bits; i++) {
    RingElement b{prg.next_bit()};
    auto [s1, s2] = split(ring, b, prg);
    sink1.bit({s1.value});
    sink2.bit({s2.value});
  }
  const u64 half_mask = ring.mask() >> 1;
  for (int sec = 0; sec < 2; sec++) {
    const int m = sec == 0 ? f : f + 1;
    const u64 count = sec == 0 ? budget.pairs_f : budget.pairs_f1;
    for (u64 i = 0; i < count; i++) {
      RingElement r{prg.next_u64() & half_mask};
      RingElement rs{r.v >> m};
      auto [r1, r2] = split(ring, r, prg);
      auto [s1, s2] = split(ring, rs, prg);
      sink1.pair(m, {r1.value, s1.value});
      sink2.pair(m, {r2.value, s2.value});
    }
  }
}

namespace detail {
struct SetSink {
  int f;
  MaterialSet& set;
  void triple(BeaverTripleShare t) { set.triples.push_back(t); }
  void bit(RandomBitShare b) { set.bits.push_back(b); }
  void pair(int m, TruncPairShare p) {
    (m == f ? set.pairs_f : set.pairs_f1).push_back(p);
  }
};
}  // namespace detail

inline std::pair<MaterialSet, MaterialSet> generate_materials(const Ring& ring,
                                                              const DealerBudget& budget,
                                                              u64 seed) {
  MaterialSet s1, s2;
  detail::SetSink k1{ring.f(), s1}, k2{ring.f(), s2};
  generate_records(ring, budget, seed, k1, k2);
  return {std::move(s1), std::move(s2)};
}

// ---------------------------------------------------------------------------
// Material files.
// Header: 8-byte magic "VMPCDLR\0"; q, f, n_triples, n_bits, n_pairs_f,
// n_pairs_f1 as 64-bit LE. Then fixed-width type-tagged records in section
// order: 'T' + a,b,c | 'B' + bit | 'P' + r,r>>f | 'Q' + r,r>>(f+1),
// all words 64-bit LE.
// ---------------------------------------------------------------------------

namespace detail {

constexpr char kDealerMagic[8] = {'V', 'M', 'P', 'C', 'D', 'L', 'R', 0};
constexpr size_t kDealerHeaderBytes = 8 + 6 * 8;
constexpr size_t kTripleRecordBytes = 1 + 24;
constexpr size_t kBitRecordBytes = 1 + 8;
constexpr size_t kPairRecordBytes = 1 + 16;

struct FileSink {
  int f;
  std::ofstream os;

  explicit FileSink(int f_, const std::filesystem::path& path)
      : f(f_), os(path, std::ios::binary | std::ios::trunc) {
    if (!os) throw std::runtime_error("cannot open material file: " + path.string());
  }
  void word(u64 x) { put_u64(os, x); }
  void triple(BeaverTripleShare t) {
    os.put('T');
    word(t.a.v);
    word(t.b.v);
    word(t.c.v);
  }
  void bit(RandomBitShare b) {
    os.put('B');
    word(b.bit.v);
  }
  void pair(int m, TruncPairShare p) {
    os.put(m == f ? 'P' : 'Q');
    word(p.r.v);
    word(p.r_shifted.v);
  }
};

}  // namespace detail

inline void write_material_header(std::ostream& os, const Ring& ring,
                                  const DealerBudget& b) {
  os.write(detail::kDealerMagic, 8);
  detail::put_u64(os, static_cast<u64>(ring.q()));
  detail::put_u64(os, static_cast<u64>(ring.f()));
  detail::put_u64(os, b.triples);
  detail::put_u64(os, b.bits);
  detail::put_u64(os, b.pairs_f);
  detail::put_u64(os, b.pairs_f1);
}

/// Streams both parties' files; memory use is independent of the budget.
inline void generate_material_files(const Ring& ring, const DealerBudget& budget,
                                    u64 seed, const std::filesystem::path& path1,
                                    const std::filesystem::path& path2) {
  detail::FileSink s1(ring.f(), path1), s2(ring.f(), path2);
  write_material_header(s1.os, ring, budget);
  write_material_header(s2.os, ring, budget);
  generate_records(ring, budget, seed, s1, s2);
  if (!s1.os || !s2.os) throw std::runtime_error("material file write failed");
}

inline DealerBudget read_material_header(std::istream& is, const Ring& ring) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, detail::kDealerMagic, 8) != 0)
    throw std::runtime_error("material file: bad magic");
  u64 q = detail::get_u64(is), f = detail::get_u64(is);
  if (q != static_cast<u64>(ring.q()) || f != static_cast<u64>(ring.f()))
    throw std::runtime_error("material file: ring parameter mismatch");
  DealerBudget b;
  b.triples = detail::get_u64(is);
  b.bits = detail::get_u64(is);
  b.pairs_f = detail::get_u64(is);
  b.pairs_f1 = detail::get_u64(is);
  return b;
}

/// Streaming reader: one sequential cursor per section, so consumption stays
/// in bounded memory regardless of file size.
class MaterialFileReader final : public MaterialSource {
 public:
  MaterialFileReader(const std::filesystem::path& path, const Ring& ring)
      : MaterialSource(ring.f()) {
    std::ifstream hdr(path, std::ios::binary);
    if (!hdr) throw std::runtime_error("cannot open material file: " + path.string());
    budget_ = read_material_header(hdr, ring);

    using detail::kBitRecordBytes;
    using detail::kDealerHeaderBytes;
    using detail::kPairRecordBytes;
    using detail::kTripleRecordBytes;
    size_t off = kDealerHeaderBytes;
    open_section(triples_, path, off);
    off += budget_.triples * kTripleRecordBytes;
    open_section(bits_, path, off);
    off += budget_.bits * kBitRecordBytes;
    open_section(pairs_f_, path, off);
    off += budget_.pairs_f * kPairRecordBytes;
    open_section(pairs_f1_, path, off);
  }

  const DealerBudget& file_budget() const { return budget_; }

  BeaverTripleShare next_triple() override {
    if (consumed_.triples >= budget_.triples) throw dealer_exhausted("out of triples");
    consumed_.triples++;
    expect_tag(triples_, 'T');
    BeaverTripleShare t;
    t.a.v = detail::get_u64(triples_);
    t.b.v = detail::get_u64(triples_);
    t.c.v = detail::get_u64(triples_);
    return t;
  }

  RandomBitShare next_bit() override {
    if (consumed_.bits >= budget_.bits) throw dealer_exhausted("out of random bits");
    consumed_.bits++;
    expect_tag(bits_, 'B');
    return {RingElement{detail::get_u64(bits_)}};
  }

  TruncPairShare next_pair(int m) override {
    note_pair(m);
    const bool low = m == f_;
    if ((low ? consumed_.pairs_f : consumed_.pairs_f1) >
        (low ? budget_.pairs_f : budget_.pairs_f1))
      throw dealer_exhausted("out of truncation pairs");
    std::ifstream& is = low ? pairs_f_ : pairs_f1_;
    expect_tag(is, low ? 'P' : 'Q');
    TruncPairShare p;
    p.r.v = detail::get_u64(is);
    p.r_shifted.v = detail::get_u64(is);
    return p;
  }

 private:
  static void open_section(std::ifstream& is, const std::filesystem::path& path,
                           size_t offset) {
    is.open(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open material file: " + path.string());
    is.seekg(static_cast<std::streamoff>(offset));
  }

  static void expect_tag(std::istream& is, char want) {
    int got = is.get();
    if (got != want) throw std::runtime_error("material file: corrupt record tag");
  }

  DealerBudget budget_;
  std::ifstream triples_, bits_, pairs_f_, pairs_f1_;
};

// ---------------------------------------------------------------------------
// Budget estimation. The model below mirrors the online composition
// operation by operation; traced-consumption tests pin it to the engine.
//
// Primitive costs (L elements):
//   mul(L)          : L triples + rescale-by-f truncation
//   mul_raw(L)      : L triples (exact ring product, no rescale)
//   mul_rescale1(L) : L triples + rescale-by-(f+1) truncation
//   trunc(L, m)     : L pairs of shift m in dealer mode, free locally
//   exact_trunc(L,m): L pairs of shift m (always dealer-assisted)
//   scale_fixed(L)  : rescale-by-f truncation only
//   inv(L)          : inv_iters * 2 * mul(L)
//   sqrt_inv(L)     : sqrt_iters * (2 * mul(L) + mul_rescale1(L))
//   ltz(L)          : L*q random bits + L*q raw triples
//   indicators(L)   : mul_raw(L) + exact_trunc(2L, f+1)
//
// 3-Estimates per iteration (after the one-time indicator precompute and,
// when iters >= 1, the nbViews/nbFacts inverses):
//   truth block      mul(2nk) + mul(2k) + mul(k)
//   difficulty block inv(n) + mul(2nk) + mul(2k) + mul(k)
//   trust block      inv(k) + mul(2k) + mul(2nk) + mul(n)
//   plus one normalization of length k, k, n respectively:
//     minmax(L): 2(L-1) comparisons (ltz + select mul) + inv(1) +
//                scale_fixed(1) + mul(L)
//     h(L): scale_fixed(L)
//
// Cosine: indicator precompute; init inv(k) + mul(k) + one similarity
// update; per iteration a truth update (variant-dependent) + trust update:
//   trust: mul(nk) + mul(k) + mul(nk) + mul(n) + sqrt_inv(n) + mul(n) +
//          2 * scale_fixed(n)
//   truth cubic+signed: mul(2n) + ltz(n) + mul(n) + mul(2nk) + inv(k) + mul(k)
//   truth linear+square_trick: mul(2nk) + mul(k) + inv(k) + mul(2k)
// ---------------------------------------------------------------------------

struct CostModel {
  int q = 60;
  int f = 20;
  int inv_iters = 24;
  int sqrt_iters = 30;
  TruncMode mode = TruncMode::local;
  DealerBudget b;

  void trunc(u64 count, int m) {
    if (mode != TruncMode::dealer) return;
    if (m == f)
      b.pairs_f += count;
    else
      b.pairs_f1 += count;
  }
  void exact_trunc(u64 count, int m) {
    if (m == f)
      b.pairs_f += count;
    else
      b.pairs_f1 += count;
  }
  void mul(u64 count) {
    b.triples += count;
    trunc(count, f);
  }
  void mul_raw(u64 count) { b.triples += count; }
  void mul_rescale1(u64 count) {
    b.triples += count;
    trunc(count, f + 1);
  }
  void scale_fixed(u64 count) { trunc(count, f); }
  void inv(u64 count) {
    for (int i = 0; i < inv_iters; i++) mul(2 * count);
  }
  void sqrt_inv(u64 count) {
    for (int i = 0; i < sqrt_iters; i++) {
      mul(2 * count);
      mul_rescale1(count);
    }
  }
  void ltz(u64 count) {
    b.bits += count * static_cast<u64>(q);
    mul_raw(count * static_cast<u64>(q));
  }
  void indicators(u64 count) {
    mul_raw(count);
    exact_trunc(2 * count, f + 1);
  }
  void normalize(u64 len, Normalization norm) {
    if (norm == Normalization::linear_h) {
      scale_fixed(len);
      return;
    }
    const u64 cmp = 2 * (len - 1);
    ltz(cmp);
    mul(cmp);
    inv(1);
    scale_fixed(1);
    mul(len);
  }
};

inline DealerBudget estimate_budget(const AlgoConfig& cfg, u64 n, u64 k, u64 iters,
                                    const RingParams& ring, const NewtonConfig& newton,
                                    TruncMode mode = TruncMode::local) {
  if (n == 0 || k == 0) throw std::invalid_argument("estimate_budget: sizes must be positive");
  CostModel m{ring.q, ring.f, newton.inv_iters, newton.sqrt_iters, mode, {}};
  const u64 nk = n * k;

  if (cfg.algorithm == Algorithm::three_estimates) {
    m.indicators(nk);
    if (iters >= 1) {
      m.inv(k);  // 1/nbViews
      m.inv(n);  // 1/nbFacts
    }
    for (u64 t = 0; t < iters; t++) {
      m.mul(2 * nk);
      m.mul(2 * k);
      m.mul(k);
      m.normalize(k, cfg.normalization);
      m.inv(n);
      m.mul(2 * nk);
      m.mul(2 * k);
      m.mul(k);
      m.normalize(k, cfg.normalization);
      m.inv(k);
      m.mul(2 * k);
      m.mul(2 * nk);
      m.mul(n);
      m.normalize(n, cfg.normalization);
    }
    return m.b;
  }

  // Cosine.
  m.indicators(nk);
  m.inv(k);  // 1/nbViews for the initial truth estimate
  m.mul(k);
  auto trust_update = [&] {
    m.mul(nk);  // v ∘ y
    m.mul(k);   // y^2
    m.mul(nk);  // answered ∘ y^2
    m.mul(n);   // nbFacts * S2
    m.sqrt_inv(n);
    m.mul(n);  // similarity
  };
  trust_update();  // initial trust from the initial truth estimate
  for (u64 t = 0; t < iters; t++) {
    if (cfg.power == CosinePower::cubic) m.mul(2 * n);  // theta^2, theta^3
    if (cfg.inversion == Inversion::signed_inverse) {
      m.ltz(n);
      m.mul(n);  // |w| = sign(theta) * w for the denominator weights
    }
    m.mul(2 * nk);  // numerator, denominator
    if (cfg.inversion == Inversion::square_trick) {
      m.mul(k);  // D^2
      m.inv(k);
      m.mul(2 * k);  // numerator * D, then * inv(D^2)
    } else {
      m.inv(k);
      m.mul(k);
    }
    trust_update();
    m.scale_fixed(2 * n);  // (1-eta) theta + eta cos
  }
  return m.b;
}

}  // namespace vmpc
