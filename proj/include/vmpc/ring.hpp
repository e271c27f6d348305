#pragma once

#include <cmath>
#include <stdexcept>

#include "vmpc/common.hpp"

namespace vmpc {

/// Parameters of the fixed-point ring Z_{2^q} with f fractional bits.
struct RingParams {
  int q = 60;  // ring bit width
  int f = 20;  // fractional bits

  void validate() const {
    if (!(2 <= f && f < q && q <= 64))
      throw std::invalid_argument("ring params: need 2 <= f < q <= 64");
    if (q - 2 * f < 8)
      throw std::invalid_argument("ring params: need q - 2f >= 8 product headroom");
  }

  u64 mask() const { return q == 64 ? ~0ull : ((1ull << q) - 1ull); }

  bool operator==(const RingParams&) const = default;
};

/// One element of Z_{2^q}, always kept reduced (value < 2^q).
struct RingElement {
  u64 v = 0;
  bool operator==(const RingElement&) const = default;
};

/// Wrapping arithmetic in Z_{2^q} plus the real <-> fixed-point codec.
/// All operations mask back to q bits; two's-complement signed convention
/// with the sign boundary at 2^(q-1).
class Ring {
 public:
  explicit Ring(RingParams p = {}) : p_(p), mask_(p.mask()) { p.validate(); }

  const RingParams& params() const { return p_; }
  int q() const { return p_.q; }
  int f() const { return p_.f; }
  u64 mask() const { return mask_; }

  RingElement reduce(u64 x) const { return {x & mask_}; }
  RingElement add(RingElement a, RingElement b) const { return reduce(a.v + b.v); }
  RingElement sub(RingElement a, RingElement b) const { return reduce(a.v - b.v); }
  RingElement neg(RingElement a) const { return reduce(0ull - a.v); }
  RingElement mul(RingElement a, RingElement b) const { return reduce(a.v * b.v); }

  /// Exact multiplication by 2^s (s >= 0).
  RingElement mul_pow2(RingElement a, int s) const {
    return s >= 64 ? RingElement{0} : reduce(a.v << s);
  }

  /// Sign-extend from q bits.
  i64 to_signed(RingElement a) const {
    const int sh = 64 - p_.q;
    return static_cast<i64>(a.v << sh) >> sh;
  }

  RingElement from_signed(i64 s) const { return reduce(static_cast<u64>(s)); }

  bool is_negative(RingElement a) const { return to_signed(a) < 0; }

  /// round(r * 2^f) mod 2^q, ties away from zero. Throws if r is outside
  /// the representable range |r| < 2^(q-1-f).
  RingElement encode(double r) const {
    const double bound = std::ldexp(1.0, p_.q - 1 - p_.f);
    if (!(std::fabs(r) < bound))
      throw std::domain_error("encode: value outside fixed-point range");
    return from_signed(std::llround(std::ldexp(r, p_.f)));
  }

  double decode(RingElement a) const {
    return std::ldexp(static_cast<double>(to_signed(a)), -p_.f);
  }

  /// Arithmetic right shift by m under the signed interpretation.
  RingElement truncate(RingElement a, int m) const {
    return from_signed(to_signed(a) >> m);
  }

  /// Fixed-point 1.0 (= 2^f).
  RingElement one() const { return {1ull << p_.f}; }

 private:
  RingParams p_;
  u64 mask_;
};

}  // namespace vmpc
