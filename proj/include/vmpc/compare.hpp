#pragma once

#include <utility>
#include <vector>

#include "vmpc/protocols.hpp"

namespace vmpc {

/// Strictly-less-than-zero under the signed interpretation. Returns the
/// fixed-point embedding of the bit (0 or 2^f); agrees with the cleartext
/// sign bit exactly.
///
/// Method: the dealer's random bits compose a uniform mask r (unit scale),
/// x + r is opened, and the sign bit of x = c - r is extracted with a ripple
/// borrow chain whose ANDs are raw bit products. Theta(q) rounds by design;
/// a log-depth carry network is the documented extension point.
inline SharedVector ltz(MpcContext& ctx, const SharedVector& x) {
  const Ring& ring = ctx.ring();
  const int q = ring.q();
  const size_t len = x.size();
  ctx.stats().ltz_elements += len;
  if (len == 0) return ctx.empty();

  // q random bits per element; mask share is their local weighted sum.
  std::vector<SharedVector> bits(static_cast<size_t>(q));
  for (auto& b : bits) b = ctx.empty(len);
  SharedVector masked = x;
  for (size_t i = 0; i < len; i++) {
    RingElement r{0};
    for (int j = 0; j < q; j++) {
      RingElement bj = ctx.dealer().next_bit().bit;
      bits[static_cast<size_t>(j)].values[i] = bj;
      r = ring.add(r, ring.mul_pow2(bj, j));
    }
    masked.values[i] = ring.add(masked.values[i], r);
  }
  std::vector<RingElement> c = ctx.open(masked);

  auto c_bit = [&](size_t i, int j) -> u64 { return (c[i].v >> j) & 1ull; };

  // Borrow chain for c - r, one raw AND per bit position.
  SharedVector borrow = ctx.empty(len);  // shares of 0
  for (int j = 0; j + 1 < q; j++) {
    const SharedVector& rj = bits[static_cast<size_t>(j)];
    SharedVector p = ctx.mul_raw(rj, borrow);
    SharedVector next = ctx.empty(len);
    for (size_t i = 0; i < len; i++) {
      // borrow' = r_j AND borrow            if c_j = 1
      //           r_j OR borrow             if c_j = 0
      next.values[i] = c_bit(i, j)
                           ? p.values[i]
                           : ring.sub(ring.add(rj.values[i], borrow.values[i]),
                                      p.values[i]);
    }
    borrow = std::move(next);
  }

  // Sign bit: c_{q-1} XOR r_{q-1} XOR borrow.
  const SharedVector& rtop = bits[static_cast<size_t>(q - 1)];
  SharedVector p = ctx.mul_raw(rtop, borrow);
  SharedVector out = ctx.empty(len);
  for (size_t i = 0; i < len; i++) {
    RingElement u = ring.sub(ring.add(rtop.values[i], borrow.values[i]),
                             ring.mul_pow2(p.values[i], 1));
    if (c_bit(i, q - 1)) {
      u = ring.neg(u);
      if (ctx.party() == PartyId::p1) u = ring.add(u, RingElement{1});
    }
    out.values[i] = ring.mul_pow2(u, ring.f());  // embed as encode(bit)
  }
  return out;
}

/// sign(x) in {-1, +1} with sign(0) = +1, as 1 - 2*ltz(x).
inline SharedVector sign(MpcContext& ctx, const SharedVector& x) {
  ctx.stats().sign_elements += x.size();
  SharedVector lt = ltz(ctx, x);
  return ctx.sub(ctx.constant(1.0, x.size()), ctx.mul_pow2(lt, 1));
}

namespace detail {

/// One tournament level for max and min in lockstep; comparisons for both
/// trees are batched into a single ltz/select round.
inline void minmax_level(MpcContext& ctx, std::vector<RingElement>& maxv,
                         std::vector<RingElement>& minv) {
  const Ring& ring = ctx.ring();
  const size_t sz = maxv.size();
  const size_t half = sz / 2;
  if (half == 0) return;

  SharedVector d = ctx.empty(2 * half);
  for (size_t i = 0; i < half; i++) {
    d.values[i] = ring.sub(maxv[i], maxv[half + i]);
    d.values[half + i] = ring.sub(minv[i], minv[half + i]);
  }
  SharedVector ge = ctx.sub(ctx.constant(1.0, 2 * half), ltz(ctx, d));
  SharedVector sel = ctx.mul(d, ge);  // (a-b) * [a >= b]

  std::vector<RingElement> nmax(half + sz % 2), nmin(half + sz % 2);
  for (size_t i = 0; i < half; i++) {
    nmax[i] = ring.add(maxv[half + i], sel.values[i]);        // max = b + (a-b)ge
    nmin[i] = ring.sub(minv[i], sel.values[half + i]);        // min = a - (a-b)ge
  }
  if (sz % 2) {
    nmax[half] = maxv[sz - 1];
    nmin[half] = minv[sz - 1];
  }
  maxv = std::move(nmax);
  minv = std::move(nmin);
}

}  // namespace detail

/// Tournament max and min in one pass (levels batched).
inline std::pair<Share, Share> minmax_pair(MpcContext& ctx, const SharedVector& v) {
  if (v.size() == 0) throw std::invalid_argument("minmax: need length >= 1");
  std::vector<RingElement> maxv = v.values, minv = v.values;
  while (maxv.size() > 1) detail::minmax_level(ctx, maxv, minv);
  return {Share{ctx.party(), maxv[0]}, Share{ctx.party(), minv[0]}};
}

inline Share max_elem(MpcContext& ctx, const SharedVector& v) {
  return minmax_pair(ctx, v).first;
}

inline Share min_elem(MpcContext& ctx, const SharedVector& v) {
  return minmax_pair(ctx, v).second;
}

/// (v - min) / (max - min), then the affine squeeze into [eps, 1-eps].
/// Meaningless when max == min (degenerate spread is the caller's contract).
inline SharedVector minmax_normalize(MpcContext& ctx, const SharedVector& v,
                                     double eps) {
  if (v.size() < 2) throw std::invalid_argument("minmax_normalize: need length >= 2");
  auto [mx, mn] = minmax_pair(ctx, v);

  SharedVector span = ctx.empty(1);
  span.values[0] = ctx.ring().sub(mx.value, mn.value);
  SharedVector w = ctx.scale_fixed(inv(ctx, span), 1.0 - 2.0 * eps);

  SharedVector centered = ctx.empty(v.size());
  SharedVector wv = ctx.empty(v.size());
  for (size_t i = 0; i < v.size(); i++) {
    centered.values[i] = ctx.ring().sub(v.values[i], mn.value);
    wv.values[i] = w.values[0];
  }
  return ctx.add_public(ctx.mul(centered, wv), eps);
}

/// h(x) = 0.5x + 0.25, elementwise; communication-free up to the rescale.
inline SharedVector normalize_h(MpcContext& ctx, const SharedVector& v) {
  return ctx.add_public(ctx.scale_fixed(v, 0.5), 0.25);
}

inline SharedVector normalize(MpcContext& ctx, const SharedVector& v,
                              Normalization mode, double eps) {
  return mode == Normalization::linear_h ? normalize_h(ctx, v)
                                         : minmax_normalize(ctx, v, eps);
}

}  // namespace vmpc
