#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "vmpc/config.hpp"
#include "vmpc/dealer.hpp"
#include "vmpc/ring.hpp"
#include "vmpc/sharing.hpp"
#include "vmpc/transport.hpp"

namespace vmpc {

/// Protocol-level invocation counters (the channel tracks rounds/bytes).
struct ProtoStats {
  u64 mul_elements = 0;
  u64 ltz_elements = 0;
  u64 sign_elements = 0;
};

/// One party's view of an online session: transport, dealer cursor, ring
/// parameters, Newton settings. All protocol operations run in lockstep with
/// the peer on a single logical strand.
class MpcContext {
 public:
  MpcContext(PartyId me, Channel& chan, MaterialSource& dealer, const Ring& ring,
             NewtonConfig newton = {}, TruncMode trunc_mode = TruncMode::local)
      : me_(me), chan_(chan), dealer_(dealer), ring_(ring), newton_(newton),
        trunc_mode_(trunc_mode) {
    newton_.validate();
    if (dealer.fractional_bits() != ring.f())
      throw std::invalid_argument("dealer material does not match ring params");
  }

  PartyId party() const { return me_; }
  const Ring& ring() const { return ring_; }
  Channel& channel() { return chan_; }
  MaterialSource& dealer() { return dealer_; }
  const NewtonConfig& newton() const { return newton_; }
  TruncMode trunc_mode() const { return trunc_mode_; }
  ProtoStats& stats() { return stats_; }
  const ProtoStats& stats() const { return stats_; }

  // --- local share arithmetic -------------------------------------------

  SharedVector empty(size_t len = 0) const {
    SharedVector v{me_, {}};
    v.values.resize(len);
    return v;
  }

  /// Shares of a public constant vector (party 1 holds the value).
  SharedVector constant_raw(RingElement c, size_t len) const {
    SharedVector v = empty(len);
    if (me_ == PartyId::p1)
      for (auto& e : v.values) e = c;
    return v;
  }

  SharedVector constant(double c, size_t len) const {
    return constant_raw(ring_.encode(c), len);
  }

  SharedVector add(const SharedVector& a, const SharedVector& b) const {
    check_pair(a, b);
    SharedVector out = empty(a.size());
    for (size_t i = 0; i < a.size(); i++)
      out.values[i] = ring_.add(a.values[i], b.values[i]);
    return out;
  }

  SharedVector sub(const SharedVector& a, const SharedVector& b) const {
    check_pair(a, b);
    SharedVector out = empty(a.size());
    for (size_t i = 0; i < a.size(); i++)
      out.values[i] = ring_.sub(a.values[i], b.values[i]);
    return out;
  }

  SharedVector neg(const SharedVector& a) const {
    SharedVector out = empty(a.size());
    for (size_t i = 0; i < a.size(); i++) out.values[i] = ring_.neg(a.values[i]);
    return out;
  }

  SharedVector add_public_raw(const SharedVector& a, RingElement c) const {
    SharedVector out = a;
    if (me_ == PartyId::p1)
      for (auto& e : out.values) e = ring_.add(e, c);
    return out;
  }

  SharedVector add_public(const SharedVector& a, double c) const {
    return add_public_raw(a, ring_.encode(c));
  }

  /// Exact scaling by a public ring constant (no rescale).
  SharedVector scale_raw(const SharedVector& a, RingElement c) const {
    SharedVector out = empty(a.size());
    for (size_t i = 0; i < a.size(); i++) out.values[i] = ring_.mul(a.values[i], c);
    return out;
  }

  SharedVector mul_pow2(const SharedVector& a, int s) const {
    SharedVector out = empty(a.size());
    for (size_t i = 0; i < a.size(); i++) out.values[i] = ring_.mul_pow2(a.values[i], s);
    return out;
  }

  // --- communication ------------------------------------------------------

  std::vector<RingElement> open(const SharedVector& v) {
    std::vector<RingElement> peer = chan_.exchange(v.values, FrameKind::open);
    std::vector<RingElement> out(v.size());
    for (size_t i = 0; i < out.size(); i++) out[i] = ring_.add(v.values[i], peer[i]);
    return out;
  }

  // --- truncation -----------------------------------------------------------

  /// Local per-party arithmetic shift: error within 1 unit of the floor,
  /// failure probability ~2^(l+1-q) for l-bit secrets.
  SharedVector truncate_local(const SharedVector& a, int m) const {
    SharedVector out = empty(a.size());
    for (size_t i = 0; i < a.size(); i++)
      out.values[i] = ring_.truncate(a.values[i], m);
    return out;
  }

  /// Dealer-assisted truncation (one batched opening). Wrap-free because the
  /// mask lives in [0, 2^(q-1)); exact floor whenever the secret is a
  /// multiple of 2^m, otherwise floor plus at most one unit.
  SharedVector truncate_pair(const SharedVector& a, int m) {
    const size_t len = a.size();
    const int q = ring_.q();
    const RingElement offset = ring_.mul_pow2({1}, q - 2);
    const RingElement offset_shifted = ring_.mul_pow2({1}, q - 2 - m);

    std::vector<TruncPairShare> pairs(len);
    SharedVector masked = empty(len);
    for (size_t i = 0; i < len; i++) {
      pairs[i] = dealer_.next_pair(m);
      masked.values[i] = ring_.add(a.values[i], pairs[i].r);
    }
    masked = add_public_raw(masked, offset);
    std::vector<RingElement> c = open(masked);

    SharedVector out = empty(len);
    for (size_t i = 0; i < len; i++) {
      RingElement shifted{c[i].v >> m};  // c is wrap-free, plain logical shift
      out.values[i] = ring_.neg(pairs[i].r_shifted);
      if (me_ == PartyId::p1)
        out.values[i] =
            ring_.add(out.values[i], ring_.sub(shifted, offset_shifted));
    }
    return out;
  }

  SharedVector truncate(const SharedVector& a, int m) {
    return trunc_mode_ == TruncMode::dealer ? truncate_pair(a, m)
                                            : truncate_local(a, m);
  }

  // --- multiplication -------------------------------------------------------

  /// Beaver product without rescale: reconstructs to the exact ring product.
  /// One round (both maskings opened in a single frame).
  SharedVector mul_raw(const SharedVector& x, const SharedVector& y) {
    check_pair(x, y);
    const size_t len = x.size();
    stats_.mul_elements += len;

    std::vector<BeaverTripleShare> t(len);
    SharedVector de = empty(2 * len);
    for (size_t i = 0; i < len; i++) {
      t[i] = dealer_.next_triple();
      de.values[i] = ring_.sub(x.values[i], t[i].a);
      de.values[len + i] = ring_.sub(y.values[i], t[i].b);
    }
    std::vector<RingElement> opened = open(de);

    SharedVector z = empty(len);
    for (size_t i = 0; i < len; i++) {
      RingElement d = opened[i], e = opened[len + i];
      RingElement acc = t[i].c;
      acc = ring_.add(acc, ring_.mul(d, t[i].b));
      acc = ring_.add(acc, ring_.mul(e, t[i].a));
      if (me_ == PartyId::p1) acc = ring_.add(acc, ring_.mul(d, e));
      z.values[i] = acc;
    }
    return z;
  }

  /// Fixed-point product: raw Beaver product rescaled by m (default f).
  SharedVector mul_rescale(const SharedVector& x, const SharedVector& y, int m) {
    return truncate(mul_raw(x, y), m);
  }

  SharedVector mul(const SharedVector& x, const SharedVector& y) {
    return mul_rescale(x, y, ring_.f());
  }

  /// Scale by a public fixed-point constant (rescale only, no triple).
  SharedVector scale_fixed(const SharedVector& a, double c) {
    return truncate(scale_raw(a, ring_.encode(c)), ring_.f());
  }

 private:
  void check_pair(const SharedVector& a, const SharedVector& b) const {
    if (a.owner != me_ || b.owner != me_)
      throw std::invalid_argument("shared vector owned by the wrong party");
    if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  }

  PartyId me_;
  Channel& chan_;
  MaterialSource& dealer_;
  Ring ring_;
  NewtonConfig newton_;
  TruncMode trunc_mode_;
  ProtoStats stats_;
};

// ---------------------------------------------------------------------------
// Newton kernels. Public starting points derived from the public domain
// bounds; iteration counts are fixed and data-independent, so round counts
// never depend on the secrets.
// ---------------------------------------------------------------------------

/// Reciprocal of secrets in (0, b_inv): w <- w(2 - xw) from w0 = 2/b_inv.
inline SharedVector inv(MpcContext& ctx, const SharedVector& x) {
  const size_t len = x.size();
  SharedVector w = ctx.constant(2.0 / ctx.newton().b_inv, len);
  SharedVector two = ctx.constant(2.0, len);
  for (int it = 0; it < ctx.newton().inv_iters; it++) {
    SharedVector t = ctx.mul(x, w);
    w = ctx.mul(w, ctx.sub(two, t));
  }
  return w;
}

/// Inverse square root of secrets in (0, b_sqrt):
/// y <- y(3 - x y^2)/2 from y0 = 1/sqrt(b_sqrt).
inline SharedVector sqrt_inv(MpcContext& ctx, const SharedVector& x) {
  const size_t len = x.size();
  SharedVector y = ctx.constant(1.0 / std::sqrt(ctx.newton().b_sqrt), len);
  SharedVector three = ctx.constant(3.0, len);
  for (int it = 0; it < ctx.newton().sqrt_iters; it++) {
    SharedVector t = ctx.mul(y, y);
    SharedVector u = ctx.mul(x, t);
    y = ctx.mul_rescale(y, ctx.sub(three, u), ctx.ring().f() + 1);
  }
  return y;
}

inline SharedVector sqrt(MpcContext& ctx, const SharedVector& x) {
  return ctx.mul(x, sqrt_inv(ctx, x));
}

// ---------------------------------------------------------------------------
// Pseudo-equality over {-1,0,1}: degree-2 indicator polynomials evaluated
// with one squaring, then an exact dealer-assisted rescale. The squared
// vector can be reused across all three selectors.
// ---------------------------------------------------------------------------

/// Raw Beaver squaring of z (scale 2^2f); input for the selectors below.
inline SharedVector eq_square_raw(MpcContext& ctx, const SharedVector& z) {
  return ctx.mul_raw(z, z);
}

/// E(z, kappa) for z in {-1,0,1}: reconstructs exactly to encode(0)/encode(1).
/// Garbage in, garbage out for z outside {-1,0,1}.
inline SharedVector eq_poly(MpcContext& ctx, const SharedVector& z, int kappa,
                            const SharedVector* square_raw = nullptr) {
  const int f = ctx.ring().f();
  SharedVector s = square_raw ? *square_raw : eq_square_raw(ctx, z);
  if (kappa == 1) return ctx.truncate_pair(ctx.add(s, ctx.mul_pow2(z, f)), f + 1);
  if (kappa == -1) return ctx.truncate_pair(ctx.sub(s, ctx.mul_pow2(z, f)), f + 1);
  if (kappa != 0) throw std::invalid_argument("eq_poly: kappa must be in {-1,0,1}");
  SharedVector z2 = ctx.truncate_pair(s, f);
  return ctx.sub(ctx.constant(1.0, z.size()), z2);
}

struct IndicatorMatrices {
  SharedVector sigma;  // E(z, 1) per entry
  SharedVector tau;    // E(z, -1) per entry
};

/// Both selectors from one squaring; exactly one multiplication round plus
/// one batched truncation round, independent of the vector length.
inline IndicatorMatrices indicator_matrices(MpcContext& ctx, const SharedVector& z) {
  const int f = ctx.ring().f();
  const size_t len = z.size();
  SharedVector s = eq_square_raw(ctx, z);
  SharedVector zf = ctx.mul_pow2(z, f);

  SharedVector pre = ctx.empty(2 * len);
  for (size_t i = 0; i < len; i++) {
    pre.values[i] = ctx.ring().add(s.values[i], zf.values[i]);
    pre.values[len + i] = ctx.ring().sub(s.values[i], zf.values[i]);
  }
  SharedVector both = ctx.truncate_pair(pre, f + 1);

  IndicatorMatrices out{ctx.empty(len), ctx.empty(len)};
  for (size_t i = 0; i < len; i++) {
    out.sigma.values[i] = both.values[i];
    out.tau.values[i] = both.values[len + i];
  }
  return out;
}

/// Sum of t[i] over positions where the secret z[i] equals the public kappa.
inline Share conditioned_sum(MpcContext& ctx, const SharedVector& t,
                             const SharedVector& z, int kappa) {
  if (t.size() != z.size())
    throw std::invalid_argument("conditioned_sum: length mismatch");
  SharedVector ind = eq_poly(ctx, z, kappa);
  SharedVector prods = ctx.mul(ind, t);
  Share out{ctx.party(), {0}};
  for (RingElement e : prods.values) out.value = ctx.ring().add(out.value, e);
  return out;
}

}  // namespace vmpc
