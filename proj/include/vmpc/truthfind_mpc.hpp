#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "vmpc/compare.hpp"
#include "vmpc/protocols.hpp"
#include "vmpc/truthfind.hpp"

namespace vmpc {

/// One party's shares of the full answer matrix, row-major, plus the public
/// shape. Validity of the underlying matrix (entries in {-1,0,1}, no empty
/// fact or source) is guaranteed at sharing time, never checked online.
struct SharedAnswerMatrix {
  PartyId owner = PartyId::p1;
  int n = 0, k = 0;
  SharedVector flat;
};

inline std::pair<SharedAnswerMatrix, SharedAnswerMatrix> share_answer_matrix(
    const Ring& ring, const AnswerMatrix& m, SeededPrg& prg) {
  m.validate();
  std::vector<RingElement> enc(m.a.size());
  for (size_t i = 0; i < m.a.size(); i++) enc[i] = ring.encode(m.a[i]);
  auto [s1, s2] = split(ring, enc, prg);
  return {{PartyId::p1, m.n, m.k, std::move(s1)}, {PartyId::p2, m.n, m.k, std::move(s2)}};
}

/// Shares of the algorithm outputs plus loop-cost bookkeeping.
struct SharedTruthState {
  SharedVector y, theta, delta;
  u64 loop_rounds = 0;
  int iters = 0;

  double rounds_per_iteration() const {
    return iters > 0 ? static_cast<double>(loop_rounds) / iters : 0.0;
  }
};

namespace detail {

inline SharedVector row_broadcast(MpcContext& ctx, const SharedVector& per_source,
                                  int n, int k) {
  SharedVector out = ctx.empty(static_cast<size_t>(n) * k);
  for (int i = 0; i < n; i++)
    for (int j = 0; j < k; j++)
      out.values[static_cast<size_t>(i) * k + j] = per_source.values[static_cast<size_t>(i)];
  return out;
}

inline SharedVector col_broadcast(MpcContext& ctx, const SharedVector& per_fact,
                                  int n, int k) {
  SharedVector out = ctx.empty(static_cast<size_t>(n) * k);
  for (int i = 0; i < n; i++)
    for (int j = 0; j < k; j++)
      out.values[static_cast<size_t>(i) * k + j] = per_fact.values[static_cast<size_t>(j)];
  return out;
}

inline SharedVector col_sum(MpcContext& ctx, std::span<const RingElement> flat, int n,
                            int k) {
  SharedVector out = ctx.empty(static_cast<size_t>(k));
  for (int i = 0; i < n; i++)
    for (int j = 0; j < k; j++)
      out.values[static_cast<size_t>(j)] = ctx.ring().add(
          out.values[static_cast<size_t>(j)], flat[static_cast<size_t>(i) * k + j]);
  return out;
}

inline SharedVector row_sum(MpcContext& ctx, std::span<const RingElement> flat, int n,
                            int k) {
  SharedVector out = ctx.empty(static_cast<size_t>(n));
  for (int i = 0; i < n; i++)
    for (int j = 0; j < k; j++)
      out.values[static_cast<size_t>(i)] = ctx.ring().add(
          out.values[static_cast<size_t>(i)], flat[static_cast<size_t>(i) * k + j]);
  return out;
}

inline SharedVector concat(MpcContext& ctx, const SharedVector& a, const SharedVector& b) {
  SharedVector out = ctx.empty(a.size() + b.size());
  for (size_t i = 0; i < a.size(); i++) out.values[i] = a.values[i];
  for (size_t i = 0; i < b.size(); i++) out.values[a.size() + i] = b.values[i];
  return out;
}

inline SharedVector slice(MpcContext& ctx, const SharedVector& v, size_t from, size_t len) {
  SharedVector out = ctx.empty(len);
  for (size_t i = 0; i < len; i++) out.values[i] = v.values[from + i];
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// 3-Estimates over shares. Selector matrices are computed exactly once
// before the loop; nbViews/nbFacts and their inverses are loop-invariant.
// Update blocks run in the plain algorithm's order (truth, difficulty,
// trust, each followed by its normalization).
// ---------------------------------------------------------------------------

inline SharedTruthState three_estimates_mpc(MpcContext& ctx, const SharedAnswerMatrix& m,
                                            const AlgoConfig& cfg) {
  using namespace detail;
  cfg.validate();
  const int n = m.n, k = m.k;
  const size_t nk = static_cast<size_t>(n) * k;

  IndicatorMatrices ind = indicator_matrices(ctx, m.flat);
  SharedVector both = ctx.add(ind.sigma, ind.tau);
  SharedVector nb_views = col_sum(ctx, both.values, n, k);
  SharedVector nb_facts = row_sum(ctx, both.values, n, k);
  SharedVector cnt_pos = col_sum(ctx, ind.sigma.values, n, k);

  SharedVector inv_views = inv(ctx, nb_views);
  SharedVector inv_facts = inv(ctx, nb_facts);

  SharedTruthState st;
  st.iters = cfg.iters;
  st.theta = ctx.constant(cfg.theta0, static_cast<size_t>(n));
  st.delta = ctx.constant(cfg.delta0, static_cast<size_t>(k));
  st.y = ctx.empty(static_cast<size_t>(k));

  const u64 rounds_before = ctx.channel().stats().rounds;
  for (int t = 0; t < cfg.iters; t++) {
    // Truth: y_j = (cnt_pos_j - delta_j W_sigma_j + delta_j W_tau_j) / nbViews_j
    // with W_sigma_j = sum_i sigma_ij theta_i (and likewise tau).
    {
      SharedVector sig_tau = concat(ctx, ind.sigma, ind.tau);
      SharedVector th_bc = row_broadcast(ctx, st.theta, n, k);
      SharedVector w = ctx.mul(sig_tau, concat(ctx, th_bc, th_bc));
      SharedVector w_sigma = col_sum(ctx, std::span(w.values).subspan(0, nk), n, k);
      SharedVector w_tau = col_sum(ctx, std::span(w.values).subspan(nk, nk), n, k);
      SharedVector dp = ctx.mul(detail::concat(ctx, w_sigma, w_tau),
                                detail::concat(ctx, st.delta, st.delta));
      SharedVector pre = ctx.empty(static_cast<size_t>(k));
      for (int j = 0; j < k; j++)
        pre.values[j] = ctx.ring().add(
            ctx.ring().sub(cnt_pos.values[j], dp.values[j]),
            dp.values[static_cast<size_t>(k) + j]);
      st.y = normalize(ctx, ctx.mul(pre, inv_views), cfg.normalization, cfg.epsilon);
    }

    // Difficulty: delta_j = ((1-y_j) s_sigma_j + y_j s_tau_j) / nbViews_j
    // with s_sigma_j = sum_i sigma_ij / theta_i.
    {
      SharedVector inv_theta = inv(ctx, st.theta);
      SharedVector it_bc = row_broadcast(ctx, inv_theta, n, k);
      SharedVector w = ctx.mul(concat(ctx, ind.sigma, ind.tau), concat(ctx, it_bc, it_bc));
      SharedVector s_sigma = col_sum(ctx, std::span(w.values).subspan(0, nk), n, k);
      SharedVector s_tau = col_sum(ctx, std::span(w.values).subspan(nk, nk), n, k);
      SharedVector one_minus_y = ctx.sub(ctx.constant(1.0, st.y.size()), st.y);
      SharedVector ab = ctx.mul(concat(ctx, s_sigma, s_tau), concat(ctx, one_minus_y, st.y));
      SharedVector pre = ctx.add(slice(ctx, ab, 0, static_cast<size_t>(k)),
                                 slice(ctx, ab, static_cast<size_t>(k), static_cast<size_t>(k)));
      st.delta = normalize(ctx, ctx.mul(pre, inv_views), cfg.normalization, cfg.epsilon);
    }

    // Trust: theta_i = (sum_j sigma_ij (1-y_j)/delta_j + tau_ij y_j/delta_j) / nbFacts_i.
    {
      SharedVector inv_delta = inv(ctx, st.delta);
      SharedVector one_minus_y = ctx.sub(ctx.constant(1.0, st.y.size()), st.y);
      SharedVector ab = ctx.mul(concat(ctx, inv_delta, inv_delta),
                                concat(ctx, one_minus_y, st.y));
      SharedVector a_bc = col_broadcast(ctx, slice(ctx, ab, 0, static_cast<size_t>(k)), n, k);
      SharedVector b_bc =
          col_broadcast(ctx, slice(ctx, ab, static_cast<size_t>(k), static_cast<size_t>(k)), n, k);
      SharedVector w = ctx.mul(concat(ctx, ind.sigma, ind.tau), concat(ctx, a_bc, b_bc));
      SharedVector pre = ctx.add(row_sum(ctx, std::span(w.values).subspan(0, nk), n, k),
                                 row_sum(ctx, std::span(w.values).subspan(nk, nk), n, k));
      st.theta = normalize(ctx, ctx.mul(pre, inv_facts), cfg.normalization, cfg.epsilon);
    }
  }
  st.loop_rounds = ctx.channel().stats().rounds - rounds_before;
  return st;
}

// ---------------------------------------------------------------------------
// Cosine over shares. The answered-indicator matrix sigma + tau plays the
// role of v^2; the cubic/signed variant pays one sign extraction per source
// per iteration, the linear/square-trick variant is comparison-free.
// ---------------------------------------------------------------------------

namespace detail {

struct CosinePrecompute {
  SharedVector answered;  // sigma + tau, per entry
  SharedVector nb_facts;  // per source
};

/// Cosine similarity of every source's answers against y; shared by the
/// initial trust estimate (used as-is) and the per-iteration blend.
inline SharedVector cosine_similarity_mpc(MpcContext& ctx, const SharedAnswerMatrix& m,
                                          const CosinePrecompute& pre,
                                          const SharedVector& y) {
  const int n = m.n, k = m.k;
  SharedVector num =
      row_sum(ctx, ctx.mul(m.flat, col_broadcast(ctx, y, n, k)).values, n, k);
  SharedVector ysq = ctx.mul(y, y);
  SharedVector s2 =
      row_sum(ctx, ctx.mul(pre.answered, col_broadcast(ctx, ysq, n, k)).values, n, k);
  SharedVector d = ctx.mul(pre.nb_facts, s2);
  SharedVector rsq = sqrt_inv(ctx, d);
  return ctx.mul(num, rsq);
}

}  // namespace detail

inline SharedTruthState cosine_mpc(MpcContext& ctx, const SharedAnswerMatrix& m,
                                   const AlgoConfig& cfg) {
  using namespace detail;
  cfg.validate();
  const int n = m.n, k = m.k;
  const size_t nk = static_cast<size_t>(n) * k;

  IndicatorMatrices ind = indicator_matrices(ctx, m.flat);
  CosinePrecompute pre;
  pre.answered = ctx.add(ind.sigma, ind.tau);
  pre.nb_facts = row_sum(ctx, pre.answered.values, n, k);
  SharedVector nb_views = col_sum(ctx, pre.answered.values, n, k);

  SharedTruthState st;
  st.iters = cfg.iters;
  SharedVector inv_views = inv(ctx, nb_views);
  st.y = ctx.mul(col_sum(ctx, m.flat.values, n, k), inv_views);
  st.theta = cosine_similarity_mpc(ctx, m, pre, st.y);

  const u64 rounds_before = ctx.channel().stats().rounds;
  for (int t = 0; t < cfg.iters; t++) {
    // Truth update.
    {
      SharedVector w = st.theta;
      if (cfg.power == CosinePower::cubic) {
        SharedVector t2 = ctx.mul(st.theta, st.theta);
        w = ctx.mul(t2, st.theta);
      }
      SharedVector den_w = w;
      if (cfg.inversion == Inversion::signed_inverse) {
        SharedVector sg = sign(ctx, st.theta);  // sign(theta^p) = sign(theta) for odd p
        den_w = ctx.mul(sg, w);
      }
      SharedVector nd = ctx.mul(
          concat(ctx, m.flat, pre.answered),
          concat(ctx, row_broadcast(ctx, w, n, k), row_broadcast(ctx, den_w, n, k)));
      SharedVector numer = col_sum(ctx, std::span(nd.values).subspan(0, nk), n, k);
      SharedVector denom = col_sum(ctx, std::span(nd.values).subspan(nk, nk), n, k);
      if (cfg.inversion == Inversion::square_trick) {
        SharedVector d2 = ctx.mul(denom, denom);
        SharedVector inv_d2 = inv(ctx, d2);
        SharedVector nd2 = ctx.mul(numer, denom);
        st.y = ctx.mul(nd2, inv_d2);
      } else {
        st.y = ctx.mul(numer, inv(ctx, denom));
      }
    }
    // Trust update: theta <- (1-eta) theta + eta cos_sim.
    {
      SharedVector cs = cosine_similarity_mpc(ctx, m, pre, st.y);
      st.theta = ctx.add(ctx.scale_fixed(st.theta, 1.0 - cfg.eta),
                         ctx.scale_fixed(cs, cfg.eta));
    }
  }
  st.loop_rounds = ctx.channel().stats().rounds - rounds_before;
  st.delta = ctx.empty(0);
  return st;
}

inline SharedTruthState run_mpc(MpcContext& ctx, const SharedAnswerMatrix& m,
                                const AlgoConfig& cfg) {
  return cfg.algorithm == Algorithm::three_estimates ? three_estimates_mpc(ctx, m, cfg)
                                                     : cosine_mpc(ctx, m, cfg);
}

// ---------------------------------------------------------------------------
// Release: servers send their output shares to the client (modeled as the
// party-1 process); nothing is revealed before this step. Party 1 returns
// the reconstructed ring values, party 2 returns nothing.
// ---------------------------------------------------------------------------

struct ReconstructedState {
  std::vector<RingElement> y, theta, delta;

  TruthState decode(const Ring& ring) const {
    TruthState st;
    auto dec = [&](const std::vector<RingElement>& v) {
      std::vector<double> out(v.size());
      for (size_t i = 0; i < v.size(); i++) out[i] = ring.decode(v[i]);
      return out;
    };
    st.y = dec(y);
    st.theta = dec(theta);
    st.delta = dec(delta);
    return st;
  }
};

inline std::optional<ReconstructedState> release(MpcContext& ctx,
                                                 const SharedTruthState& st) {
  std::vector<RingElement> payload;
  payload.reserve(3 + st.y.size() + st.theta.size() + st.delta.size());
  payload.push_back({st.y.size()});
  payload.push_back({st.theta.size()});
  payload.push_back({st.delta.size()});
  for (auto& v : {st.y, st.theta, st.delta})
    payload.insert(payload.end(), v.values.begin(), v.values.end());

  if (ctx.party() == PartyId::p2) {
    ctx.channel().send_values(FrameKind::result, payload);
    return std::nullopt;
  }
  std::vector<RingElement> peer = ctx.channel().recv_values(FrameKind::result);
  if (peer.size() != payload.size() || peer[0].v != st.y.size() ||
      peer[1].v != st.theta.size() || peer[2].v != st.delta.size())
    throw protocol_error("release: share payload shape mismatch");

  ReconstructedState out;
  size_t off = 3;
  auto take = [&](const SharedVector& mine) {
    std::vector<RingElement> v(mine.size());
    for (size_t i = 0; i < mine.size(); i++)
      v[i] = ctx.ring().add(mine.values[i], peer[off + i]);
    off += mine.size();
    return v;
  };
  out.y = take(st.y);
  out.theta = take(st.theta);
  out.delta = take(st.delta);
  return out;
}

}  // namespace vmpc
