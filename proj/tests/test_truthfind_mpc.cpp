#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "harness.hpp"
#include "vmpc/dataset.hpp"
#include "vmpc/session.hpp"

using namespace vmpc;
using namespace vmpc::test;

namespace {
const Ring ring;

SessionConfig session_for(const AlgoConfig& algo, int n, int k, u64 seed,
                          TruncMode mode = TruncMode::local) {
  SessionConfig cfg;
  cfg.algo = algo;
  cfg.n = n;
  cfg.k = k;
  cfg.dealer_seed = seed * 3 + 1;
  cfg.share_seed = seed * 3 + 2;
  cfg.session_id = seed;
  cfg.trunc_mode = mode;
  return cfg;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double mx = 0;
  for (size_t i = 0; i < a.size(); i++) mx = std::max(mx, std::fabs(a[i] - b[i]));
  return mx;
}
}  // namespace

TEST_CASE("tiny unanimous instance tracks the plain oracle after one iteration") {
  AnswerMatrix m = AnswerMatrix::zeros(2, 2);
  m.set(0, 0, 1);
  m.set(1, 0, 1);
  m.set(0, 1, 1);
  m.set(1, 1, -1);
  AlgoConfig cfg = three_estimates_h_config();
  cfg.iters = 1;

  TruthState plain = run_plain(m, cfg);
  LoopbackResult res = run_mpc_loopback(m, session_for(cfg, 2, 2, 7, TruncMode::dealer));
  // plain truth block for the unanimous fact gives 0.96 pre-normalization
  CHECK(plain.y[0] == Catch::Approx(0.5 * 0.96 + 0.25).margin(1e-12));
  CHECK(max_abs_diff(res.report.state.y, plain.y) <= 1e-3);
  CHECK(max_abs_diff(res.report.state.theta, plain.theta) <= 1e-3);
  CHECK(max_abs_diff(res.report.state.delta, plain.delta) <= 1e-3);
}

TEST_CASE("all variants track their plain twins on a seeded instance") {
  Dataset ds = synthesize(make_synth_spec(2024, 12, 16, 0.6, 0.95, 0.2));
  for (AlgoConfig cfg : {three_estimates_base_config(), three_estimates_h_config(),
                         cosine_base_config(), cosine_fast_config()}) {
    cfg.iters = 4;
    TruthState plain = run_plain(ds.matrix, cfg);
    LoopbackResult res =
        run_mpc_loopback(ds.matrix, session_for(cfg, 12, 16, 31, TruncMode::dealer));

    CHECK(max_abs_diff(res.report.state.y, plain.y) <= 1e-3);
    CHECK(max_abs_diff(res.report.state.theta, plain.theta) <= 1e-3);
    if (cfg.algorithm == Algorithm::three_estimates)
      CHECK(max_abs_diff(res.report.state.delta, plain.delta) <= 1e-3);
    CHECK(res.report.labels == labels_of(plain, cfg));
  }
}

TEST_CASE("variant structure: comparison usage and budget tracing") {
  Dataset ds = synthesize(make_synth_spec(91, 5, 6, 0.65, 0.9, 0.2));

  struct Case {
    AlgoConfig cfg;
    bool uses_ltz;
  };
  for (const Case& c : {Case{three_estimates_h_config(), false},
                        Case{three_estimates_base_config(), true},
                        Case{cosine_base_config(), true},
                        Case{cosine_fast_config(), false}}) {
    AlgoConfig cfg = c.cfg;
    cfg.iters = 2;
    LoopbackResult res = run_mpc_loopback(ds.matrix, session_for(cfg, 5, 6, 47));
    if (c.uses_ltz) {
      CHECK(res.report.proto.ltz_elements > 0);
    } else {
      CHECK(res.report.proto.ltz_elements == 0);
      CHECK(res.report.proto.sign_elements == 0);
    }
    // estimated budget equals the traced consumption, every material type
    CHECK(res.consumed == res.budget);
  }
}

TEST_CASE("budget trace matches for the minimal h case and the dealer mode") {
  Dataset tiny = synthesize(make_synth_spec(5, 2, 1, 0.9, 0.95, 0.0));
  {
    AlgoConfig cfg = three_estimates_h_config();
    cfg.iters = 1;
    LoopbackResult res = run_mpc_loopback(tiny.matrix, session_for(cfg, 2, 1, 3));
    CHECK(res.consumed == res.budget);
    CHECK(res.consumed.triples > 0);
  }
  {
    SessionConfig cfg = session_for(three_estimates_h_config(), 2, 1, 4);
    cfg.algo.iters = 1;
    cfg.trunc_mode = TruncMode::dealer;
    LoopbackResult res = run_mpc_loopback(tiny.matrix, cfg);
    CHECK(res.consumed == res.budget);
    CHECK(res.consumed.pairs_f > 0);  // every rescale consumes a pair now
  }
  {
    Dataset ds = synthesize(make_synth_spec(6, 4, 5, 0.7, 0.9, 0.2));
    for (AlgoConfig algo : {cosine_base_config(), cosine_fast_config()}) {
      algo.iters = 2;
      LoopbackResult res = run_mpc_loopback(ds.matrix, session_for(algo, 4, 5, 5));
      CHECK(res.consumed == res.budget);
    }
  }
}

TEST_CASE("selector matrices are consumed once, before the loop") {
  Dataset ds = synthesize(make_synth_spec(17, 3, 4, 0.7, 0.9, 0.2));
  AlgoConfig cfg = three_estimates_h_config();
  cfg.iters = 1;
  LoopbackResult one = run_mpc_loopback(ds.matrix, session_for(cfg, 3, 4, 9));
  cfg.iters = 3;
  LoopbackResult three = run_mpc_loopback(ds.matrix, session_for(cfg, 3, 4, 9));
  // pair consumption comes only from the one-time selector precompute
  CHECK(one.consumed.pairs_f1 == 2 * 3 * 4);
  CHECK(three.consumed.pairs_f1 == one.consumed.pairs_f1);
}

TEST_CASE("h-variant loop rounds are independent of the instance shape") {
  AlgoConfig cfg = three_estimates_h_config();
  cfg.iters = 2;
  Dataset small = synthesize(make_synth_spec(21, 6, 8, 0.6, 0.9, 0.2));
  Dataset large = synthesize(make_synth_spec(22, 14, 24, 0.6, 0.9, 0.2));
  LoopbackResult rs = run_mpc_loopback(small.matrix, session_for(cfg, 6, 8, 11));
  LoopbackResult rl = run_mpc_loopback(large.matrix, session_for(cfg, 14, 24, 12));
  CHECK(rs.report.rounds_per_iteration == rl.report.rounds_per_iteration);
}

TEST_CASE("release reconstructs exactly what the parties hold") {
  Dataset ds = synthesize(make_synth_spec(33, 3, 3, 0.8, 0.95, 0.1));
  AlgoConfig cfg = three_estimates_h_config();
  cfg.iters = 1;

  DealerBudget budget = estimate_budget(cfg, 3, 3, 1, ring.params(), {});
  SeededPrg share_prg(77);
  auto [in1, in2] = share_answer_matrix(ring, ds.matrix, share_prg);

  auto [r1, r2] = run_two(ring, budget, 78, [&](MpcContext& ctx) {
    const SharedAnswerMatrix m{ctx.party(), 3, 3,
                               ctx.party() == PartyId::p1 ? in1.flat : in2.flat};
    SharedTruthState st = run_mpc(ctx, m, cfg);
    auto released = release(ctx, st);
    return std::pair{st, released};
  });

  REQUIRE(r1.value.second.has_value());
  CHECK(!r2.value.second.has_value());
  // debug reconstruction from both parties' shares must agree with release
  const ReconstructedState& rel = *r1.value.second;
  std::vector<RingElement> dy =
      reconstruct(ring, r1.value.first.y, r2.value.first.y);
  CHECK(rel.y == dy);
  CHECK(rel.theta == reconstruct(ring, r1.value.first.theta, r2.value.first.theta));
  CHECK(rel.delta == reconstruct(ring, r1.value.first.delta, r2.value.first.delta));
  // both parties account the release round identically
  CHECK(r1.channel.rounds == r2.channel.rounds);
}

TEST_CASE("release rejects tampered share payloads") {
  auto sh = share_reals(ring, {1.0, 2.0}, 50);
  CHECK_THROWS_AS(
      run_two(ring, ample(0), 51,
              [&](MpcContext& ctx) -> int {
                SharedTruthState st;
                st.y = pick(ctx, sh);
                st.theta = ctx.empty(0);
                st.delta = ctx.empty(0);
                if (ctx.party() == PartyId::p2) {
                  // tampered: drop one element from the advertised vector
                  std::vector<RingElement> bad{{st.y.size()}, {0}, {0},
                                               st.y.values[0]};
                  ctx.channel().send_values(FrameKind::result, bad);
                  return 0;
                }
                release(ctx, st);
                return 1;
              }),
      protocol_error);
}
