#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "harness.hpp"

using namespace vmpc;
using namespace vmpc::test;

namespace {
const Ring ring;
const u64 kQ = static_cast<u64>(ring.q());

DealerBudget ltz_budget(u64 elems, u64 extra_triples = 0, u64 pairs_f = 0) {
  return DealerBudget{elems * kQ + extra_triples, elems * kQ, pairs_f, 0};
}
}  // namespace

TEST_CASE("ltz: named cases and the exact oracle") {
  {
    auto sh = share_reals(ring, {-0.5, 0.5, 0.0}, 1);
    auto [r1, r2] = run_two(ring, ltz_budget(3), 2, [&](MpcContext& ctx) {
      return ltz(ctx, pick(ctx, sh));
    });
    std::vector<RingElement> rec = reconstruct(ring, r1.value, r2.value);
    CHECK(rec[0] == ring.one());
    CHECK(rec[1].v == 0);
    CHECK(rec[2].v == 0);  // zero is non-negative
    CHECK(r1.proto.ltz_elements == 3);
    // one opening plus the q-step chain
    CHECK(r1.channel.rounds == kQ + 1);
  }

  SeededPrg gen(3);
  const size_t len = 1000;
  std::vector<double> xs(len);
  for (auto& x : xs) x = (gen.next_unit() * 2 - 1) * std::ldexp(1.0, 20);
  auto sh = share_reals(ring, xs, 4);
  auto [r1, r2] = run_two(ring, ltz_budget(len), 5, [&](MpcContext& ctx) {
    return ltz(ctx, pick(ctx, sh));
  });
  std::vector<RingElement> rec = reconstruct(ring, r1.value, r2.value);
  for (size_t i = 0; i < len; i++) {
    bool neg = ring.to_signed(ring.encode(xs[i])) < 0;
    REQUIRE(rec[i] == (neg ? ring.one() : RingElement{0}));
  }
}

TEST_CASE("sign: named cases and the oracle") {
  auto sh = share_reals(ring, {-3.0, 2.0, 0.0}, 10);
  auto [r1, r2] = run_two(ring, ltz_budget(3), 11, [&](MpcContext& ctx) {
    return sign(ctx, pick(ctx, sh));
  });
  std::vector<RingElement> rec = reconstruct(ring, r1.value, r2.value);
  CHECK(rec[0] == ring.encode(-1.0));
  CHECK(rec[1] == ring.encode(1.0));
  CHECK(rec[2] == ring.encode(1.0));  // sign(0) = +1 convention
  CHECK(r1.proto.sign_elements == 3);

  SeededPrg gen(12);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = (gen.next_unit() * 2 - 1) * 100.0;
  auto sh2 = share_reals(ring, xs, 13);
  auto [s1, s2] = run_two(ring, ltz_budget(1000), 14, [&](MpcContext& ctx) {
    return sign(ctx, pick(ctx, sh2));
  });
  std::vector<RingElement> rec2 = reconstruct(ring, s1.value, s2.value);
  for (size_t i = 0; i < xs.size(); i++) {
    double want = ring.to_signed(ring.encode(xs[i])) < 0 ? -1.0 : 1.0;
    REQUIRE(rec2[i] == ring.encode(want));
  }
}

TEST_CASE("tournament max/min: named cases") {
  {
    auto sh = share_reals(ring, {0.25}, 20);
    auto [r1, r2] = run_two(ring, ample(0), 21, [&](MpcContext& ctx) {
      auto [mx, mn] = minmax_pair(ctx, pick(ctx, sh));
      return std::pair{mx, mn};
    });
    CHECK(ring.decode(reconstruct(ring, r1.value.first, r2.value.first)) == 0.25);
    CHECK(ring.decode(reconstruct(ring, r1.value.second, r2.value.second)) == 0.25);
  }
  {
    auto sh = share_reals(ring, {-1.0, 0.0, 1.0}, 22);
    auto [r1, r2] = run_two(ring, ltz_budget(2 * 2, 2 * 2), 23, [&](MpcContext& ctx) {
      auto [mx, mn] = minmax_pair(ctx, pick(ctx, sh));
      return std::pair{mx, mn};
    });
    double mx = ring.decode(reconstruct(ring, r1.value.first, r2.value.first));
    double mn = ring.decode(reconstruct(ring, r1.value.second, r2.value.second));
    CHECK(std::fabs(mx - 1.0) <= 2 * std::ldexp(1.0, -19));
    CHECK(std::fabs(mn - (-1.0)) <= 2 * std::ldexp(1.0, -19));
  }
}

TEST_CASE("tournament max/min tracks the cleartext oracle") {
  SeededPrg gen(30);
  for (int rep = 0; rep < 100; rep++) {
    const size_t len = 1 + gen.next_u64() % 64;
    std::vector<double> xs(len);
    for (auto& x : xs) x = (gen.next_unit() * 2 - 1) * 500.0;
    auto sh = share_reals(ring, xs, 31 + static_cast<u64>(rep));
    auto [r1, r2] = run_two(
        ring, ltz_budget(2 * (len - 1), 2 * (len - 1)), 32,
        [&](MpcContext& ctx) {
          auto [mx, mn] = minmax_pair(ctx, pick(ctx, sh));
          return std::pair{mx, mn};
        });
    double mx = ring.decode(reconstruct(ring, r1.value.first, r2.value.first));
    double mn = ring.decode(reconstruct(ring, r1.value.second, r2.value.second));
    const double depth = std::ceil(std::log2(static_cast<double>(std::max<size_t>(len, 2))));
    const double tol = std::ldexp(1.0, -19) * depth + std::ldexp(1.0, -20);
    REQUIRE(std::fabs(mx - *std::max_element(xs.begin(), xs.end())) <= tol);
    REQUIRE(std::fabs(mn - *std::min_element(xs.begin(), xs.end())) <= tol);
  }
}

TEST_CASE("minmax normalization: endpoints, shift invariance, oracle") {
  NewtonConfig nc;
  const double eps = 0.05;
  auto norm_budget = [&](size_t len) {
    DealerBudget b = ltz_budget(2 * (len - 1), 2 * (len - 1) + len, 1);
    b.triples += 2 * static_cast<u64>(nc.inv_iters);
    return b;
  };

  {
    auto sh = share_reals(ring, {0.0, 1.0}, 40);
    auto [r1, r2] = run_two(ring, norm_budget(2), 41, [&](MpcContext& ctx) {
      return minmax_normalize(ctx, pick(ctx, sh), eps);
    });
    std::vector<double> got = decode_pair(ring, r1.value, r2.value);
    CHECK(std::fabs(got[0] - 0.05) <= std::ldexp(1.0, -8));
    CHECK(std::fabs(got[1] - 0.95) <= std::ldexp(1.0, -8));
  }

  SeededPrg gen(42);
  for (int rep = 0; rep < 50; rep++) {
    const size_t len = 2 + gen.next_u64() % 24;
    std::vector<double> xs(len);
    for (auto& x : xs) x = (gen.next_unit() * 2 - 1) * 20.0;
    // keep the spread healthy per the caller contract
    xs[0] = -21.0;
    xs[1] = 21.0;
    const double shift = (gen.next_unit() * 2 - 1) * 100.0;
    std::vector<double> shifted(len);
    for (size_t i = 0; i < len; i++) shifted[i] = xs[i] + shift;

    auto sh = share_reals(ring, xs, 43 + static_cast<u64>(rep));
    auto sh2 = share_reals(ring, shifted, 44 + static_cast<u64>(rep));
    auto run_norm = [&](const auto& s) {
      auto [r1, r2] = run_two(ring, norm_budget(len), 45, [&](MpcContext& ctx) {
        return minmax_normalize(ctx, pick(ctx, s), eps);
      });
      return decode_pair(ring, r1.value, r2.value);
    };
    std::vector<double> a = run_norm(sh), b = run_norm(sh2);

    const double mn = *std::min_element(xs.begin(), xs.end());
    const double mx = *std::max_element(xs.begin(), xs.end());
    for (size_t i = 0; i < len; i++) {
      double oracle = eps + (1 - 2 * eps) * (xs[i] - mn) / (mx - mn);
      REQUIRE(std::fabs(a[i] - oracle) <= std::ldexp(1.0, -8));
      REQUIRE(std::fabs(a[i] - b[i]) <= std::ldexp(1.0, -8));  // shift invariance
    }
  }
}

TEST_CASE("h normalization is the literal affine map") {
  auto sh = share_reals(ring, {0.0, 0.5, 1.0, -0.5}, 50);
  auto [r1, r2] = run_two(ring, ample(0, 0, 4), 51, [&](MpcContext& ctx) {
    return normalize_h(ctx, pick(ctx, sh));
  });
  std::vector<double> got = decode_pair(ring, r1.value, r2.value);
  const double tol = std::ldexp(1.0, -19);
  CHECK(std::fabs(got[0] - 0.25) <= tol);
  CHECK(std::fabs(got[1] - 0.5) <= tol);
  CHECK(std::fabs(got[2] - 0.75) <= tol);
  CHECK(std::fabs(got[3] - 0.0) <= tol);
  CHECK(r1.channel.rounds == 0);  // public-affine, no communication
}

TEST_CASE("minmax_normalize enforces its length contract") {
  auto sh = share_reals(ring, {1.0}, 60);
  CHECK_THROWS_AS(run_two(ring, ample(8), 61,
                          [&](MpcContext& ctx) {
                            return minmax_normalize(ctx, pick(ctx, sh), 0.05);
                          }),
                  std::invalid_argument);
}
