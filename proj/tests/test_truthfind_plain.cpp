#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>

#include "oracles.hpp"
#include "vmpc/dataset.hpp"
#include "vmpc/truthfind.hpp"

using namespace vmpc;
using namespace vmpc::test;

namespace {

AnswerMatrix from_rows(int n, int k, std::initializer_list<int> vals) {
  AnswerMatrix m = AnswerMatrix::zeros(n, k);
  auto it = vals.begin();
  for (int i = 0; i < n; i++)
    for (int j = 0; j < k; j++) m.set(i, j, static_cast<std::int8_t>(*it++));
  return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double mx = 0;
  for (size_t i = 0; i < a.size(); i++) mx = std::max(mx, std::fabs(a[i] - b[i]));
  return mx;
}

}  // namespace

TEST_CASE("majority vote with tie convention") {
  AnswerMatrix m = from_rows(3, 3, {1, 1, -1, 1, -1, -1, -1, 0, 1});
  std::vector<std::int8_t> got = majority_vote(m);
  CHECK(got[0] == 1);   // (1,1,-1)
  CHECK(got[1] == 1);   // (1,-1,0) tie -> +1
  CHECK(got[2] == -1);  // (-1,-1,1)
}

TEST_CASE("truth update block matches the hand-derived value") {
  // two sources, one fact, both answer +1, theta = 0.4, delta = 0.1:
  // pos = 2 (1 - 0.04) = 1.92, nb = 2 -> y = 0.96 before normalization
  AnswerMatrix m = from_rows(2, 1, {1, 1});
  AlgoConfig cfg = three_estimates_h_config();
  TruthState st = three_estimates_init(m, cfg);
  std::vector<double> y = te_truth_update(m, st);
  CHECK(y[0] == Catch::Approx(0.96).margin(1e-12));
}

TEST_CASE("unanimous answers label positively under every variant") {
  AnswerMatrix m = from_rows(3, 4, {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1});
  for (AlgoConfig cfg : {three_estimates_h_config(), cosine_base_config(),
                         cosine_fast_config()}) {
    cfg.iters = 4;
    TruthState st = run_plain(m, cfg);
    std::vector<std::int8_t> labels = labels_of(st, cfg);
    for (std::int8_t l : labels) CHECK(l == 1);
  }
}

TEST_CASE("one full iteration matches the independent recurrence oracle") {
  Dataset ds = synthesize(make_synth_spec(1234, 5, 8, 0.55, 0.95, 0.25));
  for (AlgoConfig cfg :
       {three_estimates_base_config(), three_estimates_h_config(),
        cosine_base_config(), cosine_fast_config()}) {
    for (int iters : {1, 3}) {
      cfg.iters = iters;
      TruthState lib = run_plain(ds.matrix, cfg);
      TruthState ref = cfg.algorithm == Algorithm::three_estimates
                           ? oracle_three_estimates(ds.matrix, cfg)
                           : oracle_cosine(ds.matrix, cfg);
      CHECK(max_abs_diff(lib.y, ref.y) <= 1e-10);
      CHECK(max_abs_diff(lib.theta, ref.theta) <= 1e-10);
      if (cfg.algorithm == Algorithm::three_estimates)
        CHECK(max_abs_diff(lib.delta, ref.delta) <= 1e-10);
    }
  }
}

TEST_CASE("single-source cosine: the trust weight cancels") {
  AnswerMatrix m = from_rows(1, 2, {1, -1});
  TruthState st;
  st.y = {0.0, 0.0};
  st.theta = {0.8};
  for (AlgoConfig cfg : {cosine_base_config(), cosine_fast_config()}) {
    std::vector<double> y = cosine_truth_update(m, st, cfg);
    CHECK(y[0] == Catch::Approx(1.0).margin(1e-12));
    CHECK(y[1] == Catch::Approx(-1.0).margin(1e-12));
  }
}

TEST_CASE("unanimous equal-trust cosine reproduces the answers exactly") {
  AnswerMatrix m = from_rows(2, 3, {1, -1, 1, 1, -1, 1});
  TruthState st;
  st.y = {0, 0, 0};
  st.theta = {0.6, 0.6};
  std::vector<double> y = cosine_truth_update(m, st, cosine_base_config());
  CHECK(y[0] == Catch::Approx(1.0).margin(1e-12));
  CHECK(y[1] == Catch::Approx(-1.0).margin(1e-12));
  CHECK(y[2] == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("cubic and linear cosine agree on signs outside the tie margin") {
  for (u64 seed : {77u, 78u, 79u}) {
    Dataset ds = synthesize(make_synth_spec(seed, 5, 8, 0.6, 0.95, 0.25));
    AlgoConfig base = cosine_base_config(), fast = cosine_fast_config();
    base.iters = fast.iters = 3;
    TruthState yb = run_plain(ds.matrix, base);
    TruthState yf = run_plain(ds.matrix, fast);
    for (size_t j = 0; j < yb.y.size(); j++) {
      if (std::fabs(yb.y[j]) <= 1e-3 || std::fabs(yf.y[j]) <= 1e-3) continue;
      CHECK((yb.y[j] > 0) == (yf.y[j] > 0));
    }
  }
}

TEST_CASE("minmax normalization pins the state into [eps, 1-eps]") {
  Dataset ds = synthesize(make_synth_spec(555, 8, 12, 0.6, 0.9, 0.2));
  AlgoConfig cfg = three_estimates_base_config();
  cfg.iters = 4;
  TruthState st = run_plain(ds.matrix, cfg);
  auto in_range = [&](const std::vector<double>& v) {
    for (double x : v) {
      CHECK(x >= cfg.epsilon - 1e-12);
      CHECK(x <= 1.0 - cfg.epsilon + 1e-12);
    }
  };
  in_range(st.y);
  in_range(st.theta);
  in_range(st.delta);
}

TEST_CASE("h map sends [0,1] inputs into [0.25, 0.75]") {
  std::vector<double> v{0.0, 0.3, 1.0};
  normalize_h(v);
  CHECK(v[0] == 0.25);
  CHECK(v[1] == Catch::Approx(0.4));
  CHECK(v[2] == 0.75);
}

TEST_CASE("permutation equivariance") {
  Dataset ds = synthesize(make_synth_spec(99, 6, 7, 0.6, 0.9, 0.2));
  AlgoConfig cfg = three_estimates_base_config();
  cfg.iters = 3;
  TruthState st = run_plain(ds.matrix, cfg);

  // permute sources: theta permutes, y and delta unchanged
  std::vector<int> sperm(static_cast<size_t>(ds.matrix.n));
  std::iota(sperm.begin(), sperm.end(), 0);
  std::rotate(sperm.begin(), sperm.begin() + 2, sperm.end());
  AnswerMatrix ms = AnswerMatrix::zeros(ds.matrix.n, ds.matrix.k);
  for (int i = 0; i < ds.matrix.n; i++)
    for (int j = 0; j < ds.matrix.k; j++)
      ms.set(i, j, ds.matrix.at(sperm[static_cast<size_t>(i)], j));
  TruthState sts = run_plain(ms, cfg);
  CHECK(max_abs_diff(sts.y, st.y) <= 1e-12);
  CHECK(max_abs_diff(sts.delta, st.delta) <= 1e-12);
  for (int i = 0; i < ds.matrix.n; i++)
    CHECK(sts.theta[static_cast<size_t>(i)] ==
          Catch::Approx(st.theta[static_cast<size_t>(sperm[static_cast<size_t>(i)])]));

  // permute facts: y and delta permute, theta unchanged
  std::vector<int> fperm(static_cast<size_t>(ds.matrix.k));
  std::iota(fperm.begin(), fperm.end(), 0);
  std::rotate(fperm.begin(), fperm.begin() + 3, fperm.end());
  AnswerMatrix mf = AnswerMatrix::zeros(ds.matrix.n, ds.matrix.k);
  for (int i = 0; i < ds.matrix.n; i++)
    for (int j = 0; j < ds.matrix.k; j++)
      mf.set(i, j, ds.matrix.at(i, fperm[static_cast<size_t>(j)]));
  TruthState stf = run_plain(mf, cfg);
  CHECK(max_abs_diff(stf.theta, st.theta) <= 1e-12);
  for (int j = 0; j < ds.matrix.k; j++)
    CHECK(stf.y[static_cast<size_t>(j)] ==
          Catch::Approx(st.y[static_cast<size_t>(fperm[static_cast<size_t>(j)])]));
}

TEST_CASE("iteration count must be positive") {
  AlgoConfig cfg;
  cfg.iters = 0;
  CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
}

TEST_CASE("matrix validation rejects silent columns and rows") {
  AnswerMatrix empty_fact = from_rows(2, 2, {1, 0, -1, 0});
  CHECK_THROWS_AS(empty_fact.validate(), std::invalid_argument);
  AnswerMatrix empty_source = from_rows(2, 2, {1, 1, 0, 0});
  CHECK_THROWS_AS(empty_source.validate(), std::invalid_argument);
  AnswerMatrix bad_entry = from_rows(1, 1, {1});
  bad_entry.a[0] = 2;
  CHECK_THROWS_AS(bad_entry.validate(), std::invalid_argument);
}

TEST_CASE("label thresholds follow the output ranges") {
  TruthState st;
  st.y = {0.49, 0.5, 0.51};
  AlgoConfig te = three_estimates_base_config();
  std::vector<std::int8_t> l = labels_of(st, te);
  CHECK(l[0] == -1);
  CHECK(l[1] == 1);
  CHECK(l[2] == 1);

  st.y = {-0.01, 0.0, 0.01};
  std::vector<std::int8_t> lc = labels_of(st, cosine_base_config());
  CHECK(lc[0] == -1);
  CHECK(lc[1] == 1);
  CHECK(lc[2] == 1);
}
