#pragma once

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "vmpc/config.hpp"

namespace vmpc {

/// n sources x k facts, entries in {-1, 0, 1}; 0 means abstain.
struct AnswerMatrix {
  int n = 0, k = 0;
  std::vector<std::int8_t> a;  // row-major

  static AnswerMatrix zeros(int n, int k) {
    AnswerMatrix m;
    m.n = n;
    m.k = k;
    m.a.assign(static_cast<size_t>(n) * static_cast<size_t>(k), 0);
    return m;
  }

  std::int8_t at(int i, int j) const { return a[static_cast<size_t>(i) * k + j]; }
  void set(int i, int j, std::int8_t v) { a[static_cast<size_t>(i) * k + j] = v; }

  /// Every entry in {-1,0,1}; every fact answered at least once; every
  /// source answered at least once.
  void validate() const {
    if (n <= 0 || k <= 0) throw std::invalid_argument("answer matrix: empty");
    for (std::int8_t v : a)
      if (v < -1 || v > 1) throw std::invalid_argument("answer matrix: entry outside {-1,0,1}");
    for (int j = 0; j < k; j++) {
      bool any = false;
      for (int i = 0; i < n; i++) any |= at(i, j) != 0;
      if (!any)
        throw std::invalid_argument("answer matrix: fact " + std::to_string(j) +
                                    " has no answers");
    }
    for (int i = 0; i < n; i++) {
      bool any = false;
      for (int j = 0; j < k; j++) any |= at(i, j) != 0;
      if (!any)
        throw std::invalid_argument("answer matrix: source " + std::to_string(i) +
                                    " has no answers");
    }
  }
};

/// Truth values y (per fact), trust factors theta (per source; Cosine trust,
/// 3-Estimates untrustworthiness), difficulty delta (per fact, 3-Estimates).
struct TruthState {
  std::vector<double> y, theta, delta;
};

inline std::vector<std::int8_t> majority_vote(const AnswerMatrix& m) {
  std::vector<std::int8_t> out(static_cast<size_t>(m.k));
  for (int j = 0; j < m.k; j++) {
    int s = 0;
    for (int i = 0; i < m.n; i++) s += m.at(i, j);
    out[static_cast<size_t>(j)] = s >= 0 ? 1 : -1;  // ties -> +1
  }
  return out;
}

// --- normalization ----------------------------------------------------------

inline void normalize_minmax(std::vector<double>& v, double eps) {
  auto [mn_it, mx_it] = std::minmax_element(v.begin(), v.end());
  const double mn = *mn_it, span = *mx_it - *mn_it;
  const double w = (1.0 - 2.0 * eps) / span;
  for (double& x : v) x = eps + (x - mn) * w;
}

inline void normalize_h(std::vector<double>& v) {
  for (double& x : v) x = 0.5 * x + 0.25;
}

inline void normalize(std::vector<double>& v, Normalization mode, double eps) {
  if (mode == Normalization::linear_h)
    normalize_h(v);
  else
    normalize_minmax(v, eps);
}

// --- 3-Estimates -------------------------------------------------------------

namespace detail {

inline std::vector<int> answer_counts_per_fact(const AnswerMatrix& m) {
  std::vector<int> nb(static_cast<size_t>(m.k), 0);
  for (int j = 0; j < m.k; j++)
    for (int i = 0; i < m.n; i++) nb[static_cast<size_t>(j)] += m.at(i, j) != 0;
  return nb;
}

inline std::vector<int> answer_counts_per_source(const AnswerMatrix& m) {
  std::vector<int> nb(static_cast<size_t>(m.n), 0);
  for (int i = 0; i < m.n; i++)
    for (int j = 0; j < m.k; j++) nb[static_cast<size_t>(i)] += m.at(i, j) != 0;
  return nb;
}

}  // namespace detail

inline TruthState three_estimates_init(const AnswerMatrix& m, const AlgoConfig& cfg) {
  TruthState st;
  st.y.assign(static_cast<size_t>(m.k), 0.0);
  st.theta.assign(static_cast<size_t>(m.n), cfg.theta0);
  st.delta.assign(static_cast<size_t>(m.k), cfg.delta0);
  return st;
}

/// Truth block: y_j = (sum_{v=1}(1 - theta_i delta_j) + sum_{v=-1} theta_i delta_j) / nbViews_j.
inline std::vector<double> te_truth_update(const AnswerMatrix& m, const TruthState& st) {
  std::vector<double> y(static_cast<size_t>(m.k));
  for (int j = 0; j < m.k; j++) {
    double wpos = 0, wneg = 0;
    int cnt_pos = 0, nb = 0;
    for (int i = 0; i < m.n; i++) {
      std::int8_t v = m.at(i, j);
      if (v == 0) continue;
      nb++;
      if (v == 1) {
        cnt_pos++;
        wpos += st.theta[static_cast<size_t>(i)];
      } else {
        wneg += st.theta[static_cast<size_t>(i)];
      }
    }
    assert(nb > 0);
    const double dj = st.delta[static_cast<size_t>(j)];
    y[static_cast<size_t>(j)] = (cnt_pos - dj * wpos + dj * wneg) / nb;
  }
  return y;
}

/// Difficulty block: delta_j = ((1-y_j) sum_{v=1} 1/theta_i + y_j sum_{v=-1} 1/theta_i) / nbViews_j.
inline std::vector<double> te_difficulty_update(const AnswerMatrix& m,
                                                const TruthState& st) {
  std::vector<double> d(static_cast<size_t>(m.k));
  for (int j = 0; j < m.k; j++) {
    double spos = 0, sneg = 0;
    int nb = 0;
    for (int i = 0; i < m.n; i++) {
      std::int8_t v = m.at(i, j);
      if (v == 0) continue;
      nb++;
      const double it = 1.0 / st.theta[static_cast<size_t>(i)];
      (v == 1 ? spos : sneg) += it;
    }
    const double yj = st.y[static_cast<size_t>(j)];
    d[static_cast<size_t>(j)] = ((1.0 - yj) * spos + yj * sneg) / nb;
  }
  return d;
}

/// Trust block: theta_i = (sum_{v=1}(1-y_j)/delta_j + sum_{v=-1} y_j/delta_j) / nbFacts_i.
inline std::vector<double> te_trust_update(const AnswerMatrix& m, const TruthState& st) {
  std::vector<double> t(static_cast<size_t>(m.n));
  for (int i = 0; i < m.n; i++) {
    double acc = 0;
    int nb = 0;
    for (int j = 0; j < m.k; j++) {
      std::int8_t v = m.at(i, j);
      if (v == 0) continue;
      nb++;
      const double yj = st.y[static_cast<size_t>(j)];
      const double id = 1.0 / st.delta[static_cast<size_t>(j)];
      acc += (v == 1 ? 1.0 - yj : yj) * id;
    }
    t[static_cast<size_t>(i)] = acc / nb;
  }
  return t;
}

/// One full iteration in order: truth, normalize; difficulty, normalize;
/// trust, normalize.
inline TruthState three_estimates_step(const AnswerMatrix& m, TruthState st,
                                       const AlgoConfig& cfg) {
  st.y = te_truth_update(m, st);
  normalize(st.y, cfg.normalization, cfg.epsilon);
  st.delta = te_difficulty_update(m, st);
  normalize(st.delta, cfg.normalization, cfg.epsilon);
  st.theta = te_trust_update(m, st);
  normalize(st.theta, cfg.normalization, cfg.epsilon);
  return st;
}

// --- Cosine ------------------------------------------------------------------

/// Truth block: y_j = sum theta_i^p v_ij / denom_j, where denom_j sums
/// |theta^p| over answering sources (signed_inverse) or theta^p itself
/// (square_trick; in exact arithmetic x/x^2 = 1/x so the plain paths agree
/// except for the denominator form).
inline std::vector<double> cosine_truth_update(const AnswerMatrix& m,
                                               const TruthState& st,
                                               const AlgoConfig& cfg) {
  std::vector<double> w(static_cast<size_t>(m.n)), aw(static_cast<size_t>(m.n));
  for (int i = 0; i < m.n; i++) {
    double th = st.theta[static_cast<size_t>(i)];
    double p = cfg.power == CosinePower::cubic ? th * th * th : th;
    w[static_cast<size_t>(i)] = p;
    aw[static_cast<size_t>(i)] =
        cfg.inversion == Inversion::signed_inverse ? std::fabs(p) : p;
  }
  std::vector<double> y(static_cast<size_t>(m.k));
  for (int j = 0; j < m.k; j++) {
    double num = 0, den = 0;
    for (int i = 0; i < m.n; i++) {
      std::int8_t v = m.at(i, j);
      if (v == 0) continue;
      num += v * w[static_cast<size_t>(i)];
      den += aw[static_cast<size_t>(i)];
    }
    assert(den != 0.0);
    y[static_cast<size_t>(j)] = cfg.inversion == Inversion::square_trick
                                    ? num * den / (den * den)
                                    : num / den;
  }
  return y;
}

/// Cosine similarity between source i's answers and the current truth values.
inline std::vector<double> cosine_similarity(const AnswerMatrix& m, const TruthState& st) {
  std::vector<double> out(static_cast<size_t>(m.n));
  for (int i = 0; i < m.n; i++) {
    double num = 0, s2 = 0;
    int nb = 0;
    for (int j = 0; j < m.k; j++) {
      std::int8_t v = m.at(i, j);
      if (v == 0) continue;
      nb++;
      const double yj = st.y[static_cast<size_t>(j)];
      num += v * yj;
      s2 += yj * yj;
    }
    const double d = nb * s2;
    assert(d > 0.0);
    out[static_cast<size_t>(i)] = num / std::sqrt(d);
  }
  return out;
}

/// Trust block: theta_i <- (1-eta) theta_i + eta * cos_sim_i.
inline std::vector<double> cosine_trust_update(const AnswerMatrix& m,
                                               const TruthState& st,
                                               const AlgoConfig& cfg) {
  std::vector<double> cs = cosine_similarity(m, st);
  std::vector<double> t(static_cast<size_t>(m.n));
  for (int i = 0; i < m.n; i++)
    t[static_cast<size_t>(i)] = (1.0 - cfg.eta) * st.theta[static_cast<size_t>(i)] +
                                cfg.eta * cs[static_cast<size_t>(i)];
  return t;
}

/// y0 = per-fact average over answering sources; theta0 = plain cosine
/// similarity against y0.
inline TruthState cosine_init(const AnswerMatrix& m, const AlgoConfig&) {
  TruthState st;
  st.y.assign(static_cast<size_t>(m.k), 0.0);
  std::vector<int> nb = detail::answer_counts_per_fact(m);
  for (int j = 0; j < m.k; j++) {
    int s = 0;
    for (int i = 0; i < m.n; i++) s += m.at(i, j);
    st.y[static_cast<size_t>(j)] = static_cast<double>(s) / nb[static_cast<size_t>(j)];
  }
  st.theta = cosine_similarity(m, st);
  return st;
}

inline TruthState cosine_step(const AnswerMatrix& m, TruthState st, const AlgoConfig& cfg) {
  st.y = cosine_truth_update(m, st, cfg);
  st.theta = cosine_trust_update(m, st, cfg);
  return st;
}

// --- driver -------------------------------------------------------------------

inline TruthState run_plain(const AnswerMatrix& m, const AlgoConfig& cfg) {
  cfg.validate();
  m.validate();
  if (cfg.algorithm == Algorithm::three_estimates) {
    TruthState st = three_estimates_init(m, cfg);
    for (int t = 0; t < cfg.iters; t++) st = three_estimates_step(m, st, cfg);
    return st;
  }
  TruthState st = cosine_init(m, cfg);
  for (int t = 0; t < cfg.iters; t++) st = cosine_step(m, st, cfg);
  return st;
}

/// 3-Estimates labels at y >= 0.5, Cosine at y >= 0 (ties -> +1).
inline std::vector<std::int8_t> labels_of(const TruthState& st, const AlgoConfig& cfg) {
  const double thr = cfg.algorithm == Algorithm::three_estimates ? 0.5 : 0.0;
  std::vector<std::int8_t> out(st.y.size());
  for (size_t j = 0; j < st.y.size(); j++) out[j] = st.y[j] >= thr ? 1 : -1;
  return out;
}

inline int count_label_errors(const std::vector<std::int8_t>& labels,
                              const std::vector<std::int8_t>& truth) {
  if (labels.size() != truth.size())
    throw std::invalid_argument("label/truth length mismatch");
  int errs = 0;
  for (size_t j = 0; j < labels.size(); j++) errs += labels[j] != truth[j];
  return errs;
}

}  // namespace vmpc
