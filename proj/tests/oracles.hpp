#pragma once

// Independent straight-from-the-recurrence reference implementations used as
// oracles. Deliberately naive per-entry loops, no shared code with the
// library implementations.

#include <cmath>
#include <vector>

#include "vmpc/config.hpp"
#include "vmpc/truthfind.hpp"

namespace vmpc::test {

inline void oracle_normalize(std::vector<double>& v, Normalization mode, double eps) {
  if (mode == Normalization::linear_h) {
    for (double& x : v) x = 0.5 * x + 0.25;
    return;
  }
  double mn = v[0], mx = v[0];
  for (double x : v) {
    if (x < mn) mn = x;
    if (x > mx) mx = x;
  }
  for (double& x : v) x = eps + (1.0 - 2.0 * eps) * (x - mn) / (mx - mn);
}

/// Per-entry 3-Estimates recurrence: selector weights sigma/tau per answer,
/// three update blocks, normalize after each.
inline TruthState oracle_three_estimates(const AnswerMatrix& m, const AlgoConfig& cfg) {
  const int n = m.n, k = m.k;
  std::vector<std::vector<int>> sigma(static_cast<size_t>(n),
                                      std::vector<int>(static_cast<size_t>(k), 0));
  std::vector<std::vector<int>> tau = sigma;
  for (int i = 0; i < n; i++)
    for (int j = 0; j < k; j++) {
      sigma[i][j] = m.at(i, j) == 1 ? 1 : 0;
      tau[i][j] = m.at(i, j) == -1 ? 1 : 0;
    }

  std::vector<double> theta(static_cast<size_t>(n), cfg.theta0);
  std::vector<double> delta(static_cast<size_t>(k), cfg.delta0);
  std::vector<double> y(static_cast<size_t>(k), 0.0);

  for (int t = 0; t < cfg.iters; t++) {
    for (int j = 0; j < k; j++) {
      double pos = 0, neg = 0, nb = 0;
      for (int i = 0; i < n; i++) {
        pos += sigma[i][j] * (1.0 - theta[i] * delta[j]);
        neg += tau[i][j] * (theta[i] * delta[j]);
        nb += sigma[i][j] + tau[i][j];
      }
      y[static_cast<size_t>(j)] = (pos + neg) / nb;
    }
    oracle_normalize(y, cfg.normalization, cfg.epsilon);
    for (int j = 0; j < k; j++) {
      double pos = 0, neg = 0, nb = 0;
      for (int i = 0; i < n; i++) {
        pos += sigma[i][j] * (1.0 - y[static_cast<size_t>(j)]) * (1.0 / theta[i]);
        neg += tau[i][j] * y[static_cast<size_t>(j)] * (1.0 / theta[i]);
        nb += sigma[i][j] + tau[i][j];
      }
      delta[static_cast<size_t>(j)] = (pos + neg) / nb;
    }
    oracle_normalize(delta, cfg.normalization, cfg.epsilon);
    for (int i = 0; i < n; i++) {
      double pos = 0, neg = 0, nb = 0;
      for (int j = 0; j < k; j++) {
        pos += sigma[i][j] * (1.0 - y[static_cast<size_t>(j)]) * (1.0 / delta[static_cast<size_t>(j)]);
        neg += tau[i][j] * y[static_cast<size_t>(j)] * (1.0 / delta[static_cast<size_t>(j)]);
        nb += sigma[i][j] + tau[i][j];
      }
      theta[static_cast<size_t>(i)] = (pos + neg) / nb;
    }
    oracle_normalize(theta, cfg.normalization, cfg.epsilon);
  }
  TruthState st;
  st.y = y;
  st.theta = theta;
  st.delta = delta;
  return st;
}

/// Per-entry Cosine recurrence.
inline TruthState oracle_cosine(const AnswerMatrix& m, const AlgoConfig& cfg) {
  const int n = m.n, k = m.k;
  std::vector<double> y(static_cast<size_t>(k), 0.0);
  std::vector<double> theta(static_cast<size_t>(n), 0.0);

  auto similarity = [&](int i) {
    double num = 0, s2 = 0, nb = 0;
    for (int j = 0; j < k; j++) {
      int v = m.at(i, j);
      if (v == 0) continue;
      num += v * y[static_cast<size_t>(j)];
      s2 += y[static_cast<size_t>(j)] * y[static_cast<size_t>(j)];
      nb += 1;
    }
    return num / std::sqrt(nb * s2);
  };

  for (int j = 0; j < k; j++) {
    double s = 0, nb = 0;
    for (int i = 0; i < n; i++) {
      s += m.at(i, j);
      nb += m.at(i, j) != 0;
    }
    y[static_cast<size_t>(j)] = s / nb;
  }
  for (int i = 0; i < n; i++) theta[static_cast<size_t>(i)] = similarity(i);

  for (int t = 0; t < cfg.iters; t++) {
    std::vector<double> ynew(static_cast<size_t>(k));
    for (int j = 0; j < k; j++) {
      double num = 0, den = 0;
      for (int i = 0; i < n; i++) {
        int v = m.at(i, j);
        if (v == 0) continue;
        double w = cfg.power == CosinePower::cubic
                       ? theta[static_cast<size_t>(i)] * theta[static_cast<size_t>(i)] *
                             theta[static_cast<size_t>(i)]
                       : theta[static_cast<size_t>(i)];
        num += v * w;
        den += cfg.inversion == Inversion::signed_inverse ? std::fabs(w) : w;
      }
      ynew[static_cast<size_t>(j)] =
          cfg.inversion == Inversion::square_trick ? num * den / (den * den) : num / den;
    }
    y = ynew;
    std::vector<double> tnew(static_cast<size_t>(n));
    for (int i = 0; i < n; i++)
      tnew[static_cast<size_t>(i)] =
          (1.0 - cfg.eta) * theta[static_cast<size_t>(i)] + cfg.eta * similarity(i);
    theta = tnew;
  }
  TruthState st;
  st.y = y;
  st.theta = theta;
  return st;
}

}  // namespace vmpc::test
