#pragma once

#include <stdexcept>
#include <string>

#include "vmpc/common.hpp"

namespace vmpc {

enum class Algorithm { three_estimates, cosine };

/// How state vectors are squeezed back into range after each update block.
enum class Normalization { minmax, linear_h };

/// Cosine trust-weight exponent: theta^3 (cubic) or theta (linear).
enum class CosinePower { cubic, linear };

/// Division of a possibly negative x: sign(x) * 1/|x|, or the
/// comparison-free x * 1/x^2 form.
enum class Inversion { signed_inverse, square_trick };

/// How fixed-point products are rescaled: per-party local shift, or the
/// dealer-assisted masked-pair opening (wrap-free, exact on multiples).
enum class TruncMode { local, dealer };

struct NewtonConfig {
  int inv_iters = 24;
  int sqrt_iters = 30;
  double b_inv = 4096.0;     // public bound: reciprocal arguments in (0, b_inv)
  double b_sqrt = 65536.0;   // public bound: square-root arguments in (0, b_sqrt)

  void validate() const {
    if (inv_iters < 1 || sqrt_iters < 1)
      throw std::invalid_argument("newton: iteration counts must be >= 1");
    if (!(b_inv > 0) || !(b_sqrt > 0))
      throw std::invalid_argument("newton: domain bounds must be positive");
  }

  bool operator==(const NewtonConfig&) const = default;
};

struct AlgoConfig {
  Algorithm algorithm = Algorithm::three_estimates;
  Normalization normalization = Normalization::minmax;
  CosinePower power = CosinePower::cubic;
  Inversion inversion = Inversion::signed_inverse;
  int iters = 20;
  double eta = 0.2;        // cosine trust smoothing
  double epsilon = 0.05;   // minmax squeeze margin
  double theta0 = 0.4;     // 3-estimates initial untrustworthiness
  double delta0 = 0.1;     // 3-estimates initial difficulty

  void validate() const {
    if (iters < 1) throw std::invalid_argument("config: iters must be >= 1");
    if (!(eta > 0.0 && eta < 1.0))
      throw std::invalid_argument("config: eta must be in (0,1)");
    if (!(epsilon > 0.0 && epsilon < 0.5))
      throw std::invalid_argument("config: epsilon must be in (0,0.5)");
  }
};

inline AlgoConfig three_estimates_base_config() { return {}; }

inline AlgoConfig three_estimates_h_config() {
  AlgoConfig c;
  c.normalization = Normalization::linear_h;
  return c;
}

inline AlgoConfig cosine_base_config() {
  AlgoConfig c;
  c.algorithm = Algorithm::cosine;
  return c;
}

inline AlgoConfig cosine_fast_config() {
  AlgoConfig c;
  c.algorithm = Algorithm::cosine;
  c.power = CosinePower::linear;
  c.inversion = Inversion::square_trick;
  return c;
}

inline std::string to_string(Algorithm a) {
  return a == Algorithm::cosine ? "cosine" : "3est";
}

inline std::string variant_name(const AlgoConfig& c) {
  if (c.algorithm == Algorithm::three_estimates)
    return c.normalization == Normalization::linear_h ? "h" : "base";
  return c.inversion == Inversion::square_trick ? "fast" : "base";
}

}  // namespace vmpc
