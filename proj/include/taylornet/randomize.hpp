#pragma once

#include <nlohmann/json.hpp>
#include <vector>

#include "taylornet/common.hpp"

namespace taylornet {

struct SignDiagonal {
  Vector s;  // entries in {-1, +1}
  Eigen::Index size() const { return s.size(); }
};

SignDiagonal sample_signs(int m, Rng& rng);
WeightDelta apply_signs(const WeightDelta& w, const SignDiagonal& sigma);

struct Atom {
  double value = 0.0;
  double prob = 0.0;
};

// Discrete (z+, z-) with E z+^j = E z-^j for j < k and E z+^k - E z-^k = 1.
struct MomentPair {
  int k = 2;
  std::vector<Atom> plus;
  std::vector<Atom> minus;
};

MomentPair moment_pair(int k);

struct MomentReport {
  double max_violation = 0.0;
  bool ok = false;
};
MomentReport verify_moments(const MomentPair& pair);

struct PairScales {
  Vector zplus;
  Vector zminus;
};
PairScales sample_pair_scales(const MomentPair& pair, int half_m, Rng& rng);

nlohmann::json moment_pair_to_json(const MomentPair& pair);
MomentPair moment_pair_from_json(const nlohmann::json& j);

}  // namespace taylornet
