#pragma once

#include "tgode/types.hpp"

#include <cstdint>
#include <vector>

namespace tgode {

struct AdamConfig {
  Scalar lr = 1e-3;
  Scalar weight_decay = 0.0;
  Scalar beta1 = 0.9;
  Scalar beta2 = 0.999;
  Scalar eps = 1e-8;
};

/// First and second moment estimates, one matrix pair per parameter.
struct AdamState {
  std::vector<Matrix> m;
  std::vector<Matrix> v;
  std::int64_t t = 0;

  static AdamState zeros_like(const std::vector<Matrix*>& params);
};

/// One Adam update with bias correction. Weight decay enters as an L2 term
/// added to the gradient before the moment updates.
void adam_step(const std::vector<Matrix*>& params,
               const std::vector<Matrix>& grads, AdamState& state,
               const AdamConfig& config);

}  // namespace tgode
