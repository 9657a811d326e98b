#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>

namespace tgode {

using Scalar = double;
using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Tanh, Relu, Identity };
enum class PsiMode { Concat, Sum, Replace };

std::string to_string(Activation a);
std::string to_string(PsiMode p);
std::optional<Activation> activation_from_string(const std::string& s);
std::optional<PsiMode> psi_from_string(const std::string& s);

/// log10 of a mean absolute error; -inf when mae is exactly zero.
Scalar log10_mae(Scalar mae);

/// Sentinel used in machine-readable outputs when mae is zero.
inline constexpr Scalar kLogMaeSentinel = -99.0;

}  // namespace tgode
