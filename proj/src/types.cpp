#include "tgode/types.hpp"

#include <cmath>
#include <limits>

namespace tgode {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::Tanh: return "tanh";
    case Activation::Relu: return "relu";
    case Activation::Identity: return "identity";
  }
  return "?";
}

std::string to_string(PsiMode p) {
  switch (p) {
    case PsiMode::Concat: return "concat";
    case PsiMode::Sum: return "sum";
    case PsiMode::Replace: return "replace";
  }
  return "?";
}

std::optional<Activation> activation_from_string(const std::string& s) {
  if (s == "tanh") return Activation::Tanh;
  if (s == "relu") return Activation::Relu;
  if (s == "identity") return Activation::Identity;
  return std::nullopt;
}

std::optional<PsiMode> psi_from_string(const std::string& s) {
  if (s == "concat") return PsiMode::Concat;
  if (s == "sum") return PsiMode::Sum;
  if (s == "replace") return PsiMode::Replace;
  return std::nullopt;
}

Scalar log10_mae(Scalar mae) {
  if (mae == 0.0) return -std::numeric_limits<Scalar>::infinity();
  return std::log10(mae);
}

}  // namespace tgode
