#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tgode/errors.hpp"
#include "tgode/optim.hpp"

#include <cmath>

using namespace tgode;

TEST_CASE("first step moves by roughly the learning rate") {
  Matrix p = Matrix::Zero(1, 1);
  std::vector<Matrix*> params{&p};
  AdamState state = AdamState::zeros_like(params);
  AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.0;
  adam_step(params, {Matrix::Constant(1, 1, 1.0)}, state, cfg);
  CHECK(std::abs(p(0, 0)) >= 0.0099);
  CHECK(std::abs(p(0, 0)) <= 0.01);
  CHECK(p(0, 0) < 0.0);  // moves against the gradient
}

TEST_CASE("zero gradient leaves parameters unchanged") {
  Matrix p = Matrix::Constant(2, 2, 0.7);
  std::vector<Matrix*> params{&p};
  AdamState state = AdamState::zeros_like(params);
  AdamConfig cfg;
  cfg.lr = 0.01;
  for (int i = 0; i < 5; ++i)
    adam_step(params, {Matrix::Zero(2, 2)}, state, cfg);
  CHECK(p == Matrix::Constant(2, 2, 0.7));
}

TEST_CASE("pure weight decay shrinks parameters toward zero") {
  Matrix p = Matrix::Constant(1, 1, 1.0);
  std::vector<Matrix*> params{&p};
  AdamState state = AdamState::zeros_like(params);
  AdamConfig cfg;
  cfg.lr = 0.01;
  cfg.weight_decay = 0.1;
  Scalar prev = 1.0;
  for (int i = 0; i < 10; ++i) {
    adam_step(params, {Matrix::Zero(1, 1)}, state, cfg);
    CHECK(p(0, 0) < prev);
    prev = p(0, 0);
  }
  CHECK(prev > 0.0);
}

TEST_CASE("zero learning rate never changes parameters") {
  Matrix p = Matrix::Constant(3, 1, -0.4);
  std::vector<Matrix*> params{&p};
  AdamState state = AdamState::zeros_like(params);
  AdamConfig cfg;
  cfg.lr = 0.0;
  cfg.weight_decay = 1e-2;
  for (int i = 0; i < 7; ++i)
    adam_step(params, {Matrix::Constant(3, 1, 2.0)}, state, cfg);
  CHECK(p == Matrix::Constant(3, 1, -0.4));
}

TEST_CASE("bias correction matches the closed form on a constant gradient") {
  Matrix p = Matrix::Zero(1, 1);
  std::vector<Matrix*> params{&p};
  AdamState state = AdamState::zeros_like(params);
  AdamConfig cfg;
  cfg.lr = 1e-3;
  // with a constant gradient, m_hat = g and v_hat = g^2 at every step,
  // so each update is lr * g / (|g| + eps)
  Scalar expected = 0.0;
  for (int i = 0; i < 4; ++i) {
    adam_step(params, {Matrix::Constant(1, 1, 3.0)}, state, cfg);
    expected -= cfg.lr * 3.0 / (3.0 + cfg.eps);
    CHECK(p(0, 0) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("mismatched shapes are rejected") {
  Matrix p = Matrix::Zero(2, 2);
  std::vector<Matrix*> params{&p};
  AdamState state = AdamState::zeros_like(params);
  AdamConfig cfg;
  CHECK_THROWS_AS(adam_step(params, {Matrix::Zero(3, 2)}, state, cfg),
                  ShapeMismatchError);
  CHECK_THROWS_AS(adam_step(params, {}, state, cfg), ShapeMismatchError);
}
