#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "addpg/nn/dense_network.hpp"
#include "addpg/nn/snapshot.hpp"
#include "finite_difference.hpp"

namespace addpg::nn {
namespace {

Network scalar_net(double w, double b, OutputKind kind = OutputKind::identity) {
  Network net({1, 1}, kind);
  net.weights(0)(0, 0) = w;
  net.biases(0)(0) = b;
  return net;
}

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

TEST(InitNetwork, SameSeedGivesIdenticalParameters) {
  const auto a = init_network({3, 2, 1}, 7, OutputKind::identity);
  const auto b = init_network({3, 2, 1}, 7, OutputKind::identity);
  EXPECT_TRUE(a == b);
  const auto c = init_network({3, 2, 1}, 8, OutputKind::identity);
  EXPECT_FALSE(a == c);
}

TEST(InitNetwork, RejectsDegenerateLayerLists) {
  EXPECT_THROW(init_network({2}, 0, OutputKind::identity), Error);
  EXPECT_THROW(init_network({}, 0, OutputKind::identity), Error);
  EXPECT_THROW(init_network({3, 0, 1}, 0, OutputKind::identity), Error);
}

TEST(InitNetwork, ParametersRespectFanInBound) {
  const std::vector<int> sizes{3, 400, 300, 1};
  const auto net = init_network(sizes, 0, OutputKind::identity);
  for (std::size_t k = 0; k < net.layers(); ++k) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(sizes[k]));
    EXPECT_EQ(net.weights(k).rows(), sizes[k + 1]);
    EXPECT_EQ(net.weights(k).cols(), sizes[k]);
    EXPECT_EQ(net.biases(k).size(), sizes[k + 1]);
    EXPECT_LE(net.weights(k).cwiseAbs().maxCoeff(), bound);
    EXPECT_LE(net.biases(k).cwiseAbs().maxCoeff(), bound);
    // Draws should actually spread across the interval.
    EXPECT_GT(net.weights(k).cwiseAbs().maxCoeff(), 0.9 * bound);
  }
}

TEST(Forward, ZeroNetworkGivesZero) {
  Network net({4, 5, 3}, OutputKind::identity);
  EXPECT_TRUE(net.forward(Vector(Vector::Random(4))).isZero(0.0));
}

TEST(Forward, AffineHandValue) {
  EXPECT_DOUBLE_EQ(scalar_net(2.0, 1.0).forward(vec({3.0}))(0), 7.0);
}

TEST(Forward, BoundedZeroPreactivationIsMidpoint) {
  EXPECT_EQ(scalar_net(0.0, 0.0, OutputKind::bounded).forward(vec({5.0}))(0), 0.0);
  Network ranged({2, 1}, OutputKind::bounded, vec({-2.0}), vec({4.0}));
  EXPECT_DOUBLE_EQ(ranged.forward(vec({1.0, -1.0}))(0), 1.0);
}

TEST(Forward, DimensionMismatchThrows) {
  const auto net = init_network({3, 2, 1}, 1, OutputKind::identity);
  EXPECT_THROW(net.forward(Vector(Vector::Zero(2))), Error);
}

TEST(Forward, IsPure) {
  const auto net = init_network({3, 8, 2}, 3, OutputKind::bounded);
  const Vector x = vec({0.1, -0.4, 2.0});
  const Vector y1 = net.forward(x);
  const Vector y2 = net.forward(x);
  EXPECT_EQ(y1, y2);
}

TEST(Forward, BatchColumnsMatchSingleCalls) {
  const auto net = init_network({3, 8, 2}, 3, OutputKind::bounded);
  Matrix xs = Matrix::Random(3, 5);
  const Matrix ys = net.forward(xs);
  for (int j = 0; j < 5; ++j) EXPECT_TRUE(ys.col(j).isApprox(net.forward(Vector(xs.col(j))), 1e-14));
}

TEST(Backward, ZeroOutputGradientGivesZeroGradients) {
  const auto net = init_network({3, 4, 2}, 5, OutputKind::bounded);
  auto [params, input_grad] = net.backward(vec({1.0, 2.0, 3.0}), Vector(Vector::Zero(2)));
  EXPECT_EQ(params.max_abs(), 0.0);
  EXPECT_TRUE(input_grad.isZero(0.0));
}

TEST(Backward, AffineHandDerivatives) {
  auto [params, input_grad] = scalar_net(2.0, 0.0).backward(vec({3.0}), vec({1.0}));
  EXPECT_DOUBLE_EQ(params.weights[0](0, 0), 3.0);
  EXPECT_DOUBLE_EQ(params.biases[0](0), 1.0);
  EXPECT_DOUBLE_EQ(input_grad(0), 2.0);
}

TEST(Backward, ShapeMismatchThrows) {
  const auto net = init_network({3, 4, 2}, 5, OutputKind::identity);
  EXPECT_THROW(net.backward(vec({1.0, 2.0, 3.0}), vec({1.0})), Error);
  EXPECT_THROW(net.backward(vec({1.0, 2.0}), vec({1.0, 1.0})), Error);
}

TEST(Backward, MatchesCentralDifferencesOnRandomNetworks) {
  std::mt19937_64 rng(42);
  std::uniform_int_distribution<int> width(1, 6);
  for (int trial = 0; trial < 25; ++trial) {
    const std::vector<int> sizes{width(rng), width(rng), width(rng), width(rng)};
    const auto kind = trial % 2 ? OutputKind::bounded : OutputKind::identity;
    const auto net = init_network(sizes, rng(), kind);
    std::srand(static_cast<unsigned>(trial));
    const Vector x = Vector::Random(sizes.front()) * 2.0;
    const Vector og = Vector::Random(sizes.back());
    auto [params, input_grad] = net.backward(x, og);
    EXPECT_LT(testing::max_relative_error(flatten(params), testing::numeric_parameter_gradient(net, x, og)), 1e-4)
        << "trial " << trial;
    EXPECT_LT(testing::max_relative_error(input_grad, testing::numeric_input_gradient(net, x, og)), 1e-4)
        << "trial " << trial;
  }
}

TEST(Backward, BatchGradientIsSumOfPerSampleGradients) {
  const auto net = init_network({2, 5, 3}, 9, OutputKind::bounded);
  const Matrix xs = Matrix::Random(2, 4);
  const Matrix ogs = Matrix::Random(3, 4);
  const auto batch = net.backward(xs, ogs);
  Gradients sum = net.zero_gradients();
  for (int j = 0; j < 4; ++j) {
    auto [g, in] = net.backward(Vector(xs.col(j)), Vector(ogs.col(j)));
    sum += g;
    EXPECT_TRUE(batch.inputs.col(j).isApprox(in, 1e-13));
  }
  EXPECT_TRUE(flatten(batch.params).isApprox(flatten(sum), 1e-13));
}

TEST(ApplyGradients, ZeroGradientLeavesParametersAndCountsStep) {
  auto net = init_network({2, 3, 1}, 4, OutputKind::identity);
  const auto before = net;
  auto opt = make_adam(net, 0.1);
  apply_gradients(net, net.zero_gradients(), opt);
  EXPECT_TRUE(net == before);
  EXPECT_EQ(opt.step, 1);
}

TEST(ApplyGradients, FirstStepIsLearningRateAgainstGradientSign) {
  auto net = scalar_net(0.0, 0.0);
  auto opt = make_adam(net, 0.1);
  Gradients g = net.zero_gradients();
  g.weights[0](0, 0) = 1.0;
  apply_gradients(net, g, opt);
  // m_hat = 1, v_hat = 1  =>  delta = -0.1 / (1 + 1e-8)
  EXPECT_NEAR(net.weights(0)(0, 0), -0.1 / (1.0 + 1e-8), 1e-15);
  EXPECT_EQ(net.biases(0)(0), 0.0);
}

TEST(ApplyGradients, ScalarQuadraticConverges) {
  auto net = scalar_net(0.0, 0.0);
  auto opt = make_adam(net, 0.01);
  // Independent scalar recurrence as the oracle.
  double w = 0.0, m = 0.0, v = 0.0;
  for (int t = 1; t <= 1000; ++t) {
    Gradients g = net.zero_gradients();
    g.weights[0](0, 0) = 2.0 * (net.weights(0)(0, 0) - 3.0);
    apply_gradients(net, g, opt);

    const double gw = 2.0 * (w - 3.0);
    m = 0.9 * m + 0.1 * gw;
    v = 0.999 * v + 0.001 * gw * gw;
    w -= 0.01 * (m / (1 - std::pow(0.9, t))) / (std::sqrt(v / (1 - std::pow(0.999, t))) + 1e-8);
  }
  EXPECT_NEAR(net.weights(0)(0, 0), w, 1e-12);
  EXPECT_LT(std::abs(net.weights(0)(0, 0) - 3.0), 0.05);
}

TEST(ApplyGradients, NonFiniteGradientNamesLayer) {
  auto net = init_network({2, 3, 1}, 4, OutputKind::identity);
  auto opt = make_adam(net, 0.1);
  Gradients g = net.zero_gradients();
  g.biases[1](0) = std::nan("");
  try {
    apply_gradients(net, g, opt);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("layer 1"), std::string::npos) << e.what();
  }
  EXPECT_EQ(opt.step, 0);
}

TEST(SoftUpdate, BoundaryRatesAndConvexCombination) {
  auto target = scalar_net(1.0, 1.0);
  const auto online = scalar_net(0.0, 0.0);
  auto t0 = target;
  soft_update(t0, online, 0.0);
  EXPECT_TRUE(t0 == target);
  auto t1 = target;
  soft_update(t1, online, 1.0);
  EXPECT_TRUE(t1 == online);
  soft_update(target, online, 0.1);
  EXPECT_DOUBLE_EQ(target.weights(0)(0, 0), 0.9);
}

TEST(SoftUpdate, RejectsBadRateAndArchitecture) {
  auto a = init_network({2, 3, 1}, 1, OutputKind::identity);
  const auto b = init_network({2, 4, 1}, 1, OutputKind::identity);
  EXPECT_THROW(soft_update(a, a, 1.5), Error);
  EXPECT_THROW(soft_update(a, a, -0.1), Error);
  EXPECT_THROW(soft_update(a, b, 0.5), Error);
}

TEST(SoftUpdate, ContractsTowardOnline) {
  auto target = init_network({3, 6, 2}, 1, OutputKind::identity);
  const auto online = init_network({3, 6, 2}, 2, OutputKind::identity);
  const double tau = 0.05;
  const double d0 = max_abs_difference(target, online);
  for (int k = 1; k <= 100; ++k) {
    soft_update(target, online, tau);
    EXPECT_LE(max_abs_difference(target, online), std::pow(1.0 - tau, k) * d0 * (1 + 1e-12));
  }
}

TEST(Determinism, SameOperationSequenceIsBitIdentical) {
  auto run = [] {
    auto net = init_network({3, 5, 1}, 11, OutputKind::identity);
    auto opt = make_adam(net, 1e-2);
    const Matrix x = Matrix::Constant(3, 4, 0.3);
    for (int i = 0; i < 20; ++i) {
      auto r = net.backward(x, net.forward(x));
      apply_gradients(net, r.params, opt);
    }
    return net;
  };
  EXPECT_TRUE(run() == run());
}

TEST(Snapshot, RoundTripIsBitExact) {
  const auto a = init_network({3, 7, 2}, 21, OutputKind::bounded, vec({-2.0, -1.0}), vec({2.0, 0.5}));
  const auto b = init_network({5, 4, 1}, 22, OutputKind::identity);
  std::stringstream ss;
  write_network(ss, a);
  write_network(ss, b);
  EXPECT_TRUE(read_network(ss) == a);
  EXPECT_TRUE(read_network(ss) == b);
}

TEST(Snapshot, RejectsWrongMagicAndTruncation) {
  std::stringstream bad("not-a-network 1\n");
  EXPECT_THROW(read_network(bad), Error);
  std::stringstream full;
  write_network(full, init_network({2, 2, 1}, 1, OutputKind::identity));
  std::string text = full.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(read_network(truncated), Error);
}

}  // namespace
}  // namespace addpg::nn
