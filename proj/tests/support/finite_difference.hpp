#pragma once

// Test-only numerical oracles. Nothing here calls backward().

#include <algorithm>
#include <cmath>
#include <functional>

#include "addpg/nn/dense_network.hpp"

namespace addpg::testing {

/// Central differences of a scalar function of a vector.
inline Vector central_gradient(const std::function<double(const Vector&)>& f, Vector x, double h = 1e-5) {
  Vector g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double xi = x(i);
    x(i) = xi + h;
    const double up = f(x);
    x(i) = xi - h;
    const double down = f(x);
    x(i) = xi;
    g(i) = (up - down) / (2.0 * h);
  }
  return g;
}

/// d/dparams of output_grad . net(input), by perturbing the flattened parameters.
inline Vector numeric_parameter_gradient(const nn::Network& net, const Vector& input, const Vector& output_grad,
                                         double h = 1e-5) {
  nn::Network probe = net;
  auto f = [&](const Vector& flat) {
    nn::unflatten(probe, flat);
    return output_grad.dot(probe.forward(input));
  };
  return central_gradient(f, nn::flatten(net), h);
}

inline Vector numeric_input_gradient(const nn::Network& net, const Vector& input, const Vector& output_grad,
                                     double h = 1e-5) {
  return central_gradient([&](const Vector& x) { return output_grad.dot(net.forward(x)); }, input, h);
}

/// |a - b| / max(|a|, |b|, floor): relative error with a small absolute floor
/// so entries that are zero up to rounding do not blow up the ratio.
inline double relative_error(double a, double b, double floor = 1e-6) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

inline double max_relative_error(const Vector& a, const Vector& b, double floor = 1e-6) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) worst = std::max(worst, relative_error(a(i), b(i), floor));
  return worst;
}

}  // namespace addpg::testing
