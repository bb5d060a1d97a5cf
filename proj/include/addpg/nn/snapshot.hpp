#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "addpg/nn/dense_network.hpp"

namespace addpg::nn {

/// Text snapshot of one network. Layout, one item per line:
///
///   addpg-network 1
///   output identity|bounded
///   layers <count> <size_0> ... <size_last>
///   range <low_0> ... <high_0> ...      (bounded only: lows then highs)
///   W<k> <row-major weights of layer k>
///   b<k> <biases of layer k>
///
/// Reals are written as C99 hex floats so a round trip is bit-exact.
inline constexpr const char* kSnapshotMagic = "addpg-network";
inline constexpr int kSnapshotVersion = 1;

void write_network(std::ostream& os, const Network& net);
Network read_network(std::istream& is);

void save_networks(const std::string& path, const std::vector<const Network*>& nets);
std::vector<Network> load_networks(const std::string& path);

}  // namespace addpg::nn
