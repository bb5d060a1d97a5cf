#include "addpg/nn/snapshot.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace addpg::nn {
namespace {

std::string hex(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

double parse_real(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw Error("snapshot: malformed real '" + token + "'");
  return v;
}

std::istringstream expect_line(std::istream& is, const std::string& key) {
  std::string line;
  if (!std::getline(is, line)) throw Error("snapshot: unexpected end of input, wanted '" + key + "'");
  std::istringstream ls(line);
  std::string got;
  ls >> got;
  if (got != key) throw Error("snapshot: expected '" + key + "', found '" + got + "'");
  return ls;
}

std::vector<double> read_reals(std::istringstream& ls, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  std::string tok;
  while (out.size() < n && ls >> tok) out.push_back(parse_real(tok));
  if (out.size() != n) throw Error("snapshot: too few values");
  if (ls >> tok) throw Error("snapshot: trailing values");
  return out;
}

}  // namespace

void write_network(std::ostream& os, const Network& net) {
  os << kSnapshotMagic << ' ' << kSnapshotVersion << '\n';
  os << "output " << (net.output_kind() == OutputKind::bounded ? "bounded" : "identity") << '\n';
  os << "layers " << net.layer_sizes().size();
  for (int s : net.layer_sizes()) os << ' ' << s;
  os << '\n';
  if (net.output_kind() == OutputKind::bounded) {
    os << "range";
    const Vector lo = net.output_low(), hi = net.output_high();
    for (Eigen::Index i = 0; i < lo.size(); ++i) os << ' ' << hex(lo(i));
    for (Eigen::Index i = 0; i < hi.size(); ++i) os << ' ' << hex(hi(i));
    os << '\n';
  }
  for (std::size_t k = 0; k < net.layers(); ++k) {
    const Matrix& w = net.weights(k);
    os << 'W' << k;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) os << ' ' << hex(w(r, c));
    os << "\nb" << k;
    for (Eigen::Index r = 0; r < net.biases(k).size(); ++r) os << ' ' << hex(net.biases(k)(r));
    os << '\n';
  }
}

Network read_network(std::istream& is) {
  auto head = expect_line(is, kSnapshotMagic);
  int version = 0;
  head >> version;
  if (version != kSnapshotVersion) throw Error("snapshot: unsupported version " + std::to_string(version));

  auto out = expect_line(is, "output");
  std::string kind_name;
  out >> kind_name;
  OutputKind kind;
  if (kind_name == "bounded")
    kind = OutputKind::bounded;
  else if (kind_name == "identity")
    kind = OutputKind::identity;
  else
    throw Error("snapshot: unknown output kind '" + kind_name + "'");

  auto lay = expect_line(is, "layers");
  std::size_t count = 0;
  lay >> count;
  std::vector<int> sizes(count);
  for (auto& s : sizes)
    if (!(lay >> s)) throw Error("snapshot: truncated layer list");

  Vector lo, hi;
  if (kind == OutputKind::bounded) {
    if (sizes.empty()) throw Error("snapshot: empty layer list");
    auto range = expect_line(is, "range");
    const auto vals = read_reals(range, 2 * static_cast<std::size_t>(sizes.back()));
    lo = Eigen::Map<const Vector>(vals.data(), sizes.back());
    hi = Eigen::Map<const Vector>(vals.data() + sizes.back(), sizes.back());
  }
  Network net(sizes, kind, lo, hi);
  for (std::size_t k = 0; k < net.layers(); ++k) {
    Matrix& w = net.weights(k);
    auto wl = expect_line(is, "W" + std::to_string(k));
    const auto wv = read_reals(wl, static_cast<std::size_t>(w.size()));
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = wv[i++];
    auto bl = expect_line(is, "b" + std::to_string(k));
    const auto bv = read_reals(bl, static_cast<std::size_t>(net.biases(k).size()));
    net.biases(k) = Eigen::Map<const Vector>(bv.data(), net.biases(k).size());
  }
  return net;
}

void save_networks(const std::string& path, const std::vector<const Network*>& nets) {
  std::ofstream os(path);
  if (!os) throw Error("cannot open '" + path + "' for writing");
  for (const Network* n : nets) write_network(os, *n);
  if (!os) throw Error("write failed for '" + path + "'");
}

std::vector<Network> load_networks(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open '" + path + "' for reading");
  std::vector<Network> nets;
  while (is.peek() != std::char_traits<char>::eof()) {
    nets.push_back(read_network(is));
  }
  if (nets.empty()) throw Error("snapshot '" + path + "' holds no networks");
  return nets;
}

}  // namespace addpg::nn
