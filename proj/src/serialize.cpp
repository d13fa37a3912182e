#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>

#include "taylornet/model.hpp"

namespace taylornet {

namespace {

constexpr char kMagic[8] = {'T', 'N', 'E', 'T', 'B', 'I', 'N', '1'};
enum Payload : std::uint32_t { kNetwork = 0, kDelta = 1 };

void put_u32(std::ostream& os, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 4);
}

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, double v) {
  std::uint64_t u;
  std::memcpy(&u, &v, 8);
  put_u64(os, u);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("binary container truncated");
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  if (!is.read(reinterpret_cast<char*>(b), 8)) throw std::runtime_error("binary container truncated");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& is) {
  const std::uint64_t u = get_u64(is);
  double v;
  std::memcpy(&v, &u, 8);
  return v;
}

struct Header {
  std::uint32_t payload;
  Activation activation;
  int d, m;
  double bx;
  std::uint64_t seed;
};

void write_header(std::ostream& os, const Header& h) {
  os.write(kMagic, 8);
  put_u32(os, h.payload);
  put_u32(os, h.activation.kind() == ActivationKind::ReluCubedSixth ? 0u : 1u);
  put_u32(os, static_cast<std::uint32_t>(h.activation.order()));
  put_u32(os, 0u);
  put_u64(os, static_cast<std::uint64_t>(h.d));
  put_u64(os, static_cast<std::uint64_t>(h.m));
  put_f64(os, h.bx);
  put_u64(os, h.seed);
}

Header read_header(std::istream& is) {
  char magic[8];
  if (!is.read(magic, 8) || std::memcmp(magic, kMagic, 8) != 0)
    throw std::runtime_error("not a taylornet binary container");
  Header h;
  h.payload = get_u32(is);
  const std::uint32_t kind = get_u32(is);
  const std::uint32_t order = get_u32(is);
  get_u32(is);
  h.activation = kind == 0 ? Activation::relu_cubed_sixth() : Activation::relu_power(static_cast<int>(order));
  h.d = static_cast<int>(get_u64(is));
  h.m = static_cast<int>(get_u64(is));
  h.bx = get_f64(is);
  h.seed = get_u64(is);
  if (h.d < 1 || h.m < 1) throw std::runtime_error("binary container has invalid shape");
  return h;
}

void write_matrix(std::ostream& os, const Matrix& w) {
  for (Eigen::Index j = 0; j < w.cols(); ++j)
    for (Eigen::Index i = 0; i < w.rows(); ++i) put_f64(os, w(i, j));
}

Matrix read_matrix(std::istream& is, int rows, int cols) {
  Matrix w(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) w(i, j) = get_f64(is);
  return w;
}

void write_sidecar(const std::filesystem::path& path, const Header& h) {
  nlohmann::ordered_json j;
  j["format"] = "taylornet-bin";
  j["version"] = 1;
  j["payload"] = h.payload == kNetwork ? "network" : "weight_delta";
  j["d"] = h.d;
  j["m"] = h.m;
  j["bx"] = h.bx;
  j["activation"] = h.activation.tag();
  j["seed"] = h.seed;
  j["byte_order"] = "little";
  j["layout"] = h.payload == kNetwork ? "a[m], W0[d x m] column-major" : "W[d x m] column-major";
  std::ofstream os(std::filesystem::path(path).replace_extension(".json"));
  os << j.dump(2) << "\n";
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  return is;
}

}  // namespace

void save_network(const Network& net, const std::filesystem::path& path) {
  net.validate_shapes();
  const Header h{kNetwork, net.activation, net.d, net.m, net.bx, net.seed};
  auto os = open_out(path);
  write_header(os, h);
  for (int r = 0; r < net.m; ++r) put_f64(os, net.a(r));
  write_matrix(os, net.w0);
  write_sidecar(path, h);
}

Network load_network(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is);
  if (h.payload != kNetwork) throw std::runtime_error(path.string() + " does not hold a network");
  Network net;
  net.d = h.d;
  net.m = h.m;
  net.bx = h.bx;
  net.seed = h.seed;
  net.activation = h.activation;
  net.a.resize(h.m);
  for (int r = 0; r < h.m; ++r) net.a(r) = get_f64(is);
  net.w0 = read_matrix(is, h.d, h.m);
  return net;
}

void save_weight_delta(const Network& net, const WeightDelta& w, const std::filesystem::path& path) {
  if (w.rows() != net.d || w.cols() != net.m) throw std::invalid_argument("weight delta shape does not match network");
  const Header h{kDelta, net.activation, net.d, net.m, net.bx, net.seed};
  auto os = open_out(path);
  write_header(os, h);
  write_matrix(os, w);
  write_sidecar(path, h);
}

WeightDelta load_weight_delta(const std::filesystem::path& path) {
  auto is = open_in(path);
  const Header h = read_header(is);
  if (h.payload != kDelta) throw std::runtime_error(path.string() + " does not hold a weight delta");
  return read_matrix(is, h.d, h.m);
}

}  // namespace taylornet
