#include "taylornet/io.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <sstream>

namespace taylornet {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << text;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void save_dataset(const Dataset& data, const std::filesystem::path& csv) {
  std::ostringstream os;
  os.precision(17);
  os << 'y';
  for (int j = 1; j <= data.d(); ++j) os << ",x" << j;
  os << '\n';
  for (int i = 0; i < data.n(); ++i) {
    os << data.y(i);
    for (int j = 0; j < data.d(); ++j) os << ',' << data.x(i, j);
    os << '\n';
  }
  write_text(csv, os.str());
  nlohmann::ordered_json meta;
  meta["n"] = data.n();
  meta["d"] = data.d();
  meta["B_x"] = data.bx;
  write_text(std::filesystem::path(csv).replace_extension(".json"), meta.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& csv) {
  const auto meta = nlohmann::json::parse(read_text(std::filesystem::path(csv).replace_extension(".json")));
  const int n = meta.at("n").get<int>();
  const int d = meta.at("d").get<int>();
  Dataset data;
  data.bx = meta.at("B_x").get<double>();
  if (n < 1 || d < 1 || !(data.bx > 0.0)) throw std::runtime_error("dataset metadata is invalid");
  data.x.resize(n, d);
  data.y.resize(n);

  std::istringstream is(read_text(csv));
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("dataset CSV is empty");
  std::string expected = "y";
  for (int j = 1; j <= d; ++j) expected += ",x" + std::to_string(j);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) throw std::runtime_error("dataset CSV header does not match y,x1..x" + std::to_string(d));
  int i = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    if (i >= n) throw std::runtime_error("dataset CSV has more rows than its metadata");
    std::istringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) vals.push_back(std::stod(cell));
    if (static_cast<int>(vals.size()) != d + 1)
      throw std::runtime_error("dataset CSV row " + std::to_string(i + 1) + " has the wrong column count");
    data.y(i) = vals[0];
    for (int j = 0; j < d; ++j) data.x(i, j) = vals[j + 1];
    const double norm = data.x.row(i).norm();
    if (std::abs(norm - data.bx) > 1e-6 * data.bx)
      throw std::runtime_error("dataset CSV row " + std::to_string(i + 1) + " is off the B_x sphere");
    data.x.row(i) *= data.bx / norm;
    ++i;
  }
  if (i != n) throw std::runtime_error("dataset CSV has fewer rows than its metadata");
  return data;
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = "blob " + std::to_string(content.size()) + std::string(1, '\0');
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return os.str();
}

}  // namespace taylornet
