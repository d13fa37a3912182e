#include <gtest/gtest.h>

#include <filesystem>

#include "taylornet/io.hpp"
#include "taylornet/measure.hpp"

using namespace taylornet;
namespace fs = std::filesystem;

namespace {
fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("taylornet_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}
}  // namespace

TEST(Io, GitBlobHashMatchesGit) {
  // `printf 'hello\n' | git hash-object --stdin`
  EXPECT_EQ(git_blob_hash("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
  EXPECT_EQ(git_blob_hash(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
}

TEST(Io, TextRoundTrip) {
  const fs::path dir = scratch("text");
  write_text(dir / "a.txt", std::string("x\0y\n", 4));
  EXPECT_EQ(read_text(dir / "a.txt"), std::string("x\0y\n", 4));
  EXPECT_THROW(read_text(dir / "missing.txt"), std::runtime_error);
}

TEST(Io, DatasetRoundTrip) {
  const fs::path dir = scratch("data");
  Rng rng(3);
  const Dataset d = gen_matrix_sensing(25, 4, random_spectrum(4, 2, rng), rng);
  save_dataset(d, dir / "train.csv");
  EXPECT_TRUE(fs::exists(dir / "train.json"));
  const Dataset back = load_dataset(dir / "train.csv");
  EXPECT_EQ(back.bx, d.bx);
  ASSERT_EQ(back.n(), d.n());
  EXPECT_LE((back.x - d.x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((back.y - d.y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Io, DatasetOffSphereRejected) {
  const fs::path dir = scratch("bad");
  write_text(dir / "d.csv", "y,x1,x2\n1,1,0\n-1,0.5,0\n");
  write_text(dir / "d.json", R"({"n": 2, "d": 2, "B_x": 1.0})");
  EXPECT_THROW(load_dataset(dir / "d.csv"), std::exception);
  // tiny drift is re-projected
  write_text(dir / "d.csv", "y,x1,x2\n1,1.0000000001,0\n-1,0,1\n");
  const Dataset ok = load_dataset(dir / "d.csv");
  EXPECT_NEAR(ok.x.row(0).norm(), 1.0, 1e-15);
}
