#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <vector>

#include "stargraph/checkpoint.hpp"
#include "stargraph/error.hpp"

using namespace stargraph;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "stargraph_checkpoint_test";
  fs::create_directories(dir);
  return dir / name;
}

std::vector<char> slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void spit(const fs::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

GraphField sample_field() {
  const GridSpec g = GridSpec::from_length(5.0, 0.1);
  GraphField f = GraphField::zeros(g);
  for (std::size_t j = 0; j < kEdges; ++j)
    for (std::size_t m = 0; m < g.n_points; ++m) f[j][m] = {std::sin(0.3 * m + j), -1.0 / (1.0 + m + 7.0 * j)};
  return f;
}

ErrorCode code_of(const fs::path& p, const std::optional<GridSpec>& expected = std::nullopt) {
  try {
    checkpoint_load(p, expected);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("load succeeded");
  return ErrorCode::numeric_failure;
}

template <class T>
void poke(std::vector<char>& bytes, std::size_t offset, T value) {
  std::memcpy(bytes.data() + offset, &value, sizeof(T));  // test host is little-endian
}

}  // namespace

TEST_CASE("checkpoint round trip is bitwise") {
  const GraphField f = sample_field();
  const fs::path p = scratch("round.gnls");
  checkpoint_save(f, p);
  CHECK(fs::file_size(p) == kCheckpointHeaderBytes + kEdges * f.grid.n_points * 16);
  const auto bytes = slurp(p);
  CHECK(std::string(bytes.data(), 4) == "GNLS");

  const GraphField g = checkpoint_load(p, f.grid);
  CHECK(g.grid == f.grid);
  for (std::size_t j = 0; j < kEdges; ++j) CHECK(g[j] == f[j]);
}

TEST_CASE("checkpoint errors are distinct") {
  const GraphField f = sample_field();
  const fs::path good = scratch("good.gnls");
  checkpoint_save(f, good);
  const auto bytes = slurp(good);
  const fs::path p = scratch("bad.gnls");

  SUBCASE("missing file") { CHECK(code_of(scratch("absent.gnls")) == ErrorCode::io_failure); }
  SUBCASE("short header") {
    spit(p, std::vector<char>(bytes.begin(), bytes.begin() + 10));
    CHECK(code_of(p) == ErrorCode::checkpoint_corrupt_header);
  }
  SUBCASE("bad magic") {
    auto b = bytes;
    b[0] = 'X';
    spit(p, b);
    CHECK(code_of(p) == ErrorCode::checkpoint_corrupt_header);
  }
  SUBCASE("bad dx") {
    auto b = bytes;
    poke(b, 20, -1.0);
    spit(p, b);
    CHECK(code_of(p) == ErrorCode::checkpoint_corrupt_header);
  }
  SUBCASE("version") {
    auto b = bytes;
    poke<std::uint32_t>(b, 4, 2);
    spit(p, b);
    CHECK(code_of(p) == ErrorCode::checkpoint_version_mismatch);
  }
  SUBCASE("edge count") {
    auto b = bytes;
    poke<std::uint32_t>(b, 8, 2);
    spit(p, b);
    CHECK(code_of(p) == ErrorCode::checkpoint_shape_mismatch);
  }
  SUBCASE("short payload") {
    spit(p, std::vector<char>(bytes.begin(), bytes.end() - 16));
    CHECK(code_of(p) == ErrorCode::checkpoint_shape_mismatch);
  }
  SUBCASE("wrong expected grid") {
    CHECK(code_of(good, GridSpec::from_length(5.0, 0.05)) == ErrorCode::checkpoint_shape_mismatch);
  }
}
