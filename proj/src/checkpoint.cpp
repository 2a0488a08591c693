#include "stargraph/checkpoint.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "stargraph/error.hpp"

namespace stargraph {

namespace {

constexpr std::array<char, 4> kMagic{'G', 'N', 'L', 'S'};

template <class U>
void put(std::vector<unsigned char>& out, U value) {
  for (std::size_t b = 0; b < sizeof(U); ++b) out.push_back(static_cast<unsigned char>((value >> (8 * b)) & 0xffu));
}

void put_f64(std::vector<unsigned char>& out, double x) { put(out, std::bit_cast<std::uint64_t>(x)); }

template <class U>
U get(const unsigned char* p) {
  U v = 0;
  for (std::size_t b = 0; b < sizeof(U); ++b) v |= static_cast<U>(p[b]) << (8 * b);
  return v;
}

double get_f64(const unsigned char* p) { return std::bit_cast<double>(get<std::uint64_t>(p)); }

std::string where(const std::filesystem::path& path) { return " (" + path.string() + ")"; }

}  // namespace

void checkpoint_save(const GraphField& field, const std::filesystem::path& path) {
  field.validate();
  std::vector<unsigned char> buf;
  buf.reserve(kCheckpointHeaderBytes + kEdges * field.grid.n_points * 16);
  buf.insert(buf.end(), kMagic.begin(), kMagic.end());
  put(buf, kCheckpointVersion);
  put(buf, static_cast<std::uint32_t>(kEdges));
  put(buf, static_cast<std::uint64_t>(field.grid.n_points));
  put_f64(buf, field.grid.dx);
  for (const auto& e : field.edges)
    for (const cplx& z : e) {
      put_f64(buf, z.real());
      put_f64(buf, z.imag());
    }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::io_failure, "cannot open checkpoint for writing" + where(path));
  out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!out) fail(ErrorCode::io_failure, "checkpoint write failed" + where(path));
}

GraphField checkpoint_load(const std::filesystem::path& path, const std::optional<GridSpec>& expected) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io_failure, "cannot open checkpoint" + where(path));
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (buf.size() < kCheckpointHeaderBytes)
    fail(ErrorCode::checkpoint_corrupt_header, "file shorter than the header" + where(path));
  if (std::memcmp(buf.data(), kMagic.data(), kMagic.size()) != 0)
    fail(ErrorCode::checkpoint_corrupt_header, "bad magic" + where(path));
  const auto version = get<std::uint32_t>(buf.data() + 4);
  if (version != kCheckpointVersion) {
    std::ostringstream o;
    o << "format version " << version << ", expected " << kCheckpointVersion << where(path);
    fail(ErrorCode::checkpoint_version_mismatch, o.str());
  }
  const auto n_edges = get<std::uint32_t>(buf.data() + 8);
  const auto n_points = get<std::uint64_t>(buf.data() + 12);
  const double dx = get_f64(buf.data() + 20);
  if (!(dx > 0.0) || !std::isfinite(dx) || n_points < 16)
    fail(ErrorCode::checkpoint_corrupt_header, "header grid is not a grid" + where(path));
  if (n_edges != kEdges) {
    std::ostringstream o;
    o << n_edges << " edges in file, expected " << kEdges << where(path);
    fail(ErrorCode::checkpoint_shape_mismatch, o.str());
  }
  const std::uint64_t payload = buf.size() - kCheckpointHeaderBytes;
  if (n_points > payload / (16 * kEdges) || payload != n_points * 16 * kEdges) {
    std::ostringstream o;
    o << "payload of " << payload << " bytes does not hold " << n_points << " points per edge" << where(path);
    fail(ErrorCode::checkpoint_shape_mismatch, o.str());
  }
  const GridSpec grid{dx, static_cast<std::size_t>(n_points)};
  if (expected && !(*expected == grid)) {
    std::ostringstream o;
    o.precision(17);
    o << "checkpoint grid (dx " << dx << ", n " << n_points << ") differs from expected (dx " << expected->dx
      << ", n " << expected->n_points << ")" << where(path);
    fail(ErrorCode::checkpoint_shape_mismatch, o.str());
  }

  GraphField f;
  f.grid = grid;
  const unsigned char* p = buf.data() + kCheckpointHeaderBytes;
  for (auto& e : f.edges) {
    e.resize(grid.n_points);
    for (auto& z : e) {
      z = {get_f64(p), get_f64(p + 8)};
      p += 16;
    }
  }
  return f;
}

}  // namespace stargraph
