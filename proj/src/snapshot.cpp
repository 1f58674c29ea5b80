#include "cyflow/snapshot.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "cyflow/error.hpp"

namespace cyflow {

namespace {

constexpr std::array<char, 4> kMagic{'C', 'Y', 'F', '1'};

template <class T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  const U bits = std::bit_cast<U>(value);
  std::array<char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xFFu);
  }
  out.write(bytes.data(), bytes.size());
}

template <class T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  std::array<unsigned char, sizeof(T)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw Error(ErrorKind::SnapshotFormat, "truncated snapshot");
  U bits = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    bits |= static_cast<U>(bytes[i]) << (8 * i);
  }
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_snapshot(std::ostream& out, const ScalarField& field) {
  const auto& g = field.grid();
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(g.real_dim()));
  for (int n : g.resolution()) put_le<std::uint32_t>(out, static_cast<std::uint32_t>(n));
  for (double l : g.periods()) put_le<double>(out, l);
  for (double v : field.values()) put_le<double>(out, v);
  if (!out) throw Error(ErrorKind::IoError, "failed writing snapshot");
}

void write_snapshot(const std::filesystem::path& path,
                    const ScalarField& field) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::IoError, "cannot open " + path.string());
  }
  write_snapshot(out, field);
}

ScalarField read_snapshot(std::istream& in) {
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) {
    throw Error(ErrorKind::SnapshotFormat, "bad snapshot magic");
  }
  const auto dims = get_le<std::uint32_t>(in);
  if (dims == 0 || dims % 2 != 0 || dims > 16) {
    throw Error(ErrorKind::SnapshotFormat, "bad snapshot dimension");
  }
  std::vector<int> resolution(dims);
  std::vector<double> periods(dims);
  for (auto& n : resolution) n = static_cast<int>(get_le<std::uint32_t>(in));
  for (auto& l : periods) l = get_le<double>(in);
  GridPtr grid;
  try {
    grid = make_grid(static_cast<int>(dims / 2), periods, resolution);
  } catch (const Error& e) {
    throw Error(ErrorKind::SnapshotFormat,
                std::string("invalid snapshot grid: ") + e.what());
  }
  ScalarField field(grid);
  for (double& v : field.values()) v = get_le<double>(in);
  return field;
}

ScalarField read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  return read_snapshot(in);
}

ScalarField read_snapshot(const std::filesystem::path& path,
                          const GridPtr& grid) {
  ScalarField field = read_snapshot(path);
  if (!(field.grid() == *grid)) {
    throw Error(ErrorKind::GridMismatch,
                "snapshot " + path.string() + " does not match the grid");
  }
  return ScalarField(grid, field.values());
}

}  // namespace cyflow
