#include "sodbench/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace sodbench {

namespace {

constexpr char kMagic[8] = {'S', 'O', 'D', 'T', 'E', 'N', 'S', 'R'};

static_assert(std::endian::native == std::endian::little,
              "tensor container assumes a little-endian host");

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& why) {
  throw std::runtime_error("tensor file " + path.string() + ": " + why);
}

}  // namespace

void write_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(path, "cannot open for writing");
  os.write(kMagic, sizeof(kMagic));
  const std::uint32_t rank = static_cast<std::uint32_t>(t.rank());
  os.write(reinterpret_cast<const char*>(&rank), sizeof(rank));
  for (std::size_t e : t.shape()) {
    const std::uint32_t extent = static_cast<std::uint32_t>(e);
    os.write(reinterpret_cast<const char*>(&extent), sizeof(extent));
  }
  os.write(reinterpret_cast<const char*>(t.data().data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!os) fail(path, "write failed");
}

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(path, "cannot open for reading");

  char magic[8];
  if (!is.read(magic, sizeof(magic)) ||
      std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    fail(path, "bad magic, not a tensor container");
  }
  std::uint32_t rank = 0;
  if (!is.read(reinterpret_cast<char*>(&rank), sizeof(rank))) {
    fail(path, "truncated rank field");
  }
  if (rank == 0 || rank > 8) {
    fail(path, "implausible rank " + std::to_string(rank));
  }
  std::vector<std::size_t> shape(rank);
  std::size_t total = 1;
  for (std::uint32_t i = 0; i < rank; ++i) {
    std::uint32_t extent = 0;
    if (!is.read(reinterpret_cast<char*>(&extent), sizeof(extent))) {
      fail(path, "truncated extent list");
    }
    if (extent == 0) fail(path, "zero extent at axis " + std::to_string(i));
    shape[i] = extent;
    total *= extent;
  }
  std::vector<double> data(total);
  if (!is.read(reinterpret_cast<char*>(data.data()),
               static_cast<std::streamsize>(total * sizeof(double)))) {
    fail(path, "truncated payload, expected " + std::to_string(total) +
                   " doubles");
  }
  Tensor t(std::move(shape), std::move(data));
  if (!t.all_finite()) fail(path, "payload contains non-finite values");
  return t;
}

}  // namespace sodbench
