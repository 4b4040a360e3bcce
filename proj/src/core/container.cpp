#include "fwi/core/container.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fwi {

namespace {

constexpr char kMagic[4] = {'F', 'W', 'I', '1'};
constexpr uint8_t kDtypeF32 = 0;

void put_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff), static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff), static_cast<unsigned char>((v >> 24) & 0xff)};
  os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) | (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

}  // namespace

void write_container(const std::string& path, const std::vector<uint32_t>& dims, const float* data, size_t n) {
  size_t expect = 1;
  for (uint32_t d : dims) expect *= d;
  if (expect != n) throw std::invalid_argument("write_container: dims do not match payload size");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_container: cannot open " + path);
  os.write(kMagic, 4);
  put_u32(os, static_cast<uint32_t>(dims.size()));
  for (uint32_t d : dims) put_u32(os, d);
  os.put(static_cast<char>(kDtypeF32));
  // assume little-endian host (checked nowhere else in this codebase)
  static_assert(std::endian::native == std::endian::little, "FWI1 writer requires little-endian host");
  os.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(n * sizeof(float)));
  if (!os) throw std::runtime_error("write_container: write failed for " + path);
}

ContainerData read_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_container: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) throw std::runtime_error("read_container: bad magic in " + path);
  uint32_t rank = get_u32(is);
  if (rank == 0 || rank > 8) throw std::runtime_error("read_container: implausible rank in " + path);
  ContainerData out;
  out.dims.resize(rank);
  size_t n = 1;
  for (uint32_t& d : out.dims) {
    d = get_u32(is);
    n *= d;
  }
  int dtype = is.get();
  if (dtype != kDtypeF32) throw std::runtime_error("read_container: unsupported dtype in " + path);
  out.data.resize(n);
  is.read(reinterpret_cast<char*>(out.data.data()), static_cast<std::streamsize>(n * sizeof(float)));
  if (!is) throw std::runtime_error("read_container: truncated payload in " + path);
  return out;
}

void write_array2d(const std::string& path, const Array2Dd& a) {
  std::vector<float> f(a.size());
  for (size_t k = 0; k < a.size(); ++k) f[k] = static_cast<float>(a.data()[k]);
  write_container(path, {static_cast<uint32_t>(a.rows()), static_cast<uint32_t>(a.cols())}, f.data(), f.size());
}

Array2Dd read_array2d(const std::string& path) {
  ContainerData c = read_container(path);
  if (c.dims.size() != 2) throw std::runtime_error("read_array2d: expected rank 2 in " + path);
  Array2Dd a(static_cast<int>(c.dims[0]), static_cast<int>(c.dims[1]));
  for (size_t k = 0; k < c.data.size(); ++k) a.data()[k] = c.data[k];
  return a;
}

}  // namespace fwi
