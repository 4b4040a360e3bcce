#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fwi/core/array.hpp"

namespace fwi {

// "FWI1" array container: magic bytes, u32 rank, u32 dims[rank],
// u8 dtype (0 = f32), little-endian f32 payload, row-major.
struct ContainerData {
  std::vector<uint32_t> dims;
  std::vector<float> data;
};

void write_container(const std::string& path, const std::vector<uint32_t>& dims, const float* data, size_t n);
ContainerData read_container(const std::string& path);

void write_array2d(const std::string& path, const Array2Dd& a);
Array2Dd read_array2d(const std::string& path);

}  // namespace fwi
