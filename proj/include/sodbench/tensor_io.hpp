#pragma once

#include <filesystem>

#include "sodbench/tensor.hpp"

namespace sodbench {

// Flat binary tensor container: 8-byte magic "SODTENSR", u32 rank, u32
// extents, then the f64 payload row-major. All integers and doubles are
// little-endian.
void write_tensor(const std::filesystem::path& path, const Tensor& t);

// Throws std::runtime_error naming the path on malformed or truncated files
// and on non-finite payload values.
Tensor read_tensor(const std::filesystem::path& path);

}  // namespace sodbench
