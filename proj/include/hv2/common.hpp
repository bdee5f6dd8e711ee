#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hv2 {

inline constexpr int kPatchSize = 32;
inline constexpr int kPatchArea = kPatchSize * kPatchSize;

// Bad or missing input data (files, dimensions, labels). Maps to exit code 2.
class data_error : public std::runtime_error {
public:
  explicit data_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure (divergence, NaN, degenerate statistics). Exit code 3.
class numeric_error : public std::runtime_error {
public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// CRC-32 (IEEE 802.3 polynomial), used for tensor file checksums.
std::uint32_t crc32(const void* data, std::size_t n, std::uint32_t seed = 0);

}  // namespace hv2
