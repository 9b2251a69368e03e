#pragma once

// LTNS binary tensor container.
//
//   offset  size  field
//   0       4     magic "LTNS"
//   4       1     version (1)
//   5       1     axis count n
//   6       4n    per-axis extent, u32 little-endian
//   6+4n    1     dtype: 0 = f32 little-endian, 1 = u8 (booleans)
//   7+4n    ...   row-major payload
//
// Every file the toolkit reads or writes uses this layout.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "lipar/restoration.hpp"
#include "lipar/tensor.hpp"

namespace lipar::ltns {

enum class DType : std::uint8_t { f32 = 0, u8 = 1 };

inline constexpr std::uint8_t kVersion = 1;

struct Tensor {
  std::vector<std::uint32_t> shape;
  DType dtype = DType::f32;
  std::vector<float> f32;          // populated when dtype == f32
  std::vector<std::uint8_t> u8;    // populated when dtype == u8

  std::size_t element_count() const;
};

void write(std::ostream& os, const Tensor& t);
/// Throws FormatError on bad magic, unknown version/dtype, or a payload
/// whose length does not match the header.
Tensor read(std::istream& is);

void write_file(const std::filesystem::path& path, const Tensor& t);
Tensor read_file(const std::filesystem::path& path);

Tensor from_grid(const LatentGrid& grid);
LatentGrid to_grid(const Tensor& t);

Tensor from_mask(const BoolField& mask);
BoolField to_mask(const Tensor& t);

/// Kept patches are stored as (count, pt, ph, pw, C) so the patch geometry
/// travels with the payload.
Tensor from_kept(const PrunedPatchSet& set);
std::vector<float> kept_values(const Tensor& t, PatchDims& patch, int& channels);

Tensor from_matrix(const Matrix& m);
Matrix to_matrix(const Tensor& t);

}  // namespace lipar::ltns
