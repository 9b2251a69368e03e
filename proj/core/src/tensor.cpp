#include "lipar/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace lipar {

LatentGrid::LatentGrid(GridDims dims, std::vector<float> data)
    : dims_(dims), data_(std::move(data)) {
  if (dims_.frames < 1 || dims_.rows < 1 || dims_.cols < 1 || dims_.channels < 1) {
    throw DimensionError("latent grid extents must all be >= 1");
  }
  if (data_.size() != dims_.size()) {
    throw DimensionError("latent grid payload has " + std::to_string(data_.size()) +
                         " values, extents require " + std::to_string(dims_.size()));
  }
  if (!std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); })) {
    throw ValidationError("latent grid contains a non-finite value");
  }
}

LatentGrid LatentGrid::zeros(GridDims dims) {
  return LatentGrid(dims, std::vector<float>(dims.size(), 0.0f));
}

LatentGrid LatentGrid::frames(int begin, int end) const {
  if (begin < 0 || end > dims_.frames || begin >= end) {
    throw DimensionError("frame range out of bounds");
  }
  GridDims d = dims_;
  d.frames = end - begin;
  const std::size_t stride = static_cast<std::size_t>(dims_.rows) * dims_.cols * dims_.channels;
  std::vector<float> out(data_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                         data_.begin() + static_cast<std::ptrdiff_t>(end * stride));
  return LatentGrid(d, std::move(out));
}

PatchGrid::PatchGrid(PatchDims patch, int frames, int rows, int cols, int channels,
                     std::vector<float> data)
    : patch_(patch), frames_(frames), rows_(rows), cols_(cols), channels_(channels),
      data_(std::move(data)) {
  if (patch_.t < 1 || patch_.h < 1 || patch_.w < 1) {
    throw DimensionError("patch extents must be positive");
  }
  if (frames_ < 1 || rows_ < 1 || cols_ < 1 || channels_ < 1) {
    throw DimensionError("patch grid extents must all be >= 1");
  }
  if (data_.size() != patch_count() * static_cast<std::size_t>(patch_length())) {
    throw DimensionError("patch grid payload length does not match extents");
  }
}

PatchGrid PatchGrid::frames(int begin, int end) const {
  if (begin < 0 || end > frames_ || begin >= end) {
    throw DimensionError("patch frame range out of bounds");
  }
  const std::size_t stride = static_cast<std::size_t>(rows_) * cols_ * patch_length();
  std::vector<float> out(data_.begin() + static_cast<std::ptrdiff_t>(begin * stride),
                         data_.begin() + static_cast<std::ptrdiff_t>(end * stride));
  return PatchGrid(patch_, end - begin, rows_, cols_, channels_, std::move(out));
}

PatchGrid patchify(const LatentGrid& grid, PatchDims patch) {
  const GridDims& d = grid.dims();
  if (patch.t < 1 || patch.h < 1 || patch.w < 1) {
    throw DimensionError("patch extents must be positive");
  }
  if (d.frames % patch.t != 0) {
    throw DimensionError("time axis: " + std::to_string(d.frames) +
                         " frames not divisible by patch extent " + std::to_string(patch.t));
  }
  if (d.rows % patch.h != 0) {
    throw DimensionError("row axis: " + std::to_string(d.rows) +
                         " rows not divisible by patch extent " + std::to_string(patch.h));
  }
  if (d.cols % patch.w != 0) {
    throw DimensionError("col axis: " + std::to_string(d.cols) +
                         " cols not divisible by patch extent " + std::to_string(patch.w));
  }
  const int pf = d.frames / patch.t;
  const int pr = d.rows / patch.h;
  const int pc = d.cols / patch.w;
  std::vector<float> out;
  out.reserve(d.size());
  for (int t = 0; t < pf; ++t)
    for (int y = 0; y < pr; ++y)
      for (int x = 0; x < pc; ++x)
        for (int dt = 0; dt < patch.t; ++dt)
          for (int dy = 0; dy < patch.h; ++dy)
            for (int dx = 0; dx < patch.w; ++dx)
              for (int c = 0; c < d.channels; ++c)
                out.push_back(grid.at(t * patch.t + dt, y * patch.h + dy, x * patch.w + dx, c));
  return PatchGrid(patch, pf, pr, pc, d.channels, std::move(out));
}

LatentGrid unpatchify(const PatchGrid& patches) {
  const PatchDims p = patches.patch_dims();
  GridDims d{patches.frames() * p.t, patches.rows() * p.h, patches.cols() * p.w,
             patches.channels()};
  std::vector<float> out(d.size());
  for (int t = 0; t < patches.frames(); ++t)
    for (int y = 0; y < patches.rows(); ++y)
      for (int x = 0; x < patches.cols(); ++x) {
        auto v = patches.patch(t, y, x);
        std::size_t i = 0;
        for (int dt = 0; dt < p.t; ++dt)
          for (int dy = 0; dy < p.h; ++dy)
            for (int dx = 0; dx < p.w; ++dx)
              for (int c = 0; c < d.channels; ++c)
                out[d.index(t * p.t + dt, y * p.h + dy, x * p.w + dx, c)] = v[i++];
      }
  return LatentGrid(d, std::move(out));
}

BoolField all_true(int frames, int rows, int cols) {
  return BoolField(frames, rows, cols, std::uint8_t{1});
}

bool frame_all_true(const BoolField& mask, int t) {
  for (int y = 0; y < mask.rows(); ++y)
    for (int x = 0; x < mask.cols(); ++x)
      if (!mask.at(t, y, x)) return false;
  return true;
}

std::size_t count_true(const BoolField& mask) {
  return static_cast<std::size_t>(
      std::count_if(mask.data().begin(), mask.data().end(), [](std::uint8_t b) { return b != 0; }));
}

void require_first_frame_kept(const BoolField& mask, const char* who) {
  if (mask.frames() < 1 || mask.rows() < 1 || mask.cols() < 1) {
    throw ValidationError(std::string(who) + ": keep mask is empty");
  }
  if (!frame_all_true(mask, 0)) {
    throw ValidationError(std::string(who) + ": keep mask frame 0 must be all-True");
  }
}

Matrix::Matrix(int rows, int cols, std::vector<float> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (rows_ < 0 || cols_ < 0 ||
      data_.size() != static_cast<std::size_t>(rows_) * static_cast<std::size_t>(cols_)) {
    throw DimensionError("matrix payload length does not match extents");
  }
}

void multiply_row(std::span<const float> in, const Matrix& w, std::span<float> out) {
  if (static_cast<int>(in.size()) != w.rows() || static_cast<int>(out.size()) != w.cols()) {
    throw DimensionError("row-vector/matrix product: inner dimensions differ");
  }
  std::vector<double> acc(out.size(), 0.0);
  for (int r = 0; r < w.rows(); ++r) {
    const double a = in[r];
    if (a == 0.0) continue;
    auto wr = w.row(r);
    for (std::size_t c = 0; c < acc.size(); ++c) acc[c] += a * wr[c];
  }
  for (std::size_t c = 0; c < acc.size(); ++c) out[c] = static_cast<float>(acc[c]);
}

Matrix multiply(const Matrix& in, const Matrix& w) {
  if (in.cols() != w.rows()) throw DimensionError("matrix product: inner dimensions differ");
  Matrix out(in.rows(), w.cols());
  for (int r = 0; r < in.rows(); ++r) multiply_row(in.row(r), w, out.row(r));
  return out;
}

Matrix transpose(const Matrix& m) {
  Matrix out(m.cols(), m.rows());
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) out(c, r) = m(r, c);
  return out;
}

}  // namespace lipar
