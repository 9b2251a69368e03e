#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "lipar/errors.hpp"

namespace lipar {

/// Extents of a video tensor: frames, rows, cols, channels.
struct GridDims {
  int frames = 0;
  int rows = 0;
  int cols = 0;
  int channels = 0;

  std::size_t size() const {
    return static_cast<std::size_t>(frames) * rows * cols * channels;
  }
  std::size_t index(int t, int y, int x, int c) const {
    return ((static_cast<std::size_t>(t) * rows + y) * cols + x) * channels + c;
  }
  bool operator==(const GridDims&) const = default;
};

/// Dense (T, H, W, C) float tensor, frame-major then row-major. Used for
/// latents and pixel frames alike. Values are immutable once constructed.
class LatentGrid {
 public:
  LatentGrid() = default;
  /// Throws ValidationError on non-positive dims, a length mismatch, or a
  /// non-finite value.
  LatentGrid(GridDims dims, std::vector<float> data);

  static LatentGrid zeros(GridDims dims);

  const GridDims& dims() const { return dims_; }
  std::span<const float> data() const { return data_; }
  float at(int t, int y, int x, int c) const { return data_[dims_.index(t, y, x, c)]; }

  /// Frames [begin, end) as a new grid.
  LatentGrid frames(int begin, int end) const;

  bool operator==(const LatentGrid&) const = default;

 private:
  GridDims dims_{};
  std::vector<float> data_;
};

/// Per-axis patch extent over (time, row, col). Channels are never patched.
struct PatchDims {
  int t = 1;
  int h = 1;
  int w = 1;

  int volume() const { return t * h * w; }
  bool operator==(const PatchDims&) const = default;
};

/// Grid of flattened patch vectors indexed (t, y, x). Inside a patch the
/// element order is (dt, dy, dx, channel), time-major.
class PatchGrid {
 public:
  PatchGrid() = default;
  PatchGrid(PatchDims patch, int frames, int rows, int cols, int channels,
            std::vector<float> data);

  const PatchDims& patch_dims() const { return patch_; }
  int frames() const { return frames_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int channels() const { return channels_; }
  int patch_length() const { return patch_.volume() * channels_; }
  std::size_t patch_count() const {
    return static_cast<std::size_t>(frames_) * rows_ * cols_;
  }
  std::size_t patch_index(int t, int y, int x) const {
    return (static_cast<std::size_t>(t) * rows_ + y) * cols_ + x;
  }

  std::span<const float> patch(int t, int y, int x) const {
    return std::span<const float>(data_).subspan(patch_index(t, y, x) * patch_length(),
                                                 patch_length());
  }
  std::span<const float> data() const { return data_; }

  /// Patch frames [begin, end) as a new grid.
  PatchGrid frames(int begin, int end) const;

  bool operator==(const PatchGrid&) const = default;

 private:
  PatchDims patch_{};
  int frames_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Throws DimensionError naming the first axis not divisible by the patch.
PatchGrid patchify(const LatentGrid& grid, PatchDims patch);
LatentGrid unpatchify(const PatchGrid& patches);

/// Scalar or boolean field over (frame, row, col) at patch resolution.
template <typename T>
class Field3 {
 public:
  Field3() = default;
  Field3(int frames, int rows, int cols, T fill = T{})
      : frames_(frames), rows_(rows), cols_(cols),
        data_(checked_size(frames, rows, cols), fill) {}
  Field3(int frames, int rows, int cols, std::vector<T> data)
      : frames_(frames), rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != checked_size(frames, rows, cols)) {
      throw DimensionError("field payload length does not match extents");
    }
  }

  int frames() const { return frames_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  std::size_t index(int t, int y, int x) const {
    return (static_cast<std::size_t>(t) * rows_ + y) * cols_ + x;
  }

  T at(int t, int y, int x) const { return data_[index(t, y, x)]; }
  T& at(int t, int y, int x) { return data_[index(t, y, x)]; }

  std::span<const T> data() const { return data_; }
  std::span<T> data() { return data_; }

  bool same_shape(const Field3& o) const {
    return frames_ == o.frames_ && rows_ == o.rows_ && cols_ == o.cols_;
  }
  bool operator==(const Field3&) const = default;

 private:
  static std::size_t checked_size(int f, int r, int c) {
    if (f < 0 || r < 0 || c < 0) throw DimensionError("negative field extent");
    return static_cast<std::size_t>(f) * r * c;
  }

  int frames_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

/// Per-location L1 distances between patch frames.
using DeltaField = Field3<double>;
/// uint8_t rather than bool so spans and data() work.
using BoolField = Field3<std::uint8_t>;
/// True = token kept, False = pruned. Frame 0 must be all-True wherever a
/// mask is consumed (restore, build_plan).
using KeepMaskSequence = BoolField;

BoolField all_true(int frames, int rows, int cols);
bool frame_all_true(const BoolField& mask, int t);
std::size_t count_true(const BoolField& mask);
/// Throws ValidationError if frame 0 is missing or not fully kept.
void require_first_frame_kept(const BoolField& mask, const char* who);

/// Row-major float matrix, used for token embeddings and projection weights.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols, float fill = 0.0f)
      : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {}
  Matrix(int rows, int cols, std::vector<float> data);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  float operator()(int r, int c) const { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  float& operator()(int r, int c) { return data_[static_cast<std::size_t>(r) * cols_ + c]; }
  std::span<const float> row(int r) const {
    return std::span<const float>(data_).subspan(static_cast<std::size_t>(r) * cols_, cols_);
  }
  std::span<float> row(int r) {
    return std::span<float>(data_).subspan(static_cast<std::size_t>(r) * cols_, cols_);
  }
  std::span<const float> data() const { return data_; }
  std::span<float> data() { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<float> data_;
};

/// out = in * W for a row vector `in` (length W.rows()), accumulated in double.
void multiply_row(std::span<const float> in, const Matrix& w, std::span<float> out);
/// Every row of `in` times W.
Matrix multiply(const Matrix& in, const Matrix& w);
Matrix transpose(const Matrix& m);

}  // namespace lipar
