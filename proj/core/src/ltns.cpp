#include "lipar/ltns.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace lipar::ltns {
namespace {

constexpr std::array<char, 4> kMagic = {'L', 'T', 'N', 'S'};

void put_u32(std::ostream& os, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  os.write(b, 4);
}

std::uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) throw FormatError("LTNS: truncated header");
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

std::uint8_t get_u8(std::istream& is) {
  char c;
  if (!is.get(c)) throw FormatError("LTNS: truncated header");
  return static_cast<std::uint8_t>(c);
}

void put_f32(std::ostream& os, float f) {
  std::uint32_t bits;
  std::memcpy(&bits, &f, sizeof bits);
  put_u32(os, bits);
}

void require_shape(const Tensor& t, std::size_t axes, DType dtype, const char* what) {
  if (t.shape.size() != axes) {
    throw FormatError(std::string("LTNS: ") + what + " needs " + std::to_string(axes) +
                      " axes, file has " + std::to_string(t.shape.size()));
  }
  if (t.dtype != dtype) {
    throw FormatError(std::string("LTNS: ") + what + " has the wrong dtype code");
  }
}

}  // namespace

std::size_t Tensor::element_count() const {
  std::size_t n = 1;
  for (auto s : shape) n *= s;
  return n;
}

void write(std::ostream& os, const Tensor& t) {
  if (t.shape.empty() || t.shape.size() > 255) throw FormatError("LTNS: axis count out of range");
  const std::size_t n = t.element_count();
  if ((t.dtype == DType::f32 && t.f32.size() != n) || (t.dtype == DType::u8 && t.u8.size() != n)) {
    throw FormatError("LTNS: payload length does not match shape");
  }
  os.write(kMagic.data(), kMagic.size());
  os.put(static_cast<char>(kVersion));
  os.put(static_cast<char>(t.shape.size()));
  for (auto s : t.shape) put_u32(os, s);
  os.put(static_cast<char>(t.dtype));
  if (t.dtype == DType::f32) {
    for (float f : t.f32) put_f32(os, f);
  } else {
    os.write(reinterpret_cast<const char*>(t.u8.data()), static_cast<std::streamsize>(t.u8.size()));
  }
  if (!os) throw FormatError("LTNS: write failed");
}

Tensor read(std::istream& is) {
  std::array<char, 4> magic{};
  if (!is.read(magic.data(), 4) || magic != kMagic) throw FormatError("LTNS: bad magic bytes");
  const auto version = get_u8(is);
  if (version != kVersion) {
    throw FormatError("LTNS: unsupported version " + std::to_string(version));
  }
  Tensor t;
  const auto axes = get_u8(is);
  if (axes == 0) throw FormatError("LTNS: zero axes");
  for (int i = 0; i < axes; ++i) t.shape.push_back(get_u32(is));
  const auto code = get_u8(is);
  if (code > 1) throw FormatError("LTNS: unknown dtype code " + std::to_string(code));
  t.dtype = static_cast<DType>(code);

  const std::size_t n = t.element_count();
  const std::size_t bytes = n * (t.dtype == DType::f32 ? 4 : 1);
  std::string payload(bytes, '\0');
  is.read(payload.data(), static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(is.gcount()) != bytes) {
    throw FormatError("LTNS: payload holds " + std::to_string(is.gcount()) + " bytes, header requires " +
                      std::to_string(bytes));
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw FormatError("LTNS: trailing bytes after payload (header requires " +
                      std::to_string(bytes) + ")");
  }
  if (t.dtype == DType::f32) {
    t.f32.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto* b = reinterpret_cast<const unsigned char*>(payload.data() + 4 * i);
      std::uint32_t bits = static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
                           (static_cast<std::uint32_t>(b[2]) << 16) |
                           (static_cast<std::uint32_t>(b[3]) << 24);
      std::memcpy(&t.f32[i], &bits, 4);
    }
  } else {
    t.u8.assign(payload.begin(), payload.end());
  }
  return t;
}

void write_file(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw FormatError("LTNS: cannot open " + path.string() + " for writing");
  write(os, t);
}

Tensor read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw FormatError("LTNS: cannot open " + path.string());
  return read(is);
}

Tensor from_grid(const LatentGrid& grid) {
  const auto& d = grid.dims();
  Tensor t;
  t.shape = {static_cast<std::uint32_t>(d.frames), static_cast<std::uint32_t>(d.rows),
             static_cast<std::uint32_t>(d.cols), static_cast<std::uint32_t>(d.channels)};
  t.dtype = DType::f32;
  t.f32.assign(grid.data().begin(), grid.data().end());
  return t;
}

LatentGrid to_grid(const Tensor& t) {
  require_shape(t, 4, DType::f32, "latent grid");
  GridDims d{static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]),
             static_cast<int>(t.shape[2]), static_cast<int>(t.shape[3])};
  return LatentGrid(d, t.f32);
}

Tensor from_mask(const BoolField& mask) {
  Tensor t;
  t.shape = {static_cast<std::uint32_t>(mask.frames()), static_cast<std::uint32_t>(mask.rows()),
             static_cast<std::uint32_t>(mask.cols())};
  t.dtype = DType::u8;
  t.u8.assign(mask.data().begin(), mask.data().end());
  return t;
}

BoolField to_mask(const Tensor& t) {
  require_shape(t, 3, DType::u8, "keep mask");
  std::vector<std::uint8_t> bits(t.u8.size());
  for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = t.u8[i] != 0 ? 1 : 0;
  return BoolField(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]),
                   static_cast<int>(t.shape[2]), std::move(bits));
}

Tensor from_kept(const PrunedPatchSet& set) {
  Tensor t;
  t.shape = {static_cast<std::uint32_t>(set.kept_count()), static_cast<std::uint32_t>(set.patch.t),
             static_cast<std::uint32_t>(set.patch.h), static_cast<std::uint32_t>(set.patch.w),
             static_cast<std::uint32_t>(set.channels)};
  t.dtype = DType::f32;
  t.f32 = set.kept;
  return t;
}

std::vector<float> kept_values(const Tensor& t, PatchDims& patch, int& channels) {
  require_shape(t, 5, DType::f32, "kept patches");
  patch = PatchDims{static_cast<int>(t.shape[1]), static_cast<int>(t.shape[2]),
                    static_cast<int>(t.shape[3])};
  channels = static_cast<int>(t.shape[4]);
  return t.f32;
}

Tensor from_matrix(const Matrix& m) {
  Tensor t;
  t.shape = {static_cast<std::uint32_t>(m.rows()), static_cast<std::uint32_t>(m.cols())};
  t.dtype = DType::f32;
  t.f32.assign(m.data().begin(), m.data().end());
  return t;
}

Matrix to_matrix(const Tensor& t) {
  require_shape(t, 2, DType::f32, "matrix");
  return Matrix(static_cast<int>(t.shape[0]), static_cast<int>(t.shape[1]), t.f32);
}

}  // namespace lipar::ltns
