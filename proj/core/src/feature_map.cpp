#include "hacl/feature_map.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string_view>

#include "hacl/error.hpp"
#include "io_util.hpp"

namespace hacl {

namespace detail {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, "cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::uint8_t> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw Error(Errc::Io, "short read on " + path.string());
  }
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, "cannot create " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(Errc::Io, "write failed on " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string format_double(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, end);
}

}  // namespace detail

namespace {

constexpr std::string_view kFmapMagic = "FMAP";
constexpr std::size_t kFmapFixedHeader = 4 + 2 + 4 + 4 + 4 + 2 + 2;

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::size_t position() const { return pos_; }

  template <typename T>
  T read_le() {
    T value{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      value |= static_cast<T>(static_cast<T>(bytes_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return value;
  }

  std::span<const std::uint8_t> take(std::size_t n) {
    auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xFF));
  }
}

std::vector<float> decode_f32_payload(std::span<const std::uint8_t> payload) {
  std::vector<float> data(payload.size() / 4);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const std::uint32_t bits = static_cast<std::uint32_t>(payload[4 * i]) |
                               (static_cast<std::uint32_t>(payload[4 * i + 1]) << 8) |
                               (static_cast<std::uint32_t>(payload[4 * i + 2]) << 16) |
                               (static_cast<std::uint32_t>(payload[4 * i + 3]) << 24);
    data[i] = std::bit_cast<float>(bits);
  }
  return data;
}

std::size_t checked_element_count(std::uint64_t h, std::uint64_t w, std::uint64_t d) {
  const std::uint64_t limit = std::numeric_limits<std::size_t>::max() / 4;
  if (h == 0 || w == 0 || d == 0) return 0;
  if (h > limit / w || h * w > limit / d) {
    throw Error(Errc::MalformedHeader, "feature map shape overflows");
  }
  return static_cast<std::size_t>(h * w * d);
}

}  // namespace

FeatureMap::FeatureMap(std::string image_id, std::uint32_t grid_h, std::uint32_t grid_w,
                       std::uint32_t dim, std::uint32_t patch_size, std::vector<float> data)
    : image_id_(std::move(image_id)),
      geometry_{grid_h, grid_w, patch_size},
      dim_(dim),
      data_(std::move(data)) {
  if (grid_h == 0 || grid_w == 0 || dim == 0 || patch_size == 0) {
    throw Error(Errc::MalformedHeader, "grid_h, grid_w, dim and patch_size must all be >= 1");
  }
  const std::size_t expected = checked_element_count(grid_h, grid_w, dim);
  if (data_.size() != expected) {
    throw Error(Errc::DimensionMismatch, "expected " + std::to_string(expected) + " floats, got " +
                                             std::to_string(data_.size()));
  }
  const auto bad = std::find_if(data_.begin(), data_.end(), [](float v) { return !std::isfinite(v); });
  if (bad != data_.end()) {
    throw Error(Errc::NonFiniteValue,
                "non-finite feature at element " + std::to_string(bad - data_.begin()));
  }
}

FeatureMap decode_feature_map(std::span<const std::uint8_t> bytes) {
  ByteReader in(bytes);
  if (!in.has(kFmapFixedHeader)) throw Error(Errc::MalformedHeader, "file shorter than FMAP header");
  const auto magic = in.take(4);
  if (!std::equal(magic.begin(), magic.end(), kFmapMagic.begin())) {
    throw Error(Errc::MalformedHeader, "missing FMAP magic");
  }
  const auto version = in.read_le<std::uint16_t>();
  if (version != kFmapVersion) {
    throw Error(Errc::MalformedHeader, "unsupported FMAP version " + std::to_string(version));
  }
  const auto grid_h = in.read_le<std::uint32_t>();
  const auto grid_w = in.read_le<std::uint32_t>();
  const auto dim = in.read_le<std::uint32_t>();
  const auto patch_size = in.read_le<std::uint16_t>();
  const auto id_len = in.read_le<std::uint16_t>();
  if (grid_h == 0 || grid_w == 0 || dim == 0 || patch_size == 0) {
    throw Error(Errc::MalformedHeader, "zero-sized dimension in header");
  }
  if (!in.has(id_len)) throw Error(Errc::MalformedHeader, "image id runs past end of file");
  const auto id_bytes = in.take(id_len);
  std::string image_id(id_bytes.begin(), id_bytes.end());

  const std::size_t count = checked_element_count(grid_h, grid_w, dim);
  if (in.remaining() != count * 4) {
    throw Error(Errc::DimensionMismatch, "header declares " + std::to_string(count * 4) +
                                             " payload bytes, file has " +
                                             std::to_string(in.remaining()));
  }
  return FeatureMap(std::move(image_id), grid_h, grid_w, dim, patch_size,
                    decode_f32_payload(in.take(count * 4)));
}

std::vector<std::uint8_t> encode_feature_map(const FeatureMap& fm) {
  if (fm.image_id().size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(Errc::MalformedHeader, "image id longer than 65535 bytes");
  }
  if (fm.patch_size() > std::numeric_limits<std::uint16_t>::max()) {
    throw Error(Errc::MalformedHeader, "patch size does not fit in u16");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kFmapFixedHeader + fm.image_id().size() + fm.data().size() * 4);
  out.insert(out.end(), kFmapMagic.begin(), kFmapMagic.end());
  put_le<std::uint16_t>(out, kFmapVersion);
  put_le<std::uint32_t>(out, fm.grid_h());
  put_le<std::uint32_t>(out, fm.grid_w());
  put_le<std::uint32_t>(out, fm.dim());
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(fm.patch_size()));
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(fm.image_id().size()));
  out.insert(out.end(), fm.image_id().begin(), fm.image_id().end());
  for (float v : fm.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(v));
  return out;
}

FeatureMap load_feature_map(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_feature_map(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

void write_feature_map(const FeatureMap& fm, const std::filesystem::path& path) {
  detail::write_file(path, encode_feature_map(fm));
}

namespace {

// Pulls the value text following `'key':` out of the array-container header dict.
std::string_view header_field(std::string_view header, std::string_view key) {
  const std::string quoted = "'" + std::string(key) + "'";
  const auto at = header.find(quoted);
  if (at == std::string_view::npos) throw Error(Errc::MalformedHeader, "npy header lacks " + quoted);
  auto rest = header.substr(at + quoted.size());
  const auto colon = rest.find(':');
  if (colon == std::string_view::npos) throw Error(Errc::MalformedHeader, "npy header missing ':'");
  rest = rest.substr(colon + 1);
  while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
  return rest;
}

}  // namespace

FeatureMap decode_npy_feature_map(std::span<const std::uint8_t> bytes, std::string image_id,
                                  std::uint32_t patch_size) {
  ByteReader in(bytes);
  static constexpr std::uint8_t kMagic[] = {0x93, 'N', 'U', 'M', 'P', 'Y'};
  if (!in.has(10)) throw Error(Errc::MalformedHeader, "file shorter than npy preamble");
  const auto magic = in.take(6);
  if (!std::equal(magic.begin(), magic.end(), std::begin(kMagic))) {
    throw Error(Errc::MalformedHeader, "missing npy magic");
  }
  const auto major = in.take(1)[0];
  in.take(1);
  std::size_t header_len = 0;
  if (major == 1) {
    header_len = in.read_le<std::uint16_t>();
  } else if (major == 2 || major == 3) {
    if (!in.has(4)) throw Error(Errc::MalformedHeader, "truncated npy preamble");
    header_len = in.read_le<std::uint32_t>();
  } else {
    throw Error(Errc::MalformedHeader, "unsupported npy version " + std::to_string(major));
  }
  if (!in.has(header_len)) throw Error(Errc::MalformedHeader, "npy header runs past end of file");
  const auto header_bytes = in.take(header_len);
  const std::string header(header_bytes.begin(), header_bytes.end());

  const auto descr = header_field(header, "descr");
  if (descr.substr(0, 5) != "'<f4'") {
    throw Error(Errc::MalformedHeader, "npy dtype must be little-endian float32 ('<f4')");
  }
  if (header_field(header, "fortran_order").substr(0, 5) != "False") {
    throw Error(Errc::MalformedHeader, "npy array must be C-order");
  }
  auto shape = header_field(header, "shape");
  if (shape.empty() || shape.front() != '(') throw Error(Errc::MalformedHeader, "npy shape is not a tuple");
  shape = shape.substr(1, shape.find(')') - 1);
  std::vector<std::uint64_t> dims;
  while (!shape.empty()) {
    while (!shape.empty() && (shape.front() == ' ' || shape.front() == ',')) shape.remove_prefix(1);
    if (shape.empty()) break;
    std::uint64_t value = 0;
    auto [ptr, ec] = std::from_chars(shape.data(), shape.data() + shape.size(), value);
    if (ec != std::errc()) throw Error(Errc::MalformedHeader, "bad npy shape entry");
    dims.push_back(value);
    shape.remove_prefix(static_cast<std::size_t>(ptr - shape.data()));
  }
  if (dims.size() != 3) throw Error(Errc::MalformedHeader, "npy feature array must have shape [H, W, D]");
  for (auto d : dims) {
    if (d == 0 || d > std::numeric_limits<std::uint32_t>::max()) {
      throw Error(Errc::MalformedHeader, "npy dimension out of range");
    }
  }
  const std::size_t count = checked_element_count(dims[0], dims[1], dims[2]);
  if (in.remaining() != count * 4) {
    throw Error(Errc::DimensionMismatch, "npy shape declares " + std::to_string(count * 4) +
                                             " payload bytes, file has " +
                                             std::to_string(in.remaining()));
  }
  return FeatureMap(std::move(image_id), static_cast<std::uint32_t>(dims[0]),
                    static_cast<std::uint32_t>(dims[1]), static_cast<std::uint32_t>(dims[2]),
                    patch_size, decode_f32_payload(in.take(count * 4)));
}

FeatureMap load_npy_feature_map(const std::filesystem::path& path, std::uint32_t patch_size) {
  const auto bytes = detail::read_file(path);
  try {
    return decode_npy_feature_map(bytes, path.stem().string(), patch_size);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

FeatureMap load_any_feature_map(const std::filesystem::path& path, std::uint32_t npy_patch_size) {
  const auto bytes = detail::read_file(path);
  try {
    if (!bytes.empty() && bytes[0] == 0x93) {
      return decode_npy_feature_map(bytes, path.stem().string(), npy_patch_size);
    }
    return decode_feature_map(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

namespace {

template <typename T>
double cosine_impl(std::span<const T> a, std::span<const T> b) {
  if (a.size() != b.size()) {
    throw Error(Errc::LengthMismatch, "cosine_similarity on vectors of length " +
                                          std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double x = a[i];
    const double y = b[i];
    dot += x * y;
    na += x * x;
    nb += y * y;
  }
  if (na == 0.0 || nb == 0.0) throw Error(Errc::ZeroVector, "cosine_similarity of a zero vector");
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

}  // namespace

double cosine_similarity(std::span<const float> a, std::span<const float> b) {
  return cosine_impl(a, b);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  return cosine_impl(a, b);
}

}  // namespace hacl
