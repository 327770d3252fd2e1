#include "qcwarp/io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <csetjmp>
#include <cstring>
#include <fstream>
#include <iterator>

#include "qcwarp/error.hpp"

namespace qcwarp::io {

namespace {

class Writer {
 public:
  void raw(const char* magic) { bytes_.insert(bytes_.end(), magic, magic + 4); }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double d) {
    const auto v = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  Bytes take() { return std::move(bytes_); }

 private:
  Bytes bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void expect_magic(const char* magic) {
    need(4);
    if (std::memcmp(bytes_.data(), magic, 4) != 0) {
      throw Error(ErrorKind::Format, std::string("bad magic, expected ") + magic);
    }
    pos_ = 4;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  void expect_end() const {
    if (pos_ != bytes_.size()) throw Error(ErrorKind::Format, "trailing bytes after payload");
  }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorKind::Format, "truncated file");
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

MeshPtr read_mesh_header(Reader& r) {
  const auto w = r.u32();
  const auto h = r.u32();
  if (w < 2 || h < 2 || w > (1u << 15) || h > (1u << 15)) {
    throw Error(ErrorKind::Format, "implausible grid size in header");
  }
  return build_grid_mesh(static_cast<int>(w), static_cast<int>(h));
}

}  // namespace

Bytes encode_map(const DeformationMap& map) {
  Writer w;
  w.raw("QCM1");
  w.u32(static_cast<std::uint32_t>(map.mesh().width_v()));
  w.u32(static_cast<std::uint32_t>(map.mesh().height_v()));
  for (const auto& p : map.positions()) {
    w.f64(p.x);
    w.f64(p.y);
  }
  return w.take();
}

DeformationMap decode_map(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic("QCM1");
  auto mesh = read_mesh_header(r);
  std::vector<Vec2> pos(mesh->vertex_count());
  for (auto& p : pos) {
    p.x = r.f64();
    p.y = r.f64();
  }
  r.expect_end();
  return DeformationMap(std::move(mesh), std::move(pos));
}

Bytes encode_field(const BeltramiField& field) {
  Writer w;
  w.raw("QCB1");
  w.u32(static_cast<std::uint32_t>(field.mesh().width_v()));
  w.u32(static_cast<std::uint32_t>(field.mesh().height_v()));
  for (const auto& mu : field.values()) {
    w.f64(mu.real());
    w.f64(mu.imag());
  }
  return w.take();
}

BeltramiField decode_field(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic("QCB1");
  auto mesh = read_mesh_header(r);
  std::vector<Complex> mu(mesh->face_count());
  for (auto& z : mu) {
    const double re = r.f64();
    const double im = r.f64();
    z = {re, im};
  }
  r.expect_end();
  return BeltramiField(std::move(mesh), std::move(mu));
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for reading");
  Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::Io, "failed reading '" + path.string() + "'");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

DeformationMap read_map(const std::filesystem::path& path) { return decode_map(read_file(path)); }
void write_map(const std::filesystem::path& path, const DeformationMap& map) {
  write_file(path, encode_map(map));
}
BeltramiField read_field(const std::filesystem::path& path) { return decode_field(read_file(path)); }
void write_field(const std::filesystem::path& path, const BeltramiField& field) {
  write_file(path, encode_field(field));
}

std::uint32_t quantize(double sample, std::uint32_t maxval) {
  const double s = std::nearbyint(std::clamp(sample, 0.0, 1.0) * maxval);  // ties to even
  return static_cast<std::uint32_t>(s);
}

// ---------------------------------------------------------------------------
// PNG

namespace {

struct MemoryIn {
  std::span<const std::uint8_t> bytes;
  std::size_t pos = 0;
};

void png_read_mem(png_structp png, png_bytep out, png_size_t n) {
  auto* src = static_cast<MemoryIn*>(png_get_io_ptr(png));
  if (src->bytes.size() - src->pos < n) png_error(png, "truncated PNG");
  std::memcpy(out, src->bytes.data() + src->pos, n);
  src->pos += n;
}

void png_write_mem(png_structp png, png_bytep data, png_size_t n) {
  auto* dst = static_cast<Bytes*>(png_get_io_ptr(png));
  dst->insert(dst->end(), data, data + n);
}

void png_flush_mem(png_structp) {}

// Error text is copied here before libpng longjmps back.
void png_error_fn(png_structp png, png_const_charp msg) {
  auto* buf = static_cast<std::string*>(png_get_error_ptr(png));
  if (buf) *buf = msg;
  png_longjmp(png, 1);
}

void png_warning_fn(png_structp, png_const_charp) {}

bool is_png(std::span<const std::uint8_t> b) {
  return b.size() >= 8 && png_sig_cmp(b.data(), 0, 8) == 0;
}

RasterImage decode_png(std::span<const std::uint8_t> bytes) {
  std::string err;
  MemoryIn src{bytes, 0};
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  if (!png) throw Error(ErrorKind::Io, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  png_uint_32 width = 0;
  png_uint_32 height = 0;
  int depth = 0;
  int channels = 0;
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
    throw Error(ErrorKind::Format, "invalid PNG: " + err);
  }
  png_set_read_fn(png, &src, png_read_mem);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  depth = png_get_bit_depth(png, info);
  const int color = png_get_color_type(png, info);
  if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
  if (color & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  depth = png_get_bit_depth(png, info);
  channels = png_get_channels(png, info);
  const std::size_t rowbytes = png_get_rowbytes(png, info);
  pixels.resize(rowbytes * height);
  rows.resize(height);
  for (png_uint_32 r = 0; r < height; ++r) rows[r] = pixels.data() + r * rowbytes;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  if (channels != 1 && channels != 3) throw Error(ErrorKind::Format, "unsupported PNG channel layout");
  const double maxval = depth == 16 ? 65535.0 : 255.0;
  std::vector<double> data(static_cast<std::size_t>(width) * height * channels);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double raw = depth == 16 ? static_cast<double>((pixels[2 * i] << 8) | pixels[2 * i + 1])
                                   : static_cast<double>(pixels[i]);
    data[i] = raw / maxval;
  }
  return RasterImage(static_cast<int>(width), static_cast<int>(height), channels, std::move(data));
}

// ---------------------------------------------------------------------------
// PNM

RasterImage decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip_space();
    std::uint64_t v = 0;
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(bytes[pos]) && v < (1u << 20)) v = v * 10 + (bytes[pos++] - '0');
    if (pos == start) throw Error(ErrorKind::Format, "malformed PNM header");
    return v;
  };
  const int channels = bytes[1] == '5' ? 1 : 3;
  const auto w = number();
  const auto h = number();
  const auto maxval = number();
  if (w == 0 || h == 0 || maxval == 0 || maxval > 65535 || w > (1u << 16) || h > (1u << 16)) {
    throw Error(ErrorKind::Format, "unsupported PNM dimensions or maxval");
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw Error(ErrorKind::Format, "malformed PNM header");
  ++pos;
  const std::size_t bps = maxval > 255 ? 2 : 1;
  const std::size_t count = w * h * channels;
  if (bytes.size() - pos < count * bps) throw Error(ErrorKind::Format, "truncated PNM data");
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double raw = bps == 2 ? static_cast<double>((bytes[pos + 2 * i] << 8) | bytes[pos + 2 * i + 1])
                                : static_cast<double>(bytes[pos + i]);
    data[i] = raw / static_cast<double>(maxval);
  }
  return RasterImage(static_cast<int>(w), static_cast<int>(h), channels, std::move(data));
}

bool is_pnm(std::span<const std::uint8_t> b) {
  return b.size() >= 3 && b[0] == 'P' && (b[1] == '5' || b[1] == '6');
}

void check_depth(int bit_depth) {
  if (bit_depth != 8 && bit_depth != 16) {
    throw Error(ErrorKind::InvalidArgument, "bit depth must be 8 or 16");
  }
}

}  // namespace

RasterImage decode_image(std::span<const std::uint8_t> bytes) {
  if (is_png(bytes)) return decode_png(bytes);
  if (is_pnm(bytes)) return decode_pnm(bytes);
  throw Error(ErrorKind::Format, "unrecognised image format (expected PNG or binary PGM/PPM)");
}

Bytes encode_png(const RasterImage& image, int bit_depth) {
  check_depth(bit_depth);
  const std::uint32_t maxval = bit_depth == 16 ? 65535 : 255;
  const std::size_t bps = bit_depth / 8;
  const std::size_t rowbytes = static_cast<std::size_t>(image.width()) * image.channels() * bps;
  std::vector<std::uint8_t> pixels(rowbytes * image.height());
  const auto data = image.data();
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto q = quantize(data[i], maxval);
    if (bps == 2) {
      pixels[2 * i] = static_cast<std::uint8_t>(q >> 8);
      pixels[2 * i + 1] = static_cast<std::uint8_t>(q & 0xFF);
    } else {
      pixels[i] = static_cast<std::uint8_t>(q);
    }
  }
  std::vector<png_bytep> rows(static_cast<std::size_t>(image.height()));
  for (int r = 0; r < image.height(); ++r) rows[r] = pixels.data() + r * rowbytes;

  Bytes out;
  std::string err;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &err, png_error_fn, png_warning_fn);
  if (!png) throw Error(ErrorKind::Io, "libpng initialisation failed");
  png_infop info = png_create_info_struct(png);
  if (!info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, info ? &info : nullptr);
    throw Error(ErrorKind::Io, "PNG encoding failed: " + err);
  }
  png_set_write_fn(png, &out, png_write_mem, png_flush_mem);
  png_set_IHDR(png, info, static_cast<png_uint_32>(image.width()),
               static_cast<png_uint_32>(image.height()), bit_depth,
               image.channels() == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE,
               PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

Bytes encode_pnm(const RasterImage& image, int bit_depth) {
  check_depth(bit_depth);
  const std::uint32_t maxval = bit_depth == 16 ? 65535 : 255;
  const std::string header = std::string(image.channels() == 1 ? "P5" : "P6") + "\n" +
                             std::to_string(image.width()) + " " + std::to_string(image.height()) +
                             "\n" + std::to_string(maxval) + "\n";
  Bytes out(header.begin(), header.end());
  for (double s : image.data()) {
    const auto q = quantize(s, maxval);
    if (bit_depth == 16) out.push_back(static_cast<std::uint8_t>(q >> 8));
    out.push_back(static_cast<std::uint8_t>(q & 0xFF));
  }
  return out;
}

RasterImage read_image(const std::filesystem::path& path) { return decode_image(read_file(path)); }

void write_image(const std::filesystem::path& path, const RasterImage& image, int bit_depth) {
  const auto ext = path.extension().string();
  if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") {
    write_file(path, encode_pnm(image, bit_depth));
  } else {
    write_file(path, encode_png(image, bit_depth));
  }
}

}  // namespace qcwarp::io
