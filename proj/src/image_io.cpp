#include "sodbench/image_io.hpp"

#include <png.h>

#include <cctype>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <vector>

namespace sodbench {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& why) {
  throw std::runtime_error("image " + path.string() + ": " + why);
}

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  for (char& c : ext) c = static_cast<char>(std::tolower(c));
  return ext;
}

Tensor from_bytes(const std::vector<std::uint8_t>& bytes, std::size_t h,
                  std::size_t w) {
  Tensor t({1, h, w});
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    t[i] = static_cast<double>(bytes[i]) / 255.0;
  }
  return t;
}

// --- PGM (binary P5, maxval 255) -----------------------------------------

int next_pgm_token(std::istream& is, const std::filesystem::path& path) {
  // skips whitespace and '#' comments
  for (;;) {
    int c = is.peek();
    if (c == EOF) fail(path, "truncated PGM header");
    if (std::isspace(c)) {
      is.get();
    } else if (c == '#') {
      std::string line;
      std::getline(is, line);
    } else {
      break;
    }
  }
  int value = 0;
  if (!(is >> value)) fail(path, "malformed PGM header");
  return value;
}

Tensor load_pgm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(path, "cannot open");
  char p, five;
  is.get(p);
  is.get(five);
  if (p != 'P' || five != '5') {
    fail(path, "unsupported PGM flavor (only binary P5 is accepted)");
  }
  const int w = next_pgm_token(is, path);
  const int h = next_pgm_token(is, path);
  const int maxval = next_pgm_token(is, path);
  if (w < 1 || h < 1) fail(path, "non-positive PGM dimensions");
  if (maxval != 255) {
    fail(path, "unsupported bit depth, maxval " + std::to_string(maxval) +
                   " (need 255)");
  }
  is.get();  // single whitespace before the raster
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(w) * h);
  if (!is.read(reinterpret_cast<char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()))) {
    fail(path, "truncated PGM raster");
  }
  return from_bytes(bytes, static_cast<std::size_t>(h),
                    static_cast<std::size_t>(w));
}

void save_pgm(const std::filesystem::path& path,
              const std::vector<std::uint8_t>& bytes, std::size_t h,
              std::size_t w) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(path, "cannot open for writing");
  os << "P5\n" << w << " " << h << "\n255\n";
  os.write(reinterpret_cast<const char*>(bytes.data()),
           static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(path, "write failed");
}

// --- PNG -------------------------------------------------------------------

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Tensor load_png(const std::filesystem::path& path) {
  FilePtr file(std::fopen(path.c_str(), "rb"));
  if (!file) fail(path, "cannot open");

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_read_struct(&png, nullptr, nullptr);
    fail(path, "libpng initialization failed");
  }
  std::vector<std::uint8_t> pixels;
  std::vector<png_bytep> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "PNG decode error");
  }
  png_init_io(png, file.get());
  png_read_info(png, info);

  const png_uint_32 w = png_get_image_width(png, info);
  const png_uint_32 h = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth == 16) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unsupported bit depth 16 (need 8-bit)");
  }
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
    png_set_expand_gray_1_2_4_to_8(png);
  }
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_read_update_info(png, info);

  const std::size_t channels = png_get_channels(png, info);
  if (channels != 1 && channels != 3) {
    png_destroy_read_struct(&png, &info, nullptr);
    fail(path, "unsupported channel layout after expansion");
  }
  const std::size_t stride = png_get_rowbytes(png, info);
  pixels.assign(stride * h, 0);
  rows.resize(h);
  for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + y * stride;
  png_read_image(png, rows.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  std::vector<std::uint8_t> gray(static_cast<std::size_t>(w) * h);
  if (channels == 1) {
    for (png_uint_32 y = 0; y < h; ++y) {
      std::memcpy(gray.data() + static_cast<std::size_t>(y) * w,
                  pixels.data() + static_cast<std::size_t>(y) * stride, w);
    }
  } else {
    // integer BT.601 luma
    for (png_uint_32 y = 0; y < h; ++y) {
      const std::uint8_t* row = pixels.data() + static_cast<std::size_t>(y) * stride;
      for (png_uint_32 x = 0; x < w; ++x) {
        const unsigned r = row[3 * x];
        const unsigned g = row[3 * x + 1];
        const unsigned b = row[3 * x + 2];
        gray[static_cast<std::size_t>(y) * w + x] =
            static_cast<std::uint8_t>((299u * r + 587u * g + 114u * b + 500u) /
                                      1000u);
      }
    }
  }
  return from_bytes(gray, h, w);
}

void save_png(const std::filesystem::path& path,
              const std::vector<std::uint8_t>& bytes, std::size_t h,
              std::size_t w) {
  FilePtr file(std::fopen(path.c_str(), "wb"));
  if (!file) fail(path, "cannot open for writing");
  png_structp png =
      png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  if (!png) fail(path, "libpng initialization failed");
  png_infop info = png_create_info_struct(png);
  if (!info) {
    png_destroy_write_struct(&png, nullptr);
    fail(path, "libpng initialization failed");
  }
  std::vector<png_bytep> rows(h);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    fail(path, "PNG encode error");
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(w),
               static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t y = 0; y < h; ++y) {
    rows[y] = const_cast<png_bytep>(bytes.data() + y * w);
  }
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void require_single_channel_image(const Tensor& image, const char* what) {
  require_rank(image, 3, what);
  if (image.extent(0) != 1) {
    throw std::invalid_argument(std::string(what) +
                                " must be single-channel, got " +
                                shape_to_string(image.shape()));
  }
}

}  // namespace

MapRecord load_gray_map(const std::filesystem::path& path, MapKind kind) {
  const std::string ext = lower_extension(path);
  Tensor image;
  if (ext == ".png") {
    image = load_png(path);
  } else if (ext == ".pgm") {
    image = load_pgm(path);
  } else {
    fail(path, "unsupported container '" + ext + "' (need .png or .pgm)");
  }
  return MapRecord{path.stem().string(), kind, std::move(image)};
}

void save_gray_png(const std::filesystem::path& path, const Tensor& image) {
  require_single_channel_image(image, "png output");
  save_png(path, quantize255(image), image.extent(1), image.extent(2));
}

void save_gray_pgm(const std::filesystem::path& path, const Tensor& image) {
  require_single_channel_image(image, "pgm output");
  save_pgm(path, quantize255(image), image.extent(1), image.extent(2));
}

DepthMap normalize_depth(const MapRecord& record) {
  const Tensor& img = record.image;
  double lo = img[0];
  double hi = img[0];
  for (double v : img.data()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  Tensor out(img.shape());
  if (hi > lo) {
    const double span = hi - lo;
    for (std::size_t i = 0; i < img.size(); ++i) out[i] = (img[i] - lo) / span;
  }
  return DepthMap(std::move(out));
}

GroundTruthMask binarize_ground_truth(const MapRecord& record) {
  Tensor out(record.image.shape());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = quantize255(record.image[i]) >= 128 ? 1.0 : 0.0;
  }
  return GroundTruthMask(std::move(out));
}

SaliencyMap to_saliency(const MapRecord& record) {
  return SaliencyMap(record.image);
}

}  // namespace sodbench
