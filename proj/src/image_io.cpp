#include "idpr/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

#include "idpr/error.hpp"

namespace idpr {
namespace {

unsigned char quantize(double v) {
  const double c = std::clamp(v, 0.0, 1.0);
  return static_cast<unsigned char>(std::lround(c * 255.0));
}

double luma(unsigned char r, unsigned char g, unsigned char b) {
  return (0.299 * r + 0.587 * g + 0.114 * b) / 255.0;
}

// Skips whitespace and '#' comment lines between PGM header tokens.
int next_pnm_int(std::istream& in, const std::string& path) {
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  if (c == EOF || !std::isdigit(c)) {
    throw DataError("malformed PGM header in " + path);
  }
  int value = 0;
  while (c != EOF && std::isdigit(c)) {
    value = value * 10 + (c - '0');
    c = in.get();
  }
  return value;
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

bool has_suffix(const std::string& s, const std::string& suffix) {
  if (s.size() < suffix.size()) return false;
  std::string tail = s.substr(s.size() - suffix.size());
  for (char& c : tail) c = static_cast<char>(std::tolower(c));
  return tail == suffix;
}

}  // namespace

Image load_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image file " + path);
  char m0 = 0, m1 = 0;
  in.get(m0);
  in.get(m1);
  if (m0 != 'P' || (m1 != '5' && m1 != '2')) {
    throw DataError("not a PGM file: " + path);
  }
  const bool binary = (m1 == '5');
  const int width = next_pnm_int(in, path);
  const int height = next_pnm_int(in, path);
  const int maxval = next_pnm_int(in, path);
  if (width < 1 || height < 1 || maxval < 1 || maxval > 255) {
    throw DataError("unsupported PGM dimensions or maxval in " + path);
  }
  Image image(width, height);
  if (binary) {
    // Header ends with exactly one whitespace byte, already consumed by
    // next_pnm_int's terminating read.
    std::vector<unsigned char> row(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
      in.read(reinterpret_cast<char*>(row.data()), width);
      if (!in) throw DataError("truncated PGM payload in " + path);
      for (int x = 0; x < width; ++x) {
        image(x, y) = static_cast<double>(row[x]) / maxval;
      }
    }
  } else {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        image(x, y) = static_cast<double>(next_pnm_int(in, path)) / maxval;
      }
    }
  }
  return image;
}

void save_pgm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image file " + path);
  out << "P5\n" << image.width() << ' ' << image.height() << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(image.width()));
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) row[x] = quantize(image(x, y));
    out.write(reinterpret_cast<const char*>(row.data()), image.width());
  }
  if (!out) throw DataError("failed writing " + path);
}

Image load_png_gray(const std::string& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DataError("cannot open image file " + path);

  png_structp png =
      png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("cannot initialize PNG reader");
  }

  // Buffers live outside the setjmp region; sizes are set before any
  // libpng call that can longjmp back here.
  std::vector<unsigned char> data;
  std::vector<png_bytep> rows;
  int width = 0;
  int height = 0;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DataError("failed to decode PNG " + path);
  }

  png_init_io(png, fp.get());
  png_read_info(png, info);
  width = static_cast<int>(png_get_image_width(png, info));
  height = static_cast<int>(png_get_image_height(png, info));

  png_set_strip_16(png);
  png_set_palette_to_rgb(png);
  png_set_expand_gray_1_2_4_to_8(png);
  if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
  png_set_strip_alpha(png);
  png_set_gray_to_rgb(png);
  png_read_update_info(png, info);

  const std::size_t rowbytes = png_get_rowbytes(png, info);
  data.assign(rowbytes * height, 0);
  rows.resize(height);
  for (int y = 0; y < height; ++y) rows[y] = data.data() + y * rowbytes;
  png_read_image(png, rows.data());
  png_destroy_read_struct(&png, &info, nullptr);

  Image image(width, height);
  for (int y = 0; y < height; ++y) {
    const unsigned char* row = data.data() + y * rowbytes;
    for (int x = 0; x < width; ++x) {
      image(x, y) = luma(row[3 * x], row[3 * x + 1], row[3 * x + 2]);
    }
  }
  return image;
}

void save_png(const RgbImage& image, const std::string& path) {
  if (image.width < 1 || image.height < 1) {
    throw DataError("refusing to write empty PNG " + path);
  }
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot write image file " + path);

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw DataError("cannot initialize PNG writer");
  }

  std::vector<png_bytep> rows(image.height);
  for (int y = 0; y < image.height; ++y) {
    rows[y] = const_cast<png_bytep>(image.at(0, y));
  }

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("failed to encode PNG " + path);
  }

  png_init_io(png, fp.get());
  png_set_IHDR(png, info, image.width, image.height, 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void save_png_gray(const Image& image, const std::string& path) {
  save_png(to_rgb(image), path);
}

RgbImage to_rgb(const Image& image) {
  RgbImage rgb(image.width(), image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < image.width(); ++x) {
      const unsigned char v = quantize(image(x, y));
      unsigned char* px = rgb.at(x, y);
      px[0] = px[1] = px[2] = v;
    }
  }
  return rgb;
}

Image load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw DataError("cannot open image file " + path);
  unsigned char magic[2] = {0, 0};
  probe.read(reinterpret_cast<char*>(magic), 2);
  probe.close();
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2')) {
    return load_pgm(path);
  }
  if (magic[0] == 0x89 && magic[1] == 'P') {
    return load_png_gray(path);
  }
  throw DataError("unrecognized image format in " + path);
}

void save_image(const Image& image, const std::string& path) {
  if (has_suffix(path, ".png")) {
    save_png_gray(image, path);
  } else if (has_suffix(path, ".pgm")) {
    save_pgm(image, path);
  } else {
    throw ConfigError("unknown image extension for " + path);
  }
}

}  // namespace idpr
