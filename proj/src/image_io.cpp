#include "stereoloc/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

namespace stereoloc {

namespace {

// Skips whitespace and '#' comment lines between PNM header tokens.
std::string nextToken(std::istream& in) {
  std::string tok;
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
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

long parseDim(const std::string& tok, const std::string& path,
              const char* what) {
  try {
    std::size_t pos = 0;
    long v = std::stol(tok, &pos);
    if (pos != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw MalformedInput(path + ": bad " + what + " '" + tok + "'");
  }
}

}  // namespace

PixelRect clampRect(const PixelRect& rect, int image_w, int image_h) {
  const int x0 = std::max(rect.x0, 0);
  const int y0 = std::max(rect.y0, 0);
  const int x1 = std::min(rect.x0 + rect.w, image_w);
  const int y1 = std::min(rect.y0 + rect.h, image_h);
  if (x1 <= x0 || y1 <= y0) {
    throw EmptyAfterClamp("rect (" + std::to_string(rect.x0) + "," +
                          std::to_string(rect.y0) + "," +
                          std::to_string(rect.w) + "," +
                          std::to_string(rect.h) + ") vs image " +
                          std::to_string(image_w) + "x" +
                          std::to_string(image_h));
  }
  return PixelRect{x0, y0, x1 - x0, y1 - y0};
}

GrayImage readPgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  const std::string magic = nextToken(in);
  if (magic != "P5" && magic != "P2")
    throw MalformedInput(path + ": not a PGM file (magic '" + magic + "')");

  const long w = parseDim(nextToken(in), path, "width");
  const long h = parseDim(nextToken(in), path, "height");
  const long maxval = parseDim(nextToken(in), path, "maxval");
  if (w <= 0 || h <= 0)
    throw MalformedInput(path + ": non-positive image dimensions");
  if (maxval <= 0 || maxval > 65535)
    throw MalformedInput(path + ": unsupported maxval " +
                         std::to_string(maxval));

  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  const long count = w * h;
  if (magic == "P2") {
    for (long i = 0; i < count; ++i) {
      const std::string tok = nextToken(in);
      if (tok.empty()) throw MalformedInput(path + ": truncated P2 data");
      img.data()[i] = static_cast<float>(parseDim(tok, path, "sample"));
    }
  } else if (maxval < 256) {
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(count));
    in.read(reinterpret_cast<char*>(raw.data()), count);
    if (in.gcount() != count) throw MalformedInput(path + ": truncated P5 data");
    for (long i = 0; i < count; ++i) img.data()[i] = raw[static_cast<std::size_t>(i)];
  } else {
    std::vector<std::uint8_t> raw(static_cast<std::size_t>(count) * 2);
    in.read(reinterpret_cast<char*>(raw.data()), count * 2);
    if (in.gcount() != count * 2)
      throw MalformedInput(path + ": truncated 16-bit P5 data");
    for (long i = 0; i < count; ++i) {
      const std::size_t k = static_cast<std::size_t>(i) * 2;
      img.data()[i] = static_cast<float>((raw[k] << 8) | raw[k + 1]);
    }
  }
  return img;
}

void writePgm(const std::string& path, const GrayImage& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "P5\n" << image.width() << " " << image.height() << "\n255\n";
  std::vector<std::uint8_t> raw(static_cast<std::size_t>(image.size()));
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const float v = std::clamp(image.data()[i], 0.0f, 255.0f);
    raw[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(std::lround(v));
  }
  out.write(reinterpret_cast<const char*>(raw.data()),
            static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("write failed: " + path);
}

Image<float> readPfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);

  const std::string magic = nextToken(in);
  if (magic != "Pf")
    throw MalformedInput(path + ": expected grayscale PFM (magic '" + magic +
                         "')");
  const long w = parseDim(nextToken(in), path, "width");
  const long h = parseDim(nextToken(in), path, "height");
  const std::string scale_tok = nextToken(in);
  double scale = 0.0;
  try {
    scale = std::stod(scale_tok);
  } catch (const std::exception&) {
    throw MalformedInput(path + ": bad scale '" + scale_tok + "'");
  }
  if (w <= 0 || h <= 0)
    throw MalformedInput(path + ": non-positive image dimensions");
  const bool little_endian = scale < 0.0;

  Image<float> img(static_cast<int>(w), static_cast<int>(h));
  std::vector<float> row(static_cast<std::size_t>(w));
  // PFM stores rows bottom-up.
  for (long y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(w * sizeof(float)));
    if (in.gcount() != static_cast<std::streamsize>(w * sizeof(float)))
      throw MalformedInput(path + ": truncated PFM data");
    for (long x = 0; x < w; ++x) {
      float v = row[static_cast<std::size_t>(x)];
      if (!little_endian) {
        std::uint32_t bits;
        std::memcpy(&bits, &v, 4);
        bits = __builtin_bswap32(bits);
        std::memcpy(&v, &bits, 4);
      }
      img(static_cast<int>(x), static_cast<int>(y)) =
          (std::isfinite(v) && v >= 0.0f) ? v : invalidValue<float>();
    }
  }
  return img;
}

void writePfm(const std::string& path, const Image<float>& image) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "Pf\n" << image.width() << " " << image.height() << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(image.width()));
  for (int y = image.height() - 1; y >= 0; --y) {
    for (int x = 0; x < image.width(); ++x) {
      const float v = image(x, y);
      row[static_cast<std::size_t>(x)] = isValid(v) ? v : -1.0f;
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
  if (!out) throw IoError("write failed: " + path);
}

GrayImage visualize(const Image<float>& image) {
  float lo = std::numeric_limits<float>::max();
  float hi = std::numeric_limits<float>::lowest();
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const float v = image.data()[i];
    if (!isValid(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  GrayImage vis(image.width(), image.height(), 0.0f);
  if (lo > hi) return vis;  // no valid pixels
  const float span = hi - lo;
  for (Eigen::Index i = 0; i < image.size(); ++i) {
    const float v = image.data()[i];
    if (!isValid(v)) continue;
    vis.data()[i] =
        span > 0.0f ? 1.0f + 254.0f * (v - lo) / span : 255.0f;
  }
  return vis;
}

}  // namespace stereoloc
