#include "fgs/dataset.hpp"

#include <png.h>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>
#include <sstream>

namespace fgs {

namespace {

constexpr double kPi = 3.14159265358979323846;

[[noreturn]] void parse_fail(const std::string& path, std::size_t line,
                             const std::string& what) {
  throw ParseError(path + ": line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_csv_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream stream(line);
  while (std::getline(stream, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

std::string trimmed(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

double parse_double(const std::string& cell, const std::string& path,
                    std::size_t line) {
  const std::string text = trimmed(cell);
  double value = 0.0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    parse_fail(path, line, "non-numeric cell '" + cell + "'");
  return value;
}

int parse_int(const std::string& cell, const std::string& path,
              std::size_t line) {
  const std::string text = trimmed(cell);
  int value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    parse_fail(path, line, "non-integer cell '" + cell + "'");
  return value;
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::ofstream open_for_write(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParseError(path + ": cannot open for writing");
  return out;
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

// ---- PPM (P6) -------------------------------------------------------------

/// Reads one whitespace-delimited token, skipping `#` comments.
std::string ppm_token(std::istream& in) {
  std::string token;
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
    token.push_back(static_cast<char>(c));
    c = in.get();
  }
  return token;
}

ImageBuffer load_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open");
  if (ppm_token(in) != "P6")
    throw FormatError(path + ": not a binary P6 image");
  ImageBuffer image;
  try {
    image.width = std::stoi(ppm_token(in));
    image.height = std::stoi(ppm_token(in));
    int maxval = std::stoi(ppm_token(in));
    if (maxval != 255)
      throw FormatError(path + ": only 8-bit images are supported");
  } catch (const std::logic_error&) {
    throw ParseError(path + ": malformed header");
  }
  if (image.width <= 0 || image.height <= 0)
    throw ParseError(path + ": malformed header");
  const std::size_t bytes =
      3u * static_cast<std::size_t>(image.width) *
      static_cast<std::size_t>(image.height);
  image.rgb.resize(bytes);
  in.read(reinterpret_cast<char*>(image.rgb.data()),
          static_cast<std::streamsize>(bytes));
  if (static_cast<std::size_t>(in.gcount()) != bytes)
    throw ParseError(path + ": truncated pixel data");
  return image;
}

void save_ppm(const ImageBuffer& image, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  out.write(reinterpret_cast<const char*>(image.rgb.data()),
            static_cast<std::streamsize>(image.rgb.size()));
  if (!out) throw ParseError(path + ": write failed");
}

// ---- PNG ------------------------------------------------------------------

ImageBuffer load_png(const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&png, path.c_str()))
    throw ParseError(path + ": " + png.message);
  png.format = PNG_FORMAT_RGB;
  ImageBuffer image;
  image.width = static_cast<int>(png.width);
  image.height = static_cast<int>(png.height);
  image.rgb.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, image.rgb.data(), 0, nullptr)) {
    std::string message = png.message;
    png_image_free(&png);
    throw ParseError(path + ": " + message);
  }
  return image;
}

void save_png(const ImageBuffer& image, const std::string& path) {
  png_image png;
  std::memset(&png, 0, sizeof(png));
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(image.width);
  png.height = static_cast<png_uint_32>(image.height);
  png.format = PNG_FORMAT_RGB;
  if (!png_image_write_to_file(&png, path.c_str(), 0, image.rgb.data(), 0,
                               nullptr))
    throw ParseError(path + ": " + png.message);
}

void check_raster(const std::vector<int>& labels, int width, int height) {
  if (width <= 0 || height <= 0)
    throw ParameterError("image dimensions must be positive");
  if (labels.size() !=
      static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw ShapeError("label count " + std::to_string(labels.size()) +
                     " does not fill a " + std::to_string(width) + "x" +
                     std::to_string(height) + " raster");
}

} // namespace

// ---- generators -----------------------------------------------------------

PointCloud gen_spiral(int classes, int per_class, double h, double r,
                      std::uint64_t seed) {
  if (classes < 1) throw ParameterError("spiral needs at least one class");
  if (per_class < 1)
    throw ParameterError("spiral needs at least one point per class");
  const Eigen::Index n =
      static_cast<Eigen::Index>(classes) * static_cast<Eigen::Index>(per_class);
  PointCloud cloud;
  cloud.coordinates.resize(n, 3);
  cloud.labels.resize(static_cast<std::size_t>(n));
  cloud.provenance = "spiral(classes=" + std::to_string(classes) +
                     ",per_class=" + std::to_string(per_class) +
                     ",seed=" + std::to_string(seed) + ")";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> jitter(0.0, 0.1 * r);
  Eigen::Index row = 0;
  for (int c = 0; c < classes; ++c)
    for (int i = 0; i < per_class; ++i, ++row) {
      const double t = 1.0 - unit(rng);  // uniform in (0, 1]
      const double theta = 2.0 * kPi * (t + static_cast<double>(c) / classes);
      cloud.coordinates(row, 0) = t * r * std::cos(theta) + jitter(rng);
      cloud.coordinates(row, 1) = t * r * std::sin(theta) + jitter(rng);
      cloud.coordinates(row, 2) = h * t + jitter(rng);
      cloud.labels[static_cast<std::size_t>(row)] = c;
    }
  return cloud;
}

PointCloud gen_crescent_fullmoon(Eigen::Index n, double r1, double r2,
                                 double r3, std::uint64_t seed) {
  if (n < 4) throw ParameterError("crescent-fullmoon needs at least 4 points");
  if (r1 <= 0.0 || r2 <= 0.0 || r3 <= r2)
    throw ParameterError("crescent-fullmoon radii must satisfy "
                         "r1 > 0, r3 > r2 > 0");
  const Eigen::Index n_moon = n / 4;
  PointCloud cloud;
  cloud.coordinates.resize(n, 2);
  cloud.labels.resize(static_cast<std::size_t>(n));
  cloud.provenance = "crescent-fullmoon(n=" + std::to_string(n) +
                     ",seed=" + std::to_string(seed) + ")";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (Eigen::Index i = 0; i < n_moon; ++i) {
    const double phi = 2.0 * kPi * unit(rng);
    const double dist = r1 * unit(rng);
    cloud.coordinates(i, 0) = dist * std::cos(phi);
    cloud.coordinates(i, 1) = dist * std::sin(phi);
    cloud.labels[static_cast<std::size_t>(i)] = 0;
  }
  for (Eigen::Index i = n_moon; i < n;) {
    const double x = r3 * (2.0 * unit(rng) - 1.0);
    const double y = -r3 * unit(rng);  // lower half plane
    const double dist = std::hypot(x, y);
    if (dist <= r2 || dist > r3) continue;
    cloud.coordinates(i, 0) = x;
    cloud.coordinates(i, 1) = y;
    cloud.labels[static_cast<std::size_t>(i)] = 1;
    ++i;
  }
  return cloud;
}

// ---- CSV ------------------------------------------------------------------

PointCloud load_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || trimmed(line).empty())
    parse_fail(path, 1, "missing header row");
  std::vector<std::string> header = split_csv_row(line);
  bool labeled = !header.empty() && trimmed(header.back()) == "label";
  const std::size_t columns = header.size();
  const std::size_t dims = columns - (labeled ? 1u : 0u);
  if (dims < 1) parse_fail(path, 1, "no coordinate columns");

  std::vector<double> values;
  std::vector<int> labels;
  std::size_t rows = 0;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trimmed(line).empty()) continue;
    std::vector<std::string> cells = split_csv_row(line);
    if (cells.size() != columns)
      parse_fail(path, line_number,
                 "expected " + std::to_string(columns) + " cells, found " +
                     std::to_string(cells.size()));
    for (std::size_t t = 0; t < dims; ++t) {
      double v = parse_double(cells[t], path, line_number);
      if (!std::isfinite(v))
        parse_fail(path, line_number, "non-finite coordinate");
      values.push_back(v);
    }
    if (labeled) labels.push_back(parse_int(cells.back(), path, line_number));
    ++rows;
  }
  if (rows == 0) parse_fail(path, line_number, "no data rows");

  PointCloud cloud;
  cloud.coordinates.resize(static_cast<Eigen::Index>(rows),
                           static_cast<Eigen::Index>(dims));
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t t = 0; t < dims; ++t)
      cloud.coordinates(static_cast<Eigen::Index>(i),
                        static_cast<Eigen::Index>(t)) = values[i * dims + t];
  cloud.labels = std::move(labels);
  cloud.provenance = path;
  return cloud;
}

void save_points_csv(const PointCloud& cloud, const std::string& path) {
  if (cloud.has_labels() &&
      cloud.labels.size() != static_cast<std::size_t>(cloud.size()))
    throw ShapeError("label count does not match point count");
  std::ofstream out = open_for_write(path);
  for (Eigen::Index t = 0; t < cloud.dims(); ++t)
    out << (t ? "," : "") << 'x' << t;
  if (cloud.has_labels()) out << ",label";
  out << '\n';
  for (Eigen::Index i = 0; i < cloud.size(); ++i) {
    for (Eigen::Index t = 0; t < cloud.dims(); ++t)
      out << (t ? "," : "") << format_double(cloud.coordinates(i, t));
    if (cloud.has_labels())
      out << ',' << cloud.labels[static_cast<std::size_t>(i)];
    out << '\n';
  }
  if (!out) throw ParseError(path + ": write failed");
}

void save_labels_csv(const std::vector<int>& labels, const std::string& path) {
  std::ofstream out = open_for_write(path);
  out << "label\n";
  for (int label : labels) out << label << '\n';
  if (!out) throw ParseError(path + ": write failed");
}

std::vector<int> load_labels_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line) || trimmed(line) != "label")
    parse_fail(path, 1, "expected a single 'label' header");
  std::vector<int> labels;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trimmed(line).empty()) continue;
    labels.push_back(parse_int(line, path, line_number));
  }
  return labels;
}

// ---- images ---------------------------------------------------------------

ImageBuffer load_image(const std::string& path) {
  std::ifstream probe(path, std::ios::binary);
  if (!probe) throw ParseError(path + ": cannot open");
  unsigned char magic[8] = {};
  probe.read(reinterpret_cast<char*>(magic), sizeof(magic));
  probe.close();
  static const unsigned char png_sig[8] = {0x89, 'P', 'N', 'G',
                                           '\r', '\n', 0x1a, '\n'};
  if (std::memcmp(magic, png_sig, 8) == 0) return load_png(path);
  if (magic[0] == 'P' && magic[1] == '6') return load_ppm(path);
  throw FormatError(path + ": unsupported image format "
                           "(expected PNG or binary PPM)");
}

void save_image(const ImageBuffer& image, const std::string& path) {
  if (image.width <= 0 || image.height <= 0 ||
      image.rgb.size() != 3u * static_cast<std::size_t>(image.width) *
                              static_cast<std::size_t>(image.height))
    throw ShapeError("image buffer does not match its dimensions");
  if (ends_with(path, ".png"))
    save_png(image, path);
  else if (ends_with(path, ".ppm"))
    save_ppm(image, path);
  else
    throw FormatError(path + ": unsupported image extension "
                             "(expected .png or .ppm)");
}

PointCloud image_to_nodes(const std::string& path, int* width, int* height) {
  ImageBuffer image = load_image(path);
  if (width) *width = image.width;
  if (height) *height = image.height;
  const Eigen::Index n = static_cast<Eigen::Index>(image.width) *
                         static_cast<Eigen::Index>(image.height);
  PointCloud cloud;
  cloud.coordinates.resize(n, 3);
  for (Eigen::Index p = 0; p < n; ++p)
    for (Eigen::Index c = 0; c < 3; ++c)
      cloud.coordinates(p, c) =
          static_cast<double>(image.rgb[static_cast<std::size_t>(3 * p + c)]);
  cloud.provenance = path;
  return cloud;
}

MatrixXd default_palette(int k) {
  if (k < 1) throw ParameterError("palette needs at least one color");
  static const int base[10][3] = {
      {31, 119, 180}, {255, 127, 14},  {44, 160, 44},  {214, 39, 40},
      {148, 103, 189}, {140, 86, 75},  {227, 119, 194}, {127, 127, 127},
      {188, 189, 34}, {23, 190, 207}};
  MatrixXd palette(k, 3);
  for (int i = 0; i < k; ++i) {
    if (i < 10) {
      for (int c = 0; c < 3; ++c) palette(i, c) = base[i][c];
    } else {
      // Evenly spaced hues for the overflow entries.
      const double hue = 6.0 * (i - 10) / std::max(1, k - 10);
      const int sector = static_cast<int>(hue) % 6;
      const double frac = hue - std::floor(hue);
      const double table[6][3] = {{1, frac, 0},     {1 - frac, 1, 0},
                                  {0, 1, frac},     {0, 1 - frac, 1},
                                  {frac, 0, 1},     {1, 0, 1 - frac}};
      for (int c = 0; c < 3; ++c)
        palette(i, c) = std::round(255.0 * table[sector][c]);
    }
  }
  return palette;
}

void labels_to_image(const std::vector<int>& labels, int width, int height,
                     const MatrixXd& palette, const std::string& path) {
  check_raster(labels, width, height);
  if (palette.cols() != 3) throw ShapeError("palette must have three columns");
  ImageBuffer image;
  image.width = width;
  image.height = height;
  image.rgb.resize(labels.size() * 3u);
  for (std::size_t p = 0; p < labels.size(); ++p) {
    const int label = labels[p];
    if (label < 0 || label >= palette.rows())
      throw RangeError("label " + std::to_string(label) +
                       " has no palette entry");
    for (int c = 0; c < 3; ++c)
      image.rgb[3 * p + static_cast<std::size_t>(c)] =
          static_cast<unsigned char>(
              std::clamp(palette(label, c), 0.0, 255.0));
  }
  save_image(image, path);
}

void difference_image(const std::vector<int>& a, const std::vector<int>& b,
                      int width, int height, const std::string& path) {
  check_raster(a, width, height);
  if (b.size() != a.size())
    throw ShapeError("labelings differ in length");
  ImageBuffer image;
  image.width = width;
  image.height = height;
  image.rgb.assign(a.size() * 3u, 0);
  for (std::size_t p = 0; p < a.size(); ++p)
    if (a[p] != b[p])
      image.rgb[3 * p] = image.rgb[3 * p + 1] = image.rgb[3 * p + 2] = 255;
  save_image(image, path);
}

} // namespace fgs
