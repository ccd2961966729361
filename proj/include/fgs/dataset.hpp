#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fgs/errors.hpp"

namespace fgs {

using Eigen::MatrixXd;

/// A finite point set, optionally labeled, with a human-readable provenance
/// string (generator name + seed, or the file it was loaded from).
struct PointCloud {
  MatrixXd coordinates;     ///< n x d, row per point
  std::vector<int> labels;  ///< empty, or one label per point
  std::string provenance;

  Eigen::Index size() const { return coordinates.rows(); }
  Eigen::Index dims() const { return coordinates.cols(); }
  bool has_labels() const { return !labels.empty(); }
};

/// Labeled 3-D spiral: class c of C places points at
/// (t*r*cos(theta), t*r*sin(theta), h*t) with theta = 2*pi*(t + c/C) and
/// t uniform in (0,1], plus Gaussian jitter of standard deviation 0.1*r on
/// every coordinate.  Classes are exactly balanced.
PointCloud gen_spiral(int classes, int per_class, double h = 10.0,
                      double r = 2.0, std::uint64_t seed = 1);

/// Labeled 2-D two-class set: class 0 is a disk ("full moon") of radius r1
/// centered at the origin; class 1 is the half annulus r2 < dist <= r3 in the
/// lower half plane (a crescent opening upward).  Class sizes are floor(n/4)
/// and n - floor(n/4).
PointCloud gen_crescent_fullmoon(Eigen::Index n, double r1 = 5.0,
                                 double r2 = 5.0, double r3 = 8.0,
                                 std::uint64_t seed = 1);

/// CSV with a mandatory header row; d numeric columns, plus an optional final
/// integer column whose header cell is exactly `label`.  Ragged rows,
/// non-numeric cells, or an empty file raise a parse error naming the 1-based
/// line.  Round-trips through save_points_csv are lossless (17 significant
/// digits).
PointCloud load_points_csv(const std::string& path);
void save_points_csv(const PointCloud& cloud, const std::string& path);

/// Single-column CSV (`label` header) holding one integer per row.
void save_labels_csv(const std::vector<int>& labels, const std::string& path);
std::vector<int> load_labels_csv(const std::string& path);

/// 8-bit RGB raster, row-major, 3 bytes per pixel.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<unsigned char> rgb;  ///< size 3 * width * height
};

/// Reads a binary PPM (P6) or PNG file; other formats raise a format error.
ImageBuffer load_image(const std::string& path);

/// Writes PPM or PNG depending on the file extension (.ppm / .png).
void save_image(const ImageBuffer& image, const std::string& path);

/// One node per pixel in row-major order; coordinates are the RGB channel
/// values in 0..255.  Reports the raster shape through the optional pointers.
PointCloud image_to_nodes(const std::string& path, int* width = nullptr,
                          int* height = nullptr);

/// k distinct RGB colors (k x 3, values in 0..255).
MatrixXd default_palette(int k);

/// Writes the label raster as a paletted image; labels are row-major and must
/// fit the raster and index into the palette.
void labels_to_image(const std::vector<int>& labels, int width, int height,
                     const MatrixXd& palette, const std::string& path);

/// Black/white comparison of two labelings of the same raster: white where
/// they differ, black where they agree.
void difference_image(const std::vector<int>& a, const std::vector<int>& b,
                      int width, int height, const std::string& path);

} // namespace fgs
