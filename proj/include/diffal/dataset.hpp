#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace diffal {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// n points in D ambient dimensions. Immutable after construction; row i is
// point i everywhere in the pipeline.
class PointCloud {
 public:
  // Throws DataError if empty or if any coordinate is NaN/Inf.
  explicit PointCloud(RowMatrix points);

  std::size_t size() const { return static_cast<std::size_t>(points_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points_.cols()); }
  const RowMatrix& points() const { return points_; }
  std::span<const double> point(std::size_t i) const {
    return {points_.data() + i * dim(), dim()};
  }

 private:
  RowMatrix points_;
};

// Per-point integer labels. 0 means "unlabeled"; classes are 1..K.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::size_t n) : values_(n, 0) {}
  explicit LabelVector(std::vector<int> values);
  LabelVector(std::initializer_list<int> values) : LabelVector(std::vector<int>(values)) {}

  std::size_t size() const { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  int& operator[](std::size_t i) { return values_[i]; }
  const std::vector<int>& values() const { return values_; }
  auto begin() const { return values_.begin(); }
  auto end() const { return values_.end(); }

  bool complete() const;        // no zeros
  int max_label() const;        // 0 when everything is unlabeled
  std::size_t count_labeled() const;

  friend bool operator==(const LabelVector&, const LabelVector&) = default;

 private:
  std::vector<int> values_;
};

enum class SampleType { UInt8, Int16, UInt16, Int32, UInt32, Float32, Float64 };
enum class ByteOrder { Little, Big };
// Band-sequential is the default; BIP and BIL are accepted for convenience.
enum class Interleave { Bsq, Bip, Bil };

struct HsiCubeHeader {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::size_t bands = 0;
  SampleType dtype = SampleType::Float32;
  ByteOrder byte_order = ByteOrder::Little;
  Interleave interleave = Interleave::Bsq;

  std::size_t pixels() const { return rows * cols; }
  std::size_t sample_bytes() const;
  std::size_t expected_file_bytes() const { return pixels() * bands * sample_bytes(); }
};

SampleType parse_sample_type(const std::string& tag);
std::string to_string(SampleType t);
ByteOrder parse_byte_order(const std::string& tag);
std::string to_string(ByteOrder b);
Interleave parse_interleave(const std::string& tag);
std::string to_string(Interleave i);

// Row i of the file becomes point i. Errors name the 1-based row.
PointCloud load_csv(const std::filesystem::path& path);
void save_csv(const std::filesystem::path& path, const PointCloud& cloud);

// One integer per line; line i holds the label of point i.
void save_labels(const std::filesystem::path& path, const LabelVector& labels);
LabelVector load_labels(const std::filesystem::path& path);

// Plain-text sidecar with "key = value" lines for rows/cols/bands/dtype/byteorder
// (and optionally interleave).
HsiCubeHeader read_hsi_header(const std::filesystem::path& path);
void write_hsi_header(const std::filesystem::path& path, const HsiCubeHeader& header);

// Pixel (r, c) becomes point r * cols + c, its spectrum the D = bands coordinates.
PointCloud load_hsi_cube(const std::filesystem::path& path, const HsiCubeHeader& header);
// Inverse of load_hsi_cube; values are cast to the header's sample type.
void write_hsi_cube(const std::filesystem::path& path, const HsiCubeHeader& header,
                    const PointCloud& cloud);

// Per-feature z-scoring. Constant features are centered only.
PointCloud standardize(const PointCloud& cloud);

}  // namespace diffal
