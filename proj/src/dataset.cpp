#include "diffal/dataset.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "diffal/errors.hpp"

namespace diffal {
namespace {

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::ifstream open_input(const std::filesystem::path& path, std::ios::openmode mode = std::ios::in) {
  if (!std::filesystem::exists(path)) throw DataError("file not found: " + path.string());
  std::ifstream in(path, mode);
  if (!in) throw DataError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

template <typename T>
T load_sample(const unsigned char* bytes, bool swap) {
  unsigned char buf[sizeof(T)];
  std::memcpy(buf, bytes, sizeof(T));
  if (swap) std::reverse(buf, buf + sizeof(T));
  T v;
  std::memcpy(&v, buf, sizeof(T));
  return v;
}

template <typename T>
void store_sample(unsigned char* bytes, double value, bool swap) {
  T v = static_cast<T>(value);
  std::memcpy(bytes, &v, sizeof(T));
  if (swap) std::reverse(bytes, bytes + sizeof(T));
}

bool needs_swap(ByteOrder order) {
  const bool host_little = std::endian::native == std::endian::little;
  return host_little != (order == ByteOrder::Little);
}

// Offset (in samples) of band b of pixel p for the given layout.
std::size_t sample_offset(const HsiCubeHeader& h, std::size_t pixel, std::size_t band) {
  const std::size_t r = pixel / h.cols;
  const std::size_t c = pixel % h.cols;
  switch (h.interleave) {
    case Interleave::Bsq: return band * h.pixels() + pixel;
    case Interleave::Bip: return pixel * h.bands + band;
    case Interleave::Bil: return (r * h.bands + band) * h.cols + c;
  }
  return 0;
}

}  // namespace

PointCloud::PointCloud(RowMatrix points) : points_(std::move(points)) {
  if (points_.rows() < 1 || points_.cols() < 1)
    throw DataError("point cloud must have n >= 1 and D >= 1");
  for (Eigen::Index i = 0; i < points_.rows(); ++i)
    for (Eigen::Index j = 0; j < points_.cols(); ++j)
      if (!std::isfinite(points_(i, j)))
        throw DataError("non-finite coordinate at point " + std::to_string(i) + ", dim " +
                        std::to_string(j));
}

LabelVector::LabelVector(std::vector<int> values) : values_(std::move(values)) {
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] < 0) throw DataError("negative label at index " + std::to_string(i));
}

bool LabelVector::complete() const {
  return std::none_of(values_.begin(), values_.end(), [](int v) { return v == 0; });
}

int LabelVector::max_label() const {
  return values_.empty() ? 0 : *std::max_element(values_.begin(), values_.end());
}

std::size_t LabelVector::count_labeled() const {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](int v) { return v > 0; }));
}

std::size_t HsiCubeHeader::sample_bytes() const {
  switch (dtype) {
    case SampleType::UInt8: return 1;
    case SampleType::Int16:
    case SampleType::UInt16: return 2;
    case SampleType::Int32:
    case SampleType::UInt32:
    case SampleType::Float32: return 4;
    case SampleType::Float64: return 8;
  }
  return 0;
}

SampleType parse_sample_type(const std::string& tag) {
  static const std::map<std::string, SampleType> table = {
      {"uint8", SampleType::UInt8},     {"int16", SampleType::Int16},
      {"uint16", SampleType::UInt16},   {"int32", SampleType::Int32},
      {"uint32", SampleType::UInt32},   {"float32", SampleType::Float32},
      {"float64", SampleType::Float64},
  };
  auto it = table.find(lower(tag));
  if (it == table.end()) throw DataError("unknown dtype tag '" + tag + "'");
  return it->second;
}

std::string to_string(SampleType t) {
  switch (t) {
    case SampleType::UInt8: return "uint8";
    case SampleType::Int16: return "int16";
    case SampleType::UInt16: return "uint16";
    case SampleType::Int32: return "int32";
    case SampleType::UInt32: return "uint32";
    case SampleType::Float32: return "float32";
    case SampleType::Float64: return "float64";
  }
  return "?";
}

ByteOrder parse_byte_order(const std::string& tag) {
  const auto t = lower(tag);
  if (t == "little" || t == "le") return ByteOrder::Little;
  if (t == "big" || t == "be") return ByteOrder::Big;
  throw DataError("unknown byte order tag '" + tag + "'");
}

std::string to_string(ByteOrder b) { return b == ByteOrder::Little ? "little" : "big"; }

Interleave parse_interleave(const std::string& tag) {
  const auto t = lower(tag);
  if (t == "bsq") return Interleave::Bsq;
  if (t == "bip") return Interleave::Bip;
  if (t == "bil") return Interleave::Bil;
  throw DataError("unknown interleave tag '" + tag + "'");
}

std::string to_string(Interleave i) {
  switch (i) {
    case Interleave::Bsq: return "bsq";
    case Interleave::Bip: return "bip";
    case Interleave::Bil: return "bil";
  }
  return "?";
}

PointCloud load_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<double> values;
  std::size_t cols = 0;
  std::size_t rows = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::size_t fields = 0;
    std::string_view rest = line;
    while (true) {
      const auto comma = rest.find(',');
      const auto field = trim(rest.substr(0, comma));
      double v = 0.0;
      const auto* first = field.data();
      const auto* last = field.data() + field.size();
      if (!field.empty() && *first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, v);
      if (field.empty() || ec != std::errc() || ptr != last)
        throw DataError(path.string() + ": non-numeric field '" + std::string(field) +
                        "' on row " + std::to_string(line_no));
      values.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (rows == 0) {
      cols = fields;
    } else if (fields != cols) {
      throw DataError(path.string() + ": ragged row " + std::to_string(line_no) + " has " +
                      std::to_string(fields) + " fields, expected " + std::to_string(cols));
    }
    ++rows;
  }
  if (rows == 0) throw DataError(path.string() + ": no data rows");
  RowMatrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  std::copy(values.begin(), values.end(), m.data());
  return PointCloud(std::move(m));
}

void save_csv(const std::filesystem::path& path, const PointCloud& cloud) {
  auto out = open_output(path);
  out.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto p = cloud.point(i);
    for (std::size_t j = 0; j < p.size(); ++j) out << (j ? "," : "") << p[j];
    out << '\n';
  }
}

void save_labels(const std::filesystem::path& path, const LabelVector& labels) {
  auto out = open_output(path);
  for (int v : labels) out << v << '\n';
}

LabelVector load_labels(const std::filesystem::path& path) {
  auto in = open_input(path);
  std::vector<int> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto field = trim(line);
    if (field.empty()) continue;
    long long v = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc() || ptr != field.data() + field.size())
      throw DataError(path.string() + ": non-integer label '" + std::string(field) +
                      "' on line " + std::to_string(line_no));
    if (v < 0)
      throw DataError(path.string() + ": negative label on line " + std::to_string(line_no));
    values.push_back(static_cast<int>(v));
  }
  if (values.empty()) throw DataError(path.string() + ": empty labels file");
  return LabelVector(std::move(values));
}

HsiCubeHeader read_hsi_header(const std::filesystem::path& path) {
  auto in = open_input(path);
  HsiCubeHeader h;
  bool have_rows = false, have_cols = false, have_bands = false;
  std::string line;
  while (std::getline(in, line)) {
    auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto sep = text.find('=');
    if (sep == std::string_view::npos) sep = text.find_first_of(" \t");
    if (sep == std::string_view::npos) throw DataError("malformed header line: " + std::string(text));
    const std::string key = lower(std::string(trim(text.substr(0, sep))));
    const std::string value(trim(text.substr(sep + 1)));
    const auto as_size = [&](std::size_t& out) {
      std::size_t v = 0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || v == 0)
        throw DataError("header key '" + key + "' needs a positive integer, got '" + value + "'");
      out = v;
    };
    if (key == "rows") { as_size(h.rows); have_rows = true; }
    else if (key == "cols") { as_size(h.cols); have_cols = true; }
    else if (key == "bands") { as_size(h.bands); have_bands = true; }
    else if (key == "dtype") h.dtype = parse_sample_type(value);
    else if (key == "byteorder") h.byte_order = parse_byte_order(value);
    else if (key == "interleave") h.interleave = parse_interleave(value);
    else throw DataError("unknown header key '" + key + "'");
  }
  if (!have_rows || !have_cols || !have_bands)
    throw DataError(path.string() + ": header must define rows, cols and bands");
  return h;
}

void write_hsi_header(const std::filesystem::path& path, const HsiCubeHeader& h) {
  auto out = open_output(path);
  out << "rows = " << h.rows << '\n'
      << "cols = " << h.cols << '\n'
      << "bands = " << h.bands << '\n'
      << "dtype = " << to_string(h.dtype) << '\n'
      << "byteorder = " << to_string(h.byte_order) << '\n'
      << "interleave = " << to_string(h.interleave) << '\n';
}

PointCloud load_hsi_cube(const std::filesystem::path& path, const HsiCubeHeader& h) {
  if (h.rows == 0 || h.cols == 0 || h.bands == 0) throw DataError("header dimensions must be positive");
  auto in = open_input(path, std::ios::binary);
  const auto actual = std::filesystem::file_size(path);
  if (actual != h.expected_file_bytes())
    throw DataError(path.string() + ": size mismatch, file has " + std::to_string(actual) +
                    " bytes, header implies " + std::to_string(h.expected_file_bytes()));
  std::vector<unsigned char> raw(actual);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!in) throw DataError("short read on " + path.string());

  const bool swap = needs_swap(h.byte_order);
  const std::size_t sb = h.sample_bytes();
  RowMatrix m(static_cast<Eigen::Index>(h.pixels()), static_cast<Eigen::Index>(h.bands));
  for (std::size_t p = 0; p < h.pixels(); ++p) {
    for (std::size_t b = 0; b < h.bands; ++b) {
      const unsigned char* at = raw.data() + sample_offset(h, p, b) * sb;
      double v = 0.0;
      switch (h.dtype) {
        case SampleType::UInt8: v = load_sample<std::uint8_t>(at, swap); break;
        case SampleType::Int16: v = load_sample<std::int16_t>(at, swap); break;
        case SampleType::UInt16: v = load_sample<std::uint16_t>(at, swap); break;
        case SampleType::Int32: v = load_sample<std::int32_t>(at, swap); break;
        case SampleType::UInt32: v = load_sample<std::uint32_t>(at, swap); break;
        case SampleType::Float32: v = load_sample<float>(at, swap); break;
        case SampleType::Float64: v = load_sample<double>(at, swap); break;
      }
      m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(b)) = v;
    }
  }
  return PointCloud(std::move(m));
}

void write_hsi_cube(const std::filesystem::path& path, const HsiCubeHeader& h,
                    const PointCloud& cloud) {
  if (cloud.size() != h.pixels() || cloud.dim() != h.bands)
    throw DataError("cloud shape does not match header");
  const bool swap = needs_swap(h.byte_order);
  const std::size_t sb = h.sample_bytes();
  std::vector<unsigned char> raw(h.expected_file_bytes());
  for (std::size_t p = 0; p < h.pixels(); ++p) {
    const auto x = cloud.point(p);
    for (std::size_t b = 0; b < h.bands; ++b) {
      unsigned char* at = raw.data() + sample_offset(h, p, b) * sb;
      switch (h.dtype) {
        case SampleType::UInt8: store_sample<std::uint8_t>(at, x[b], swap); break;
        case SampleType::Int16: store_sample<std::int16_t>(at, x[b], swap); break;
        case SampleType::UInt16: store_sample<std::uint16_t>(at, x[b], swap); break;
        case SampleType::Int32: store_sample<std::int32_t>(at, x[b], swap); break;
        case SampleType::UInt32: store_sample<std::uint32_t>(at, x[b], swap); break;
        case SampleType::Float32: store_sample<float>(at, x[b], swap); break;
        case SampleType::Float64: store_sample<double>(at, x[b], swap); break;
      }
    }
  }
  auto out = open_output(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
}

PointCloud standardize(const PointCloud& cloud) {
  RowMatrix m = cloud.points();
  const double n = static_cast<double>(m.rows());
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    const double mean = m.col(j).sum() / n;
    m.col(j).array() -= mean;
    const double sd = std::sqrt(m.col(j).squaredNorm() / n);
    if (sd > 0.0) m.col(j) /= sd;
  }
  return PointCloud(std::move(m));
}

}  // namespace diffal
