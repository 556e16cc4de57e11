#include "diffal/graph_cache.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "diffal/errors.hpp"

namespace diffal {
namespace {

static_assert(std::endian::native == std::endian::little, "cache format assumes a little-endian host");

constexpr char kMagic[8] = {'D', 'I', 'F', 'F', 'A', 'L', 'G', 'C'};
constexpr std::uint32_t kVersion = 1;

class Fnv {
 public:
  void bytes(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
      h_ ^= p[i];
      h_ *= 0x100000001b3ULL;
    }
  }
  template <typename T>
  void value(const T& v) { bytes(&v, sizeof v); }
  std::uint64_t digest() const { return h_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

class Writer {
 public:
  explicit Writer(std::ofstream& out) : out_(out) {}
  template <typename T>
  void value(const T& v) { out_.write(reinterpret_cast<const char*>(&v), sizeof v); }
  template <typename T>
  void array(const T* data, std::size_t count) {
    value<std::uint64_t>(count);
    out_.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(T)));
  }

 private:
  std::ofstream& out_;
};

class Reader {
 public:
  explicit Reader(std::ifstream& in) : in_(in) {}
  template <typename T>
  bool value(T& v) { return static_cast<bool>(in_.read(reinterpret_cast<char*>(&v), sizeof v)); }
  template <typename T>
  bool array(std::vector<T>& out, std::size_t limit) {
    std::uint64_t count = 0;
    if (!value(count) || count > limit) return false;
    out.resize(count);
    return static_cast<bool>(in_.read(reinterpret_cast<char*>(out.data()),
                                      static_cast<std::streamsize>(count * sizeof(T))));
  }

 private:
  std::ifstream& in_;
};

}  // namespace

std::uint64_t graph_cache_key(const PointCloud& cloud, std::size_t k, std::size_t width, double sigma,
                              std::size_t num_eigs) {
  Fnv h;
  h.value(kVersion);
  h.value<std::uint64_t>(cloud.size());
  h.value<std::uint64_t>(cloud.dim());
  h.bytes(cloud.points().data(), cloud.size() * cloud.dim() * sizeof(double));
  h.value<std::uint64_t>(k);
  h.value<std::uint64_t>(width);
  h.value(sigma);
  h.value<std::uint64_t>(num_eigs);
  return h.digest();
}

std::filesystem::path graph_cache_file(const std::filesystem::path& dir, std::uint64_t key) {
  std::ostringstream name;
  name << "graph-" << std::hex << std::setw(16) << std::setfill('0') << key << ".bin";
  return dir / name.str();
}

void save_cached_graph(const std::filesystem::path& path, std::uint64_t key, const CachedGraph& g) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write cache file " + tmp.string());
    Writer w(out);
    out.write(kMagic, sizeof kMagic);
    w.value(kVersion);
    w.value(key);
    w.value<std::uint64_t>(g.neighbors.size());
    w.value<std::uint64_t>(g.neighbors.k());
    const auto idx = g.neighbors.indices();
    std::vector<std::uint64_t> idx64(idx.begin(), idx.end());
    w.array(idx64.data(), idx64.size());
    w.array(g.neighbors.distances().data(), g.neighbors.distances().size());
    w.value(g.sigma);
    w.value<std::uint64_t>(g.spectrum.num_components);
    w.array(g.spectrum.eigenvalues.data(), static_cast<std::size_t>(g.spectrum.eigenvalues.size()));
    w.array(g.spectrum.stationary.data(), static_cast<std::size_t>(g.spectrum.stationary.size()));
    w.value<std::uint64_t>(static_cast<std::uint64_t>(g.spectrum.psi.cols()));
    w.array(g.spectrum.psi.data(), static_cast<std::size_t>(g.spectrum.psi.size()));
    if (!out) throw DataError("failed writing cache file " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::optional<CachedGraph> load_cached_graph(const std::filesystem::path& path, std::uint64_t key) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  Reader r(in);
  char magic[sizeof kMagic];
  std::uint32_t version = 0;
  std::uint64_t stored_key = 0, n = 0, k = 0, components = 0, cols = 0;
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof kMagic) != 0) return std::nullopt;
  if (!r.value(version) || version != kVersion || !r.value(stored_key) || stored_key != key) return std::nullopt;
  if (!r.value(n) || !r.value(k)) return std::nullopt;
  constexpr std::size_t limit = std::size_t{1} << 34;
  std::vector<std::uint64_t> idx64;
  std::vector<double> dist, values, stationary, psi;
  CachedGraph g;
  if (!r.array(idx64, limit) || !r.array(dist, limit) || !r.value(g.sigma) || !r.value(components) ||
      !r.array(values, limit) || !r.array(stationary, limit) || !r.value(cols) || !r.array(psi, limit))
    return std::nullopt;
  if (idx64.size() != n * k || dist.size() != n * k || stationary.size() != n || values.size() != cols ||
      psi.size() != n * cols)
    return std::nullopt;
  g.neighbors = NeighborLists(n, k, std::vector<std::size_t>(idx64.begin(), idx64.end()), std::move(dist));
  g.spectrum.num_components = components;
  g.spectrum.eigenvalues = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  g.spectrum.stationary = Eigen::Map<const Eigen::VectorXd>(stationary.data(), static_cast<Eigen::Index>(n));
  g.spectrum.psi = Eigen::Map<const Eigen::MatrixXd>(psi.data(), static_cast<Eigen::Index>(n),
                                                    static_cast<Eigen::Index>(cols));
  return g;
}

}  // namespace diffal
