#include "diffal/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "diffal/datagen.hpp"
#include "diffal/errors.hpp"
#include "diffal/land.hpp"
#include "diffal/lund.hpp"
#include "diffal/metrics.hpp"
#include "diffal/random.hpp"

namespace diffal {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double to_real(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out))
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  return out;
}

std::size_t to_count(const std::string& key, const std::string& v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("config key '" + key + "': '" + v + "' is not a non-negative integer");
  return out;
}

std::string format_real(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Shortest text that reads back to the same value, for CSV keys like t.
std::string short_real(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed);
  return ec == std::errc() ? std::string(buf, ptr) : format_real(v);
}

std::string hex(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << h;
  return s.str();
}

std::uint64_t fnv(const void* data, std::size_t len, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::vector<std::vector<double>> parse_means(const std::string& text) {
  std::vector<std::vector<double>> means;
  for (const auto& group : split(text, ';')) {
    std::vector<double> m;
    for (const auto& v : split(group, ',')) m.push_back(to_real("means", v));
    means.push_back(std::move(m));
  }
  if (means.empty()) throw ConfigError("config key 'means' is empty");
  return means;
}

struct Scored {
  double oa, aa, kappa;
};

Scored score(const LabelVector& pred, const LabelVector& truth) {
  return {overall_accuracy(pred, truth), average_accuracy(pred, truth), cohens_kappa(pred, truth)};
}

}  // namespace

// ----------------------------------------------------------------- Config

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys{
      "dataset",       "points",       "header",       "truth",          "truth_level",        "data_seed",
      "sizes",         "means",        "stddev",         "per_cluster",        "standardize",
      "annulus_radius", "annulus_noise", "blob_stddev",   "strip_y",            "strip_half_length",
      "strip_noise",   "blob_offset",  "bridge_half_length", "bridge_noise",
      "k",             "sigma",        "sigma0",         "k_density",          "num_eigs",
      "dense_threshold", "cache_dir",
      "t",             "log10_t",      "budgets",        "methods",            "trials",
      "seed",          "cbal_theta",   "cbal_per_node",  "khat_fraction",      "out"};
  return keys;
}

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = trim(line);
    if (body.empty() || body[0] == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    c.set(trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

void Config::set(const std::string& key, const std::string& value) {
  const auto& keys = known_keys();
  if (std::find(keys.begin(), keys.end(), key) == keys.end())
    throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
}

std::optional<std::string> Config::str(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::str(const std::string& key, const std::string& fallback) const {
  return str(key).value_or(fallback);
}

std::optional<double> Config::real(const std::string& key) const {
  const auto v = str(key);
  if (!v) return std::nullopt;
  return to_real(key, *v);
}

double Config::real(const std::string& key, double fallback) const { return real(key).value_or(fallback); }

std::optional<std::size_t> Config::count(const std::string& key) const {
  const auto v = str(key);
  if (!v) return std::nullopt;
  return to_count(key, *v);
}

std::size_t Config::count(const std::string& key, std::size_t fallback) const {
  return count(key).value_or(fallback);
}

std::vector<double> Config::reals(const std::string& key) const {
  const auto v = str(key);
  if (!v) return {};
  const auto parts = split(*v, ':');
  if (parts.size() == 3 && v->find(',') == std::string::npos) {
    const double start = to_real(key, parts[0]), stop = to_real(key, parts[1]), step = to_real(key, parts[2]);
    if (!(step > 0.0) || stop < start) throw ConfigError("config key '" + key + "': bad grid " + *v);
    std::vector<double> grid;
    // Integer stepping avoids accumulating rounding error.
    const auto steps = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    for (std::size_t i = 0; i <= steps; ++i) grid.push_back(start + static_cast<double>(i) * step);
    return grid;
  }
  std::vector<double> out;
  for (const auto& item : split(*v, ',')) out.push_back(to_real(key, item));
  return out;
}

std::vector<std::size_t> Config::counts(const std::string& key) const {
  std::vector<std::size_t> out;
  if (const auto v = str(key))
    for (const auto& item : split(*v, ',')) out.push_back(to_count(key, item));
  return out;
}

std::vector<std::string> Config::words(const std::string& key) const {
  if (const auto v = str(key)) return split(*v, ',');
  return {};
}

// --------------------------------------------------------------- datasets

Dataset load_dataset(const Config& config) {
  const std::string kind = config.str("dataset", "gaussian");
  const std::uint64_t seed = config.count("data_seed", 1);
  std::map<std::string, std::string> params{{"dataset", kind}, {"data_seed", std::to_string(seed)}};
  const auto sizes_or = [&](std::vector<std::size_t> fallback) {
    auto s = config.counts("sizes");
    if (s.empty()) s = std::move(fallback);
    std::string text;
    for (std::size_t v : s) text += (text.empty() ? "" : ",") + std::to_string(v);
    params["sizes"] = text;
    return s;
  };
  const auto real_param = [&](const std::string& key, double fallback) {
    const double v = config.real(key, fallback);
    params[key] = format_real(v);
    return v;
  };

  std::optional<GeneratedData> gen;
  if (kind == "gaussian") {
    const std::string means_text = config.str("means", "0,0;5,0;0,5");
    params["means"] = means_text;
    const auto means = parse_means(means_text);
    const double stddev = real_param("stddev", 0.2);
    gen = gen_gaussians(means, stddev, sizes_or(std::vector<std::size_t>(means.size(), 500)), seed);
  } else if (kind == "hierarchical") {
    const std::size_t per = config.count("per_cluster", 500);
    params["per_cluster"] = std::to_string(per);
    const double stddev = real_param("stddev", 0.2);
    auto h = gen_hierarchical(seed, per, stddev);
    const std::size_t level = config.count("truth_level", 4);
    if (level != 4 && level != 2) throw ConfigError("truth_level must be 4 or 2");
    params["truth_level"] = std::to_string(level);
    gen = GeneratedData{std::move(h.cloud), level == 4 ? std::move(h.truth4) : std::move(h.truth2)};
  } else if (kind == "geometric") {
    GeometricParams p;
    p.annulus_radius = real_param("annulus_radius", p.annulus_radius);
    p.annulus_noise = real_param("annulus_noise", p.annulus_noise);
    p.blob_stddev = real_param("blob_stddev", p.blob_stddev);
    p.strip_y = real_param("strip_y", p.strip_y);
    p.strip_half_length = real_param("strip_half_length", p.strip_half_length);
    p.strip_noise = real_param("strip_noise", p.strip_noise);
    gen = gen_geometric(seed, sizes_or({500, 500, 500}), p);
  } else if (kind == "bottleneck") {
    BottleneckParams p;
    p.blob_offset = real_param("blob_offset", p.blob_offset);
    p.blob_stddev = real_param("blob_stddev", p.blob_stddev);
    p.bridge_half_length = real_param("bridge_half_length", p.bridge_half_length);
    p.bridge_noise = real_param("bridge_noise", p.bridge_noise);
    gen = gen_bottleneck(seed, sizes_or({720, 720, 60}), p);
  } else if (kind == "file" || kind == "hsi") {
    const auto points = config.str("points");
    if (!points) throw ConfigError("dataset = " + kind + " needs a 'points' path");
    params.erase("data_seed");
    params["points"] = *points;
    PointCloud cloud = [&] {
      if (kind == "file") return load_csv(*points);
      const auto header = config.str("header");
      if (!header) throw ConfigError("dataset = hsi needs a 'header' path");
      params["header"] = *header;
      return load_hsi_cube(*points, read_hsi_header(*header));
    }();
    if (config.str("standardize", "false") == "true") cloud = standardize(cloud);
    LabelVector truth;
    if (const auto t = config.str("truth")) {
      params["truth"] = *t;
      truth = load_labels(*t);
      if (truth.size() != cloud.size())
        throw DataError("truth file has " + std::to_string(truth.size()) + " labels for " +
                        std::to_string(cloud.size()) + " points");
    }
    return {kind, std::move(cloud), std::move(truth), std::move(params)};
  } else {
    throw ConfigError("unknown dataset '" + kind + "'");
  }
  return {kind, std::move(gen->cloud), std::move(gen->truth), std::move(params)};
}

GraphParams graph_params(const Config& config) {
  GraphParams p;
  p.k = config.count("k");
  p.sigma = config.real("sigma");
  p.sigma0 = config.real("sigma0");
  p.k_density = config.count("k_density");
  p.num_eigs = config.count("num_eigs");
  p.spectral.dense_threshold = config.count("dense_threshold", p.spectral.dense_threshold);
  return p;
}

Graph build_graph_for(const Config& config, const PointCloud& cloud) {
  if (const auto dir = config.str("cache_dir")) return build_graph_cached(cloud, graph_params(config), *dir);
  return build_graph(cloud, graph_params(config));
}

double grid_time(double log10_t) { return std::max(1.0, std::round(std::pow(10.0, log10_t))); }

std::vector<double> time_grid(const Config& config) {
  if (config.has("t") && config.has("log10_t")) throw ConfigError("give either 't' or 'log10_t', not both");
  if (config.has("t")) {
    auto t = config.reals("t");
    if (t.empty()) throw ConfigError("config key 't' is empty");
    return t;
  }
  const auto grid = config.reals("log10_t");
  if (grid.empty()) throw ConfigError("config needs 't' or 'log10_t'");
  std::vector<double> t;
  for (double x : grid) t.push_back(grid_time(x));
  return t;
}

// -------------------------------------------------------------- experiment

ExperimentOutput run_experiment(const Config& config) {
  const Dataset data = load_dataset(config);
  if (data.truth.size() == 0) throw ConfigError("experiments need ground truth labels");
  if (!data.truth.complete()) throw DataError("experiment truth must label every point");
  const std::size_t n = data.cloud.size();

  auto methods = config.words("methods");
  if (methods.empty()) methods = {"land"};
  auto budgets = config.counts("budgets");
  if (budgets.empty()) budgets = {10};
  for (std::size_t b : budgets)
    if (b < 1 || b > n) throw ConfigError("budgets must lie in [1, n]");
  const std::size_t trials = config.count("trials", 1);
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const std::uint64_t root = config.count("seed", 0);
  CbalParams cbal_params;
  cbal_params.purity_threshold = config.real("cbal_theta", cbal_params.purity_threshold);
  cbal_params.per_node = config.count("cbal_per_node", cbal_params.per_node);
  KhatOptions khat;
  khat.search_fraction = config.real("khat_fraction", khat.search_fraction);

  bool needs_graph = false;
  for (const auto& m : methods) {
    if (m == "land" || m == "land_random" || m == "lund") needs_graph = true;
    else if (m != "cbal" && m != "cbal_single") throw ConfigError("unknown method '" + m + "'");
  }

  ExperimentOutput out;
  std::optional<Graph> graph;
  std::vector<double> times;
  if (needs_graph) {
    graph = build_graph_for(config, data.cloud);
    times = time_grid(config);
  }

  const auto add = [&](const std::string& method, const std::string& t, std::size_t budget,
                       std::uint64_t seed, const LabelVector& pred) {
    const Scored s = score(pred, data.truth);
    out.rows.push_back({data.name, method, t, budget, seed, s.oa, s.aa, s.kappa});
  };

  for (double t : times) {
    const Analysis a = analyze(*graph, t);
    const std::string tag = short_real(t);
    for (const auto& m : methods) {
      if (m == "land") {
        for (std::size_t b : budgets) {
          GroundTruthOracle oracle(data.truth, b);
          add(m, tag, b, 0, land(a.scores, graph->density, a.embedding, b, oracle).labels);
        }
      } else if (m == "land_random") {
        for (std::size_t b : budgets)
          for (std::size_t trial = 0; trial < trials; ++trial) {
            const std::uint64_t seed = derive_seed(root, m, trial);
            GroundTruthOracle oracle(data.truth, b);
            add(m, tag, b, seed, land_random(graph->density, a.embedding, b, oracle, seed).labels);
          }
      } else if (m == "lund") {
        const ClusteringResult c = lund(a.scores, graph->density, a.embedding, khat);
        add(m, tag, c.num_clusters, 0, align_labels(c.labels, data.truth));
      }
    }
  }
  for (const auto& m : methods) {
    if (m != "cbal" && m != "cbal_single") continue;
    const Dendrogram tree = linkage(data.cloud, m == "cbal" ? Linkage::Average : Linkage::Single);
    for (std::size_t b : budgets)
      for (std::size_t trial = 0; trial < trials; ++trial) {
        CbalParams p = cbal_params;
        p.seed = derive_seed(root, m, trial);
        GroundTruthOracle oracle(data.truth, b);
        add(m, "", b, p.seed, cbal(tree, b, oracle, p).labels);
      }
  }

  // t sorts numerically; methods without a time come first.
  const auto time_key = [](const ResultRow& r) { return r.t.empty() ? -1.0 : std::stod(r.t); };
  std::sort(out.rows.begin(), out.rows.end(), [&](const ResultRow& x, const ResultRow& y) {
    return std::tuple(x.method, time_key(x), x.budget, x.seed) < std::tuple(y.method, time_key(y), y.budget, y.seed);
  });

  auto& man = out.manifest;
  for (const auto& [k, v] : config.values()) man["config." + k] = v;
  for (const auto& [k, v] : data.params) man["data." + k] = v;
  man["data.n"] = std::to_string(n);
  man["data.dim"] = std::to_string(data.cloud.dim());
  man["data.points_hash"] = content_hash(data.cloud);
  man["data.truth_hash"] = content_hash(data.truth);
  if (graph) {
    man["graph.k"] = std::to_string(graph->neighbors.k());
    man["graph.sigma"] = format_real(graph->sigma);
    man["graph.sigma0"] = format_real(graph->density.sigma0);
    man["graph.k_density"] = std::to_string(graph->density.k_density);
    man["graph.num_eigs"] = std::to_string(graph->spectrum.order());
    man["graph.components"] = std::to_string(graph->spectrum.num_components);
  }
  man["scoring"] = "land, land_random and cbal are scored without alignment; lund is scored after align_labels";
  man["seeding"] = "per-trial seed = derive_seed(seed, method, trial)";
  {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::ostringstream ts;
    ts << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
    man["timestamp"] = ts.str();
  }
  return out;
}

void write_results_csv(const std::filesystem::path& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "dataset,method,t,budget,seed,OA,AA,kappa\n";
  for (const auto& r : rows)
    out << r.dataset << ',' << r.method << ',' << r.t << ',' << r.budget << ',' << r.seed << ','
        << format_real(r.oa) << ',' << format_real(r.aa) << ',' << format_real(r.kappa) << '\n';
}

void write_manifest(const std::filesystem::path& path, const std::map<std::string, std::string>& manifest) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& [k, v] : manifest) out << k << " = " << v << '\n';
}

// ------------------------------------------------------------------ t scan

std::vector<ScanRow> scan_t(const Graph& graph, const std::vector<double>& log10_t, const LabelVector& truth) {
  std::vector<ScanRow> rows;
  for (double x : log10_t) {
    ScanRow row{x, grid_time(x), 1, false, std::nullopt, std::nullopt, {}};
    const Analysis a = analyze(graph, row.t);
    if (a.scores.sorted_score(0) > 0.0) row.khat = estimate_num_clusters(a.scores);
    else row.collapsed = true;
    if (truth.size() == graph.density.size() && truth.complete()) {
      const auto diag = separation_diagnostics(a.embedding, graph.density, truth);
      row.d_in = diag.d_in;
      row.d_btw = diag.d_btw;
    }
    for (std::size_t r = 0; r < std::min<std::size_t>(10, a.scores.size()); ++r)
      row.top_scores.push_back(a.scores.sorted_score(r));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ScanRow> scan_t(const Config& config) {
  const Dataset data = load_dataset(config);
  auto grid = config.reals("log10_t");
  if (grid.empty()) grid = Config::parse("log10_t = 0:8:0.5").reals("log10_t");
  const Graph graph = build_graph_for(config, data.cloud);
  return scan_t(graph, grid, data.truth);
}

void write_scan_csv(const std::filesystem::path& path, const std::vector<ScanRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << "log10_t,t,khat,collapsed,d_in,d_btw";
  for (int i = 1; i <= 10; ++i) out << ",score" << i;
  out << '\n';
  for (const auto& r : rows) {
    out << short_real(r.log10_t) << ',' << format_real(r.t) << ',' << r.khat << ',' << (r.collapsed ? 1 : 0) << ','
        << (r.d_in ? format_real(*r.d_in) : "") << ',' << (r.d_btw ? format_real(*r.d_btw) : "");
    for (std::size_t i = 0; i < 10; ++i)
      out << ',' << (i < r.top_scores.size() ? format_real(r.top_scores[i]) : "");
    out << '\n';
  }
}

// ----------------------------------------------------------------- purity

std::vector<LabelVector> lund_k_family(const Graph& graph, const Analysis& a, std::size_t max_clusters) {
  std::vector<LabelVector> family;
  for (std::size_t l = 1; l <= max_clusters; ++l)
    family.push_back(lund_k(a.scores, graph.density, a.embedding, l).labels);
  return family;
}

std::vector<LabelVector> dendrogram_family(const Dendrogram& d, std::size_t max_clusters) {
  std::vector<LabelVector> family;
  for (std::size_t l = 1; l <= max_clusters; ++l) family.push_back(cut(d, l));
  return family;
}

std::string content_hash(const PointCloud& cloud) {
  const std::uint64_t dims[2] = {cloud.size(), cloud.dim()};
  return hex(fnv(cloud.points().data(), cloud.size() * cloud.dim() * sizeof(double), fnv(dims, sizeof dims)));
}

std::string content_hash(const LabelVector& labels) {
  return hex(fnv(labels.values().data(), labels.size() * sizeof(int)));
}

}  // namespace diffal
