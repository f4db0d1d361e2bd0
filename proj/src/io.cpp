#include "graphfed/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "graphfed/bytes.hpp"
#include "graphfed/error.hpp"

namespace graphfed::io {

using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << contents;
}

std::vector<Edge> read_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream ls(line);
    long long u, v;
    if (!(ls >> u)) continue;
    if (!(ls >> v) || u < 0 || v < 0)
      throw InputError("edge list line " + std::to_string(lineno) + ": expected two vertex ids");
    edges.emplace_back(static_cast<VertexId>(u), static_cast<VertexId>(v));
  }
  return edges;
}

std::vector<Edge> read_edge_list(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return read_edge_list(in);
}

void write_edge_list(const fs::path& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << "# " << g.num_vertices() << " vertices, " << g.num_edges() << " undirected edges\n";
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

std::string encode_features(const FeatureMatrix& m) {
  ByteWriter w;
  w.raw(kFeatureMagic, 4);
  w.u32(1);
  w.u64(m.rows());
  w.u64(m.cols());
  for (double x : m.data()) w.f32(static_cast<float>(x));
  return w.take();
}

FeatureMatrix decode_features(const std::string& bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kFeatureMagic, 4) != 0) throw InputError("features: bad magic");
  if (r.u32() != 1) throw InputError("features: unsupported version");
  const auto rows = r.u64();
  const auto cols = r.u64();
  if (cols != 0 && rows > r.remaining() / 4 / cols) throw InputError("features: truncated data");
  FeatureMatrix m(rows, cols);
  for (double& x : m.data()) x = r.f32();
  if (r.remaining() != 0) throw InputError("features: trailing bytes");
  return m;
}

void write_features_bin(const fs::path& path, const FeatureMatrix& m) { write_file(path, encode_features(m)); }

FeatureMatrix read_features_bin(const fs::path& path) { return decode_features(read_file(path)); }

FeatureMatrix read_features_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<double> values;
  std::size_t rows = 0, cols = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ls(line);
    std::string cell;
    std::size_t c = 0;
    while (std::getline(ls, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InputError("features csv: bad value '" + cell + "' on row " + std::to_string(rows));
      }
      ++c;
    }
    if (rows == 0) cols = c;
    if (c != cols) throw InputError("features csv: ragged row " + std::to_string(rows));
    ++rows;
  }
  FeatureMatrix m(rows, cols);
  m.data() = std::move(values);
  return m;
}

void write_features_csv(const fs::path& path, const FeatureMatrix& m) {
  std::ofstream out(path);
  out.precision(9);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m(r, c);
    out << '\n';
  }
}

namespace {

// Reads "vertex,value" rows (header optional) and checks vertex order.
std::vector<std::string> read_indexed_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<std::string> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InputError(path.string() + ": expected 'vertex,value' rows");
    const std::string key = line.substr(0, comma);
    if (first && key == "vertex") {
      first = false;
      continue;
    }
    first = false;
    if (key != std::to_string(out.size()))
      throw InputError(path.string() + ": rows must list vertices 0..N-1 in order");
    out.push_back(line.substr(comma + 1));
  }
  return out;
}

}  // namespace

void write_labels_csv(const fs::path& path, const Labels& labels) {
  std::ofstream out(path);
  out << "vertex,label\n";
  for (std::size_t v = 0; v < labels.values.size(); ++v) out << v << ',' << labels.values[v] << '\n';
}

Labels read_labels_csv(const fs::path& path, std::uint32_t num_classes) {
  Labels labels;
  std::uint32_t max_seen = 0;
  for (const auto& s : read_indexed_csv(path)) {
    unsigned long value;
    try {
      value = std::stoul(s);
    } catch (const std::exception&) {
      throw InputError(path.string() + ": bad label '" + s + "'");
    }
    labels.values.push_back(static_cast<std::uint32_t>(value));
    max_seen = std::max(max_seen, labels.values.back());
  }
  labels.num_classes = num_classes ? num_classes : (labels.values.empty() ? 0 : max_seen + 1);
  if (!labels.values.empty() && max_seen >= labels.num_classes)
    throw InputError(path.string() + ": label " + std::to_string(max_seen) + " out of range for " +
                     std::to_string(labels.num_classes) + " classes");
  return labels;
}

void write_split_csv(const fs::path& path, const SplitMask& split) {
  std::ofstream out(path);
  out << "vertex,role\n";
  for (std::size_t v = 0; v < split.roles.size(); ++v) out << v << ',' << role_name(split.roles[v]) << '\n';
}

SplitMask read_split_csv(const fs::path& path) {
  SplitMask split;
  for (const auto& s : read_indexed_csv(path)) split.roles.push_back(parse_role(s));
  return split;
}

void save_dataset(const fs::path& dir, const Dataset& d, const std::string& meta_json) {
  fs::create_directories(dir);
  write_edge_list(dir / "graph.edges", d.graph);
  write_features_bin(dir / "features.bin", d.features);
  write_labels_csv(dir / "labels.csv", d.labels);
  write_split_csv(dir / "split.csv", d.split);
  json meta = json::parse(meta_json);
  meta["num_vertices"] = d.num_vertices();
  meta["num_edges"] = d.graph.num_edges();
  meta["num_classes"] = d.labels.num_classes;
  meta["feature_dim"] = d.features.cols();
  meta["split_counts"] = {{"train", d.split.count(Role::kTrain)},
                          {"val", d.split.count(Role::kVal)},
                          {"test", d.split.count(Role::kTest)}};
  write_file(dir / "meta.json", meta.dump(2) + "\n");
}

Dataset load_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw InputError("dataset directory not found: " + dir.string());
  std::uint32_t num_classes = 0;
  if (fs::exists(dir / "meta.json")) {
    const json meta = json::parse(read_file(dir / "meta.json"), nullptr, false);
    if (meta.is_discarded()) throw InputError("meta.json is not valid JSON");
    num_classes = meta.value("num_classes", 0u);
  }
  Dataset d;
  d.labels = read_labels_csv(dir / "labels.csv", num_classes);
  const std::size_t n = d.labels.values.size();
  d.graph = from_edge_list(read_edge_list(dir / "graph.edges"), n);
  if (fs::exists(dir / "features.bin"))
    d.features = read_features_bin(dir / "features.bin");
  else
    d.features = read_features_csv(dir / "features.csv");
  d.split = read_split_csv(dir / "split.csv");
  d.validate();
  return d;
}

}  // namespace graphfed::io
