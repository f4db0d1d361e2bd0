#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "graphfed/dataset.hpp"

namespace graphfed::io {

namespace fs = std::filesystem;

// Edge list text: one "u v" pair per line; '#' starts a comment.
std::vector<Edge> read_edge_list(std::istream& in);
std::vector<Edge> read_edge_list(const fs::path& path);
void write_edge_list(const fs::path& path, const Graph& g);

// Binary features: "GFGD", u32 version=1, u64 rows, u64 cols, f32 LE row-major.
inline constexpr char kFeatureMagic[4] = {'G', 'F', 'G', 'D'};
std::string encode_features(const FeatureMatrix& m);
FeatureMatrix decode_features(const std::string& bytes);
void write_features_bin(const fs::path& path, const FeatureMatrix& m);
FeatureMatrix read_features_bin(const fs::path& path);
// CSV features: one row per vertex, comma-separated reals.
FeatureMatrix read_features_csv(const fs::path& path);
void write_features_csv(const fs::path& path, const FeatureMatrix& m);

// labels.csv: header "vertex,label", then one row per vertex in order.
void write_labels_csv(const fs::path& path, const Labels& labels);
Labels read_labels_csv(const fs::path& path, std::uint32_t num_classes);
// split.csv: header "vertex,role", role in {train,val,test}.
void write_split_csv(const fs::path& path, const SplitMask& split);
SplitMask read_split_csv(const fs::path& path);

/// Dataset directory: graph.edges, features.bin (or features.csv),
/// labels.csv, split.csv, meta.json. `meta_json` is merged into meta.json
/// next to the vertex/class/feature counts.
void save_dataset(const fs::path& dir, const Dataset& d, const std::string& meta_json = "{}");
Dataset load_dataset(const fs::path& dir);

std::string read_file(const fs::path& path);
void write_file(const fs::path& path, const std::string& contents);

}  // namespace graphfed::io
