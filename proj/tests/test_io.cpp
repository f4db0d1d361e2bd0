#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "graphfed/datagen.hpp"
#include "graphfed/error.hpp"
#include "graphfed/io.hpp"

using namespace graphfed;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "graphfed_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Dataset sample() {
  SbmConfig c;
  c.n = 90;
  c.k = 3;
  c.p_in = 0.2;
  c.p_out = 0.02;
  c.feature_dim = 5;
  return generate_sbm(c);
}

}  // namespace

TEST_CASE("dataset directory round trip") {
  const fs::path dir = fresh_dir("ds");
  const Dataset d = sample();
  io::save_dataset(dir, d, R"({"generator": "sbm", "seed": 1})");
  for (auto f : {"graph.edges", "features.bin", "labels.csv", "split.csv", "meta.json"}) CHECK(fs::exists(dir / f));
  CHECK(io::load_dataset(dir) == d);
  CHECK(io::read_file(dir / "meta.json").find("\"seed\": 1") != std::string::npos);

  SUBCASE("csv features are accepted when no binary file exists") {
    fs::remove(dir / "features.bin");
    io::write_features_csv(dir / "features.csv", d.features);
    const Dataset back = io::load_dataset(dir);
    CHECK(back.graph == d.graph);
    CHECK(max_abs_diff(back.features, d.features) < 1e-6);
  }
  SUBCASE("missing pieces") {
    fs::remove(dir / "split.csv");
    CHECK_THROWS_AS(io::load_dataset(dir), InputError);
  }
  SUBCASE("feature rows must match vertices") {
    io::write_features_bin(dir / "features.bin", Matrix(3, 5));
    CHECK_THROWS_AS(io::load_dataset(dir), InputError);
  }
  CHECK_THROWS_AS(io::load_dataset(dir / "nope"), InputError);
}

TEST_CASE("labels and split files") {
  const fs::path dir = fresh_dir("csv");
  {
    std::ofstream(dir / "labels.csv") << "vertex,label\n0,2\n1,0\n2,1\n";
    const Labels l = io::read_labels_csv(dir / "labels.csv", 0);
    CHECK(l.values == std::vector<std::uint32_t>{2, 0, 1});
    CHECK(l.num_classes == 3);
  }
  {
    std::ofstream(dir / "labels.csv") << "0,1\n2,0\n";
    CHECK_THROWS_AS(io::read_labels_csv(dir / "labels.csv", 0), InputError);
  }
  {
    std::ofstream(dir / "labels.csv") << "0,5\n";
    CHECK_THROWS_AS(io::read_labels_csv(dir / "labels.csv", 3), InputError);
  }
  {
    std::ofstream(dir / "split.csv") << "vertex,role\n0,train\n1,test\n2,val\n";
    const SplitMask s = io::read_split_csv(dir / "split.csv");
    CHECK(s.roles == std::vector<Role>{Role::kTrain, Role::kTest, Role::kVal});
  }
  {
    std::ofstream(dir / "split.csv") << "0,holdout\n";
    CHECK_THROWS_AS(io::read_split_csv(dir / "split.csv"), InputError);
  }
}
