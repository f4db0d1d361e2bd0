#include "graphfed/params_io.hpp"

#include <cstring>

#include "graphfed/bytes.hpp"
#include "graphfed/error.hpp"
#include "graphfed/io.hpp"

namespace graphfed {

std::string serialize_params(const ModelParams& p) {
  ByteWriter w;
  w.raw(kParamsMagic, 4);
  w.u32(kParamsVersion);
  w.u32(static_cast<std::uint32_t>(p.weights.size()));
  for (const auto& m : p.weights) {
    w.u32(2);
    w.u64(m.rows());
    w.u64(m.cols());
    for (double x : m.data()) w.f32(static_cast<float>(x));
  }
  return w.take();
}

ModelParams deserialize_params(std::string_view bytes) {
  ByteReader r(bytes);
  char magic[4];
  r.raw(magic, 4);
  if (std::memcmp(magic, kParamsMagic, 4) != 0) throw InputError("params: bad magic");
  if (r.u32() != kParamsVersion) throw InputError("params: unsupported version");
  const std::uint32_t count = r.u32();
  ModelParams p;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::uint32_t rank = r.u32();
    if (rank != 2) throw InputError("params: only rank-2 tensors are supported");
    const std::uint64_t rows = r.u64(), cols = r.u64();
    if (cols != 0 && rows > r.remaining() / 4 / cols)
      throw InputError("params: declared dimensions exceed the available data");
    Matrix m(rows, cols);
    for (double& x : m.data()) x = r.f32();
    p.weights.push_back(std::move(m));
  }
  if (r.remaining() != 0) throw InputError("params: trailing bytes after the last tensor");
  return p;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& p) {
  io::write_file(path, serialize_params(p));
}

ModelParams load_checkpoint(const std::filesystem::path& path) { return deserialize_params(io::read_file(path)); }

}  // namespace graphfed
