#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fairrob/error.hpp"
#include "fairrob/model.hpp"

namespace fairrob {

// Plain binary checkpoint, little-endian:
//   "FRMD" | u32 version | u32 input_dim | u32 n_hidden | u32 hidden[...]
//   | u32 activation | u32 num_classes | u64 param_count | f64 params[...]
// A JSON sidecar (<path>.json) carries the architecture and training config.
inline constexpr char kCheckpointMagic[4] = {'F', 'R', 'M', 'D'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

template <typename T>
void write_pod(std::ofstream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  require(in.good(), "checkpoint: truncated file ", path);
  return v;
}

}  // namespace detail

inline void save_checkpoint(const SmallModel& model, const std::string& path,
                            const nlohmann::json& sidecar_extra = {}) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "save_checkpoint: cannot open ", path);
  out.write(kCheckpointMagic, 4);
  detail::write_pod<std::uint32_t>(out, kCheckpointVersion);
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(model.arch.input_dim));
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(model.arch.hidden.size()));
  for (auto h : model.arch.hidden)
    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(h));
  detail::write_pod<std::uint32_t>(out,
                                   model.arch.activation == Activation::relu ? 0u : 1u);
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(model.arch.num_classes));
  detail::write_pod<std::uint64_t>(out, model.params.size());
  out.write(reinterpret_cast<const char*>(model.params.data()),
            static_cast<std::streamsize>(model.params.size() * sizeof(double)));
  require(out.good(), "save_checkpoint: write failed for ", path);

  nlohmann::json sidecar = sidecar_extra;
  nlohmann::json arch = {{"input_dim", model.arch.input_dim},
                         {"hidden", model.arch.hidden},
                         {"activation", to_string(model.arch.activation)},
                         {"num_classes", model.arch.num_classes}};
  sidecar["architecture"] = arch;
  std::ofstream side(path + ".json");
  require(side.good(), "save_checkpoint: cannot open sidecar ", path, ".json");
  side << sidecar.dump(2) << "\n";
}

inline SmallModel load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), "load_checkpoint: cannot open ", path);
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::memcmp(magic, kCheckpointMagic, 4) == 0,
          "load_checkpoint: bad magic in ", path);
  const auto version = detail::read_pod<std::uint32_t>(in, path);
  require(version == kCheckpointVersion, "load_checkpoint: unsupported version ", version,
          " in ", path);
  const auto input_dim = detail::read_pod<std::uint32_t>(in, path);
  const auto n_hidden = detail::read_pod<std::uint32_t>(in, path);
  require(n_hidden <= 3, "load_checkpoint: corrupt hidden-layer count ", n_hidden);
  std::vector<std::size_t> hidden(n_hidden);
  for (auto& h : hidden) h = detail::read_pod<std::uint32_t>(in, path);
  const auto act = detail::read_pod<std::uint32_t>(in, path);
  require(act <= 1, "load_checkpoint: corrupt activation tag ", act);
  const auto num_classes = detail::read_pod<std::uint32_t>(in, path);
  const auto count = detail::read_pod<std::uint64_t>(in, path);
  Architecture arch(input_dim, hidden, act == 0 ? Activation::relu : Activation::tanh_,
                    num_classes);
  require(count == arch.param_count(), "load_checkpoint: parameter count ", count,
          " does not match architecture (", arch.param_count(), ")");
  std::vector<double> params(count);
  in.read(reinterpret_cast<char*>(params.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  require(in.good(), "load_checkpoint: truncated parameters in ", path);
  return SmallModel(arch, std::move(params));
}

}  // namespace fairrob
