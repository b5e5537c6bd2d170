#pragma once

#include "adagnn/common.hpp"
#include "adagnn/model.hpp"
#include "adagnn/optim.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace adagnn {

inline nlohmann::json config_to_json(const TrainConfig& c) {
  return {{"lr", c.lr},
          {"max_epochs", c.max_epochs},
          {"dropout", c.dropout},
          {"alpha", c.alpha},
          {"beta", c.beta},
          {"patience", c.patience},
          {"seed", c.seed},
          {"beta1", c.beta1},
          {"beta2", c.beta2},
          {"eps", c.eps},
          {"dropout_intermediate", c.dropout_intermediate},
          {"row_normalize", c.row_normalize}};
}

inline TrainConfig config_from_json(const nlohmann::json& j) {
  TrainConfig c;
  c.lr = j.at("lr").get<double>();
  c.max_epochs = j.at("max_epochs").get<int>();
  c.dropout = j.at("dropout").get<double>();
  c.alpha = j.at("alpha").get<double>();
  c.beta = j.at("beta").get<double>();
  c.patience = j.at("patience").get<int>();
  c.seed = j.at("seed").get<std::uint64_t>();
  c.beta1 = j.at("beta1").get<double>();
  c.beta2 = j.at("beta2").get<double>();
  c.eps = j.at("eps").get<double>();
  c.dropout_intermediate = j.at("dropout_intermediate").get<bool>();
  c.row_normalize = j.at("row_normalize").get<bool>();
  return c;
}

inline std::string config_hash(const TrainConfig& c) { return hex64(fnv1a(config_to_json(c).dump())); }

struct Checkpoint {
  ModelParams params;
  TrainConfig config;
  std::string split = "planetoid";  // how the training masks were obtained
};

inline constexpr char kCheckpointMagic[8] = {'A', 'D', 'A', 'G', 'N', 'N', '0', '1'};

/// Layout: 8-byte magic, little-endian u64 header length, JSON header
/// (kind, dims, block sizes, config, config hash), then every parameter
/// block as raw little-endian f64 in ModelParams::blocks() order.
inline void save_checkpoint(const Checkpoint& ck, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "checkpoint format assumes a little-endian host");
  const ModelParams& p = ck.params;
  nlohmann::json header;
  header["kind"] = to_string(p.kind);
  header["dims"] = {{"layers", p.dims.layers},
                    {"features", p.dims.features},
                    {"hidden", p.dims.hidden},
                    {"classes", p.dims.classes}};
  std::vector<std::size_t> sizes;
  for (const auto& b : p.blocks()) sizes.push_back(b.data.size());
  header["blocks"] = sizes;
  header["config"] = config_to_json(ck.config);
  header["config_hash"] = config_hash(ck.config);
  header["split"] = ck.split;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  const std::uint64_t len = text.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof(len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& b : p.blocks()) {
    out.write(reinterpret_cast<const char*>(b.data.data()), static_cast<std::streamsize>(b.data.size_bytes()));
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
    throw std::runtime_error(path.string() + " is not a checkpoint");
  }
  std::uint64_t len = 0;
  in.read(reinterpret_cast<char*>(&len), sizeof(len));
  if (!in || len > (1u << 24)) throw std::runtime_error(path.string() + ": bad header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw std::runtime_error(path.string() + ": truncated header");

  Checkpoint ck;
  try {
    const auto header = nlohmann::json::parse(text);
    const auto& d = header.at("dims");
    ModelDims dims{d.at("layers").get<int>(), d.at("features").get<Index>(), d.at("hidden").get<Index>(),
                   d.at("classes").get<Index>()};
    ck.params = ModelParams::shaped(parse_model_kind(header.at("kind").get<std::string>()), dims);
    ck.config = config_from_json(header.at("config"));
    if (header.at("config_hash").get<std::string>() != config_hash(ck.config)) {
      throw std::runtime_error("config hash mismatch");
    }
    ck.split = header.at("split").get<std::string>();
    const auto sizes = header.at("blocks").get<std::vector<std::size_t>>();
    auto blocks = ck.params.blocks();
    if (sizes.size() != blocks.size()) throw std::runtime_error("block count does not match the model shape");
    for (std::size_t b = 0; b < blocks.size(); ++b) {
      if (sizes[b] != blocks[b].data.size()) throw std::runtime_error("block " + std::to_string(b) + " size mismatch");
    }
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(path.string() + ": malformed header: " + e.what());
  }
  for (auto& b : ck.params.blocks()) {
    in.read(reinterpret_cast<char*>(b.data.data()), static_cast<std::streamsize>(b.data.size_bytes()));
    if (!in) throw std::runtime_error(path.string() + ": truncated parameter data");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw std::runtime_error(path.string() + ": trailing bytes");
  return ck;
}

/// Throws DimensionError naming the first dimension that disagrees.
inline void check_params_match(const ModelParams& p, const Dataset& ds) {
  if (p.dims.features != ds.num_features()) {
    throw DimensionError("checkpoint expects F=" + std::to_string(p.dims.features) + " features, dataset has " +
                         std::to_string(ds.num_features()));
  }
  if (p.dims.classes != ds.num_classes) {
    throw DimensionError("checkpoint expects C=" + std::to_string(p.dims.classes) + " classes, dataset has " +
                         std::to_string(ds.num_classes));
  }
}

}  // namespace adagnn
