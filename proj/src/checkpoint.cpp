#include "hrl/checkpoint.hpp"

#include <fstream>

#include "hrl/errors.hpp"

namespace hrl::netopt {

using nlohmann::json;

json to_json(const Mlp& net) {
  json doc;
  doc["version"] = kCheckpointVersion;
  doc["layer_sizes"] = net.layer_sizes();
  json weights = json::array();
  json biases = json::array();
  const auto& sizes = net.layer_sizes();
  for (int l = 0; l < net.num_layers(); ++l) {
    const auto w = net.weights(l);
    json rows = json::array();
    for (int o = 0; o < sizes[l + 1]; ++o) {
      rows.push_back(std::vector<double>(w.begin() + static_cast<long>(o) * sizes[l],
                                         w.begin() + static_cast<long>(o + 1) * sizes[l]));
    }
    weights.push_back(std::move(rows));
    const auto b = net.biases(l);
    biases.push_back(std::vector<double>(b.begin(), b.end()));
  }
  doc["weights"] = std::move(weights);
  doc["biases"] = std::move(biases);
  return doc;
}

Mlp mlp_from_json(const json& doc) {
  try {
    if (doc.at("version").get<int>() != kCheckpointVersion) {
      throw Error("E_FORMAT", "unsupported checkpoint version");
    }
    Mlp net(doc.at("layer_sizes").get<std::vector<int>>());
    const auto& sizes = net.layer_sizes();
    const auto& weights = doc.at("weights");
    const auto& biases = doc.at("biases");
    if (weights.size() != static_cast<std::size_t>(net.num_layers()) ||
        biases.size() != weights.size()) {
      throw Error("E_FORMAT", "checkpoint layer count does not match layer_sizes");
    }
    for (int l = 0; l < net.num_layers(); ++l) {
      auto w = net.mutable_weights(l);
      const auto& rows = weights[l];
      if (rows.size() != static_cast<std::size_t>(sizes[l + 1])) {
        throw Error("E_FORMAT", "checkpoint weight rows do not match layer_sizes");
      }
      for (int o = 0; o < sizes[l + 1]; ++o) {
        const auto row = rows[o].get<std::vector<double>>();
        if (row.size() != static_cast<std::size_t>(sizes[l])) {
          throw Error("E_FORMAT", "checkpoint weight columns do not match layer_sizes");
        }
        std::copy(row.begin(), row.end(), w.begin() + static_cast<long>(o) * sizes[l]);
      }
      const auto b = biases[l].get<std::vector<double>>();
      if (b.size() != static_cast<std::size_t>(sizes[l + 1])) {
        throw Error("E_FORMAT", "checkpoint bias length does not match layer_sizes");
      }
      std::copy(b.begin(), b.end(), net.mutable_biases(l).begin());
    }
    return net;
  } catch (const json::exception& e) {
    throw Error("E_FORMAT", std::string("malformed checkpoint: ") + e.what());
  }
}

void save_mlp(const Mlp& net, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << to_json(net).dump() << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

Mlp load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw Error("E_FORMAT", path.string() + ": " + e.what());
  }
  return mlp_from_json(doc);
}

void save_bundle(const std::filesystem::path& dir, const std::map<std::string, const Mlp*>& nets,
                 const json& metadata) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  json manifest;
  manifest["version"] = kCheckpointVersion;
  manifest["roles"] = json::object();
  for (const auto& [role, net] : nets) {
    const std::string file = role + ".params.json";
    save_mlp(*net, dir / file);
    manifest["roles"][role] = file;
  }
  manifest["metadata"] = metadata;
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

std::map<std::string, Mlp> load_bundle(const std::filesystem::path& dir, json* metadata) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw IoError("no manifest.json in " + dir.string());
  json manifest;
  try {
    in >> manifest;
  } catch (const json::exception& e) {
    throw Error("E_FORMAT", "manifest.json: " + std::string(e.what()));
  }
  std::map<std::string, Mlp> nets;
  for (const auto& [role, file] : manifest.at("roles").items()) {
    nets.emplace(role, load_mlp(dir / file.get<std::string>()));
  }
  if (metadata) *metadata = manifest.value("metadata", json::object());
  return nets;
}

}  // namespace hrl::netopt
