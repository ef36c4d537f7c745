#pragma once

#include <filesystem>
#include <map>
#include <string>

#include <json.hpp>

#include "hrl/mlp.hpp"

namespace hrl::netopt {

inline constexpr int kCheckpointVersion = 1;

// {version, layer_sizes, weights: [layer][out][in], biases: [layer][out]}
nlohmann::json to_json(const Mlp& net);
Mlp mlp_from_json(const nlohmann::json& doc);

void save_mlp(const Mlp& net, const std::filesystem::path& path);
Mlp load_mlp(const std::filesystem::path& path);

// A directory of networks: manifest.json maps role -> file plus free-form
// metadata; each network sits in "<role>.params.json".
void save_bundle(const std::filesystem::path& dir, const std::map<std::string, const Mlp*>& nets,
                 const nlohmann::json& metadata);
std::map<std::string, Mlp> load_bundle(const std::filesystem::path& dir,
                                       nlohmann::json* metadata = nullptr);

}  // namespace hrl::netopt
