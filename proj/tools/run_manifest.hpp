#pragma once

#include <string>
#include <vector>

#include <json.hpp>

namespace swincross::cli {

// Record of one CLI invocation. args holds the full argument list after the
// program name, so replaying them reproduces the run.
struct RunManifest {
    std::string command;
    std::vector<std::string> args;
    std::string config_path;  // empty when the built-in config was used
    nlohmann::json config;
    nlohmann::json seeds = nlohmann::json::object();
    std::string started_at;
    std::string finished_at;
    std::vector<std::string> outputs;
    nlohmann::json metrics = nlohmann::json::object();
    int exit_code = 0;
    std::string error;

    nlohmann::json to_json() const;
};

RunManifest manifest_from_json(const nlohmann::json& j);

// UTC, second resolution: 2024-01-31T12:00:00Z.
std::string utc_timestamp();

}  // namespace swincross::cli
