#include "run_manifest.hpp"

#include <chrono>
#include <ctime>

#include "swincross/errors.hpp"

namespace swincross::cli {

nlohmann::json RunManifest::to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["args"] = args;
    j["config_path"] = config_path;
    j["config"] = config;
    j["seeds"] = seeds;
    j["started_at"] = started_at;
    j["finished_at"] = finished_at;
    j["outputs"] = outputs;
    j["metrics"] = metrics;
    j["exit_code"] = exit_code;
    if (!error.empty()) j["error"] = error;
    return j;
}

RunManifest manifest_from_json(const nlohmann::json& j) {
    RunManifest m;
    try {
        m.command = j.at("command").get<std::string>();
        m.args = j.at("args").get<std::vector<std::string>>();
        m.config_path = j.value("config_path", std::string());
        m.config = j.value("config", nlohmann::json());
        m.seeds = j.value("seeds", nlohmann::json::object());
        m.started_at = j.value("started_at", std::string());
        m.finished_at = j.value("finished_at", std::string());
        m.outputs = j.value("outputs", std::vector<std::string>());
        m.metrics = j.value("metrics", nlohmann::json::object());
        m.exit_code = j.value("exit_code", 0);
        m.error = j.value("error", std::string());
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("run manifest: ") + e.what());
    }
    return m;
}

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

}  // namespace swincross::cli
