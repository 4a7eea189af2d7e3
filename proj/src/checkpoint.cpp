#include "swincross/checkpoint.hpp"

#include <filesystem>
#include <type_traits>

#include "swincross/fileutil.hpp"

namespace swincross {

namespace {

template <typename T>
const char* dtype_name() {
    return std::is_same_v<T, float> ? "f32" : "f64";
}

std::string join(const std::string& dir, const char* file) {
    return (std::filesystem::path(dir) / file).string();
}

template <typename T>
nlohmann::json build_manifest(const Model<T>& model) {
    nlohmann::json params = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& p : model.parameters().items()) {
        params.push_back({{"name", p.name},
                          {"shape", p.tensor.shape()},
                          {"dtype", dtype_name<T>()},
                          {"offset", offset},
                          {"numel", p.tensor.numel()}});
        offset += p.tensor.numel() * sizeof(T);
    }
    return {{"format", "swincross-checkpoint"},
            {"version", 1},
            {"config", to_json(model.config())},
            {"dtype", dtype_name<T>()},
            {"endianness", "little"},
            {"payload_bytes", offset},
            {"parameters", params}};
}

template <typename Stored, typename T>
void fill_from_payload(const nlohmann::json& manifest, const std::string& payload, Model<T>& model) {
    const auto& entries = manifest.at("parameters");
    const auto& items = model.parameters().items();
    for (std::size_t i = 0; i < items.size(); ++i) {
        const auto& e = entries[i];
        const std::size_t offset = e.at("offset").get<std::size_t>();
        const std::size_t n = items[i].tensor.numel();
        if (offset + n * sizeof(Stored) > payload.size()) {
            throw FormatError("checkpoint: parameter '" + items[i].name + "' extends past the end of the payload");
        }
        const auto values = decode_little_endian<Stored>(std::string_view(payload).substr(offset, n * sizeof(Stored)));
        Tensor<T> t = items[i].tensor;
        auto dst = t.mutable_data();
        for (std::size_t k = 0; k < n; ++k) dst[k] = static_cast<T>(values[k]);
    }
}

}  // namespace

nlohmann::json read_manifest(const std::string& dir) {
    const std::string path = join(dir, kManifestFile);
    if (!file_exists(path)) throw FormatError("checkpoint: missing manifest '" + path + "'");
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("checkpoint: manifest '" + path + "' is not valid JSON: " + e.what());
    }
}

template <typename T>
void save_checkpoint(const Model<T>& model, const std::string& dir) {
    ensure_directory(dir);
    std::string payload;
    payload.reserve(model.param_count() * sizeof(T));
    for (const auto& p : model.parameters().items()) append_little_endian(payload, p.tensor.data());
    write_file_atomic(join(dir, kPayloadFile), payload);
    write_file_atomic(join(dir, kManifestFile), build_manifest(model).dump(2) + "\n");
}

template <typename T>
void load_checkpoint_into(const std::string& dir, Model<T>& model) {
    const auto manifest = read_manifest(dir);
    try {
        if (manifest.at("endianness") != "little") {
            throw FormatError("checkpoint: byte order '" + manifest.at("endianness").dump() +
                              "' unsupported (expected \"little\")");
        }
        const auto stored_cfg = config_from_json(manifest.at("config"));
        const auto want = to_json(model.config());
        const auto have = to_json(stored_cfg);
        if (want != have) {
            std::string diff;
            for (const auto& item : want.items()) {
                if (have.at(item.key()) != item.value()) {
                    diff += " " + item.key() + ": checkpoint " + have.at(item.key()).dump() + " vs model " +
                            item.value().dump() + ";";
                }
            }
            throw FormatError("checkpoint: manifest config does not match model:" + diff);
        }
        const auto& entries = manifest.at("parameters");
        const auto& items = model.parameters().items();
        if (!entries.is_array() || entries.size() != items.size()) {
            throw FormatError("checkpoint: manifest lists " + std::to_string(entries.size()) + " parameters, model has " +
                              std::to_string(items.size()));
        }
        const std::string dtype = manifest.at("dtype").get<std::string>();
        if (dtype != "f32" && dtype != "f64") throw FormatError("checkpoint: unknown dtype '" + dtype + "'");
        const std::size_t elem = dtype == "f32" ? 4 : 8;
        std::size_t expected = 0;
        for (std::size_t i = 0; i < items.size(); ++i) {
            const auto& e = entries[i];
            if (e.at("name") != items[i].name || e.at("shape").get<Shape>() != items[i].tensor.shape()) {
                throw FormatError("checkpoint: parameter " + std::to_string(i) + " is '" + e.at("name").get<std::string>() +
                                  "' " + e.at("shape").dump() + ", model expects '" + items[i].name + "' " +
                                  shape_to_string(items[i].tensor.shape()));
            }
            if (e.at("dtype") != dtype) throw FormatError("checkpoint: mixed dtypes in manifest");
            expected += items[i].tensor.numel() * elem;
        }
        if (manifest.at("payload_bytes").get<std::size_t>() != expected) {
            throw FormatError("checkpoint: manifest payload_bytes " + manifest.at("payload_bytes").dump() +
                              " differs from the parameter total " + std::to_string(expected));
        }
        const std::string bin = join(dir, kPayloadFile);
        if (!file_exists(bin)) throw FormatError("checkpoint: missing payload '" + bin + "'");
        const std::string payload = read_file(bin);
        if (payload.size() != expected) {
            throw FormatError("checkpoint: payload '" + bin + "' has " + std::to_string(payload.size()) +
                              " bytes, manifest requires " + std::to_string(expected));
        }
        if (dtype == "f32") fill_from_payload<float>(manifest, payload, model);
        else fill_from_payload<double>(manifest, payload, model);
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: malformed manifest: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: manifest config invalid: ") + e.what());
    }
}

template <typename T>
Model<T> load_checkpoint(const std::string& dir) {
    const auto manifest = read_manifest(dir);
    SwinCrossConfig cfg;
    try {
        cfg = config_from_json(manifest.at("config"));
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("checkpoint: malformed manifest: ") + e.what());
    } catch (const ConfigError& e) {
        throw FormatError(std::string("checkpoint: manifest config invalid: ") + e.what());
    }
    auto model = Model<T>::build(cfg, 0);
    load_checkpoint_into(dir, model);
    return model;
}

template void save_checkpoint<float>(const Model<float>&, const std::string&);
template void save_checkpoint<double>(const Model<double>&, const std::string&);
template Model<float> load_checkpoint<float>(const std::string&);
template Model<double> load_checkpoint<double>(const std::string&);
template void load_checkpoint_into<float>(const std::string&, Model<float>&);
template void load_checkpoint_into<double>(const std::string&, Model<double>&);

}  // namespace swincross
