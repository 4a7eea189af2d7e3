#include "swincross/volume_io.hpp"

#include <json.hpp>

#include "swincross/fileutil.hpp"

namespace swincross {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

std::string volume_stem(const std::string& path) {
    for (const char* ext : {".vol.json", ".vol.bin"}) {
        if (ends_with(path, ext)) return path.substr(0, path.size() - std::string(ext).size());
    }
    return path;
}

void write_volume(const std::string& path, const Volume& volume) {
    const auto& shape = volume.data.shape();
    if (shape.size() != 4) throw DimensionError("write_volume: expected [H,W,D,C], got " + shape_to_string(shape));
    if (!all_finite(volume.data)) throw NumericError("write_volume: data contains NaN or Inf");
    std::vector<std::string> names = volume.channel_names;
    if (names.empty()) {
        for (std::size_t c = 0; c < shape[3]; ++c) names.push_back("channel" + std::to_string(c));
    }
    if (names.size() != shape[3]) {
        throw DimensionError("write_volume: " + std::to_string(names.size()) + " channel names for " +
                             std::to_string(shape[3]) + " channels");
    }
    const std::string stem = volume_stem(path);
    std::string payload;
    append_little_endian(payload, volume.data.data());
    nlohmann::json header = {{"shape", shape},
                             {"dtype", "f32"},
                             {"endianness", "little"},
                             {"spacing", volume.spacing},
                             {"channel_names", names}};
    write_file_atomic(stem + ".vol.bin", payload);
    write_file_atomic(stem + ".vol.json", header.dump(2) + "\n");
}

Volume read_volume(const std::string& path) {
    const std::string stem = volume_stem(path);
    const std::string json_path = stem + ".vol.json";
    const std::string bin_path = stem + ".vol.bin";
    if (!file_exists(json_path)) throw FormatError("read_volume: missing sidecar '" + json_path + "'");
    Volume v;
    Shape shape;
    try {
        const auto header = nlohmann::json::parse(read_file(json_path));
        const std::string dtype = header.at("dtype").get<std::string>();
        if (dtype != "f32") throw FormatError("read_volume: unknown dtype '" + dtype + "' in " + json_path);
        const std::string endian = header.at("endianness").get<std::string>();
        if (endian != "little") throw FormatError("read_volume: byte order '" + endian + "' unsupported in " + json_path);
        shape = header.at("shape").get<Shape>();
        if (header.contains("spacing")) v.spacing = header.at("spacing").get<std::array<double, 3>>();
        if (header.contains("channel_names")) v.channel_names = header.at("channel_names").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("read_volume: malformed sidecar '" + json_path + "': " + e.what());
    }
    if (shape.size() != 4) throw FormatError("read_volume: shape must have 4 entries in " + json_path);
    for (auto d : shape) {
        if (d == 0) throw FormatError("read_volume: zero extent in shape of " + json_path);
    }
    if (!v.channel_names.empty() && v.channel_names.size() != shape[3]) {
        throw FormatError("read_volume: channel_names length differs from channel count in " + json_path);
    }
    if (!file_exists(bin_path)) throw FormatError("read_volume: missing payload '" + bin_path + "'");
    const std::string payload = read_file(bin_path);
    const std::size_t expected = shape_numel(shape) * sizeof(float);
    if (payload.size() != expected) {
        throw FormatError("read_volume: payload '" + bin_path + "' has " + std::to_string(payload.size()) +
                          " bytes, shape " + shape_to_string(shape) + " needs " + std::to_string(expected));
    }
    v.data = Tensor<float>(shape, decode_little_endian<float>(payload));
    return v;
}

}  // namespace swincross
