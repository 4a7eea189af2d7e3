#pragma once

#include <string>

#include <json.hpp>

#include "swincross/model.hpp"

// A checkpoint is a directory holding model.manifest.json (config, dtype,
// endianness "little", and per-parameter name/shape/dtype/offset/numel) and
// model.bin, the parameters concatenated in enumeration order.
namespace swincross {

inline constexpr const char* kManifestFile = "model.manifest.json";
inline constexpr const char* kPayloadFile = "model.bin";

template <typename T>
void save_checkpoint(const Model<T>& model, const std::string& dir);

// Builds a model from the stored config and fills its parameters, converting
// the stored precision to T if needed.
template <typename T>
Model<T> load_checkpoint(const std::string& dir);

// Loads into an existing model; the stored config and parameter list must
// match the model exactly.
template <typename T>
void load_checkpoint_into(const std::string& dir, Model<T>& model);

nlohmann::json read_manifest(const std::string& dir);

}  // namespace swincross
