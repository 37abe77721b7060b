#pragma once

// Flat JSON schemas for the scene, training and tracking configs. Unknown
// keys are rejected so typos in sweep files fail loudly.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dftrack/synth.hpp"
#include "dftrack/tracker.hpp"
#include "dftrack/training.hpp"

namespace dft::cli {

using Json = nlohmann::ordered_json;

Json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const Json& j);

Json to_json(const SceneConfig& c);
// Overrides fields of c present in j.
void apply_json(const Json& j, SceneConfig& c);

Json to_json(const TrainConfig& c);
void apply_json(const Json& j, TrainConfig& c);

Json to_json(const TrackerConfig& c);
void apply_json(const Json& j, TrackerConfig& c);

// SHA-256 of the compact dump.
std::string config_hash(const Json& j);

}  // namespace dft::cli
