#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "anchorloc/eval.hpp"
#include "anchorloc/scenario.hpp"

namespace anchorloc::io {

using nlohmann::json;

/// Everything the localizer/evaluator needs besides the log itself.
struct RunConfig {
    PipelineConfig pipeline;
    double eval_bin_width = 10.0; // s

    static constexpr int kSchemaVersion = 1;
};

std::string encode_base64(const std::uint8_t* data, std::size_t len);
std::vector<std::uint8_t> decode_base64(const std::string& text);

// --- scenario config (JSON, degrees at this boundary) ---
json scenario_to_json(const Scenario& scn);
Scenario scenario_from_json(const json& j); // throws ValidationError naming bad fields
Scenario load_scenario(const std::filesystem::path& path);

// --- measurement log (newline-delimited records, attitudes in radians,
// complex samples as base64 little-endian float64 pairs) ---
std::string log_to_string(const MeasurementLog& log);
MeasurementLog log_from_string(const std::string& text); // throws ValidationError
void save_log(const MeasurementLog& log, const std::filesystem::path& path);
MeasurementLog load_log(const std::filesystem::path& path);

// --- pose stream (text records, degrees at this boundary) ---
struct PoseRecord {
    double t = 0.0;
    Point3 position;
    EulerAngles attitude; // radians in memory
    double quality = 0.0;
};
std::vector<PoseRecord> pose_records(const PipelineResult& result);
std::vector<Pose6DoF> to_poses(const std::vector<PoseRecord>& records);
std::string poses_to_string(const std::vector<PoseRecord>& records, const DropStats* stats);
std::vector<PoseRecord> poses_from_string(const std::string& text,
                                          DropStats* stats = nullptr);
void save_poses(const std::vector<PoseRecord>& records, const DropStats* stats,
                const std::filesystem::path& path);
std::vector<PoseRecord> load_poses(const std::filesystem::path& path,
                                   DropStats* stats = nullptr);

// --- evaluation report ---
json report_to_json(const ErrorReport& report);
void save_report(const ErrorReport& report, const std::filesystem::path& path);

// --- run config ---
json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const json& j); // throws ValidationError
RunConfig load_run_config(const std::filesystem::path& path);

/// Write via temp file + rename so readers never observe a partial file.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

std::string drop_stats_summary(const DropStats& stats);

} // namespace anchorloc::io
