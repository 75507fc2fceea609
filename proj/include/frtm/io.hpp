#pragma once

// JSON persistence: curve batches, Phase I bundles, monitoring results and configs.

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "frtm/pipeline.hpp"
#include "frtm/simgen.hpp"

namespace frtm {

using json = nlohmann::json;

constexpr int kSchemaVersion = 1;

/// One curve of a batch file; truth is present for simulated data.
struct BatchCurve {
    std::string id;
    SampledCurve samples;
    std::optional<CurveTruth> truth;
};

struct Batch {
    std::optional<GenConfig> generator;
    std::vector<BatchCurve> curves;

    std::vector<SampledCurve> samples() const;
    std::vector<std::string> ids() const;
    /// Generating change points (empty optionals for IC or real data).
    std::vector<std::optional<double>> change_points() const;
};

Batch make_batch(const GenConfig& config, const std::vector<SimulatedCurve>& curves);

json to_json(const Batch& batch);
Batch batch_from_json(const json& j);

json to_json(const Phase1Artifacts& artifacts);
/// Throws VersionMismatch for another schema version, InvalidInput for malformed content.
Phase1Artifacts artifacts_from_json(const json& j);

json to_json(const Phase2Output& output);
Phase2Output results_from_json(const json& j);
/// One row per observed grid point of every curve.
std::string results_csv(const Phase2Output& output);

json to_json(const PipelineConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig pipeline_config_from_json(const json& j);

json to_json(const GenConfig& config);
/// Starts from "preset" when given, then applies the remaining keys.
GenConfig gen_config_from_json(const json& j);

json read_json(const std::string& path);
/// Writes the pretty-printed document followed by a newline.
void write_json(const std::string& path, const json& j);
void write_text(const std::string& path, const std::string& text);

}  // namespace frtm
