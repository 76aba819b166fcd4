#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhlab/report.hpp"
#include "bhlab/sampler.hpp"

namespace bhlab::io {

struct ConfigInvalid : std::runtime_error {
    ConfigInvalid(const std::string& field, const std::string& what)
        : std::runtime_error("config invalid at '" + field + "': " + what), field(field) {}
    std::string field;
};
struct ExperimentUnknown : std::runtime_error {
    explicit ExperimentUnknown(const std::string& what) : std::runtime_error(what) {}
};
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct ExperimentInfo {
    std::string name;
    std::string description;
};

/// The experiment catalog in stable order.
const std::vector<ExperimentInfo>& list_experiments();

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> samples;
    std::optional<double> t_max;
    std::optional<std::string> out_dir;
    std::optional<unsigned> threads;
};

struct RunResult {
    int status = 0;  // 0 iff every assertion passed
    expt::Report report;
    std::string report_path;
};

/// Loads, validates and executes a config file; writes report.json and the
/// curve CSVs under the output directory (guarded by a lock file).
RunResult run_experiment(const std::string& config_path, const RunOverrides& overrides = {});

/// In-memory variant: validates and runs without touching the filesystem.
expt::Report run_experiment_json(const nlohmann::json& config);

/// Validates a full experiment config document (throws ConfigInvalid /
/// ExperimentUnknown) and returns the effective config with defaults merged.
nlohmann::json validate_config(const nlohmann::json& config);

/// Columnar sample persistence. CSV columns: time,x,y,feature_id,truncated,
/// steps; a config-hash footer closes the file.
void export_samples(const mc::SampleBatch& batch, const geom::Domain& domain, const std::string& path);
mc::SampleBatch import_samples(const std::string& path);

/// Runs the sampling described by an export config ({domain, start, sampler,
/// samples, seed, threads}) and returns the batch plus its domain.
std::pair<mc::SampleBatch, geom::Domain> sample_from_export_config(const nlohmann::json& config);

/// Report serialization (schema_version 1); deterministic for identical
/// reports.
void write_report(const expt::Report& report, const std::string& out_dir);

}  // namespace bhlab::io
