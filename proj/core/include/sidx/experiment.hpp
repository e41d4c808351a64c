#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "sidx/pipeline.hpp"

namespace sidx {

/// (n, p) of one experiment cell.
using SizePair = std::pair<Eigen::Index, Eigen::Index>;

struct ExperimentSpec {
    std::string experiment = "figure1";  // figure1, figure2, figure3, table1, custom
    int replications = 0;                // 0 selects the experiment's default
    std::vector<std::string> models;     // empty selects the default model list
    std::vector<SizePair> sizes;         // empty selects the default sizes
    std::filesystem::path out_dir;       // empty: nothing is written
    std::uint64_t seed = 20240601;
    unsigned threads = 0;                // 0: std::thread::hardware_concurrency()
    std::optional<PilotKind> pilot;      // overrides the per-model default pilot
    std::optional<double> lambda;        // ridge penalty for coefficient fits
    std::optional<bool> no_split;
    double alpha = 0.05;
    /// Template for deconvolution settings; the full configuration for `custom`.
    PipelineConfig base;

    void validate() const;
};

struct ExperimentFile {
    std::string name;
    std::string description;  // record unit and columns
    std::string content;
};

struct ExperimentResult {
    nlohmann::json manifest;  // spec echo, per-cell summaries, file descriptions
    std::vector<ExperimentFile> files;
};

/// Runs the replications on a worker pool and merges them in replication order.
/// Writes the CSVs and manifest.json when spec.out_dir is set.
ExperimentResult run_experiment(const ExperimentSpec& spec);

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir);

/// Pilot used when none is requested: ridge when p >= n, otherwise logistic MLE
/// for binary responses, Poisson MLE for counts and least squares for the rest.
PilotKind default_pilot(ModelVariant variant, Eigen::Index n, Eigen::Index p);

/// E[y | index = t] of a built-in model.
double true_mean(const SimModel& model, double t);

}  // namespace sidx
