#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sidx/deconv.hpp"
#include "sidx/index.hpp"
#include "sidx/inference.hpp"
#include "sidx/model.hpp"
#include "sidx/pilot.hpp"
#include "sidx/surrogate.hpp"

namespace sidx {

struct SplitConfig {
    double fraction = 0.5;  // share of observations in I1
    bool no_split = false;
    std::uint64_t seed = 0;

    void validate() const;
};

struct SplitIndices {
    std::vector<Eigen::Index> first;   // I1: pilot, index and link
    std::vector<Eigen::Index> second;  // I2: coefficients and inference
};

/// Seeded shuffle of [n]; |I1| = round(fraction * n). no_split returns [n] twice.
SplitIndices split_data(Eigen::Index n, const SplitConfig& cfg);

/// Design covariance of simulated data.
struct CovarianceSpec {
    enum class Kind { Identity, Ar1, Equicorrelated, Explicit };
    Kind kind = Kind::Identity;
    double rho = 0.0;
    MatrixXd matrix;  // Explicit only

    DesignSpec design(Eigen::Index p) const;
};

struct PipelineConfig {
    std::string model = "cloglog";  // data-generating process for simulations
    Eigen::Index n = 400;
    Eigen::Index p = 160;
    CovarianceSpec sigma;
    CoefficientScheme beta = CoefficientScheme::uniform_sphere();
    PilotKind pilot = PilotKind::ridge(1.0);
    DeconvConfig deconv = DeconvConfig::defaults();
    Penalty penalty = Penalty::ridge(0.1);
    InferenceMode inference = InferenceMode::ridge(0.1);
    double alpha = 0.05;
    SplitConfig split;
    /// Bypass: use this link in place of the estimated one and skip steps (i)-(iii).
    std::optional<LinkFunction> link_override;

    enum class Defaults { Simulation, Data };

    /// Keys: model, n, p, sigma, beta, pilot{kind, lambda},
    /// deconv{kernel, grid, bandwidth, monotonizer, eps}, penalty{kind, lambda},
    /// inference{mode, alpha, lambda, window}, split{fraction, no_split, seed}.
    /// Missing keys keep their defaults; the split defaults to off in data mode.
    static PipelineConfig from_json(const nlohmann::json& doc, Defaults defaults = Defaults::Simulation);
    nlohmann::json to_json() const;

    /// Throws a config error on inconsistent settings.
    void validate() const;
};

struct PipelineReport {
    PilotFit pilot;
    IndexEstimate index;
    LinkEstimate link;
    CoefFit coef;
    InferenceReport inference;
    Eigen::Index n1 = 0;
    Eigen::Index n2 = 0;
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    bool bypass = false;
    nlohmann::json config;
};

/// Steps (i)-(iv) with the split drawn from cfg.split. `tau` defaults to ones.
PipelineReport run_pipeline(const Dataset& data, const PipelineConfig& cfg, const VectorXd& tau = {});

/// Same with caller-supplied index sets.
PipelineReport run_pipeline(const Dataset& data, const PipelineConfig& cfg, const SplitIndices& split,
                            const VectorXd& tau = {});

/// Everything but the per-observation index values.
nlohmann::json to_json(const PipelineReport& report);

/// One simulated replication of the configured model.
struct Simulation {
    Dataset data;
    Coefficients beta;
    DesignSpec design;
};

/// Streams are derived from (seed, rep) so replications are independent of each other.
Simulation simulate(const PipelineConfig& cfg, std::uint64_t seed, std::uint64_t rep = 0);

}  // namespace sidx
