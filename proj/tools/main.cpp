// sidx: simulate data, fit single-index models, run inference and experiments.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sidx/csv.hpp"
#include "sidx/error.hpp"
#include "sidx/experiment.hpp"
#include "sidx/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonOptions {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string model;
    std::string pilot;
    std::optional<double> pilot_lambda;
    std::optional<double> lambda;
    bool no_split = false;
    std::optional<double> alpha;
};

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) sidx::config_error("cannot open config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        sidx::config_error("config '" + path + "': " + e.what());
    }
}

sidx::PipelineConfig load_config(const CommonOptions& o, sidx::PipelineConfig::Defaults defaults) {
    const json doc = o.config.empty() ? json::object() : read_json(o.config);
    sidx::PipelineConfig cfg = sidx::PipelineConfig::from_json(doc, defaults);
    if (!o.model.empty()) cfg.model = o.model;
    if (!o.pilot.empty()) cfg.pilot = sidx::PilotKind::parse(o.pilot, o.pilot_lambda.value_or(cfg.pilot.lambda));
    if (o.pilot_lambda && cfg.pilot.kind == sidx::PilotKind::Kind::Ridge) cfg.pilot.lambda = *o.pilot_lambda;
    if (o.lambda) {
        cfg.penalty = sidx::Penalty::ridge(*o.lambda);
        cfg.inference = sidx::InferenceMode::ridge(*o.lambda);
    }
    if (o.no_split) cfg.split.no_split = true;
    if (o.seed) cfg.split.seed = *o.seed;
    if (o.alpha) cfg.alpha = *o.alpha;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* app, CommonOptions& o) {
    app->add_option("--config", o.config, "JSON configuration file");
    app->add_option("--seed", o.seed, "Random seed");
    app->add_option("--out", o.out, "Output directory");
    app->add_option("--model", o.model,
                    "Model: cloglog, xsqrt, cubic, piecewise, logit, poisson, cubic+, piecewise+");
    app->add_option("--pilot", o.pilot, "Pilot estimator: ridge, ls, logit-mle, pois-mle");
    app->add_option("--pilot-lambda", o.pilot_lambda, "Ridge pilot penalty");
    app->add_option("--lambda", o.lambda, "Ridge penalty of the coefficient fit");
    app->add_flag("--no-split", o.no_split, "Use all observations for every step");
    app->add_option("--alpha", o.alpha, "Significance level");
}

fs::path ensure_dir(const std::string& out) {
    const fs::path dir(out);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) sidx::config_error("cannot create '" + out + "': " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) sidx::config_error("cannot write '" + path.string() + "'");
    return f;
}

void write_beta(const sidx::VectorXd& beta, std::ostream& out) {
    out << "j,beta\n";
    for (Eigen::Index j = 0; j < beta.size(); ++j) out << (j + 1) << ',' << sidx::format_double(beta(j)) << '\n';
}

int cmd_simulate(const CommonOptions& o) {
    const sidx::PipelineConfig cfg = load_config(o, sidx::PipelineConfig::Defaults::Simulation);
    const std::uint64_t seed = o.seed.value_or(1);
    const sidx::Simulation sim = sidx::simulate(cfg, seed);
    if (o.out.empty()) {
        sidx::write_dataset_csv(sim.data, std::cout);
        return 0;
    }
    const fs::path dir = ensure_dir(o.out);
    auto data = open_out(dir / "data.csv");
    sidx::write_dataset_csv(sim.data, data);
    auto beta = open_out(dir / "beta.csv");
    write_beta(sim.beta.beta, beta);
    auto manifest = open_out(dir / "manifest.json");
    manifest << json{{"config", cfg.to_json()}, {"seed", seed}, {"files", {"data.csv", "beta.csv"}}}.dump(2) << '\n';
    return 0;
}

/// Dataset from --data, or a simulated one when no file is given.
sidx::Dataset obtain_data(const std::string& data_path, const std::string& response, const CommonOptions& o,
                          sidx::PipelineConfig& cfg) {
    if (!data_path.empty()) return sidx::ingest_csv(data_path, response);
    return sidx::simulate(cfg, o.seed.value_or(1)).data;
}

int cmd_fit(const CommonOptions& o, const std::string& data_path, const std::string& response, bool full) {
    const auto defaults =
        data_path.empty() ? sidx::PipelineConfig::Defaults::Simulation : sidx::PipelineConfig::Defaults::Data;
    sidx::PipelineConfig cfg = load_config(o, defaults);
    const sidx::Dataset data = obtain_data(data_path, response, o, cfg);
    const sidx::PipelineReport rep = sidx::run_pipeline(data, cfg);

    json report = sidx::to_json(rep);
    if (!full) report.erase("inference");
    if (o.out.empty()) {
        std::cout << report.dump(2) << '\n';
        return 0;
    }
    const fs::path dir = ensure_dir(o.out);
    auto rj = open_out(dir / "report.json");
    rj << report.dump(2) << '\n';
    if (!rep.bypass) {
        auto link = open_out(dir / "link.csv");
        sidx::write_link_csv(rep.link, link);
    }
    auto coef = open_out(dir / "coefficients.csv");
    write_beta(rep.coef.beta_hat, coef);
    if (full) {
        auto ij = open_out(dir / "inference.json");
        sidx::write_inference_json(rep.inference, ij);
        auto ic = open_out(dir / "inference.csv");
        sidx::write_inference_csv(rep.inference, ic);
    }
    return 0;
}

std::vector<sidx::SizePair> parse_sizes(const std::vector<std::string>& specs) {
    std::vector<sidx::SizePair> out;
    for (const auto& s : specs) {
        const auto colon = s.find(':');
        try {
            if (colon == std::string::npos) throw std::invalid_argument(s);
            out.emplace_back(std::stoll(s.substr(0, colon)), std::stoll(s.substr(colon + 1)));
        } catch (const std::exception&) {
            sidx::config_error("--size expects n:p, got '" + s + "'");
        }
    }
    return out;
}

int cmd_experiment(const CommonOptions& o, const std::string& name, int reps, const std::vector<std::string>& models,
                   const std::vector<std::string>& sizes, unsigned threads) {
    sidx::ExperimentSpec spec;
    spec.experiment = name;
    spec.replications = reps;
    spec.threads = threads;
    if (o.seed) spec.seed = *o.seed;
    spec.out_dir = o.out;
    for (const auto& m : models) {
        std::stringstream ss(m);
        for (std::string item; std::getline(ss, item, ',');)
            if (!item.empty()) spec.models.push_back(item);
    }
    spec.sizes = parse_sizes(sizes);
    if (!o.pilot.empty()) spec.pilot = sidx::PilotKind::parse(o.pilot, o.pilot_lambda.value_or(1.0));
    spec.lambda = o.lambda;
    if (o.no_split) spec.no_split = true;
    if (o.alpha) spec.alpha = *o.alpha;
    if (!o.config.empty()) spec.base = sidx::PipelineConfig::from_json(read_json(o.config));
    const sidx::ExperimentResult res = sidx::run_experiment(spec);
    std::cout << res.manifest.at("summary").dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Estimation and inference for high-dimensional single-index models"};
    app.require_subcommand(1);

    CommonOptions sim_o, fit_o, inf_o, exp_o;
    auto* sim = app.add_subcommand("simulate", "Draw a dataset from a built-in model");
    add_common(sim, sim_o);

    std::string fit_data, inf_data, fit_resp = "y", inf_resp = "y";
    auto* fit = app.add_subcommand("fit", "Estimate the link and the coefficients");
    add_common(fit, fit_o);
    fit->add_option("--data", fit_data, "CSV with a header row; simulated from the config when absent");
    fit->add_option("--response", fit_resp, "Response column name");

    auto* inf = app.add_subcommand("infer", "Fit and report t-statistics, intervals and p-values");
    add_common(inf, inf_o);
    inf->add_option("--data", inf_data, "CSV with a header row; simulated from the config when absent");
    inf->add_option("--response", inf_resp, "Response column name");

    std::string exp_name;
    int reps = 0;
    unsigned threads = 0;
    std::vector<std::string> exp_models, exp_sizes;
    auto* exp = app.add_subcommand("experiment", "Reproduce a figure or table, or run a custom study");
    add_common(exp, exp_o);
    exp->remove_option(exp->get_option("--model"));
    exp->add_option("name", exp_name, "figure1, figure2, figure3, table1 or custom")->required();
    exp->add_option("--reps", reps, "Replications per cell (default depends on the experiment)");
    exp->add_option("--model", exp_models, "Model list (repeat or comma-separate)");
    exp->add_option("--size", exp_sizes, "Cell size n:p (repeatable)");
    exp->add_option("--threads", threads, "Worker threads (0: all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*sim) return cmd_simulate(sim_o);
        if (*fit) return cmd_fit(fit_o, fit_data, fit_resp, false);
        if (*inf) return cmd_fit(inf_o, inf_data, inf_resp, true);
        if (*exp) return cmd_experiment(exp_o, exp_name, reps, exp_models, exp_sizes, threads);
    } catch (const sidx::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.kind() == sidx::ErrorKind::Config ? kExitConfig : kExitNumerical;
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
