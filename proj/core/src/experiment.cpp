#include "sidx/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <thread>

#include "sidx/csv.hpp"
#include "sidx/error.hpp"
#include "sidx/random.hpp"
#include "sidx/stats.hpp"

namespace sidx {

using nlohmann::json;

void ExperimentSpec::validate() const {
    static const std::vector<std::string> known = {"figure1", "figure2", "figure3", "table1", "custom"};
    if (std::find(known.begin(), known.end(), experiment) == known.end())
        config_error("unknown experiment '" + experiment + "'");
    if (replications < 0) config_error("experiment: replications must be >= 1");
    for (const auto& m : models) SimModel::parse_model_variant(m);
    for (const auto& [n, p] : sizes)
        if (n < 2 || p < 1) config_error("experiment: sizes need n >= 2 and p >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) config_error("experiment: alpha must lie in (0, 1)");
    if (lambda && !(*lambda > 0.0)) config_error("experiment: lambda must be > 0");
}

PilotKind default_pilot(ModelVariant variant, Eigen::Index n, Eigen::Index p) {
    if (p >= n) return PilotKind::ridge(1.0);
    switch (variant) {
        case ModelVariant::Cloglog:
        case ModelVariant::Logit: return PilotKind::logistic_mle();
        case ModelVariant::XSqrt:
        case ModelVariant::Poisson: return PilotKind::poisson_mle();
        default: return PilotKind::least_squares();
    }
}

double true_mean(const SimModel& model, double t) { return model.link.eval(t) + model.noise.mean_shift; }

namespace {

/// Per-replication values, or the numerical failure that stopped the replication.
template <class R>
struct Outcomes {
    std::vector<std::optional<R>> values;
    std::vector<std::string> failures;

    std::size_t failed() const {
        return static_cast<std::size_t>(std::count_if(values.begin(), values.end(), [](const auto& v) { return !v; }));
    }
};

/// Replications are pulled from a shared counter; results land in their own slot
/// so the merged order is the replication order whatever the thread count.
template <class R, class F>
Outcomes<R> run_replications(int reps, unsigned threads, F&& body) {
    Outcomes<R> out;
    out.values.resize(static_cast<std::size_t>(reps));
    out.failures.resize(static_cast<std::size_t>(reps));
    std::vector<std::exception_ptr> fatal(static_cast<std::size_t>(reps));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < reps; r = next++) {
            const auto slot = static_cast<std::size_t>(r);
            try {
                out.values[slot] = body(r);
            } catch (const Error& e) {
                if (e.kind() == ErrorKind::Numerical) {
                    out.failures[slot] = e.what();
                } else {
                    fatal[slot] = std::current_exception();
                }
            } catch (...) {
                fatal[slot] = std::current_exception();
            }
        }
    };
    unsigned count = threads != 0 ? threads : std::max(1u, std::thread::hardware_concurrency());
    count = std::min<unsigned>(count, static_cast<unsigned>(std::max(reps, 1)));
    if (count <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
    }
    for (const auto& e : fatal)
        if (e) std::rethrow_exception(e);
    return out;
}

std::uint64_t cell_seed(std::uint64_t base, std::size_t cell) {
    return mix_seed(base ^ mix_seed(static_cast<std::uint64_t>(cell) + 1));
}

json describe(const std::vector<double>& xs) {
    return {{"count", xs.size()},
            {"mean", sample_mean(xs)},
            {"variance", sample_variance(xs)},
            {"sd", std::sqrt(sample_variance(xs))},
            {"ks", ks_distance_normal(xs)}};
}

json failure_list(const std::vector<std::string>& failures) {
    json out = json::array();
    for (std::size_t r = 0; r < failures.size(); ++r)
        if (!failures[r].empty()) out.push_back({{"rep", r}, {"error", failures[r]}});
    return out;
}

std::string f(double x) { return format_double(x); }

struct Cell {
    std::string model;
    Eigen::Index n = 0;
    Eigen::Index p = 0;
};

std::vector<Cell> make_cells(const ExperimentSpec& spec, const std::vector<std::string>& default_models,
                             const std::vector<SizePair>& default_sizes,
                             const std::function<std::vector<SizePair>(const std::string&)>& per_model = {}) {
    const auto& models = spec.models.empty() ? default_models : spec.models;
    std::vector<Cell> cells;
    for (const auto& m : models) {
        std::vector<SizePair> sizes = spec.sizes;
        if (sizes.empty()) sizes = per_model ? per_model(m) : default_sizes;
        for (const auto& [n, p] : sizes) cells.push_back({m, n, p});
    }
    return cells;
}

PipelineConfig cell_config(const ExperimentSpec& spec, const Cell& cell) {
    PipelineConfig cfg = spec.base;
    cfg.model = cell.model;
    cfg.n = cell.n;
    cfg.p = cell.p;
    cfg.alpha = spec.alpha;
    return cfg;
}

int reps_or(const ExperimentSpec& spec, int fallback) { return spec.replications > 0 ? spec.replications : fallback; }

// ---------------------------------------------------------------------------
// figure1: index z-scores

struct IndexRecord {
    double z;
    double mu_tilde;
    double sigma2_tilde;
};

ExperimentResult figure1(const ExperimentSpec& spec) {
    const int reps = reps_or(spec, 200);
    const auto cells = make_cells(spec, {"cloglog", "xsqrt", "cubic", "piecewise"}, {}, [](const std::string& m) {
        return std::vector<SizePair>{m == "cloglog" ? SizePair{500, 50} : SizePair{500, 200}};
    });

    ExperimentResult res;
    std::ostringstream csv;
    csv << "model,n,p,pilot,rep,z,mu_tilde,sigma2_tilde\n";
    json summary = json::array();
    json cells_j = json::array();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        PipelineConfig cfg = cell_config(spec, cell);
        const PilotKind pilot = spec.pilot.value_or(default_pilot(SimModel::parse_model_variant(cell.model), cell.n, cell.p));
        cfg.pilot = pilot;
        const std::uint64_t seed = cell_seed(spec.seed, c);
        auto out = run_replications<IndexRecord>(reps, spec.threads, [&](int r) {
            const Simulation sim = simulate(cfg, seed, static_cast<std::uint64_t>(r));
            const PilotFit fit = fit_pilot(sim.data.X, sim.data.y, pilot);
            const IndexEstimate idx = debias_index(sim.data.X, sim.data.y, fit);
            const VectorXd z = index_zscores(idx, sim.data.X, sim.beta, fit);
            return IndexRecord{z(0), fit.adjustments.mu_tilde, fit.adjustments.sigma2_tilde};
        });
        std::vector<double> zs;
        for (int r = 0; r < reps; ++r) {
            const auto& v = out.values[static_cast<std::size_t>(r)];
            if (!v) continue;
            zs.push_back(v->z);
            csv << cell.model << ',' << cell.n << ',' << cell.p << ',' << pilot.name() << ',' << r << ',' << f(v->z)
                << ',' << f(v->mu_tilde) << ',' << f(v->sigma2_tilde) << '\n';
        }
        json s = describe(zs);
        s["model"] = cell.model;
        s["n"] = cell.n;
        s["p"] = cell.p;
        s["pilot"] = pilot.name();
        s["failures"] = out.failed();
        summary.push_back(s);
        cells_j.push_back({{"model", cell.model}, {"n", cell.n}, {"p", cell.p}, {"pilot", pilot.name()},
                           {"base_seed", seed}, {"failed_replications", failure_list(out.failures)}});
    }
    res.files.push_back({"figure1_zscores.csv",
                         "one record per (model, replication): first-coordinate index z-score mu~(W_1 - X_1 beta)/sigma~; "
                         "columns model,n,p,pilot,rep,z,mu_tilde,sigma2_tilde",
                         csv.str()});
    res.manifest = {{"replications", reps}, {"cells", cells_j}, {"summary", summary}};
    return res;
}

// ---------------------------------------------------------------------------
// figure2: link estimation loss

struct LinkRecord {
    double loss;
    std::vector<double> ghat;
    double h;
    double varsigma2;
};

ExperimentResult figure2(const ExperimentSpec& spec) {
    const int reps = reps_or(spec, 50);
    const auto cells = make_cells(spec, {"cloglog", "xsqrt", "cubic", "piecewise"},
                                  {{64, 38}, {128, 77}, {256, 154}, {512, 307}});

    ExperimentResult res;
    std::ostringstream loss_csv, rep_csv, curve_csv;
    loss_csv << "model,n,p,reps,mean_loss,sd_loss\n";
    rep_csv << "model,n,p,rep,loss,h,varsigma2\n";
    curve_csv << "model,n,x,ghat_mean,g_true\n";
    json summary = json::array();
    json cells_j = json::array();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        PipelineConfig cfg = cell_config(spec, cell);
        const SimModel model = SimModel::builtin(cell.model);
        const PilotKind pilot = spec.pilot.value_or(default_pilot(model.variant, cell.n, cell.p));
        const std::vector<double>& grid = cfg.deconv.grid;
        std::vector<double> truth(grid.size());
        for (std::size_t k = 0; k < grid.size(); ++k) truth[k] = true_mean(model, grid[k]);
        const std::uint64_t seed = cell_seed(spec.seed, c);

        auto out = run_replications<LinkRecord>(reps, spec.threads, [&](int r) {
            const Simulation sim = simulate(cfg, seed, static_cast<std::uint64_t>(r));
            const PilotFit fit = fit_pilot(sim.data.X, sim.data.y, pilot);
            const IndexEstimate idx = debias_index(sim.data.X, sim.data.y, fit);
            LinkEstimate est = estimate_link(idx, sim.data.y, cfg.deconv);
            double loss = 0.0;
            for (std::size_t k = 0; k < grid.size(); ++k) loss += (est.ghat[k] - truth[k]) * (est.ghat[k] - truth[k]);
            return LinkRecord{loss / static_cast<double>(grid.size()), std::move(est.ghat), est.h, est.varsigma2};
        });

        std::vector<double> losses;
        std::vector<double> mean_curve(grid.size(), 0.0);
        for (int r = 0; r < reps; ++r) {
            const auto& v = out.values[static_cast<std::size_t>(r)];
            if (!v) continue;
            losses.push_back(v->loss);
            for (std::size_t k = 0; k < grid.size(); ++k) mean_curve[k] += v->ghat[k];
            rep_csv << cell.model << ',' << cell.n << ',' << cell.p << ',' << r << ',' << f(v->loss) << ',' << f(v->h)
                    << ',' << f(v->varsigma2) << '\n';
        }
        const double m = sample_mean(losses);
        const double sd = std::sqrt(sample_variance(losses));
        loss_csv << cell.model << ',' << cell.n << ',' << cell.p << ',' << losses.size() << ',' << f(m) << ',' << f(sd)
                 << '\n';
        for (std::size_t k = 0; k < grid.size(); ++k) {
            const double avg = losses.empty() ? 0.0 : mean_curve[k] / static_cast<double>(losses.size());
            curve_csv << cell.model << ',' << cell.n << ',' << f(grid[k]) << ',' << f(avg) << ',' << f(truth[k]) << '\n';
        }
        summary.push_back({{"model", cell.model}, {"n", cell.n}, {"p", cell.p}, {"pilot", pilot.name()},
                           {"count", losses.size()}, {"failures", out.failed()}, {"mean_loss", m}, {"sd_loss", sd}});
        cells_j.push_back({{"model", cell.model}, {"n", cell.n}, {"p", cell.p}, {"pilot", pilot.name()},
                           {"base_seed", seed}, {"failed_replications", failure_list(out.failures)}});
    }
    res.files.push_back({"figure2_loss.csv",
                         "one record per (model, n): mean and sd over replications of the grid-averaged squared loss "
                         "of ghat on the window; columns model,n,p,reps,mean_loss,sd_loss",
                         loss_csv.str()});
    res.files.push_back({"figure2_replications.csv",
                         "one record per (model, n, replication); columns model,n,p,rep,loss,h,varsigma2", rep_csv.str()});
    res.files.push_back({"figure2_curves.csv",
                         "one record per (model, n, grid point): replication-averaged ghat and the true mean function; "
                         "columns model,n,x,ghat_mean,g_true",
                         curve_csv.str()});
    res.manifest = {{"replications", reps},
                    {"split", "none: pilot, index and link use all n observations"},
                    {"cells", cells_j},
                    {"summary", summary}};
    return res;
}

// ---------------------------------------------------------------------------
// figure3 and custom: full pipeline, first-coordinate inference

struct PipelineRecord {
    double beta1;
    double beta1_hat;
    double mu_hat;
    double sigma2_hat;
    double T1;
    double ci_lo;
    double ci_hi;
    bool covered;
    double mu_n;
    double sigma2_n;
};

PipelineRecord pipeline_replication(const PipelineConfig& cfg, std::uint64_t seed, int r) {
    const Simulation sim = simulate(cfg, seed, static_cast<std::uint64_t>(r));
    PipelineConfig run_cfg = cfg;
    run_cfg.split.seed = derive_seed(seed, static_cast<std::uint64_t>(r), Stream::Split);
    const PipelineReport rep = run_pipeline(sim.data, run_cfg, sim.design.tau());
    const InferenceReport& inf = rep.inference;
    const OracleParams oracle = oracle_params(rep.coef.beta_hat, sim.beta.beta, sim.design);
    PipelineRecord out{};
    out.beta1 = sim.beta.beta(0);
    out.beta1_hat = inf.beta_hat(0);
    out.mu_hat = inf.mu_hat;
    out.sigma2_hat = inf.sigma2_hat;
    out.T1 = std::sqrt(static_cast<double>(cfg.p)) * sim.design.tau()(0) * (out.beta1_hat - out.mu_hat * out.beta1) /
             std::sqrt(out.sigma2_hat);
    out.ci_lo = inf.ci_lo(0);
    out.ci_hi = inf.ci_hi(0);
    out.covered = out.ci_lo <= out.beta1 && out.beta1 <= out.ci_hi;
    out.mu_n = oracle.mu_oracle;
    out.sigma2_n = oracle.sigma_oracle * oracle.sigma_oracle;
    return out;
}

json pipeline_summary(const std::vector<PipelineRecord>& recs) {
    std::vector<double> ts;
    double covered = 0.0, mu_err = 0.0, s2_err = 0.0;
    for (const auto& r : recs) {
        ts.push_back(r.T1);
        covered += r.covered ? 1.0 : 0.0;
        mu_err += std::abs(r.mu_hat - r.mu_n);
        s2_err += std::abs(r.sigma2_hat - r.sigma2_n);
    }
    const double k = recs.empty() ? 1.0 : static_cast<double>(recs.size());
    json s = describe(ts);
    s["coverage"] = covered / k;
    s["mean_abs_mu_error"] = mu_err / k;
    s["mean_abs_sigma2_error"] = s2_err / k;
    return s;
}

ExperimentResult pipeline_experiment(const ExperimentSpec& spec, const std::vector<Cell>& cells, int reps,
                                     const std::string& file_stem,
                                     const std::function<PipelineConfig(const Cell&)>& configure) {
    ExperimentResult res;
    std::ostringstream csv;
    csv << "model,n,p,rep,beta1,beta1_hat,mu_hat,sigma2_hat,T1,ci_lo,ci_hi,covered,mu_n,sigma2_n\n";
    json summary = json::array();
    json cells_j = json::array();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        const PipelineConfig cfg = configure(cell);
        const std::uint64_t seed = cell_seed(spec.seed, c);
        auto out = run_replications<PipelineRecord>(reps, spec.threads,
                                                    [&](int r) { return pipeline_replication(cfg, seed, r); });
        std::vector<PipelineRecord> recs;
        for (int r = 0; r < reps; ++r) {
            const auto& v = out.values[static_cast<std::size_t>(r)];
            if (!v) continue;
            recs.push_back(*v);
            csv << cell.model << ',' << cell.n << ',' << cell.p << ',' << r << ',' << f(v->beta1) << ','
                << f(v->beta1_hat) << ',' << f(v->mu_hat) << ',' << f(v->sigma2_hat) << ',' << f(v->T1) << ','
                << f(v->ci_lo) << ',' << f(v->ci_hi) << ',' << (v->covered ? 1 : 0) << ',' << f(v->mu_n) << ','
                << f(v->sigma2_n) << '\n';
        }
        json s = pipeline_summary(recs);
        s["model"] = cell.model;
        s["n"] = cell.n;
        s["p"] = cell.p;
        s["failures"] = out.failed();
        summary.push_back(s);
        cells_j.push_back({{"model", cell.model}, {"n", cell.n}, {"p", cell.p}, {"config", cfg.to_json()},
                           {"base_seed", seed}, {"failed_replications", failure_list(out.failures)}});
    }
    res.files.push_back({file_stem + ".csv",
                         "one record per (model, n, p, replication): first-coordinate estimate, t-statistic "
                         "sqrt(p) tau_1 (beta1_hat - mu_hat beta1) / sigma_hat, interval, coverage flag and oracle "
                         "(mu_n, sigma2_n); columns model,n,p,rep,beta1,beta1_hat,mu_hat,sigma2_hat,T1,ci_lo,ci_hi,"
                         "covered,mu_n,sigma2_n",
                         csv.str()});
    res.manifest = {{"replications", reps}, {"alpha", spec.alpha}, {"cells", cells_j}, {"summary", summary}};
    return res;
}

PipelineConfig simulation_config(const ExperimentSpec& spec, const Cell& cell, bool split_default) {
    PipelineConfig cfg = cell_config(spec, cell);
    cfg.split.no_split = spec.no_split.value_or(!split_default);
    const Eigen::Index n1 =
        cfg.split.no_split ? cell.n : static_cast<Eigen::Index>(std::llround(cfg.split.fraction * static_cast<double>(cell.n)));
    const Eigen::Index n2 = cfg.split.no_split ? cell.n : cell.n - n1;
    cfg.beta = cell.p >= cell.n ? CoefficientScheme::sparse(std::min<Eigen::Index>(100, cell.p))
                                : CoefficientScheme::uniform_sphere();
    cfg.pilot = spec.pilot.value_or(default_pilot(SimModel::parse_model_variant(cell.model), n1, cell.p));
    if (spec.lambda || cell.p >= n2) {
        cfg.penalty = Penalty::ridge(spec.lambda.value_or(0.1));
        cfg.inference = InferenceMode::ridge(cfg.penalty.lambda);
    } else {
        cfg.penalty = Penalty::none();
        cfg.inference = InferenceMode::unregularized();
    }
    cfg.validate();
    return cfg;
}

ExperimentResult figure3(const ExperimentSpec& spec) {
    const auto cells = make_cells(spec, {"cloglog", "xsqrt", "cubic", "piecewise"}, {{250, 500}});
    return pipeline_experiment(spec, cells, reps_or(spec, 300), "figure3_tstats",
                               [&](const Cell& cell) { return simulation_config(spec, cell, true); });
}

ExperimentResult custom(const ExperimentSpec& spec) {
    const auto cells = make_cells(spec, {spec.base.model}, {{spec.base.n, spec.base.p}});
    return pipeline_experiment(spec, cells, reps_or(spec, 100), "custom_replications", [&](const Cell& cell) {
        PipelineConfig cfg = cell_config(spec, cell);
        if (spec.pilot) cfg.pilot = *spec.pilot;
        if (spec.no_split) cfg.split.no_split = *spec.no_split;
        if (spec.lambda) {
            cfg.penalty = Penalty::ridge(*spec.lambda);
            cfg.inference = InferenceMode::ridge(*spec.lambda);
        }
        cfg.validate();
        return cfg;
    });
}

// ---------------------------------------------------------------------------
// table1: effective variance by estimator

const std::vector<std::string> kEstimators = {"LeastSquares", "LogitMLE", "PoisMLE", "Proposed"};

struct TableRecord {
    std::map<std::string, std::optional<double>> stat;  // absent key: estimator not applicable
    std::optional<double> proposed_estimated;
};

ExperimentResult table1(const ExperimentSpec& spec) {
    const int reps = reps_or(spec, 100);
    const auto cells = make_cells(spec, {"logit", "cloglog", "poisson", "xsqrt", "cubic", "cubic+", "piecewise", "piecewise+"},
                                  {{1000, 100}});
    ExperimentResult res;
    std::ostringstream agg_csv, rep_csv;
    agg_csv << "model,estimator,mean,sd,count,failures\n";
    rep_csv << "model,rep,estimator,effective_variance\n";
    json summary = json::object();
    json cells_j = json::array();
    for (std::size_t c = 0; c < cells.size(); ++c) {
        const Cell& cell = cells[c];
        const PipelineConfig cfg = simulation_config(spec, cell, true);
        const ModelVariant variant = SimModel::parse_model_variant(cell.model);
        const bool binary = variant == ModelVariant::Logit || variant == ModelVariant::Cloglog;
        const bool counts = variant == ModelVariant::Poisson || variant == ModelVariant::XSqrt;
        const std::uint64_t seed = cell_seed(spec.seed, c);

        auto out = run_replications<TableRecord>(reps, spec.threads, [&](int r) {
            const Simulation sim = simulate(cfg, seed, static_cast<std::uint64_t>(r));
            SplitConfig split_cfg = cfg.split;
            split_cfg.seed = derive_seed(seed, static_cast<std::uint64_t>(r), Stream::Split);
            const SplitIndices split = split_data(sim.data.n(), split_cfg);
            const Dataset part1 = sim.data.subset(split.first);
            const VectorXd& beta = sim.beta.beta;
            TableRecord rec;
            // Scale-free: the statistic of the debiased estimate beta_hat / mu_n.
            auto efficiency = [&](const VectorXd& bh) {
                const OracleParams o = oracle_params(bh, beta, sim.design);
                return effective_variance(o.mu_oracle, o.sigma_oracle * o.sigma_oracle);
            };
            auto attempt = [&](const std::string& name, auto&& fit) {
                try {
                    rec.stat[name] = efficiency(fit());
                } catch (const Error& e) {
                    if (e.kind() != ErrorKind::Numerical) throw;
                    rec.stat[name] = std::nullopt;
                }
            };
            attempt("LeastSquares", [&] { return least_squares_fit(part1.X, part1.y); });
            if (binary) attempt("LogitMLE", [&] { return glm_mle_fit(part1.X, part1.y, GlmFamily::Logistic); });
            if (counts) attempt("PoisMLE", [&] { return glm_mle_fit(part1.X, part1.y, GlmFamily::Poisson); });
            try {
                const PipelineReport rep = run_pipeline(sim.data, cfg, split, sim.design.tau());
                rec.stat["Proposed"] = efficiency(rep.coef.beta_hat);
                rec.proposed_estimated = effective_variance(rep.inference.mu_hat, rep.inference.sigma2_hat);
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::Numerical) throw;
                rec.stat["Proposed"] = std::nullopt;
            }
            return rec;
        });

        json model_j = json::object();
        for (const auto& est : kEstimators) {
            std::vector<double> vals;
            std::size_t failures = out.failed();
            bool applicable = false;
            for (int r = 0; r < reps; ++r) {
                const auto& v = out.values[static_cast<std::size_t>(r)];
                if (!v) continue;
                const auto it = v->stat.find(est);
                if (it == v->stat.end()) continue;
                applicable = true;
                if (!it->second) {
                    ++failures;
                    continue;
                }
                vals.push_back(*it->second);
                rep_csv << cell.model << ',' << r << ',' << est << ',' << f(*it->second) << '\n';
            }
            if (!applicable) continue;
            const double m = sample_mean(vals);
            const double sd = std::sqrt(sample_variance(vals));
            agg_csv << cell.model << ',' << est << ',' << f(m) << ',' << f(sd) << ',' << vals.size() << ',' << failures
                    << '\n';
            model_j[est] = {{"mean", m}, {"sd", sd}, {"count", vals.size()}, {"failures", failures}};
        }
        std::vector<double> estimated;
        for (const auto& v : out.values)
            if (v && v->proposed_estimated) estimated.push_back(*v->proposed_estimated);
        model_j["Proposed_estimated"] = {{"mean", sample_mean(estimated)},
                                         {"sd", std::sqrt(sample_variance(estimated))},
                                         {"count", estimated.size()}};
        summary[cell.model] = model_j;
        cells_j.push_back({{"model", cell.model}, {"n", cell.n}, {"p", cell.p}, {"config", cfg.to_json()},
                           {"base_seed", seed}, {"failed_replications", failure_list(out.failures)}});
    }
    res.files.push_back({"table1.csv",
                         "one record per (model, estimator): mean and sd over replications of sigma_n^2 / mu_n^2, "
                         "the statistic beta_hat^T beta_hat / beta_hat^T beta - 1 of beta_hat / mu_n; columns model,estimator,mean,sd,count,failures",
                         agg_csv.str()});
    res.files.push_back({"table1_replications.csv",
                         "one record per (model, replication, estimator); columns model,rep,estimator,effective_variance",
                         rep_csv.str()});
    res.manifest = {{"replications", reps},
                    {"estimators",
                     "baselines are fitted on I1, the proposed estimator on I2 with its pilot on I1 (equal halves)"},
                    {"cells", cells_j},
                    {"summary", summary}};
    return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ExperimentResult res;
    if (spec.experiment == "figure1") {
        res = figure1(spec);
    } else if (spec.experiment == "figure2") {
        res = figure2(spec);
    } else if (spec.experiment == "figure3") {
        res = figure3(spec);
    } else if (spec.experiment == "table1") {
        res = table1(spec);
    } else {
        res = custom(spec);
    }
    res.manifest["experiment"] = spec.experiment;
    res.manifest["seed"] = spec.seed;
    res.manifest["seeding"] =
        "cell c uses base = mix(seed ^ mix(c + 1)); replication r draws stream s from mix(mix(base + r) ^ s) "
        "with mix the SplitMix64 finalizer and s = 1 design, 2 coefficients, 3 responses, 4 split";
    json files = json::array();
    for (const auto& file : res.files) files.push_back({{"name", file.name}, {"description", file.description}});
    res.manifest["files"] = files;
    if (!spec.out_dir.empty()) write_experiment(res, spec.out_dir);
    return res;
}

void write_experiment(const ExperimentResult& result, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) config_error("cannot create output directory '" + dir.string() + "': " + ec.message());
    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        if (!out) config_error("cannot write '" + (dir / name).string() + "'");
        out << content;
    };
    for (const auto& file : result.files) write(file.name, file.content);
    write("manifest.json", result.manifest.dump(2) + "\n");
}

}  // namespace sidx
