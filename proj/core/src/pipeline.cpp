#include "sidx/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "sidx/error.hpp"
#include "sidx/random.hpp"

namespace sidx {

void SplitConfig::validate() const {
    if (!no_split && !(fraction > 0.0 && fraction < 1.0)) config_error("split: fraction must lie in (0, 1)");
}

SplitIndices split_data(Eigen::Index n, const SplitConfig& cfg) {
    cfg.validate();
    if (n < 1) config_error("split: empty dataset");
    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), Eigen::Index{0});
    if (cfg.no_split) return {all, all};

    Rng rng(cfg.seed);
    std::shuffle(all.begin(), all.end(), rng);
    const auto n1 = static_cast<Eigen::Index>(std::llround(cfg.fraction * static_cast<double>(n)));
    if (n1 < 1 || n1 >= n) config_error("split: empty part (n = " + std::to_string(n) + ")");
    SplitIndices out;
    out.first.assign(all.begin(), all.begin() + n1);
    out.second.assign(all.begin() + n1, all.end());
    std::sort(out.first.begin(), out.first.end());
    std::sort(out.second.begin(), out.second.end());
    return out;
}

DesignSpec CovarianceSpec::design(Eigen::Index p) const {
    switch (kind) {
        case Kind::Identity: return DesignSpec::identity(p);
        case Kind::Ar1: {
            MatrixXd s(p, p);
            for (Eigen::Index i = 0; i < p; ++i)
                for (Eigen::Index j = 0; j < p; ++j) s(i, j) = std::pow(rho, static_cast<double>(std::abs(i - j)));
            return DesignSpec::from_covariance(s);
        }
        case Kind::Equicorrelated: {
            MatrixXd s = MatrixXd::Constant(p, p, rho);
            s.diagonal().setOnes();
            return DesignSpec::from_covariance(s);
        }
        case Kind::Explicit:
            if (matrix.rows() != p) config_error("sigma: explicit matrix does not match p");
            return DesignSpec::from_covariance(matrix);
    }
    config_error("sigma: unknown kind");
}

namespace {

using nlohmann::json;

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) config_error("config: '" + where + "' must be an object");
    for (const auto& item : obj.items()) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* k) { return item.key() == k; }))
            config_error("config: unknown key '" + item.key() + "' in " + where);
    }
}

template <class T>
T get(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        config_error("config: '" + where + "." + key + "' has the wrong type");
    }
}

CovarianceSpec parse_sigma(const json& v) {
    CovarianceSpec s;
    if (v.is_string()) {
        if (v.get<std::string>() != "identity") config_error("config: sigma must be \"identity\" or an object");
        return s;
    }
    if (v.is_array()) {
        const auto p = static_cast<Eigen::Index>(v.size());
        s.kind = CovarianceSpec::Kind::Explicit;
        s.matrix.resize(p, p);
        for (Eigen::Index i = 0; i < p; ++i) {
            if (!v[i].is_array() || static_cast<Eigen::Index>(v[i].size()) != p) config_error("config: sigma matrix must be square");
            for (Eigen::Index j = 0; j < p; ++j) {
                if (!v[i][j].is_number()) config_error("config: sigma matrix entries must be numbers");
                s.matrix(i, j) = v[i][j].get<double>();
            }
        }
        return s;
    }
    check_keys(v, {"kind", "rho"}, "sigma");
    const auto kind = get<std::string>(v, "kind", "identity", "sigma");
    s.rho = get<double>(v, "rho", 0.0, "sigma");
    if (kind == "identity") {
        s.kind = CovarianceSpec::Kind::Identity;
    } else if (kind == "ar1") {
        s.kind = CovarianceSpec::Kind::Ar1;
    } else if (kind == "equicorrelated") {
        s.kind = CovarianceSpec::Kind::Equicorrelated;
    } else {
        config_error("config: unknown sigma kind '" + kind + "'");
    }
    return s;
}

json sigma_json(const CovarianceSpec& s) {
    switch (s.kind) {
        case CovarianceSpec::Kind::Identity: return "identity";
        case CovarianceSpec::Kind::Ar1: return {{"kind", "ar1"}, {"rho", s.rho}};
        case CovarianceSpec::Kind::Equicorrelated: return {{"kind", "equicorrelated"}, {"rho", s.rho}};
        case CovarianceSpec::Kind::Explicit: {
            json rows = json::array();
            for (Eigen::Index i = 0; i < s.matrix.rows(); ++i) {
                json row = json::array();
                for (Eigen::Index j = 0; j < s.matrix.cols(); ++j) row.push_back(s.matrix(i, j));
                rows.push_back(row);
            }
            return rows;
        }
    }
    return nullptr;
}

void parse_deconv(const json& d, DeconvConfig& out) {
    check_keys(d, {"kernel", "grid", "bandwidth", "monotonizer", "eps", "nodes"}, "deconv");
    const auto kernel = get<std::string>(d, "kernel", "triweight", "deconv");
    if (kernel != "triweight" && kernel != "triweight-fourier") config_error("config: unknown kernel '" + kernel + "'");
    if (d.contains("grid")) {
        const json& g = d.at("grid");
        check_keys(g, {"a", "b", "points"}, "deconv.grid");
        out.grid = DeconvConfig::equispaced(get<double>(g, "a", -3.0, "deconv.grid"), get<double>(g, "b", 3.0, "deconv.grid"),
                                            get<int>(g, "points", 301, "deconv.grid"));
    }
    if (d.contains("bandwidth")) {
        const json& b = d.at("bandwidth");
        if (b.is_number()) {
            out.bandwidth = BandwidthMode::fixed(b.get<double>());
        } else if (b.is_string()) {
            if (b.get<std::string>() != "theory") config_error("config: bandwidth must be \"theory\", a number or an object");
            out.bandwidth = BandwidthMode::theory();
        } else {
            check_keys(b, {"mode", "h", "c_h"}, "deconv.bandwidth");
            const auto mode = get<std::string>(b, "mode", "theory", "deconv.bandwidth");
            if (mode == "theory") {
                out.bandwidth = BandwidthMode::theory(get<double>(b, "c_h", 0.0, "deconv.bandwidth"));
            } else if (mode == "fixed") {
                if (!b.contains("h")) config_error("config: fixed bandwidth needs 'h'");
                out.bandwidth = BandwidthMode::fixed(get<double>(b, "h", 0.0, "deconv.bandwidth"));
            } else {
                config_error("config: unknown bandwidth mode '" + mode + "'");
            }
        }
    }
    if (d.contains("monotonizer")) out.monotonizer = parse_monotonizer(get<std::string>(d, "monotonizer", "", "deconv"));
    out.eps = get<double>(d, "eps", out.eps, "deconv");
    out.nodes = get<int>(d, "nodes", out.nodes, "deconv");
}

json deconv_json(const DeconvConfig& d) {
    json bw = d.bandwidth.kind == BandwidthMode::Kind::Fixed ? json{{"mode", "fixed"}, {"h", d.bandwidth.value}}
                                                             : json{{"mode", "theory"}, {"c_h", d.bandwidth.value}};
    return {{"kernel", "triweight"},
            {"grid", {{"a", d.grid.front()}, {"b", d.grid.back()}, {"points", d.grid.size()}}},
            {"bandwidth", bw},
            {"monotonizer", to_string(d.monotonizer)},
            {"eps", d.eps},
            {"nodes", d.nodes}};
}

Error staged(const char* stage, const Error& e) { return Error(e.kind(), std::string("stage '") + stage + "': " + e.what()); }

template <class F>
auto run_stage(const char* stage, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        throw staged(stage, e);
    }
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const json& doc, Defaults defaults) {
    check_keys(doc, {"model", "n", "p", "sigma", "beta", "pilot", "deconv", "penalty", "inference", "split"}, "config");
    PipelineConfig cfg;
    if (defaults == Defaults::Data) cfg.split.no_split = true;
    cfg.model = get<std::string>(doc, "model", cfg.model, "config");
    cfg.n = get<Eigen::Index>(doc, "n", cfg.n, "config");
    cfg.p = get<Eigen::Index>(doc, "p", cfg.p, "config");
    if (doc.contains("sigma")) cfg.sigma = parse_sigma(doc.at("sigma"));
    if (doc.contains("beta")) {
        const json& b = doc.at("beta");
        check_keys(b, {"scheme", "k"}, "beta");
        const auto scheme = get<std::string>(b, "scheme", "sphere", "beta");
        if (scheme == "sphere") {
            cfg.beta = CoefficientScheme::uniform_sphere();
        } else if (scheme == "sparse") {
            cfg.beta = CoefficientScheme::sparse(get<Eigen::Index>(b, "k", 1, "beta"));
        } else {
            config_error("config: unknown beta scheme '" + scheme + "'");
        }
    }
    if (doc.contains("pilot")) {
        const json& pl = doc.at("pilot");
        check_keys(pl, {"kind", "lambda"}, "pilot");
        cfg.pilot = PilotKind::parse(get<std::string>(pl, "kind", "ridge", "pilot"), get<double>(pl, "lambda", 1.0, "pilot"));
    }
    if (doc.contains("deconv")) parse_deconv(doc.at("deconv"), cfg.deconv);
    if (doc.contains("penalty")) {
        const json& pe = doc.at("penalty");
        check_keys(pe, {"kind", "lambda"}, "penalty");
        const auto kind = get<std::string>(pe, "kind", "ridge", "penalty");
        if (kind == "ridge") {
            cfg.penalty = Penalty::ridge(get<double>(pe, "lambda", 0.1, "penalty"));
        } else if (kind == "none") {
            cfg.penalty = Penalty::none();
        } else {
            config_error("config: unknown penalty kind '" + kind + "'");
        }
    }
    // The inference mode follows the penalty unless stated.
    cfg.inference = cfg.penalty.kind == Penalty::Kind::Ridge ? InferenceMode::ridge(cfg.penalty.lambda)
                                                             : InferenceMode::unregularized();
    if (doc.contains("inference")) {
        const json& in = doc.at("inference");
        check_keys(in, {"mode", "alpha", "window"}, "inference");
        cfg.alpha = get<double>(in, "alpha", cfg.alpha, "inference");
        if (in.contains("mode")) {
            const auto mode = get<std::string>(in, "mode", "", "inference");
            if (mode == "ridge") {
                cfg.inference = InferenceMode::ridge(cfg.penalty.lambda);
            } else if (mode == "unregularized") {
                cfg.inference = InferenceMode::unregularized();
            } else if (mode == "censored") {
                auto window = get<std::vector<double>>(in, "window", {cfg.deconv.grid.front(), cfg.deconv.grid.back()},
                                                       "inference");
                if (window.size() != 2) config_error("config: inference.window must be [a, b]");
                cfg.inference = InferenceMode::censored(window[0], window[1]);
            } else {
                config_error("config: unknown inference mode '" + mode + "'");
            }
        }
    }
    if (doc.contains("split")) {
        const json& sp = doc.at("split");
        check_keys(sp, {"fraction", "no_split", "seed"}, "split");
        cfg.split.fraction = get<double>(sp, "fraction", cfg.split.fraction, "split");
        cfg.split.no_split = get<bool>(sp, "no_split", cfg.split.no_split, "split");
        cfg.split.seed = get<std::uint64_t>(sp, "seed", cfg.split.seed, "split");
    }
    cfg.validate();
    return cfg;
}

json PipelineConfig::to_json() const {
    json pilot_j = {{"kind", pilot.name()}};
    if (pilot.kind == PilotKind::Kind::Ridge) pilot_j["lambda"] = pilot.lambda;
    json penalty_j = {{"kind", penalty.name()}};
    if (penalty.kind == Penalty::Kind::Ridge) penalty_j["lambda"] = penalty.lambda;
    json inference_j = {{"mode", inference.name()}, {"alpha", alpha}};
    if (inference.kind == InferenceMode::Kind::Censored) inference_j["window"] = {inference.window.a, inference.window.b};
    json beta_j = beta.kind == CoefficientScheme::Kind::Sparse ? json{{"scheme", "sparse"}, {"k", beta.support}}
                                                               : json{{"scheme", "sphere"}};
    return {{"model", model},
            {"n", n},
            {"p", p},
            {"sigma", sigma_json(sigma)},
            {"beta", beta_j},
            {"pilot", pilot_j},
            {"deconv", deconv_json(deconv)},
            {"penalty", penalty_j},
            {"inference", inference_j},
            {"split", {{"fraction", split.fraction}, {"no_split", split.no_split}, {"seed", split.seed}}}};
}

void PipelineConfig::validate() const {
    if (n < 2 || p < 1) config_error("config: need n >= 2 and p >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) config_error("config: alpha must lie in (0, 1)");
    if (pilot.kind == PilotKind::Kind::Ridge && !(pilot.lambda > 0.0)) config_error("config: ridge pilot needs lambda > 0");
    if (penalty.kind == Penalty::Kind::Ridge && !(penalty.lambda > 0.0)) config_error("config: ridge penalty needs lambda > 0");
    const bool ridge_mode = inference.kind == InferenceMode::Kind::Ridge;
    if (ridge_mode != (penalty.kind == Penalty::Kind::Ridge))
        config_error("config: inference mode '" + inference.name() + "' does not match penalty '" + penalty.name() + "'");
    if (ridge_mode && inference.lambda != penalty.lambda) config_error("config: ridge inference lambda differs from the penalty");
    if (inference.kind == InferenceMode::Kind::Censored) inference.window.validate();
    if (beta.kind == CoefficientScheme::Kind::Sparse && (beta.support < 1 || beta.support > p))
        config_error("config: sparse beta needs 1 <= k <= p");
    split.validate();
    deconv.validate();
}

PipelineReport run_pipeline(const Dataset& data, const PipelineConfig& cfg, const VectorXd& tau) {
    const SplitIndices split = run_stage("split", [&] { return split_data(data.n(), cfg.split); });
    return run_pipeline(data, cfg, split, tau);
}

PipelineReport run_pipeline(const Dataset& data, const PipelineConfig& cfg, const SplitIndices& split,
                            const VectorXd& tau) {
    run_stage("config", [&] {
        data.validate();
        cfg.validate();
        if (tau.size() != 0 && tau.size() != data.p()) config_error("tau length does not match p");
        for (const auto* part : {&split.first, &split.second}) {
            if (part->empty()) config_error("split: empty part");
            for (auto i : *part)
                if (i < 0 || i >= data.n()) config_error("split: index out of range");
        }
        return 0;
    });

    PipelineReport rep;
    rep.config = cfg.to_json();
    rep.bypass = cfg.link_override.has_value();
    const Dataset part1 = data.subset(split.first);
    const Dataset part2 = data.subset(split.second);
    rep.n1 = part1.n();
    rep.n2 = part2.n();
    rep.kappa1 = static_cast<double>(data.p()) / static_cast<double>(rep.n1);
    rep.kappa2 = static_cast<double>(data.p()) / static_cast<double>(rep.n2);

    LinkFunction link;
    if (rep.bypass) {
        link = *cfg.link_override;
    } else {
        rep.pilot = run_stage("pilot", [&] { return fit_pilot(part1.X, part1.y, cfg.pilot); });
        rep.index = run_stage("index", [&] { return debias_index(part1.X, part1.y, rep.pilot); });
        rep.link = run_stage("link", [&] { return estimate_link(rep.index, part1.y, cfg.deconv); });
        link = grid_link_function(rep.link);
    }
    rep.coef = run_stage("coefficients",
                         [&] { return fit_coefficients(part2.X, part2.y, SurrogateProblem{link, cfg.penalty}); });
    const VectorXd t = tau.size() == 0 ? VectorXd::Ones(data.p()) : tau;
    rep.inference = run_stage(
        "inference", [&] { return infer(part2.X, part2.y, rep.coef.beta_hat, link, cfg.inference, t, cfg.alpha); });
    return rep;
}

json to_json(const PipelineReport& report) {
    json out;
    out["config"] = report.config;
    out["split"] = {{"n1", report.n1}, {"n2", report.n2}, {"kappa1", report.kappa1}, {"kappa2", report.kappa2}};
    out["bypass"] = report.bypass;
    if (!report.bypass) {
        const Adjustments& a = report.pilot.adjustments;
        out["pilot"] = {{"kind", report.pilot.kind.name()},
                        {"v_tilde", a.v_tilde},
                        {"gamma_tilde", a.gamma_tilde},
                        {"mu_tilde", a.mu_tilde},
                        {"sigma2_tilde", a.sigma2_tilde},
                        {"kappa", a.kappa}};
        out["index"] = {{"varsigma2", report.index.varsigma2}};
        out["link"] = {{"h", report.link.h},
                       {"varsigma2", report.link.varsigma2},
                       {"window", {report.link.a, report.link.b}},
                       {"x", report.link.grid},
                       {"ghat", report.link.ghat},
                       {"ghat_deriv", report.link.ghat_deriv}};
    }
    out["coefficients"] = {{"penalty", report.coef.penalty.name()},
                           {"iterations", report.coef.iterations},
                           {"gradient_norm", report.coef.gradient_norm},
                           {"objective", report.coef.objective},
                           {"converged", report.coef.converged}};
    out["inference"] = to_json(report.inference);
    return out;
}

Simulation simulate(const PipelineConfig& cfg, std::uint64_t seed, std::uint64_t rep) {
    const SimModel model = SimModel::builtin(cfg.model);
    Simulation sim;
    sim.design = cfg.sigma.design(cfg.p);
    sim.beta = sample_coefficients(cfg.p, cfg.beta, sim.design, derive_seed(seed, rep, Stream::Coefficients));
    sim.data.X = sample_design(cfg.n, sim.design, derive_seed(seed, rep, Stream::Design));
    sim.data.y = generate_responses(sim.data.X, sim.beta, model, derive_seed(seed, rep, Stream::Responses));
    return sim;
}

}  // namespace sidx
