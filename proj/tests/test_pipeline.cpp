#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <doctest.h>

#include "sidx/csv.hpp"
#include "sidx/experiment.hpp"
#include "sidx/pipeline.hpp"
#include "support.hpp"

using namespace sidx;
using testing_support::throws_kind;

namespace {

PipelineConfig desk_config() {
    PipelineConfig cfg;
    cfg.model = "cloglog";
    cfg.n = 400;
    cfg.p = 160;
    cfg.pilot = PilotKind::ridge(1.0);
    cfg.penalty = Penalty::ridge(0.1);
    cfg.inference = InferenceMode::ridge(0.1);
    cfg.split.seed = 3;
    return cfg;
}

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("even split of ten observations") {
        SplitConfig cfg;
        cfg.seed = 9;
        const SplitIndices s = split_data(10, cfg);
        CHECK(s.first.size() == 5);
        CHECK(s.second.size() == 5);
        std::vector<Eigen::Index> all = s.first;
        all.insert(all.end(), s.second.begin(), s.second.end());
        std::sort(all.begin(), all.end());
        std::vector<Eigen::Index> expect(10);
        std::iota(expect.begin(), expect.end(), 0);
        CHECK(all == expect);
        const SplitIndices again = split_data(10, cfg);
        CHECK(again.first == s.first);
        CHECK(again.second == s.second);
    }

    TEST_CASE("no split uses every observation twice") {
        SplitConfig cfg;
        cfg.no_split = true;
        const SplitIndices s = split_data(7, cfg);
        CHECK(s.first.size() == 7);
        CHECK(s.first == s.second);
    }

    TEST_CASE("split errors") {
        SplitConfig cfg;
        cfg.fraction = 1.0;
        CHECK(throws_kind([&] { split_data(10, cfg); }, ErrorKind::Config));
        cfg.fraction = 0.5;
        CHECK(throws_kind([&] { split_data(1, cfg); }, ErrorKind::Config));
    }

    TEST_CASE("desk run produces a complete report") {
        const PipelineConfig cfg = desk_config();
        const Simulation sim = simulate(cfg, 1);
        const PipelineReport rep = run_pipeline(sim.data, cfg);
        CHECK(std::is_sorted(rep.link.ghat.begin(), rep.link.ghat.end()));
        CHECK(std::isfinite(rep.inference.mu_hat));
        CHECK(std::isfinite(rep.inference.sigma2_hat));
        CHECK(rep.inference.ci_lo.size() == cfg.p);
        CHECK(rep.inference.ci_hi.size() == cfg.p);
        CHECK(rep.kappa1 == 160.0 / static_cast<double>(rep.n1));
        CHECK(rep.kappa2 == 160.0 / static_cast<double>(rep.n2));
        CHECK(rep.n1 + rep.n2 == 400);
    }

    TEST_CASE("reruns are bit-identical") {
        const PipelineConfig cfg = desk_config();
        const std::string a = to_json(run_pipeline(simulate(cfg, 5).data, cfg)).dump();
        const std::string b = to_json(run_pipeline(simulate(cfg, 5).data, cfg)).dump();
        CHECK(a == b);
    }

    TEST_CASE("no-split flag matches manual full index sets") {
        PipelineConfig cfg = desk_config();
        cfg.split.no_split = true;
        const Simulation sim = simulate(cfg, 2);
        std::vector<Eigen::Index> all(static_cast<std::size_t>(cfg.n));
        std::iota(all.begin(), all.end(), 0);
        const std::string a = to_json(run_pipeline(sim.data, cfg)).dump();
        const std::string b = to_json(run_pipeline(sim.data, cfg, SplitIndices{all, all})).dump();
        CHECK(a == b);
    }

    TEST_CASE("bypass equals a direct fit with the supplied link") {
        PipelineConfig cfg = desk_config();
        cfg.link_override = link_registry_lookup(ModelVariant::Cloglog);
        const Simulation sim = simulate(cfg, 4);
        const SplitIndices split = split_data(cfg.n, cfg.split);
        const PipelineReport rep = run_pipeline(sim.data, cfg, split);
        const Dataset d2 = sim.data.subset(split.second);
        const CoefFit direct = fit_coefficients(d2.X, d2.y, SurrogateProblem{*cfg.link_override, cfg.penalty});
        CHECK(rep.bypass);
        CHECK(rep.coef.beta_hat == direct.beta_hat);
    }

    TEST_CASE("stage errors name the stage") {
        PipelineConfig cfg = desk_config();
        cfg.n = 60;
        cfg.p = 80;
        cfg.pilot = PilotKind::least_squares();
        const Simulation sim = simulate(cfg, 1);
        try {
            run_pipeline(sim.data, cfg);
            FAIL("expected a pilot failure");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Numerical);
            CHECK(std::string(e.what()).find("stage 'pilot'") != std::string::npos);
        }
    }

    TEST_CASE("config JSON round trip and validation") {
        const auto doc = nlohmann::json::parse(R"({
            "model": "xsqrt", "n": 300, "p": 40,
            "sigma": {"kind": "ar1", "rho": 0.3},
            "beta": {"scheme": "sparse", "k": 5},
            "pilot": {"kind": "pois-mle"},
            "deconv": {"grid": {"a": -2, "b": 2, "points": 101}, "bandwidth": 0.4, "monotonizer": "naive"},
            "penalty": {"kind": "none"},
            "inference": {"mode": "censored", "alpha": 0.1, "window": [-2, 2]},
            "split": {"fraction": 0.6, "seed": 8}
        })");
        const PipelineConfig cfg = PipelineConfig::from_json(doc);
        CHECK(cfg.model == "xsqrt");
        CHECK(cfg.pilot.kind == PilotKind::Kind::PoissonMLE);
        CHECK(cfg.inference.kind == InferenceMode::Kind::Censored);
        CHECK(cfg.deconv.grid.size() == 101);
        CHECK(cfg.alpha == 0.1);
        const PipelineConfig back = PipelineConfig::from_json(cfg.to_json());
        CHECK(back.to_json() == cfg.to_json());

        CHECK(throws_kind([] { PipelineConfig::from_json(nlohmann::json::parse(R"({"modle": "cubic"})")); },
                          ErrorKind::Config));
        CHECK(throws_kind(
            [] {
                PipelineConfig::from_json(
                    nlohmann::json::parse(R"({"penalty": {"kind": "none"}, "inference": {"mode": "ridge"}})"));
            },
            ErrorKind::Config));
        CHECK(PipelineConfig::from_json(nlohmann::json::object(), PipelineConfig::Defaults::Data).split.no_split);
        CHECK_FALSE(PipelineConfig::from_json(nlohmann::json::object()).split.no_split);
    }

    TEST_CASE("simulated replications differ and repeat") {
        const PipelineConfig cfg = desk_config();
        CHECK(simulate(cfg, 1, 0).data.y == simulate(cfg, 1, 0).data.y);
        CHECK(simulate(cfg, 1, 0).data.X != simulate(cfg, 1, 1).data.X);
    }
}

TEST_SUITE("csv") {
    TEST_CASE("ingest keeps column order and drops the response") {
        std::istringstream in("a,y,b\n1,10,2\n3,20,4\n5,30,6\n");
        const Dataset d = ingest_csv(in, "y");
        CHECK(d.n() == 3);
        CHECK(d.p() == 2);
        CHECK(d.X(1, 0) == 3.0);
        CHECK(d.X(2, 1) == 6.0);
        CHECK(d.y(2) == 30.0);
    }

    TEST_CASE("schema errors") {
        std::istringstream missing("a,b\n1,2\n");
        try {
            ingest_csv(missing, "target");
            FAIL("expected a schema error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Config);
            CHECK(std::string(e.what()).find("target") != std::string::npos);
        }
        std::istringstream bad("a,y\n1,2\nx,3\n");
        CHECK(throws_kind([&] { ingest_csv(bad, "y"); }, ErrorKind::Config));
        std::istringstream ragged("a,y\n1,2,3\n");
        CHECK(throws_kind([&] { ingest_csv(ragged, "y"); }, ErrorKind::Config));
    }

    TEST_CASE("round trip is exact") {
        PipelineConfig cfg;
        cfg.n = 25;
        cfg.p = 4;
        const Dataset d = simulate(cfg, 3).data;
        std::stringstream buf;
        write_dataset_csv(d, buf);
        const Dataset back = ingest_csv(buf, "y");
        CHECK(back.X == d.X);
        CHECK(back.y == d.y);
    }

    TEST_CASE("shortest round-trip formatting") {
        CHECK(format_double(0.1) == "0.1");
        CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
    }
}

TEST_SUITE("experiment") {
    TEST_CASE("single replication runs are byte-identical") {
        ExperimentSpec spec;
        spec.experiment = "figure3";
        spec.replications = 1;
        spec.models = {"cloglog"};
        spec.sizes = {{120, 60}};
        spec.threads = 2;
        const ExperimentResult a = run_experiment(spec), b = run_experiment(spec);
        REQUIRE(a.files.size() == b.files.size());
        for (std::size_t i = 0; i < a.files.size(); ++i) CHECK(a.files[i].content == b.files[i].content);
        CHECK(a.manifest.dump() == b.manifest.dump());
    }

    TEST_CASE("results do not depend on the thread count") {
        ExperimentSpec spec;
        spec.experiment = "figure1";
        spec.replications = 6;
        spec.models = {"cubic"};
        spec.sizes = {{200, 60}};
        spec.threads = 1;
        const ExperimentResult a = run_experiment(spec);
        spec.threads = 3;
        const ExperimentResult b = run_experiment(spec);
        CHECK(a.files.front().content == b.files.front().content);
    }

    TEST_CASE("every CSV has a header and documented records") {
        ExperimentSpec spec;
        spec.experiment = "table1";
        spec.replications = 2;
        spec.models = {"logit", "piecewise"};
        spec.sizes = {{300, 30}};
        const ExperimentResult r = run_experiment(spec);
        for (const auto& f : r.files) {
            CHECK_FALSE(f.description.empty());
            const auto first_line = f.content.substr(0, f.content.find('\n'));
            CHECK(first_line.find(',') != std::string::npos);
        }
        CHECK(r.manifest.at("summary").contains("logit"));
    }

    TEST_CASE("experiment errors") {
        ExperimentSpec spec;
        spec.experiment = "figure9";
        CHECK(throws_kind([&] { run_experiment(spec); }, ErrorKind::Config));
        spec.experiment = "figure1";
        spec.replications = -1;
        CHECK(throws_kind([&] { run_experiment(spec); }, ErrorKind::Config));
    }

    TEST_CASE("default pilots") {
        CHECK(default_pilot(ModelVariant::Cubic, 500, 200).kind == PilotKind::Kind::LeastSquares);
        CHECK(default_pilot(ModelVariant::XSqrt, 500, 200).kind == PilotKind::Kind::PoissonMLE);
        CHECK(default_pilot(ModelVariant::Logit, 500, 50).kind == PilotKind::Kind::LogisticMLE);
        CHECK(default_pilot(ModelVariant::Cloglog, 250, 500).kind == PilotKind::Kind::Ridge);
    }
}
