#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>  // vendored single header
#endif

#include "trendlab/report_io.hpp"
#include "trendlab/run_config.hpp"

namespace fs = std::filesystem;
using namespace trendlab;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir;
    std::int64_t seed = -1;
    std::vector<std::string> variants;
    double alpha = -1.0;
    std::string horizons;
    bool export_scores = false;
    std::string fixture;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "run configuration file (JSON)")->required();
    cmd->add_option("--out", flags.out_dir, "output directory (overrides config)");
    cmd->add_option("--seed", flags.seed, "seed override");
    cmd->add_option("--variant", flags.variants, "strategy variant (repeatable, overrides config)");
    cmd->add_option("--alpha", flags.alpha, "utility exponent (default 0.8)");
    cmd->add_option("--horizons", flags.horizons, "comma-separated horizon days");
}

cli::RunConfig effective_config(const CommonFlags& flags) {
    auto config = cli::load_run_config(flags.config_path);
    if (!flags.out_dir.empty()) config.output_dir = flags.out_dir;
    if (flags.seed >= 0) {
        config.seed = static_cast<std::uint64_t>(flags.seed);
        config.seed_set = true;
        config.synthetic.seed = config.seed;
    }
    if (!flags.variants.empty()) {
        config.variants.clear();
        for (const auto& name : flags.variants)
            config.variants.push_back(backtest::StrategyVariant::parse(name));
    }
    if (flags.alpha >= 0) config.backtest.alpha = flags.alpha;
    if (!flags.horizons.empty()) {
        std::vector<int> horizons;
        std::stringstream ss(flags.horizons);
        std::string tok;
        while (std::getline(ss, tok, ','))
            horizons.push_back(std::stoi(tok));
        config.backtest.horizons.horizons = horizons;
    }
    config.validate();
    fs::create_directories(config.output_dir);
    return config;
}

std::string join(const std::string& dir, const std::string& name) {
    return (fs::path(dir) / name).string();
}

std::vector<std::pair<std::string, market_data::ReturnSeries>> single_horizon_sleeves(
    const cli::LoadedData& data, const backtest::BacktestConfig& config) {
    const auto panel =
        signals::build_score_panel(data.returns, config.horizons, config.vol_window);
    std::vector<std::pair<std::string, market_data::ReturnSeries>> sleeves;
    for (std::size_t h = 0; h < config.horizons.size(); ++h) {
        std::map<std::string, signals::HorizonWeights> one_hot;
        for (const auto& asset : panel.assets) {
            signals::HorizonWeights hw;
            hw.asset_id = asset;
            hw.weights.assign(config.horizons.size(), 0.0);
            hw.weights[h] = 1.0;
            one_hot.emplace(asset, hw);
        }
        auto sleeve = signals::sleeve_returns(signals::aggregate_scores(panel, one_hot),
                                              data.returns, config.vol_target, config.vol_window);
        const std::string label = std::to_string(config.horizons.horizons[h]) + "d";
        sleeve.instrument_id = label;
        sleeves.emplace_back(label, std::move(sleeve));
    }
    return sleeves;
}

int cmd_synth(const CommonFlags& flags) {
    auto config = effective_config(flags);
    if (config.data_source != cli::RunConfig::DataSource::Synthetic)
        throw Error(ErrorCode::ConfigError, "synth requires data.source=synthetic");
    market_data::SyntheticSpec spec = config.synthetic;
    spec.seed = config.seed;
    const auto universe = market_data::generate_synthetic_universe(spec);
    market_data::write_prices_csv(join(config.output_dir, "prices.csv"), universe);

    nlohmann::json meta;
    meta["schema"] = "trendlab.synth.v1";
    meta["n_assets"] = spec.n_assets;
    meta["n_days"] = spec.n_days;
    meta["trend_half_lives"] = spec.trend_half_lives;
    meta["drift_vol"] = spec.drift_vol;
    meta["noise_vol"] = spec.noise_vol;
    meta["drift_mean"] = spec.drift_mean;
    meta["medium_redundancy"] = spec.medium_redundancy;
    meta["seed"] = spec.seed;
    meta["start_date"] = spec.start_date.to_iso();
    report_io::write_text_file(join(config.output_dir, "meta.json"), meta.dump(2) + "\n");
    cli::write_manifest(join(config.output_dir, "manifest.json"), "synth", config);
    std::cout << "wrote " << join(config.output_dir, "prices.csv") << "\n";
    return 0;
}

int cmd_backtest(const CommonFlags& flags) {
    auto config = effective_config(flags);
    if (config.variants.empty())
        config.variants.push_back(backtest::StrategyVariant::pure_trend());
    const auto data = cli::load_data(config);
    const auto benchmark = cli::resolve_benchmark(config, data);

    std::vector<backtest::BacktestReport> reports;
    for (const auto& variant : config.variants)
        reports.push_back(backtest::run_walk_forward(data.returns, data.instruments, variant,
                                                     config.backtest, benchmark));

    report_io::write_text_file(join(config.output_dir, "report.json"),
                               report_io::report_json(reports, config.backtest.alpha) + "\n");
    report_io::write_metrics_csv(join(config.output_dir, "metrics.csv"), reports);
    report_io::write_text_file(join(config.output_dir, "iso_utility.svg"),
                               report_io::iso_utility_svg(reports, config.backtest.alpha));

    if (reports.size() >= 2) {
        const auto ranking =
            backtest::ablation_zscores(report_io::ablation_input_from_reports(reports));
        report_io::write_zscores_csv(join(config.output_dir, "zscores.csv"), ranking);
    }

    const auto tree = backtest::horizon_cluster(single_horizon_sleeves(data, config.backtest));
    report_io::write_text_file(join(config.output_dir, "dendrogram.svg"),
                               report_io::cluster_svg(tree));
    if (flags.export_scores) {
        const auto panel = signals::build_score_panel(data.returns, config.backtest.horizons,
                                                      config.backtest.vol_window);
        signals::write_score_panel_csv(join(config.output_dir, "scores.csv"), panel);
    }
    cli::write_manifest(join(config.output_dir, "manifest.json"), "backtest", config);
    std::cout << "wrote " << join(config.output_dir, "report.json") << "\n";
    return 0;
}

backtest::AblationInput load_fixture(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, path);
    nlohmann::json doc;
    try {
        in >> doc;
        backtest::AblationInput input;
        input.strategies = doc.at("strategies").get<std::vector<std::string>>();
        input.periods = doc.at("periods").get<std::vector<std::string>>();
        auto table = [&](const char* key) {
            const auto rows = doc.at(key).get<std::vector<std::vector<double>>>();
            Eigen::MatrixXd m(input.periods.size(), input.strategies.size());
            for (std::size_t p = 0; p < rows.size(); ++p)
                for (std::size_t s = 0; s < rows[p].size(); ++s)
                    m(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(s)) = rows[p][s];
            return m;
        };
        input.sharpe = table("sharpe");
        input.ret_over_maxdd = table("ret_over_maxdd");
        input.corr = table("corr");
        return input;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
}

int cmd_ablate(const CommonFlags& flags) {
    auto config = effective_config(flags);
    backtest::AblationRanking ranking;
    if (!flags.fixture.empty() || config.ablation_fixture) {
        const std::string path = !flags.fixture.empty() ? flags.fixture : *config.ablation_fixture;
        ranking = backtest::ablation_zscores(load_fixture(path));
    } else {
        // leave-one-out sweep over the configured data source
        std::vector<backtest::StrategyVariant> variants{backtest::StrategyVariant::pure_trend()};
        for (int h : config.backtest.horizons.horizons)
            variants.push_back(backtest::StrategyVariant::leave_one_out(h));
        const auto data = cli::load_data(config);
        const auto benchmark = cli::resolve_benchmark(config, data);
        std::vector<backtest::BacktestReport> reports;
        for (const auto& variant : variants)
            reports.push_back(backtest::run_walk_forward(data.returns, data.instruments, variant,
                                                         config.backtest, benchmark));
        ranking = backtest::ablation_zscores(report_io::ablation_input_from_reports(reports));
    }
    report_io::write_zscores_csv(join(config.output_dir, "zscores.csv"), ranking);
    cli::write_manifest(join(config.output_dir, "manifest.json"), "ablate", config);
    for (const auto& row : ranking.rows)
        std::cout << row.strategy << " " << row.z_overall << "\n";
    return 0;
}

int cmd_cluster(const CommonFlags& flags) {
    auto config = effective_config(flags);
    const auto data = cli::load_data(config);
    const auto tree = backtest::horizon_cluster(single_horizon_sleeves(data, config.backtest));
    report_io::write_text_file(join(config.output_dir, "cluster.txt"),
                               report_io::render_cluster_text(tree));
    report_io::write_text_file(join(config.output_dir, "dendrogram.svg"),
                               report_io::cluster_svg(tree));
    cli::write_manifest(join(config.output_dir, "manifest.json"), "cluster", config);
    std::cout << report_io::render_cluster_text(tree);
    return 0;
}

int cmd_weights(const CommonFlags& flags) {
    auto config = effective_config(flags);
    const auto data = cli::load_data(config);
    const auto sleeves = backtest::build_horizon_sleeves(data.returns, config.backtest.horizons,
                                                         config.backtest.vol_window,
                                                         config.backtest.vol_target);
    const auto result = dynamic_weights::dynamic_horizon_weights(
        sleeves.sleeves, sleeves.live_dates, config.backtest.horizons, config.backtest.rolling,
        true);
    dynamic_weights::write_weight_paths_csv(join(config.output_dir, "weights.csv"), result,
                                            config.backtest.horizons);
    cli::write_manifest(join(config.output_dir, "manifest.json"), "weights", config);
    std::cout << "wrote " << join(config.output_dir, "weights.csv") << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"multi-horizon trend premia research engine"};
    app.require_subcommand(1);

    CommonFlags flags;
    auto* synth = app.add_subcommand("synth", "generate a synthetic universe CSV");
    add_common(synth, flags);
    auto* run = app.add_subcommand("backtest", "walk-forward backtest of the configured variants");
    add_common(run, flags);
    run->add_flag("--export-scores", flags.export_scores, "also write the trend score panel CSV");
    auto* ablate = app.add_subcommand("ablate", "leave-one-out Z-score ranking");
    add_common(ablate, flags);
    ablate->add_option("--fixture", flags.fixture, "metric-table fixture JSON");
    auto* cluster = app.add_subcommand("cluster", "horizon dendrogram on 1-correlation distances");
    add_common(cluster, flags);
    auto* weights = app.add_subcommand("weights", "rolling dynamic horizon weights");
    add_common(weights, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (synth->parsed()) return cmd_synth(flags);
        if (run->parsed()) return cmd_backtest(flags);
        if (ablate->parsed()) return cmd_ablate(flags);
        if (cluster->parsed()) return cmd_cluster(flags);
        if (weights->parsed()) return cmd_weights(flags);
    } catch (const Error& e) {
        std::cerr << "{\"error\":{\"code\":\"" << error_code_name(e.code())
                  << "\",\"message\":" << nlohmann::json(std::string(e.what())).dump() << "}}\n";
        switch (e.category()) {
            case ErrorCategory::Config: return 2;
            case ErrorCategory::Data: return 3;
            case ErrorCategory::Numerical: return 4;
        }
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "{\"error\":{\"code\":\"Unexpected\",\"message\":"
                  << nlohmann::json(std::string(e.what())).dump() << "}}\n";
        return 4;
    }
    return 0;
}
