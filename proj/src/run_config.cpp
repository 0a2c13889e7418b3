#include "trendlab/run_config.hpp"

#include <cmath>
#include <fstream>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>  // vendored single header
#endif

namespace trendlab::cli {

namespace {

using json = nlohmann::json;

double num(const json& j, const char* key, double fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<double>();
}

int num_int(const json& j, const char* key, int fallback) {
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<int>();
}

std::string fmt(double v) {
    if (!std::isfinite(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

}  // namespace

void RunConfig::validate() const {
    if (data_source == DataSource::Csv && csv_path.empty())
        throw Error(ErrorCode::ConfigError, "data.source=csv requires data.csv_path");
    if (data_source == DataSource::Synthetic && !seed_set)
        throw Error(ErrorCode::ConfigError, "synthetic data requires a seed");
    if (benchmark_source == BenchmarkSource::Csv && benchmark_csv.empty())
        throw Error(ErrorCode::ConfigError, "benchmark.source=csv requires benchmark.csv_path");
    if (output_dir.empty()) throw Error(ErrorCode::ConfigError, "output_dir is empty");
    backtest.horizons.validate();
    backtest.rolling.validate();
    for (const auto& variant : variants) variant.validate(backtest.horizons);
}

RunConfig load_run_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::ConfigError, "cannot open config file " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }

    RunConfig config;
    try {
        if (doc.contains("data")) {
            const auto& data = doc["data"];
            const std::string source = data.value("source", std::string{"synthetic"});
            if (source == "csv")
                config.data_source = RunConfig::DataSource::Csv;
            else if (source == "synthetic")
                config.data_source = RunConfig::DataSource::Synthetic;
            else
                throw Error(ErrorCode::ConfigError, "unknown data.source '" + source + "'");
            config.csv_path = data.value("csv_path", std::string{});
            if (data.contains("synthetic")) {
                const auto& s = data["synthetic"];
                auto& spec = config.synthetic;
                spec.n_assets = num_int(s, "n_assets", spec.n_assets);
                spec.n_days = num_int(s, "n_days", spec.n_days);
                if (s.contains("trend_half_lives"))
                    spec.trend_half_lives = s["trend_half_lives"].get<std::vector<double>>();
                spec.drift_vol = num(s, "drift_vol", spec.drift_vol);
                spec.noise_vol = num(s, "noise_vol", spec.noise_vol);
                spec.drift_mean = num(s, "drift_mean", spec.drift_mean);
                spec.medium_redundancy = s.value("medium_redundancy", spec.medium_redundancy);
                if (s.contains("start_date"))
                    spec.start_date = Date::parse_iso(s["start_date"].get<std::string>());
                spec.initial_price = num(s, "initial_price", spec.initial_price);
            }
        }
        if (doc.contains("universe_file") && !doc["universe_file"].is_null())
            config.universe_file = doc["universe_file"].get<std::string>();

        auto& bt = config.backtest;
        if (doc.contains("horizons"))
            bt.horizons.horizons = doc["horizons"].get<std::vector<int>>();
        bt.vol_window = num_int(doc, "vol_window", bt.vol_window);
        bt.vol_target = num(doc, "vol_target", bt.vol_target);
        if (doc.contains("rolling")) {
            const auto& r = doc["rolling"];
            auto& rc = bt.rolling;
            rc.train_years = num_int(r, "train_years", rc.train_years);
            rc.subwindow_months = num_int(r, "subwindow_months", rc.subwindow_months);
            rc.test_months = num_int(r, "test_months", rc.test_months);
            rc.roll_step_months = num_int(r, "roll_step_months", rc.roll_step_months);
            rc.std_percentile = num(r, "std_percentile", rc.std_percentile);
            rc.autocorr_percentile = num(r, "autocorr_percentile", rc.autocorr_percentile);
            rc.step_percentile = num(r, "step_percentile", rc.step_percentile);
            rc.min_criteria = num_int(r, "min_criteria", rc.min_criteria);
            rc.min_stable_series = num_int(r, "min_stable_series", rc.min_stable_series);
            rc.ema_alpha = num(r, "ema_alpha", rc.ema_alpha);
            rc.shrinkage = num(r, "shrinkage", rc.shrinkage);
            if (r.contains("fixed_std_threshold") && !r["fixed_std_threshold"].is_null())
                rc.fixed_std_threshold = r["fixed_std_threshold"].get<double>();
            if (r.contains("fixed_autocorr_threshold") && !r["fixed_autocorr_threshold"].is_null())
                rc.fixed_autocorr_threshold = r["fixed_autocorr_threshold"].get<double>();
            if (r.contains("fixed_step_threshold") && !r["fixed_step_threshold"].is_null())
                rc.fixed_step_threshold = r["fixed_step_threshold"].get<double>();
        }
        if (doc.contains("decoder")) {
            const auto& d = doc["decoder"];
            bt.snr_ratio = num(d, "snr_ratio", bt.snr_ratio);
            bt.initial_var = num(d, "initial_var", bt.initial_var);
            bt.sparsity_eps = num(d, "sparsity_eps", bt.sparsity_eps);
            if (d.contains("max_turnover") && !d["max_turnover"].is_null())
                bt.max_turnover = d["max_turnover"].get<double>();
        }
        if (doc.contains("costs")) {
            const auto& c = doc["costs"];
            bt.costs_enabled = c.value("enabled", bt.costs_enabled);
            bt.mgmt_fee_bps_pa = num(c, "mgmt_fee_bps_pa", bt.mgmt_fee_bps_pa);
        }
        bt.alpha = num(doc, "alpha", bt.alpha);
        if (doc.contains("periods")) {
            for (const auto& p : doc["periods"]) {
                backtest::PeriodSpec spec;
                spec.label = p.at("label").get<std::string>();
                spec.start = Date::parse_iso(p.at("start").get<std::string>());
                spec.end = Date::parse_iso(p.at("end").get<std::string>());
                bt.periods.push_back(std::move(spec));
            }
        }
        if (doc.contains("benchmark")) {
            const auto& b = doc["benchmark"];
            const std::string source = b.value("source", std::string{"equal_weight_trend"});
            if (source == "equal_weight_trend")
                config.benchmark_source = RunConfig::BenchmarkSource::EqualWeightTrend;
            else if (source == "csv")
                config.benchmark_source = RunConfig::BenchmarkSource::Csv;
            else
                throw Error(ErrorCode::ConfigError, "unknown benchmark.source '" + source + "'");
            config.benchmark_csv = b.value("csv_path", std::string{});
            if (b.contains("instrument_id") && !b["instrument_id"].is_null())
                config.benchmark_instrument = b["instrument_id"].get<std::string>();
        }
        if (doc.contains("variants"))
            for (const auto& v : doc["variants"])
                config.variants.push_back(backtest::StrategyVariant::parse(v.get<std::string>()));
        if (doc.contains("ablation_fixture") && !doc["ablation_fixture"].is_null())
            config.ablation_fixture = doc["ablation_fixture"].get<std::string>();
        config.output_dir = doc.value("output_dir", config.output_dir);
        if (doc.contains("seed") && !doc["seed"].is_null()) {
            config.seed = doc["seed"].get<std::uint64_t>();
            config.seed_set = true;
            config.synthetic.seed = config.seed;
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
    return config;
}

std::string canonical_config_json(const RunConfig& c) {
    // hand-assembled with sorted keys and fixed float formatting so the hash
    // is stable across platforms
    std::string out = "{";
    out += "\"alpha\":" + fmt(c.backtest.alpha);
    out += ",\"benchmark\":{\"csv\":\"" + c.benchmark_csv + "\",\"source\":" +
           (c.benchmark_source == RunConfig::BenchmarkSource::Csv ? std::string("\"csv\"")
                                                                  : "\"equal_weight_trend\"") +
           "}";
    out += ",\"costs\":{\"enabled\":" + std::string(c.backtest.costs_enabled ? "true" : "false") +
           ",\"mgmt_fee_bps_pa\":" + fmt(c.backtest.mgmt_fee_bps_pa) + "}";
    out += ",\"data_source\":" +
           std::string(c.data_source == RunConfig::DataSource::Csv ? "\"csv\"" : "\"synthetic\"");
    out += ",\"csv_path\":\"" + c.csv_path + "\"";
    out += ",\"decoder\":{\"initial_var\":" + fmt(c.backtest.initial_var) +
           ",\"max_turnover\":" + fmt(c.backtest.max_turnover) +
           ",\"snr_ratio\":" + fmt(c.backtest.snr_ratio) +
           ",\"sparsity_eps\":" + fmt(c.backtest.sparsity_eps) + "}";
    out += ",\"horizons\":[";
    for (std::size_t k = 0; k < c.backtest.horizons.size(); ++k)
        out += (k ? "," : "") + std::to_string(c.backtest.horizons.horizons[k]);
    out += "]";
    const auto& r = c.backtest.rolling;
    out += ",\"rolling\":{\"autocorr_percentile\":" + fmt(r.autocorr_percentile) +
           ",\"ema_alpha\":" + fmt(r.ema_alpha) +
           ",\"min_criteria\":" + std::to_string(r.min_criteria) +
           ",\"min_stable_series\":" + std::to_string(r.min_stable_series) +
           ",\"roll_step_months\":" + std::to_string(r.roll_step_months) +
           ",\"shrinkage\":" + fmt(r.shrinkage) +
           ",\"std_percentile\":" + fmt(r.std_percentile) +
           ",\"step_percentile\":" + fmt(r.step_percentile) +
           ",\"subwindow_months\":" + std::to_string(r.subwindow_months) +
           ",\"test_months\":" + std::to_string(r.test_months) +
           ",\"train_years\":" + std::to_string(r.train_years) + "}";
    out += ",\"seed\":" + std::to_string(c.seed);
    const auto& s = c.synthetic;
    out += ",\"synthetic\":{\"drift_mean\":" + fmt(s.drift_mean) +
           ",\"drift_vol\":" + fmt(s.drift_vol) + ",\"half_lives\":[";
    for (std::size_t k = 0; k < s.trend_half_lives.size(); ++k)
        out += (k ? "," : "") + fmt(s.trend_half_lives[k]);
    out += "],\"initial_price\":" + fmt(s.initial_price) +
           ",\"medium_redundancy\":" + std::string(s.medium_redundancy ? "true" : "false") +
           ",\"n_assets\":" + std::to_string(s.n_assets) +
           ",\"n_days\":" + std::to_string(s.n_days) +
           ",\"noise_vol\":" + fmt(s.noise_vol) +
           ",\"start_date\":\"" + s.start_date.to_iso() + "\"}";
    out += ",\"universe_file\":\"" + c.universe_file.value_or("") + "\"";
    out += ",\"variants\":[";
    for (std::size_t k = 0; k < c.variants.size(); ++k)
        out += (k ? ",\"" : "\"") + c.variants[k].name() + "\"";
    out += "]";
    out += ",\"vol_target\":" + fmt(c.backtest.vol_target);
    out += ",\"vol_window\":" + std::to_string(c.backtest.vol_window);
    out += "}";
    return out;
}

std::string fnv1a_hex(const std::string& data) {
    std::uint64_t hash = 0xcbf29ce484222325ULL;
    for (unsigned char ch : data) {
        hash ^= ch;
        hash *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

LoadedData load_data(const RunConfig& config) {
    config.validate();
    LoadedData out;
    if (config.data_source == RunConfig::DataSource::Csv) {
        out.prices = market_data::load_prices_csv(config.csv_path);
    } else {
        market_data::SyntheticSpec spec = config.synthetic;
        spec.seed = config.seed;
        out.prices = market_data::generate_synthetic_universe(spec);
    }
    auto aligned = market_data::align_universe(out.prices);
    out.prices = std::move(aligned.universe);
    if (out.prices.empty()) throw Error(ErrorCode::EmptyUniverse, "no assets after alignment");
    for (const auto& [id, series] : out.prices)
        out.returns.emplace(id, market_data::to_returns(series));

    if (config.universe_file) {
        out.instruments = market_data::load_universe_config(*config.universe_file);
    } else {
        for (const auto& [id, series] : out.prices) {
            market_data::Instrument inst;
            inst.id = id;
            inst.asset_class = market_data::AssetClass::Equity;
            std::tie(inst.tx_cost_bps, inst.roll_cost_bps) =
                market_data::default_costs_bps(inst.asset_class);
            out.instruments.push_back(std::move(inst));
        }
    }
    return out;
}

market_data::ReturnSeries resolve_benchmark(const RunConfig& config, const LoadedData& data) {
    if (config.benchmark_source == RunConfig::BenchmarkSource::EqualWeightTrend)
        return backtest::equal_weight_trend_benchmark(data.returns, config.backtest.horizons,
                                                      config.backtest.vol_window,
                                                      config.backtest.vol_target);
    const auto prices = market_data::load_prices_csv(config.benchmark_csv);
    if (prices.empty()) throw Error(ErrorCode::EmptyUniverse, config.benchmark_csv);
    std::string id = config.benchmark_instrument.value_or(prices.begin()->first);
    const auto it = prices.find(id);
    if (it == prices.end())
        throw Error(ErrorCode::ConfigError, "benchmark instrument '" + id + "' not in file");
    auto series = market_data::to_returns(it->second);
    series.instrument_id = "benchmark";
    return series;
}

void write_manifest(const std::string& path, const std::string& command,
                    const RunConfig& config) {
    const std::string canonical = canonical_config_json(config);
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "{\n"
        << "  \"command\": \"" << command << "\",\n"
        << "  \"config\": " << canonical << ",\n"
        << "  \"config_hash\": \"" << fnv1a_hex(canonical) << "\",\n"
        << "  \"engine_version\": \"0.1.0\",\n"
        << "  \"schema\": \"trendlab.manifest.v1\",\n"
        << "  \"seed\": " << config.seed << "\n"
        << "}\n";
}

}  // namespace trendlab::cli
