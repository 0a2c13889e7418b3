#pragma once

#include <optional>
#include <string>
#include <vector>

#include "trendlab/backtest.hpp"
#include "trendlab/market_data.hpp"

namespace trendlab::cli {

/// One structured config file drives every command; command-line flags
/// override individual fields. Exactly one data source must be set.
struct RunConfig {
    enum class DataSource { Csv, Synthetic };
    enum class BenchmarkSource { EqualWeightTrend, Csv };

    DataSource data_source = DataSource::Synthetic;
    std::string csv_path;
    market_data::SyntheticSpec synthetic;

    std::optional<std::string> universe_file;
    backtest::BacktestConfig backtest;

    BenchmarkSource benchmark_source = BenchmarkSource::EqualWeightTrend;
    std::string benchmark_csv;
    std::optional<std::string> benchmark_instrument;

    std::vector<backtest::StrategyVariant> variants;
    std::optional<std::string> ablation_fixture;  // metric tables for the ablate command

    std::string output_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;

    void validate() const;  // throws Error(ConfigError)
};

RunConfig load_run_config(const std::string& path);

/// Canonical JSON echo of the effective config (sorted keys, fixed float
/// formatting); hashing it identifies a run.
std::string canonical_config_json(const RunConfig& config);

/// FNV-1a 64-bit hex digest.
std::string fnv1a_hex(const std::string& data);

struct LoadedData {
    std::map<std::string, market_data::ReturnSeries> returns;
    std::vector<market_data::Instrument> instruments;
    market_data::Universe prices;
};

/// Materializes the data source: loads or generates prices, aligns the
/// calendar, computes returns, and resolves instrument definitions.
LoadedData load_data(const RunConfig& config);

market_data::ReturnSeries resolve_benchmark(const RunConfig& config, const LoadedData& data);

void write_manifest(const std::string& path, const std::string& command,
                    const RunConfig& config);

}  // namespace trendlab::cli
