#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trendlab/dates.hpp"
#include "trendlab/errors.hpp"

namespace trendlab::market_data {

enum class AssetClass { Commodity, Equity, FixedIncome, FX };

const char* asset_class_name(AssetClass c);
AssetClass parse_asset_class(const std::string& name);

/// Default (tx, roll) cost in basis points for an asset class:
/// Commodity/Equity 2/15, FixedIncome 2/10, FX 2/2.
std::pair<double, double> default_costs_bps(AssetClass c);

struct Instrument {
    std::string id;
    AssetClass asset_class = AssetClass::Equity;
    double tx_cost_bps = 0.0;    // per round turn
    double roll_cost_bps = 0.0;  // per annum
    std::string description;

    void validate() const;  // costs >= 0, id nonempty
};

struct PriceSeries {
    std::string instrument_id;
    std::vector<Date> dates;  // strictly increasing business-day stamps
    std::vector<double> prices;

    std::size_t size() const { return prices.size(); }
    void validate() const;  // positive prices, strictly increasing dates, equal lengths
};

struct ReturnSeries {
    std::string instrument_id;
    std::vector<Date> dates;
    std::vector<double> returns;  // simple daily returns

    std::size_t size() const { return returns.size(); }
    void validate() const;  // each return > -1, lengths match, dates increasing
};

/// Controls the synthetic price generator. The latent drift of each asset is
/// an AR(1) (half-life in days) around `drift_mean`; with `medium_redundancy`
/// the drift is instead the sum of a fast and a slow AR(1) component, so the
/// medium lookbacks carry no information of their own. `trend_half_lives`
/// holds one entry per asset, or exactly two entries (fast, slow) shared by
/// all assets when `medium_redundancy` is set.
struct SyntheticSpec {
    int n_assets = 6;
    int n_days = 3000;
    std::vector<double> trend_half_lives = {250.0};
    double drift_vol = 0.10;   // annualized stationary std of the drift
    double noise_vol = 0.15;   // annualized diffusion vol
    double drift_mean = 0.0;   // annualized constant drift offset
    bool medium_redundancy = false;
    std::uint64_t seed = 0;
    Date start_date = Date(2005, 1, 3);
    double initial_price = 100.0;

    void validate() const;  // throws Error(InvalidSpec)
};

using Universe = std::map<std::string, PriceSeries>;

/// Reads `date,instrument_id,price` CSV. Rows may arrive in any order; each
/// instrument's series comes back date-sorted. Duplicate (date, id) pairs,
/// non-positive prices and malformed rows are rejected with the line number.
Universe load_prices_csv(const std::string& path);

ReturnSeries to_returns(const PriceSeries& prices);

/// Rebuilds a price series from returns and a starting price; inverse of
/// to_returns up to floating point.
PriceSeries from_returns(const ReturnSeries& returns, Date first_date, double first_price);

Universe generate_synthetic_universe(const SyntheticSpec& spec);

struct AlignedUniverse {
    Universe universe;                      // all series on the common calendar
    std::vector<std::string> rejected_ids;  // assets missing > max_missing of the union calendar
};

/// Intersects the universe to dates common to every retained asset. Assets
/// covering less than (1 - max_missing) of the union calendar are rejected
/// rather than imputed.
AlignedUniverse align_universe(const Universe& universe, double max_missing = 0.05);

/// Instrument list with per-class cost defaults, read from a JSON file:
/// {"instruments": [{"id": ..., "asset_class": ..., "tx_cost_bps": ...,
///  "roll_cost_bps": ..., "description": ...}, ...]}
std::vector<Instrument> load_universe_config(const std::string& path);

void write_prices_csv(const std::string& path, const Universe& universe);

}  // namespace trendlab::market_data
