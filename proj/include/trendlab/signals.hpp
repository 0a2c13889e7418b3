#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "trendlab/market_data.hpp"

namespace trendlab::signals {

using market_data::ReturnSeries;

struct HorizonSet {
    std::vector<int> horizons = {20, 60, 125, 250, 500};

    std::size_t size() const { return horizons.size(); }
    void validate() const;  // strictly increasing, each >= 2
    int index_of(int horizon) const;  // -1 if absent
};

enum class Provenance { Equal, Optimized, Dynamic };

const char* provenance_name(Provenance p);

/// Simplex weights over the horizons of one asset.
struct HorizonWeights {
    std::string asset_id;
    std::vector<double> weights;
    Provenance provenance = Provenance::Equal;

    void validate() const;  // weights >= 0, sum to 1 within 1e-12
    static HorizonWeights equal(const std::string& asset_id, std::size_t n_horizons);
};

/// Trend scores indexed (date, asset, horizon). NaN marks dates where a score
/// is not yet defined (fewer than horizon + vol_window observations).
struct TrendScorePanel {
    std::vector<Date> dates;           // return dates
    std::vector<std::string> assets;
    HorizonSet horizons;
    std::vector<double> scores;        // row-major [date][asset][horizon]

    double score(std::size_t t, std::size_t a, std::size_t h) const {
        return scores[(t * assets.size() + a) * horizons.size() + h];
    }
    double& score(std::size_t t, std::size_t a, std::size_t h) {
        return scores[(t * assets.size() + a) * horizons.size() + h];
    }
};

/// score_t = clamp(z_t / 2, -1, 1) with z_t the h-day compounded return over
/// the trailing vol (sample std over vol_window days) times sqrt(h).
/// NaN before horizon + vol_window observations exist.
std::vector<double> trend_score(const ReturnSeries& returns, int horizon, int vol_window);

/// Trailing sample standard deviation of daily returns (NaN before vol_window
/// observations). Shared by trend_score and position sizing.
std::vector<double> trailing_vol(const std::vector<double>& returns, int vol_window);

TrendScorePanel build_score_panel(const std::map<std::string, ReturnSeries>& returns,
                                  const HorizonSet& horizons, int vol_window);

/// x_{t,i} = sum_h w_h * x_{t,i,h}; NaN wherever any constituent is NaN.
/// Result is (dates x assets).
Eigen::MatrixXd aggregate_scores(const TrendScorePanel& panel,
                                 const std::map<std::string, HorizonWeights>& weights);

struct SleevePath {
    ReturnSeries returns;       // gross strategy returns, equal risk budget per asset
    Eigen::MatrixXd positions;  // (dates x assets) notional positions actually held
};

/// position_{t,i} = score_{t-1,i} * vol_target / (vol_{t-1,i} * sqrt(252));
/// strategy return_t = (1/N) sum_i position_{t,i} * r_{t,i}. One-day lag.
/// Positions are zero wherever the lagged score or vol is undefined.
SleevePath sleeve_path(const Eigen::MatrixXd& scores,
                       const std::map<std::string, ReturnSeries>& returns,
                       double vol_target, int vol_window);

ReturnSeries sleeve_returns(const Eigen::MatrixXd& scores,
                            const std::map<std::string, ReturnSeries>& returns,
                            double vol_target, int vol_window);

void write_score_panel_csv(const std::string& path, const TrendScorePanel& panel);

}  // namespace trendlab::signals
