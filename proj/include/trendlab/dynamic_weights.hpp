#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trendlab/dates.hpp"
#include "trendlab/signals.hpp"

namespace trendlab::dynamic_weights {

using signals::HorizonWeights;

/// Rolling estimation setup: eight-year training windows cut into six-month
/// subwindows, six-month test windows, thresholds at the 40th/60th
/// percentiles of the training population. All windows are measured in
/// trading days (252 per year, 21 per month).
struct RollingConfig {
    int train_years = 8;
    int subwindow_months = 6;
    int test_months = 6;
    int roll_step_months = 6;
    double std_percentile = 40.0;
    double autocorr_percentile = 60.0;
    double step_percentile = 40.0;
    int min_criteria = 2;      // of the 3 stability criteria
    int min_stable_series = 2; // of the horizon series per asset
    double ema_alpha = 0.3;
    double shrinkage = 0.2;    // covariance shrinkage toward its diagonal
    int min_subwindow_obs = 40;
    // Fixed thresholds replace the adaptive percentiles when set.
    std::optional<double> fixed_std_threshold;
    std::optional<double> fixed_autocorr_threshold;
    std::optional<double> fixed_step_threshold;

    int train_days() const { return train_years * 252; }
    int subwindow_days() const { return subwindow_months * 21; }
    int test_days() const { return test_months * 21; }
    int roll_step_days() const { return roll_step_months * 21; }
    void validate() const;
};

struct StabilityDiagnostics {
    double std_dev = 0.0;   // sample std of the weight series
    double autocorr1 = 0.0; // lag-1 Pearson autocorrelation (0 for constant series)
    double max_step = 0.0;  // max |w_t - w_{t-1}|
};

/// One (asset, horizon) weight series across the training subwindows,
/// with its per-criterion flags after classification.
struct WeightPath {
    std::string asset_id;
    int horizon = 0;
    std::vector<double> weights;
    StabilityDiagnostics diagnostics;
    bool passes_std = false;
    bool passes_autocorr = false;
    bool passes_step = false;
    bool is_stable = false;
};

/// Linear-interpolation percentile of a sample (p in [0, 100]).
double percentile(std::vector<double> values, double p);

StabilityDiagnostics stability_diagnostics(const std::vector<double>& series);

double ema_smooth(const std::vector<double>& series, double alpha);

struct SubwindowWeights {
    std::vector<Eigen::VectorXd> weights;  // one simplex vector per subwindow
    std::vector<bool> degenerate;          // equal-weight fallback markers
};

/// Minimum-variance simplex weights of the horizon sleeves, one vector per
/// disjoint subwindow of the training window. `sleeve_returns` is
/// (horizons x train_days). Degenerate subwindow covariances fall back to
/// equal weights and are flagged.
SubwindowWeights subwindow_weights(const Eigen::MatrixXd& sleeve_returns,
                                   const RollingConfig& config);

/// Applies the three percentile criteria across the whole population and the
/// 2-of-3 / 2-of-5 rules. Mutates the flag fields of each path in place and
/// returns per-asset global stability.
std::map<std::string, bool> classify_stable(std::vector<WeightPath>& population,
                                            const RollingConfig& config);

struct WindowWeights {
    Date window_start;                          // first date of the test window
    std::size_t test_begin = 0, test_end = 0;   // index range into the common dates
    std::map<std::string, HorizonWeights> weights;
    std::map<std::string, bool> asset_stable;
    std::vector<WeightPath> paths;              // diagnostics for inspection
};

struct DynamicWeightsResult {
    std::vector<WindowWeights> windows;
};

/// Full rolling procedure. `sleeves` maps asset id to a (horizons x T) matrix
/// of single-horizon sleeve returns on the common calendar `dates`. For each
/// rolling window, subwindow weights are estimated, classified for stability
/// and EMA-smoothed; assets failing the persistence rule revert to equal
/// weights. With `persistence_rule` off the smoothed weights are always used
/// (the optimized-trend variant).
DynamicWeightsResult dynamic_horizon_weights(const std::map<std::string, Eigen::MatrixXd>& sleeves,
                                             const std::vector<Date>& dates,
                                             const signals::HorizonSet& horizons,
                                             const RollingConfig& config,
                                             bool persistence_rule = true);

void write_weight_paths_csv(const std::string& path, const DynamicWeightsResult& result,
                            const signals::HorizonSet& horizons);

}  // namespace trendlab::dynamic_weights
