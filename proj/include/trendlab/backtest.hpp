#pragma once

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trendlab/decoder.hpp"
#include "trendlab/dynamic_weights.hpp"
#include "trendlab/market_data.hpp"
#include "trendlab/signals.hpp"

namespace trendlab::backtest {

using market_data::Instrument;
using market_data::ReturnSeries;

struct StrategyVariant {
    enum class Kind { PureTrend, OptimizedTrend, DynamicTrend, LeaveOneOut, SingleHorizon };

    Kind kind = Kind::PureTrend;
    int horizon = 0;  // for LeaveOneOut / SingleHorizon

    static StrategyVariant pure_trend() { return {Kind::PureTrend, 0}; }
    static StrategyVariant optimized_trend() { return {Kind::OptimizedTrend, 0}; }
    static StrategyVariant dynamic_trend() { return {Kind::DynamicTrend, 0}; }
    static StrategyVariant leave_one_out(int h) { return {Kind::LeaveOneOut, h}; }
    static StrategyVariant single_horizon(int h) { return {Kind::SingleHorizon, h}; }

    /// "pure_trend", "no_125", "single_250", ...
    std::string name() const;
    static StrategyVariant parse(const std::string& name);
    void validate(const signals::HorizonSet& horizons) const;
};

struct MetricsRow {
    double ann_return = 0.0;
    double ann_vol = 0.0;
    double sharpe = 0.0;
    double max_drawdown = 0.0;      // in [0, 1]
    double ret_over_maxdd = 0.0;
    double benchmark_corr = 0.0;
    double conditional_sharpe = std::numeric_limits<double>::quiet_NaN();
};

/// Annualized mean/vol on 252 days, Sharpe at zero risk-free, peak-to-trough
/// drawdown of the compounded wealth path, Pearson correlation to the
/// benchmark. Throws on zero vol or a never-declining wealth path.
MetricsRow metrics(const ReturnSeries& strategy, const ReturnSeries& benchmark);

/// Calendar-month compounding of daily returns; dates stamp month ends.
ReturnSeries to_monthly(const ReturnSeries& daily);

/// mean(strategy | benchmark < threshold) / std(all strategy months).
double conditional_sharpe(const ReturnSeries& strategy_monthly,
                          const ReturnSeries& equity_benchmark_monthly,
                          double threshold = -0.03);

/// U_alpha = ret_over_maxdd^alpha * corr^(1-alpha); both inputs positive.
double cobb_douglas_utility(double ret_over_maxdd, double corr, double alpha = 0.8);

// ---------------------------------------------------------------------------
// Cost model
// ---------------------------------------------------------------------------

/// net_t = gross_t - sum_i turnover_{t,i} tx_i - sum_i |position_{t,i}| roll_i / 252
///       - mgmt_fee / (1e4 * 252), with tx/roll in decimal from bps.
/// `turnover` and `positions` are (T x N) with columns ordered as `instruments`.
ReturnSeries apply_costs(const ReturnSeries& gross, const Eigen::MatrixXd& turnover,
                         const Eigen::MatrixXd& positions,
                         const std::vector<Instrument>& instruments,
                         double mgmt_fee_bps_pa = 50.0);

// ---------------------------------------------------------------------------
// Ablation Z-scores
// ---------------------------------------------------------------------------

/// Period-by-strategy metric tables: each matrix is (periods x strategies).
struct AblationInput {
    std::vector<std::string> strategies;
    std::vector<std::string> periods;
    Eigen::MatrixXd sharpe;
    Eigen::MatrixXd ret_over_maxdd;
    Eigen::MatrixXd corr;
};

struct AblationRow {
    std::string strategy;
    double z_sharpe = 0.0;
    double z_ret_over_maxdd = 0.0;
    double z_corr = 0.0;
    double z_overall = 0.0;
};

struct AblationRanking {
    std::vector<AblationRow> rows;  // sorted by z_overall descending
    bool had_degenerate_column = false;
};

/// Standardizes each (period, metric) cell across strategies with the
/// population std, averages per metric, then averages the three metrics.
/// Zero-spread cells contribute 0 and set the degenerate flag.
AblationRanking ablation_zscores(const AblationInput& input);

// ---------------------------------------------------------------------------
// Correlation clustering
// ---------------------------------------------------------------------------

struct MergeStep {
    int left = 0;   // cluster ids; leaves are 0..n-1, merges n, n+1, ...
    int right = 0;
    double distance = 0.0;
    int size = 0;   // leaves under the merged cluster
};

struct ClusterTree {
    std::vector<std::string> leaves;
    std::vector<MergeStep> merges;
};

/// Average-linkage agglomerative clustering on 1 - correlation distances.
/// Ties break deterministically on (distance, left id, right id).
ClusterTree horizon_cluster(const std::vector<std::pair<std::string, ReturnSeries>>& sleeves);

// ---------------------------------------------------------------------------
// Walk-forward engine
// ---------------------------------------------------------------------------

struct PeriodSpec {
    std::string label;
    Date start;  // inclusive
    Date end;    // exclusive
};

struct BacktestConfig {
    signals::HorizonSet horizons;
    dynamic_weights::RollingConfig rolling;
    int vol_window = 60;
    double vol_target = 0.10;
    double snr_ratio = 2500.0;
    double initial_var = 1.0;
    double sparsity_eps = 0.0;
    double max_turnover = std::numeric_limits<double>::infinity();
    bool costs_enabled = true;
    double mgmt_fee_bps_pa = 50.0;
    double alpha = 0.8;                // Cobb-Douglas exponent
    std::vector<PeriodSpec> periods;   // empty: disjoint 5-year windows
};

struct PeriodMetrics {
    std::string label;
    MetricsRow row;
    double utility = std::numeric_limits<double>::quiet_NaN();
};

struct BacktestReport {
    StrategyVariant variant;
    std::vector<Date> dates;            // out-of-sample dates
    std::vector<double> gross_returns;
    std::vector<double> net_returns;
    std::vector<double> turnover;       // daily sum_i |dposition_i|
    std::vector<PeriodMetrics> period_metrics;
    PeriodMetrics full_sample;
    std::vector<Date> window_starts;    // first date of each test window
};

/// Rolls an 8-year training / 6-month test scheme over the universe. Per test
/// window the variant fixes per-asset horizon weights (training data only),
/// composite-score sleeve returns per asset form the decoding design, the
/// Kalman filter estimates benchmark exposures, and the out-of-sample path
/// holds those exposures one day lagged, net of costs.
BacktestReport run_walk_forward(const std::map<std::string, ReturnSeries>& universe,
                                const std::vector<Instrument>& instruments,
                                const StrategyVariant& variant,
                                const BacktestConfig& config,
                                const ReturnSeries& benchmark);

/// Equal-weight all-horizon composite trend portfolio over the universe;
/// the self-contained replication target for synthetic runs.
ReturnSeries equal_weight_trend_benchmark(const std::map<std::string, ReturnSeries>& universe,
                                          const signals::HorizonSet& horizons, int vol_window,
                                          double vol_target);

struct HorizonSleeves {
    std::map<std::string, Eigen::MatrixXd> sleeves;  // asset -> (horizons x T_live)
    std::vector<Date> live_dates;                    // calendar once all scores are live
};

/// Single-horizon sleeve returns per asset on the live calendar (the input to
/// the rolling horizon-weight estimation).
HorizonSleeves build_horizon_sleeves(const std::map<std::string, ReturnSeries>& universe,
                                     const signals::HorizonSet& horizons, int vol_window,
                                     double vol_target);

}  // namespace trendlab::backtest
