#include "trendlab/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "trendlab/errors.hpp"

namespace trendlab::backtest {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    const double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean_of(a), mb = mean_of(b);
    double cov = 0.0, va = 0.0, vb = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        cov += (a[k] - ma) * (b[k] - mb);
        va += (a[k] - ma) * (a[k] - ma);
        vb += (b[k] - mb) * (b[k] - mb);
    }
    if (!(va > 0.0) || !(vb > 0.0))
        throw Error(ErrorCode::ZeroVol, "correlation of a constant series");
    return std::clamp(cov / std::sqrt(va * vb), -1.0, 1.0);
}

}  // namespace

std::string StrategyVariant::name() const {
    switch (kind) {
        case Kind::PureTrend: return "pure_trend";
        case Kind::OptimizedTrend: return "optimized_trend";
        case Kind::DynamicTrend: return "dynamic_trend";
        case Kind::LeaveOneOut: return "no_" + std::to_string(horizon);
        case Kind::SingleHorizon: return "single_" + std::to_string(horizon);
    }
    return "pure_trend";
}

StrategyVariant StrategyVariant::parse(const std::string& name) {
    if (name == "pure_trend" || name == "all_horizons") return pure_trend();
    if (name == "optimized_trend") return optimized_trend();
    if (name == "dynamic_trend") return dynamic_trend();
    auto tail_int = [&](const std::string& prefix) {
        try {
            return std::stoi(name.substr(prefix.size()));
        } catch (const std::exception&) {
            throw Error(ErrorCode::UnknownVariant, name);
        }
    };
    if (name.rfind("no_", 0) == 0) return leave_one_out(tail_int("no_"));
    if (name.rfind("single_", 0) == 0) return single_horizon(tail_int("single_"));
    throw Error(ErrorCode::UnknownVariant, name);
}

void StrategyVariant::validate(const signals::HorizonSet& horizons) const {
    if (kind == Kind::LeaveOneOut || kind == Kind::SingleHorizon) {
        if (horizons.index_of(horizon) < 0)
            throw Error(ErrorCode::UnknownVariant,
                        name() + ": horizon not in the configured set");
        if (kind == Kind::LeaveOneOut && horizons.size() < 2)
            throw Error(ErrorCode::UnknownVariant, "cannot leave out the only horizon");
    }
}

MetricsRow metrics(const ReturnSeries& strategy, const ReturnSeries& benchmark) {
    if (strategy.size() < 40)
        throw Error(ErrorCode::SeriesTooShort, "metrics need at least 40 observations");
    if (strategy.dates != benchmark.dates)
        throw Error(ErrorCode::MisalignedDates, "strategy vs benchmark dates");

    MetricsRow row;
    row.ann_return = 252.0 * mean_of(strategy.returns);
    const double sd = sample_std(strategy.returns);
    if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVol, "strategy volatility is zero");
    row.ann_vol = std::sqrt(252.0) * sd;
    row.sharpe = row.ann_return / row.ann_vol;

    double wealth = 1.0, peak = 1.0, maxdd = 0.0;
    for (double r : strategy.returns) {
        wealth *= 1.0 + r;
        peak = std::max(peak, wealth);
        maxdd = std::max(maxdd, 1.0 - wealth / peak);
    }
    if (!(maxdd > 0.0))
        throw Error(ErrorCode::ZeroDrawdown, "wealth path never declines");
    row.max_drawdown = maxdd;
    row.ret_over_maxdd = row.ann_return / maxdd;
    row.benchmark_corr = pearson(strategy.returns, benchmark.returns);
    return row;
}

ReturnSeries to_monthly(const ReturnSeries& daily) {
    ReturnSeries out;
    out.instrument_id = daily.instrument_id;
    std::size_t k = 0;
    while (k < daily.size()) {
        const int y = daily.dates[k].year();
        const unsigned m = daily.dates[k].month();
        double growth = 1.0;
        std::size_t last = k;
        while (k < daily.size() && daily.dates[k].year() == y && daily.dates[k].month() == m) {
            growth *= 1.0 + daily.returns[k];
            last = k;
            ++k;
        }
        out.dates.push_back(daily.dates[last]);
        out.returns.push_back(growth - 1.0);
    }
    return out;
}

double conditional_sharpe(const ReturnSeries& strategy_monthly,
                          const ReturnSeries& equity_benchmark_monthly, double threshold) {
    if (strategy_monthly.dates != equity_benchmark_monthly.dates)
        throw Error(ErrorCode::MisalignedDates, "strategy vs benchmark months");
    if (strategy_monthly.size() < 2)
        throw Error(ErrorCode::SeriesTooShort, "need at least 2 months");
    const double sd = sample_std(strategy_monthly.returns);
    if (!(sd > 0.0)) throw Error(ErrorCode::ZeroVol, "monthly volatility is zero");

    double crisis_sum = 0.0;
    std::size_t crisis_count = 0;
    for (std::size_t k = 0; k < strategy_monthly.size(); ++k) {
        if (equity_benchmark_monthly.returns[k] < threshold) {
            crisis_sum += strategy_monthly.returns[k];
            ++crisis_count;
        }
    }
    if (crisis_count == 0)
        throw Error(ErrorCode::NoCrisisMonths, "no month below the crisis threshold");
    return crisis_sum / static_cast<double>(crisis_count) / sd;
}

double cobb_douglas_utility(double ret_over_maxdd, double corr, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1]");
    if (!(ret_over_maxdd > 0.0) || !(corr > 0.0))
        throw Error(ErrorCode::NonPositiveInput, "utility inputs must be positive");
    return std::pow(ret_over_maxdd, alpha) * std::pow(corr, 1.0 - alpha);
}

ReturnSeries apply_costs(const ReturnSeries& gross, const Eigen::MatrixXd& turnover,
                         const Eigen::MatrixXd& positions,
                         const std::vector<Instrument>& instruments, double mgmt_fee_bps_pa) {
    const Eigen::Index T = static_cast<Eigen::Index>(gross.size());
    const Eigen::Index N = static_cast<Eigen::Index>(instruments.size());
    if (turnover.rows() != T || positions.rows() != T || turnover.cols() != N ||
        positions.cols() != N)
        throw Error(ErrorCode::MisalignedDates, "turnover/position panels do not match");
    if (mgmt_fee_bps_pa < 0.0)
        throw Error(ErrorCode::NegativeCost, "management fee must be >= 0");
    for (const Instrument& inst : instruments) inst.validate();

    const double fee_daily = mgmt_fee_bps_pa / 1e4 / 252.0;
    ReturnSeries net = gross;
    for (Eigen::Index t = 0; t < T; ++t) {
        double drag = fee_daily;
        for (Eigen::Index i = 0; i < N; ++i) {
            drag += turnover(t, i) * instruments[static_cast<std::size_t>(i)].tx_cost_bps / 1e4;
            drag += std::abs(positions(t, i)) *
                    instruments[static_cast<std::size_t>(i)].roll_cost_bps / 1e4 / 252.0;
        }
        net.returns[static_cast<std::size_t>(t)] -= drag;
    }
    return net;
}

AblationRanking ablation_zscores(const AblationInput& input) {
    const Eigen::Index P = static_cast<Eigen::Index>(input.periods.size());
    const Eigen::Index S = static_cast<Eigen::Index>(input.strategies.size());
    if (S < 2) throw Error(ErrorCode::InsufficientData, "need at least 2 strategies");
    if (P < 1) throw Error(ErrorCode::InsufficientData, "need at least 1 period");
    const Eigen::MatrixXd* tables[3] = {&input.sharpe, &input.ret_over_maxdd, &input.corr};
    for (const auto* t : tables)
        if (t->rows() != P || t->cols() != S)
            throw Error(ErrorCode::MisalignedDates, "metric table shape mismatch");

    AblationRanking out;
    Eigen::MatrixXd z_avg = Eigen::MatrixXd::Zero(3, S);
    for (int m = 0; m < 3; ++m) {
        for (Eigen::Index p = 0; p < P; ++p) {
            const Eigen::RowVectorXd row = tables[m]->row(p);
            const double mean = row.mean();
            const double var = (row.array() - mean).square().sum() / static_cast<double>(S);
            const double sd = std::sqrt(var);  // population std across strategies
            if (sd <= 1e-15 * std::max(1.0, std::abs(mean))) {
                out.had_degenerate_column = true;  // cell contributes 0
                continue;
            }
            z_avg.row(m) += (row.array() - mean).matrix() / sd;
        }
        z_avg.row(m) /= static_cast<double>(P);
    }

    for (Eigen::Index s = 0; s < S; ++s) {
        AblationRow row;
        row.strategy = input.strategies[static_cast<std::size_t>(s)];
        row.z_sharpe = z_avg(0, s);
        row.z_ret_over_maxdd = z_avg(1, s);
        row.z_corr = z_avg(2, s);
        row.z_overall = (row.z_sharpe + row.z_ret_over_maxdd + row.z_corr) / 3.0;
        out.rows.push_back(std::move(row));
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const AblationRow& a, const AblationRow& b) {
                         return a.z_overall > b.z_overall;
                     });
    return out;
}

ClusterTree horizon_cluster(const std::vector<std::pair<std::string, ReturnSeries>>& sleeves) {
    const int n = static_cast<int>(sleeves.size());
    if (n < 2) throw Error(ErrorCode::InsufficientData, "need at least 2 sleeves");

    // pairwise 1 - correlation on the overlapping dates
    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const ReturnSeries& a = sleeves[static_cast<std::size_t>(i)].second;
            const ReturnSeries& b = sleeves[static_cast<std::size_t>(j)].second;
            std::vector<double> xa, xb;
            std::size_t ka = 0, kb = 0;
            while (ka < a.size() && kb < b.size()) {
                if (a.dates[ka] < b.dates[kb]) ++ka;
                else if (b.dates[kb] < a.dates[ka]) ++kb;
                else {
                    xa.push_back(a.returns[ka++]);
                    xb.push_back(b.returns[kb++]);
                }
            }
            if (xa.size() < 40)
                throw Error(ErrorCode::InsufficientOverlap,
                            sleeves[static_cast<std::size_t>(i)].first + " vs " +
                                sleeves[static_cast<std::size_t>(j)].first);
            dist(i, j) = dist(j, i) = 1.0 - pearson(xa, xb);
        }

    ClusterTree tree;
    for (const auto& [label, series] : sleeves) tree.leaves.push_back(label);

    struct Cluster {
        int id;
        std::vector<int> members;  // leaf indices
    };
    std::vector<Cluster> active;
    for (int i = 0; i < n; ++i) active.push_back({i, {i}});

    auto linkage = [&](const Cluster& a, const Cluster& b) {
        double sum = 0.0;
        for (int x : a.members)
            for (int y : b.members) sum += dist(x, y);
        return sum / static_cast<double>(a.members.size() * b.members.size());
    };

    int next_id = n;
    while (active.size() > 1) {
        std::size_t bi = 0, bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < active.size(); ++i)
            for (std::size_t j = i + 1; j < active.size(); ++j) {
                const double d = linkage(active[i], active[j]);
                if (d < best - 1e-15) {
                    best = d;
                    bi = i;
                    bj = j;
                }
            }
        MergeStep step;
        step.left = std::min(active[bi].id, active[bj].id);
        step.right = std::max(active[bi].id, active[bj].id);
        step.distance = best;
        step.size = static_cast<int>(active[bi].members.size() + active[bj].members.size());
        tree.merges.push_back(step);

        Cluster merged{next_id++, active[bi].members};
        merged.members.insert(merged.members.end(), active[bj].members.begin(),
                              active[bj].members.end());
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bi));
        active.push_back(std::move(merged));
    }
    return tree;
}

// ---------------------------------------------------------------------------
// Walk-forward
// ---------------------------------------------------------------------------

namespace {

using dynamic_weights::DynamicWeightsResult;
using signals::HorizonWeights;

std::map<std::string, HorizonWeights> static_weights(const StrategyVariant& variant,
                                                     const std::vector<std::string>& assets,
                                                     const signals::HorizonSet& horizons) {
    const std::size_t H = horizons.size();
    std::map<std::string, HorizonWeights> out;
    for (const std::string& asset : assets) {
        HorizonWeights hw;
        hw.asset_id = asset;
        hw.weights.assign(H, 0.0);
        switch (variant.kind) {
            case StrategyVariant::Kind::PureTrend:
                hw.weights.assign(H, 1.0 / static_cast<double>(H));
                break;
            case StrategyVariant::Kind::LeaveOneOut: {
                const int skip = horizons.index_of(variant.horizon);
                for (std::size_t h = 0; h < H; ++h)
                    if (static_cast<int>(h) != skip)
                        hw.weights[h] = 1.0 / static_cast<double>(H - 1);
                break;
            }
            case StrategyVariant::Kind::SingleHorizon:
                hw.weights[static_cast<std::size_t>(horizons.index_of(variant.horizon))] = 1.0;
                break;
            default:
                throw Error(ErrorCode::UnknownVariant, "not a static variant");
        }
        hw.provenance = signals::Provenance::Equal;
        out.emplace(asset, std::move(hw));
    }
    return out;
}

ReturnSeries slice(const ReturnSeries& series, std::size_t begin, std::size_t end) {
    ReturnSeries out;
    out.instrument_id = series.instrument_id;
    out.dates.assign(series.dates.begin() + static_cast<std::ptrdiff_t>(begin),
                     series.dates.begin() + static_cast<std::ptrdiff_t>(end));
    out.returns.assign(series.returns.begin() + static_cast<std::ptrdiff_t>(begin),
                       series.returns.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

std::string default_period_label(const std::vector<Date>& dates, std::size_t begin,
                                 std::size_t end) {
    return std::to_string(dates[begin].year()) + "-" + std::to_string(dates[end - 1].year());
}

}  // namespace

ReturnSeries equal_weight_trend_benchmark(const std::map<std::string, ReturnSeries>& universe,
                                          const signals::HorizonSet& horizons, int vol_window,
                                          double vol_target) {
    const auto panel = signals::build_score_panel(universe, horizons, vol_window);
    std::map<std::string, HorizonWeights> weights;
    for (const std::string& asset : panel.assets)
        weights.emplace(asset, HorizonWeights::equal(asset, horizons.size()));
    const Eigen::MatrixXd composite = signals::aggregate_scores(panel, weights);
    ReturnSeries bench = signals::sleeve_returns(composite, universe, vol_target, vol_window);
    bench.instrument_id = "benchmark";
    return bench;
}

HorizonSleeves build_horizon_sleeves(const std::map<std::string, ReturnSeries>& universe,
                                     const signals::HorizonSet& horizons, int vol_window,
                                     double vol_target) {
    const auto panel = signals::build_score_panel(universe, horizons, vol_window);
    const std::size_t H = horizons.size();
    const std::size_t t0 = static_cast<std::size_t>(horizons.horizons.back() + vol_window) - 1;
    if (panel.dates.size() <= t0 + 1)
        throw Error(ErrorCode::InsufficientHistory, "history shorter than the signal warm-up");
    const std::size_t T = panel.dates.size() - t0;

    HorizonSleeves out;
    out.live_dates.assign(panel.dates.begin() + static_cast<std::ptrdiff_t>(t0),
                          panel.dates.end());
    std::size_t a = 0;
    for (const auto& [id, r] : universe) {
        const auto vol = signals::trailing_vol(r.returns, vol_window);
        Eigen::MatrixXd m(H, T);
        for (std::size_t h = 0; h < H; ++h)
            for (std::size_t t = 0; t < T; ++t) {
                const std::size_t ft = t0 + t;
                double ret = 0.0;
                const double s = panel.score(ft - 1, a, h);
                const double sigma = vol[ft - 1];
                if (!std::isnan(s) && !std::isnan(sigma) && sigma != 0.0)
                    ret = s * vol_target / (sigma * std::sqrt(252.0)) * r.returns[ft];
                m(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(t)) = ret;
            }
        out.sleeves.emplace(id, std::move(m));
        ++a;
    }
    return out;
}

BacktestReport run_walk_forward(const std::map<std::string, ReturnSeries>& universe,
                                const std::vector<Instrument>& instruments,
                                const StrategyVariant& variant, const BacktestConfig& config,
                                const ReturnSeries& benchmark) {
    config.horizons.validate();
    config.rolling.validate();
    variant.validate(config.horizons);
    if (universe.empty()) throw Error(ErrorCode::EmptyUniverse, "no return series");

    const auto panel = signals::build_score_panel(universe, config.horizons, config.vol_window);
    const std::vector<std::string>& assets = panel.assets;
    const std::size_t A = assets.size();
    if (benchmark.dates != panel.dates)
        throw Error(ErrorCode::MisalignedDates, "benchmark is not on the universe calendar");

    std::vector<const Instrument*> inst_by_asset;
    for (const std::string& asset : assets) {
        auto it = std::find_if(instruments.begin(), instruments.end(),
                               [&](const Instrument& inst) { return inst.id == asset; });
        if (it == instruments.end())
            throw Error(ErrorCode::ConfigError, "no instrument definition for asset " + asset);
        inst_by_asset.push_back(&*it);
    }

    // Evaluation calendar starts once every horizon score is live.
    const std::size_t t0 =
        static_cast<std::size_t>(config.horizons.horizons.back() + config.vol_window) - 1;
    const std::size_t T_full = panel.dates.size();
    if (T_full <= t0 + static_cast<std::size_t>(config.rolling.train_days() +
                                                config.rolling.test_days()))
        throw Error(ErrorCode::InsufficientHistory,
                    "history does not cover signal warm-up plus one train+test cycle");
    const std::size_t T = T_full - t0;  // live range length
    std::vector<Date> live_dates(panel.dates.begin() + static_cast<std::ptrdiff_t>(t0),
                                 panel.dates.end());

    // Per-asset trailing vols, reused by every sleeve construction.
    std::vector<std::vector<double>> vols;
    std::vector<const ReturnSeries*> series;
    for (const auto& [id, r] : universe) {
        series.push_back(&r);
        vols.push_back(signals::trailing_vol(r.returns, config.vol_window));
    }

    // Dynamic/optimized variants need the per-horizon single sleeves.
    const bool needs_rolling_weights = variant.kind == StrategyVariant::Kind::OptimizedTrend ||
                                       variant.kind == StrategyVariant::Kind::DynamicTrend;
    DynamicWeightsResult rolling_weights;
    if (needs_rolling_weights) {
        const auto sleeves =
            build_horizon_sleeves(universe, config.horizons, config.vol_window, config.vol_target);
        rolling_weights = dynamic_weights::dynamic_horizon_weights(
            sleeves.sleeves, sleeves.live_dates, config.horizons, config.rolling,
            variant.kind == StrategyVariant::Kind::DynamicTrend);
    }

    const std::size_t train = static_cast<std::size_t>(config.rolling.train_days());
    const std::size_t test = static_cast<std::size_t>(config.rolling.test_days());
    const std::size_t roll = static_cast<std::size_t>(config.rolling.roll_step_days());

    BacktestReport report;
    report.variant = variant;
    std::vector<Eigen::RowVectorXd> oos_positions;

    std::size_t window_index = 0;
    for (std::size_t start = 0; start + train + test <= T; start += roll, ++window_index) {
        const std::size_t test_begin = start + train;
        const std::size_t test_end = test_begin + test;

        std::map<std::string, HorizonWeights> weights;
        if (needs_rolling_weights)
            weights = rolling_weights.windows.at(window_index).weights;
        else
            weights = static_weights(variant, assets, config.horizons);

        // Composite scores under this window's weights; design = per-asset
        // composite sleeve returns on the live calendar.
        const Eigen::MatrixXd composite = signals::aggregate_scores(panel, weights);
        Eigen::MatrixXd design(test_end - start, A);
        Eigen::MatrixXd sleeve_pos(test_end - start, A);
        for (std::size_t t = start; t < test_end; ++t) {
            const std::size_t ft = t0 + t;
            for (std::size_t a = 0; a < A; ++a) {
                const double s = composite(static_cast<Eigen::Index>(ft - 1),
                                           static_cast<Eigen::Index>(a));
                const double sigma = vols[a][ft - 1];
                double pos = 0.0;
                if (!std::isnan(s) && !std::isnan(sigma) && sigma != 0.0)
                    pos = s * config.vol_target / (sigma * std::sqrt(252.0));
                sleeve_pos(static_cast<Eigen::Index>(t - start), static_cast<Eigen::Index>(a)) = pos;
                design(static_cast<Eigen::Index>(t - start), static_cast<Eigen::Index>(a)) =
                    pos * series[a]->returns[ft];
            }
        }

        const ReturnSeries bench_window = slice(benchmark, t0 + start, t0 + test_end);
        const ReturnSeries bench_train = slice(benchmark, t0 + start, t0 + test_begin);
        auto params = decoder::fit_noise_params(bench_train, design.topRows(static_cast<Eigen::Index>(train)),
                                                config.snr_ratio, config.initial_var);
        auto exposures = decoder::kalman_filter(bench_window, design, assets, params);
        exposures = decoder::apply_exposure_controls(exposures, config.sparsity_eps,
                                                     config.max_turnover);

        report.window_starts.push_back(live_dates[test_begin]);
        for (std::size_t t = test_begin; t < test_end; ++t) {
            const Eigen::Index local = static_cast<Eigen::Index>(t - start);
            const Eigen::RowVectorXd w_prev = exposures.means.row(local - 1);
            report.dates.push_back(live_dates[t]);
            report.gross_returns.push_back(w_prev.dot(design.row(local)));
            oos_positions.push_back(w_prev.cwiseProduct(sleeve_pos.row(local)));
        }
    }
    if (report.dates.empty())
        throw Error(ErrorCode::InsufficientHistory, "no test window fit in the sample");

    const std::size_t n_oos = report.dates.size();
    Eigen::MatrixXd positions(n_oos, A), turnover(n_oos, A);
    for (std::size_t t = 0; t < n_oos; ++t) {
        positions.row(static_cast<Eigen::Index>(t)) = oos_positions[t];
        const Eigen::RowVectorXd prev = t == 0 ? Eigen::RowVectorXd::Zero(A).eval()
                                               : oos_positions[t - 1];
        turnover.row(static_cast<Eigen::Index>(t)) =
            (oos_positions[t] - prev).cwiseAbs();
    }
    report.turnover.resize(n_oos);
    for (std::size_t t = 0; t < n_oos; ++t)
        report.turnover[t] = turnover.row(static_cast<Eigen::Index>(t)).sum();

    ReturnSeries gross;
    gross.instrument_id = variant.name();
    gross.dates = report.dates;
    gross.returns = report.gross_returns;

    std::vector<Instrument> ordered_instruments;
    for (const Instrument* inst : inst_by_asset) ordered_instruments.push_back(*inst);
    ReturnSeries net = config.costs_enabled
                           ? apply_costs(gross, turnover, positions, ordered_instruments,
                                         config.mgmt_fee_bps_pa)
                           : gross;
    report.net_returns = net.returns;

    // Benchmark restricted to the out-of-sample dates.
    ReturnSeries bench_oos;
    bench_oos.instrument_id = benchmark.instrument_id;
    {
        std::size_t j = 0;
        for (std::size_t k = 0; k < benchmark.size(); ++k) {
            if (j < report.dates.size() && benchmark.dates[k] == report.dates[j]) {
                bench_oos.dates.push_back(benchmark.dates[k]);
                bench_oos.returns.push_back(benchmark.returns[k]);
                ++j;
            }
        }
    }

    auto evaluate = [&](const std::string& label, std::size_t begin, std::size_t end) {
        PeriodMetrics pm;
        pm.label = label;
        try {
            const ReturnSeries strat_p = slice(net, begin, end);
            const ReturnSeries bench_p = slice(bench_oos, begin, end);
            pm.row = metrics(strat_p, bench_p);
            try {
                pm.row.conditional_sharpe =
                    conditional_sharpe(to_monthly(strat_p), to_monthly(bench_p));
            } catch (const Error&) {
                pm.row.conditional_sharpe = kNaN;
            }
            try {
                pm.utility = cobb_douglas_utility(pm.row.ret_over_maxdd, pm.row.benchmark_corr,
                                                  config.alpha);
            } catch (const Error&) {
                pm.utility = kNaN;
            }
        } catch (const Error&) {
            pm.row = MetricsRow{kNaN, kNaN, kNaN, kNaN, kNaN, kNaN, kNaN};
            pm.utility = kNaN;
        }
        return pm;
    };

    if (config.periods.empty()) {
        const std::size_t chunk = 5 * 252;  // disjoint five-year windows
        for (std::size_t begin = 0; begin < n_oos; begin += chunk) {
            const std::size_t end = std::min(begin + chunk, n_oos);
            if (end - begin < 40) break;
            report.period_metrics.push_back(
                evaluate(default_period_label(report.dates, begin, end), begin, end));
        }
    } else {
        for (const PeriodSpec& spec : config.periods) {
            const auto lo = std::lower_bound(report.dates.begin(), report.dates.end(), spec.start);
            const auto hi = std::lower_bound(report.dates.begin(), report.dates.end(), spec.end);
            const std::size_t begin = static_cast<std::size_t>(lo - report.dates.begin());
            const std::size_t end = static_cast<std::size_t>(hi - report.dates.begin());
            if (end > begin)
                report.period_metrics.push_back(evaluate(spec.label, begin, end));
        }
    }
    report.full_sample = evaluate("full_sample", 0, n_oos);
    return report;
}

}  // namespace trendlab::backtest
