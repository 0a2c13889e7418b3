#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "trendlab/allocator.hpp"
#include "trendlab/backtest.hpp"
#include "trendlab/dynamic_weights.hpp"

namespace py = pybind11;
using namespace trendlab;

namespace {

market_data::ReturnSeries make_return_series(const Eigen::VectorXd& returns,
                                             const std::string& id = "series",
                                             const std::string& start = "2005-01-03") {
    market_data::ReturnSeries out;
    out.instrument_id = id;
    out.dates = business_day_range(Date::parse_iso(start), static_cast<std::size_t>(returns.size()));
    out.returns.assign(returns.data(), returns.data() + returns.size());
    return out;
}

py::dict allocation_dict(const allocator::AllocationResult& result) {
    py::dict out;
    out["weights"] = result.weights;
    out["variance"] = result.variance;
    out["route"] = allocator::route_name(result.route);
    return out;
}

py::dict metrics_dict(const backtest::PeriodMetrics& pm) {
    py::dict out;
    out["label"] = pm.label;
    out["ann_return"] = pm.row.ann_return;
    out["ann_vol"] = pm.row.ann_vol;
    out["sharpe"] = pm.row.sharpe;
    out["max_drawdown"] = pm.row.max_drawdown;
    out["ret_over_maxdd"] = pm.row.ret_over_maxdd;
    out["benchmark_corr"] = pm.row.benchmark_corr;
    out["conditional_sharpe"] = pm.row.conditional_sharpe;
    out["utility"] = pm.utility;
    return out;
}

allocator::ToeplitzModel toeplitz_model(double rho, double delta, double mu, double sigma) {
    return allocator::ToeplitzModel{rho, delta, mu, sigma};
}

std::map<std::string, market_data::ReturnSeries> universe_from_dict(const py::dict& returns) {
    std::map<std::string, market_data::ReturnSeries> universe;
    for (const auto& item : returns) {
        const auto id = item.first.cast<std::string>();
        universe.emplace(id, make_return_series(item.second.cast<Eigen::VectorXd>(), id));
    }
    return universe;
}

backtest::BacktestConfig config_from_kwargs(const std::vector<int>& horizons, int vol_window,
                                            double vol_target, double snr_ratio,
                                            bool costs_enabled, double mgmt_fee_bps,
                                            double alpha) {
    backtest::BacktestConfig config;
    config.horizons.horizons = horizons;
    config.vol_window = vol_window;
    config.vol_target = vol_target;
    config.snr_ratio = snr_ratio;
    config.costs_enabled = costs_enabled;
    config.mgmt_fee_bps_pa = mgmt_fee_bps;
    config.alpha = alpha;
    return config;
}

}  // namespace

PYBIND11_MODULE(trendlab, m) {
    m.doc() = "Multi-horizon trend premia research engine (C++ core)";
    m.attr("__version__") = "0.1.0";

    py::register_exception<Error>(m, "EngineError", PyExc_ValueError);

    // --- market data -------------------------------------------------------
    m.def(
        "generate_synthetic_universe",
        [](int n_assets, int n_days, const std::vector<double>& trend_half_lives,
           double drift_vol, double noise_vol, double drift_mean, bool medium_redundancy,
           std::uint64_t seed) {
            market_data::SyntheticSpec spec;
            spec.n_assets = n_assets;
            spec.n_days = n_days;
            spec.trend_half_lives = trend_half_lives;
            spec.drift_vol = drift_vol;
            spec.noise_vol = noise_vol;
            spec.drift_mean = drift_mean;
            spec.medium_redundancy = medium_redundancy;
            spec.seed = seed;
            py::dict out;
            for (const auto& [id, series] : market_data::generate_synthetic_universe(spec)) {
                py::list dates;
                for (const auto& d : series.dates) dates.append(d.to_iso());
                out[py::str(id)] = py::make_tuple(
                    dates, py::array_t<double>(static_cast<py::ssize_t>(series.prices.size()),
                                               series.prices.data()));
            }
            return out;
        },
        py::arg("n_assets"), py::arg("n_days"), py::arg("trend_half_lives"),
        py::arg("drift_vol") = 0.10, py::arg("noise_vol") = 0.15, py::arg("drift_mean") = 0.0,
        py::arg("medium_redundancy") = false, py::arg("seed") = 0,
        "Synthetic price universe with AR(1) latent drift (or a fast+slow mixture).");

    m.def(
        "to_returns",
        [](const Eigen::VectorXd& prices) {
            Eigen::VectorXd out(prices.size() - 1);
            for (Eigen::Index k = 0; k + 1 < prices.size(); ++k)
                out(k) = prices(k + 1) / prices(k) - 1.0;
            return out;
        },
        py::arg("prices"), "Simple daily returns from a price path.");

    // --- signals ------------------------------------------------------------
    m.def(
        "trend_score",
        [](const Eigen::VectorXd& returns, int horizon, int vol_window) {
            const auto scores =
                signals::trend_score(make_return_series(returns), horizon, vol_window);
            return py::array_t<double>(static_cast<py::ssize_t>(scores.size()), scores.data());
        },
        py::arg("returns"), py::arg("horizon"), py::arg("vol_window") = 60,
        "Vol-scaled compounded-return trend score in [-1, 1]; NaN during warm-up.");

    // --- allocator -----------------------------------------------------------
    auto wrap_cov = [](const Eigen::MatrixXd& m) { return allocator::CovarianceMatrix::from(m); };
    m.def("min_variance_closed_form",
          [wrap_cov](const Eigen::MatrixXd& S) {
              return allocation_dict(allocator::min_variance_closed_form(wrap_cov(S)));
          },
          py::arg("covariance"));
    m.def("min_variance_whitened",
          [wrap_cov](const Eigen::MatrixXd& S) {
              return allocation_dict(allocator::min_variance_whitened(wrap_cov(S)));
          },
          py::arg("covariance"));
    m.def("min_variance_psd",
          [wrap_cov](const Eigen::MatrixXd& S) {
              return allocation_dict(allocator::min_variance_psd(wrap_cov(S)));
          },
          py::arg("covariance"));
    m.def("min_variance_simplex",
          [wrap_cov](const Eigen::MatrixXd& S) {
              return allocation_dict(allocator::min_variance_simplex(wrap_cov(S)));
          },
          py::arg("covariance"));
    m.def(
        "toeplitz_matrix",
        [](double rho, double delta, double mu, double sigma) {
            return allocator::toeplitz_matrix(toeplitz_model(rho, delta, mu, sigma)).m;
        },
        py::arg("rho"), py::arg("delta"), py::arg("mu") = 0.05, py::arg("sigma") = 1.0);
    m.def(
        "toeplitz_determinant",
        [](double rho, double delta, double mu, double sigma) {
            return allocator::toeplitz_determinant(toeplitz_model(rho, delta, mu, sigma));
        },
        py::arg("rho"), py::arg("delta"), py::arg("mu") = 0.05, py::arg("sigma") = 1.0);
    m.def(
        "barbell_profile",
        [](double rho, double delta, double w, double sigma) {
            return allocator::barbell_profile(toeplitz_model(rho, delta, 0.05, sigma), w);
        },
        py::arg("rho"), py::arg("delta"), py::arg("w"), py::arg("sigma") = 1.0,
        "Variance of the symmetric allocation (w, 1-2w, w).");
    m.def(
        "barbell_optimal",
        [](double rho, double delta, double mu, double sigma) {
            return allocation_dict(allocator::barbell_optimal(toeplitz_model(rho, delta, mu, sigma)));
        },
        py::arg("rho"), py::arg("delta"), py::arg("mu") = 0.05, py::arg("sigma") = 1.0);

    // --- dynamic weights ------------------------------------------------------
    m.def(
        "stability_diagnostics",
        [](const std::vector<double>& series) {
            const auto d = dynamic_weights::stability_diagnostics(series);
            py::dict out;
            out["std_dev"] = d.std_dev;
            out["autocorr1"] = d.autocorr1;
            out["max_step"] = d.max_step;
            return out;
        },
        py::arg("series"));
    m.def("ema_smooth", &dynamic_weights::ema_smooth, py::arg("series"), py::arg("alpha") = 0.3);
    m.def("percentile", &dynamic_weights::percentile, py::arg("values"), py::arg("p"),
          "Linear-interpolation percentile.");

    // --- decoder ---------------------------------------------------------------
    m.def(
        "kalman_filter",
        [](const Eigen::VectorXd& returns, const Eigen::MatrixXd& design, double obs_noise_var,
           double state_noise_var, double initial_var) {
            decoder::StateSpaceParams params;
            params.obs_noise_var = obs_noise_var;
            params.state_noise_vars =
                Eigen::VectorXd::Constant(design.cols(), state_noise_var);
            params.initial_mean = Eigen::VectorXd::Zero(design.cols());
            params.initial_var = initial_var;
            std::vector<std::string> assets;
            for (Eigen::Index i = 0; i < design.cols(); ++i)
                assets.push_back("a" + std::to_string(i));
            const auto path =
                decoder::kalman_filter(make_return_series(returns), design, assets, params);
            py::dict out;
            out["means"] = path.means;
            out["variances"] = path.variances;
            return out;
        },
        py::arg("returns"), py::arg("design"), py::arg("obs_noise_var"),
        py::arg("state_noise_var") = 0.0, py::arg("initial_var") = 1.0,
        "Random-walk-coefficient regression filter: r_t = x_t' w_t + eps.");

    // --- backtest ----------------------------------------------------------------
    m.def(
        "metrics",
        [](const Eigen::VectorXd& strategy, const Eigen::VectorXd& benchmark) {
            backtest::PeriodMetrics pm;
            pm.label = "full_sample";
            pm.row = backtest::metrics(make_return_series(strategy),
                                       make_return_series(benchmark));
            return metrics_dict(pm);
        },
        py::arg("strategy"), py::arg("benchmark"));
    m.def("cobb_douglas_utility", &backtest::cobb_douglas_utility, py::arg("ret_over_maxdd"),
          py::arg("corr"), py::arg("alpha") = 0.8);
    m.def(
        "conditional_sharpe",
        [](const Eigen::VectorXd& strategy_monthly, const Eigen::VectorXd& benchmark_monthly,
           double threshold) {
            return backtest::conditional_sharpe(make_return_series(strategy_monthly),
                                                make_return_series(benchmark_monthly), threshold);
        },
        py::arg("strategy_monthly"), py::arg("benchmark_monthly"), py::arg("threshold") = -0.03);
    m.def(
        "ablation_zscores",
        [](const std::vector<std::string>& strategies, const std::vector<std::string>& periods,
           const Eigen::MatrixXd& sharpe, const Eigen::MatrixXd& ret_over_maxdd,
           const Eigen::MatrixXd& corr) {
            backtest::AblationInput input{strategies, periods, sharpe, ret_over_maxdd, corr};
            const auto ranking = backtest::ablation_zscores(input);
            py::list rows;
            for (const auto& row : ranking.rows) {
                py::dict d;
                d["strategy"] = row.strategy;
                d["z_sharpe"] = row.z_sharpe;
                d["z_ret_over_maxdd"] = row.z_ret_over_maxdd;
                d["z_corr"] = row.z_corr;
                d["z_overall"] = row.z_overall;
                rows.append(d);
            }
            return rows;
        },
        py::arg("strategies"), py::arg("periods"), py::arg("sharpe"), py::arg("ret_over_maxdd"),
        py::arg("corr"), "Leave-one-out ranking by overall average Z-score.");
    m.def(
        "horizon_cluster",
        [](const std::vector<std::string>& labels, const Eigen::MatrixXd& sleeves) {
            std::vector<std::pair<std::string, market_data::ReturnSeries>> input;
            for (std::size_t k = 0; k < labels.size(); ++k)
                input.emplace_back(labels[k],
                                   make_return_series(sleeves.col(static_cast<Eigen::Index>(k)),
                                                      labels[k]));
            const auto tree = backtest::horizon_cluster(input);
            py::list merges;
            for (const auto& step : tree.merges) {
                py::dict d;
                d["left"] = step.left;
                d["right"] = step.right;
                d["distance"] = step.distance;
                d["size"] = step.size;
                merges.append(d);
            }
            return merges;
        },
        py::arg("labels"), py::arg("sleeves"),
        "Average-linkage clustering on 1-correlation distances; columns are sleeves.");

    m.def(
        "equal_weight_trend_benchmark",
        [](const py::dict& returns, const std::vector<int>& horizons, int vol_window,
           double vol_target) {
            const auto universe = universe_from_dict(returns);
            signals::HorizonSet hs;
            hs.horizons = horizons;
            const auto bench =
                backtest::equal_weight_trend_benchmark(universe, hs, vol_window, vol_target);
            return py::array_t<double>(static_cast<py::ssize_t>(bench.returns.size()),
                                       bench.returns.data());
        },
        py::arg("returns"), py::arg("horizons") = std::vector<int>{20, 60, 125, 250, 500},
        py::arg("vol_window") = 60, py::arg("vol_target") = 0.10);

    m.def(
        "walk_forward",
        [](const py::dict& returns, const std::string& variant, const Eigen::VectorXd& benchmark,
           const std::vector<int>& horizons, int vol_window, double vol_target, double snr_ratio,
           bool costs_enabled, double mgmt_fee_bps, double alpha) {
            const auto universe = universe_from_dict(returns);
            std::vector<market_data::Instrument> instruments;
            for (const auto& [id, series] : universe) {
                market_data::Instrument inst;
                inst.id = id;
                inst.asset_class = market_data::AssetClass::Equity;
                std::tie(inst.tx_cost_bps, inst.roll_cost_bps) =
                    market_data::default_costs_bps(inst.asset_class);
                instruments.push_back(inst);
            }
            const auto config = config_from_kwargs(horizons, vol_window, vol_target, snr_ratio,
                                                   costs_enabled, mgmt_fee_bps, alpha);
            const auto report = backtest::run_walk_forward(
                universe, instruments, backtest::StrategyVariant::parse(variant), config,
                make_return_series(benchmark, "benchmark"));
            py::dict out;
            out["variant"] = report.variant.name();
            py::list dates;
            for (const auto& d : report.dates) dates.append(d.to_iso());
            out["dates"] = dates;
            out["gross_returns"] = py::array_t<double>(
                static_cast<py::ssize_t>(report.gross_returns.size()), report.gross_returns.data());
            out["net_returns"] = py::array_t<double>(
                static_cast<py::ssize_t>(report.net_returns.size()), report.net_returns.data());
            out["turnover"] = py::array_t<double>(static_cast<py::ssize_t>(report.turnover.size()),
                                                  report.turnover.data());
            out["full_sample"] = metrics_dict(report.full_sample);
            py::list periods;
            for (const auto& pm : report.period_metrics) periods.append(metrics_dict(pm));
            out["periods"] = periods;
            return out;
        },
        py::arg("returns"), py::arg("variant"), py::arg("benchmark"),
        py::arg("horizons") = std::vector<int>{20, 60, 125, 250, 500}, py::arg("vol_window") = 60,
        py::arg("vol_target") = 0.10, py::arg("snr_ratio") = 2500.0,
        py::arg("costs_enabled") = true, py::arg("mgmt_fee_bps") = 50.0, py::arg("alpha") = 0.8,
        "Walk-forward replication backtest; returns the per-period and full-sample metrics.");

    m.def(
        "dynamic_horizon_weights",
        [](const py::dict& returns, const std::vector<int>& horizons, int vol_window,
           double vol_target, bool persistence_rule) {
            const auto universe = universe_from_dict(returns);
            signals::HorizonSet hs;
            hs.horizons = horizons;
            const auto sleeves =
                backtest::build_horizon_sleeves(universe, hs, vol_window, vol_target);
            dynamic_weights::RollingConfig rolling;
            const auto result = dynamic_weights::dynamic_horizon_weights(
                sleeves.sleeves, sleeves.live_dates, hs, rolling, persistence_rule);
            py::list windows;
            for (const auto& window : result.windows) {
                py::dict w;
                w["window_start"] = window.window_start.to_iso();
                py::dict weights, stable;
                for (const auto& [asset, hw] : window.weights) {
                    weights[py::str(asset)] = hw.weights;
                    stable[py::str(asset)] = window.asset_stable.at(asset);
                }
                w["weights"] = weights;
                w["stable"] = stable;
                windows.append(w);
            }
            return windows;
        },
        py::arg("returns"), py::arg("horizons") = std::vector<int>{20, 60, 125, 250, 500},
        py::arg("vol_window") = 60, py::arg("vol_target") = 0.10,
        py::arg("persistence_rule") = true,
        "Rolling horizon-weight estimation with the persistence rule.");
}
