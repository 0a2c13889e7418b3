#include "trendlab/dynamic_weights.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "trendlab/allocator.hpp"
#include "trendlab/errors.hpp"

namespace trendlab::dynamic_weights {

void RollingConfig::validate() const {
    auto pct_ok = [](double p) { return p > 0.0 && p < 100.0; };
    if (!pct_ok(std_percentile) || !pct_ok(autocorr_percentile) || !pct_ok(step_percentile))
        throw Error(ErrorCode::ParameterOutOfRange, "percentiles must lie in (0, 100)");
    if (min_criteria < 1 || min_criteria > 3)
        throw Error(ErrorCode::ParameterOutOfRange, "min_criteria must lie in [1, 3]");
    if (min_stable_series < 1)
        throw Error(ErrorCode::ParameterOutOfRange, "min_stable_series must be >= 1");
    if (!(ema_alpha > 0.0 && ema_alpha <= 1.0))
        throw Error(ErrorCode::AlphaOutOfRange, "ema_alpha must lie in (0, 1]");
    if (shrinkage < 0.0 || shrinkage > 1.0)
        throw Error(ErrorCode::ParameterOutOfRange, "shrinkage must lie in [0, 1]");
    if (train_years < 1 || subwindow_months < 1 || test_months < 1 || roll_step_months < 1)
        throw Error(ErrorCode::ParameterOutOfRange, "window lengths must be positive");
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) throw Error(ErrorCode::EmptySeries, "percentile of empty sample");
    if (p < 0.0 || p > 100.0)
        throw Error(ErrorCode::ParameterOutOfRange, "percentile must lie in [0, 100]");
    std::sort(values.begin(), values.end());
    const double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

StabilityDiagnostics stability_diagnostics(const std::vector<double>& series) {
    const std::size_t n = series.size();
    if (n < 3) throw Error(ErrorCode::SeriesTooShort, "need at least 3 weights");

    StabilityDiagnostics d;
    const double mean = std::accumulate(series.begin(), series.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double v : series) ss += (v - mean) * (v - mean);
    d.std_dev = std::sqrt(ss / static_cast<double>(n - 1));

    for (std::size_t t = 1; t < n; ++t)
        d.max_step = std::max(d.max_step, std::abs(series[t] - series[t - 1]));

    // lag-1 Pearson: correlation of (w_1..w_{n-1}) with (w_2..w_n);
    // a constant subseries makes it 0/0, resolved to 0 by convention
    const std::size_t m = n - 1;
    const bool head_const = std::equal(series.begin() + 1, series.end() - 1, series.begin());
    const bool tail_const = std::equal(series.begin() + 2, series.end(), series.begin() + 1);
    if (head_const || tail_const) {
        d.autocorr1 = 0.0;
        return d;
    }
    double mean_a = 0.0, mean_b = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        mean_a += series[t];
        mean_b += series[t + 1];
    }
    mean_a /= static_cast<double>(m);
    mean_b /= static_cast<double>(m);
    double cov = 0.0, var_a = 0.0, var_b = 0.0;
    for (std::size_t t = 0; t < m; ++t) {
        const double da = series[t] - mean_a;
        const double db = series[t + 1] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    d.autocorr1 = (var_a > 0.0 && var_b > 0.0) ? cov / std::sqrt(var_a * var_b) : 0.0;
    d.autocorr1 = std::clamp(d.autocorr1, -1.0, 1.0);
    return d;
}

double ema_smooth(const std::vector<double>& series, double alpha) {
    if (series.empty()) throw Error(ErrorCode::EmptySeries, "ema of empty series");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw Error(ErrorCode::AlphaOutOfRange, "alpha must lie in (0, 1]");
    double ema = series.front();
    for (std::size_t t = 1; t < series.size(); ++t)
        ema = alpha * series[t] + (1.0 - alpha) * ema;
    return ema;
}

SubwindowWeights subwindow_weights(const Eigen::MatrixXd& sleeve_returns,
                                   const RollingConfig& config) {
    config.validate();
    const Eigen::Index H = sleeve_returns.rows();
    const Eigen::Index T = sleeve_returns.cols();
    const Eigen::Index sub = config.subwindow_days();
    const Eigen::Index n_sub = T / sub;
    if (n_sub < 2)
        throw Error(ErrorCode::InsufficientData, "training window holds fewer than 2 subwindows");
    if (sub < config.min_subwindow_obs)
        throw Error(ErrorCode::InsufficientData, "subwindow shorter than the observation floor");

    SubwindowWeights out;
    for (Eigen::Index k = 0; k < n_sub; ++k) {
        const Eigen::MatrixXd block = sleeve_returns.middleCols(k * sub, sub);
        const Eigen::VectorXd mean = block.rowwise().mean();
        const Eigen::MatrixXd centered = block.colwise() - mean;
        Eigen::MatrixXd cov =
            centered * centered.transpose() / static_cast<double>(sub - 1);
        const Eigen::MatrixXd diag = cov.diagonal().asDiagonal();
        cov = (1.0 - config.shrinkage) * cov + config.shrinkage * diag;

        bool degenerate = false;
        Eigen::VectorXd w;
        try {
            const auto result =
                allocator::min_variance_simplex(allocator::CovarianceMatrix::from(cov));
            w = result.weights;
        } catch (const Error&) {
            w = Eigen::VectorXd::Constant(H, 1.0 / static_cast<double>(H));
            degenerate = true;
        }
        out.weights.push_back(std::move(w));
        out.degenerate.push_back(degenerate);
    }
    return out;
}

std::map<std::string, bool> classify_stable(std::vector<WeightPath>& population,
                                            const RollingConfig& config) {
    config.validate();
    if (population.size() < 5)
        throw Error(ErrorCode::PopulationTooSmall,
                    "stability percentiles need at least 5 series");

    std::vector<double> stds, autocorrs, steps;
    for (auto& p : population) {
        p.diagnostics = stability_diagnostics(p.weights);
        stds.push_back(p.diagnostics.std_dev);
        autocorrs.push_back(p.diagnostics.autocorr1);
        steps.push_back(p.diagnostics.max_step);
    }
    const double std_thr = config.fixed_std_threshold
                               ? *config.fixed_std_threshold
                               : percentile(stds, config.std_percentile);
    const double ac_thr = config.fixed_autocorr_threshold
                              ? *config.fixed_autocorr_threshold
                              : percentile(autocorrs, config.autocorr_percentile);
    const double step_thr = config.fixed_step_threshold
                                ? *config.fixed_step_threshold
                                : percentile(steps, config.step_percentile);

    std::map<std::string, int> stable_counts;
    for (auto& p : population) {
        p.passes_std = p.diagnostics.std_dev < std_thr;      // strict: ties fail
        p.passes_autocorr = p.diagnostics.autocorr1 > ac_thr;
        p.passes_step = p.diagnostics.max_step < step_thr;
        const int met = int(p.passes_std) + int(p.passes_autocorr) + int(p.passes_step);
        p.is_stable = met >= config.min_criteria;
        stable_counts[p.asset_id] += p.is_stable ? 1 : 0;
    }
    std::map<std::string, bool> out;
    for (const auto& [asset, count] : stable_counts)
        out[asset] = count >= config.min_stable_series;
    return out;
}

DynamicWeightsResult dynamic_horizon_weights(const std::map<std::string, Eigen::MatrixXd>& sleeves,
                                             const std::vector<Date>& dates,
                                             const signals::HorizonSet& horizons,
                                             const RollingConfig& config,
                                             bool persistence_rule) {
    config.validate();
    horizons.validate();
    if (sleeves.empty()) throw Error(ErrorCode::EmptyUniverse, "no sleeve returns");
    const Eigen::Index H = static_cast<Eigen::Index>(horizons.size());
    const Eigen::Index T = static_cast<Eigen::Index>(dates.size());
    for (const auto& [id, m] : sleeves)
        if (m.rows() != H || m.cols() != T)
            throw Error(ErrorCode::MisalignedDates, id + ": sleeve matrix shape mismatch");

    const Eigen::Index train = config.train_days();
    const Eigen::Index test = config.test_days();
    const Eigen::Index roll = config.roll_step_days();
    if (T < train + test)
        throw Error(ErrorCode::InsufficientHistory,
                    "history shorter than one train+test cycle");

    DynamicWeightsResult result;
    for (Eigen::Index start = 0; start + train + test <= T; start += roll) {
        WindowWeights window;
        window.test_begin = static_cast<std::size_t>(start + train);
        window.test_end = static_cast<std::size_t>(start + train + test);
        window.window_start = dates[window.test_begin];

        // weight series per (asset, horizon) over this training window
        std::map<std::string, std::vector<std::vector<double>>> series_by_asset;
        for (const auto& [asset, sleeve] : sleeves) {
            const auto sw = subwindow_weights(sleeve.middleCols(start, train), config);
            std::vector<std::vector<double>> per_horizon(static_cast<std::size_t>(H));
            for (const auto& w : sw.weights)
                for (Eigen::Index h = 0; h < H; ++h)
                    per_horizon[static_cast<std::size_t>(h)].push_back(w(h));
            series_by_asset.emplace(asset, std::move(per_horizon));
        }

        std::vector<WeightPath> population;
        for (const auto& [asset, per_horizon] : series_by_asset)
            for (Eigen::Index h = 0; h < H; ++h) {
                WeightPath path;
                path.asset_id = asset;
                path.horizon = horizons.horizons[static_cast<std::size_t>(h)];
                path.weights = per_horizon[static_cast<std::size_t>(h)];
                population.push_back(std::move(path));
            }
        window.asset_stable = classify_stable(population, config);

        for (const auto& [asset, per_horizon] : series_by_asset) {
            const bool use_optimized = persistence_rule ? window.asset_stable.at(asset) : true;
            HorizonWeights hw;
            hw.asset_id = asset;
            if (use_optimized) {
                double sum = 0.0;
                for (const auto& s : per_horizon) {
                    hw.weights.push_back(ema_smooth(s, config.ema_alpha));
                    sum += hw.weights.back();
                }
                for (double& w : hw.weights) w /= sum;
                hw.provenance =
                    persistence_rule ? signals::Provenance::Dynamic : signals::Provenance::Optimized;
            } else {
                hw = HorizonWeights::equal(asset, static_cast<std::size_t>(H));
            }
            hw.validate();
            window.weights.emplace(asset, std::move(hw));
        }
        window.paths = std::move(population);
        result.windows.push_back(std::move(window));
    }
    return result;
}

void write_weight_paths_csv(const std::string& path, const DynamicWeightsResult& result,
                            const signals::HorizonSet& horizons) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "window_start,asset,horizon,weight,stable\n";
    char buf[64];
    for (const auto& window : result.windows) {
        for (const auto& [asset, hw] : window.weights)
            for (std::size_t h = 0; h < horizons.size(); ++h) {
                std::snprintf(buf, sizeof(buf), "%.10f", hw.weights[h]);
                out << window.window_start.to_iso() << ',' << asset << ','
                    << horizons.horizons[h] << ',' << buf << ','
                    << (window.asset_stable.at(asset) ? 1 : 0) << '\n';
            }
    }
}

}  // namespace trendlab::dynamic_weights
