#include "trendlab/signals.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "trendlab/errors.hpp"

namespace trendlab::signals {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

void HorizonSet::validate() const {
    if (horizons.empty()) throw Error(ErrorCode::HorizonMismatch, "empty horizon set");
    for (std::size_t i = 0; i < horizons.size(); ++i) {
        if (horizons[i] < 2)
            throw Error(ErrorCode::ParameterOutOfRange, "horizons must be >= 2 days");
        if (i > 0 && horizons[i] <= horizons[i - 1])
            throw Error(ErrorCode::ParameterOutOfRange, "horizons must be strictly increasing");
    }
}

int HorizonSet::index_of(int horizon) const {
    for (std::size_t i = 0; i < horizons.size(); ++i)
        if (horizons[i] == horizon) return static_cast<int>(i);
    return -1;
}

const char* provenance_name(Provenance p) {
    switch (p) {
        case Provenance::Equal: return "equal";
        case Provenance::Optimized: return "optimized";
        case Provenance::Dynamic: return "dynamic";
    }
    return "equal";
}

void HorizonWeights::validate() const {
    double sum = 0.0;
    for (double w : weights) {
        if (w < 0.0) throw Error(ErrorCode::ParameterOutOfRange, asset_id + ": negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw Error(ErrorCode::ParameterOutOfRange, asset_id + ": weights do not sum to 1");
}

HorizonWeights HorizonWeights::equal(const std::string& asset_id, std::size_t n_horizons) {
    HorizonWeights out;
    out.asset_id = asset_id;
    out.weights.assign(n_horizons, 1.0 / static_cast<double>(n_horizons));
    out.provenance = Provenance::Equal;
    return out;
}

std::vector<double> trailing_vol(const std::vector<double>& returns, int vol_window) {
    const std::size_t n = returns.size();
    const std::size_t w = static_cast<std::size_t>(vol_window);
    std::vector<double> out(n, kNaN);
    if (n < w || vol_window < 2) return out;
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        sum += returns[t];
        sumsq += returns[t] * returns[t];
        if (t >= w) {
            sum -= returns[t - w];
            sumsq -= returns[t - w] * returns[t - w];
        }
        if (t + 1 >= w) {
            const double mean = sum / static_cast<double>(w);
            double var = (sumsq - static_cast<double>(w) * mean * mean) /
                         static_cast<double>(w - 1);
            out[t] = std::sqrt(std::max(var, 0.0));
        }
    }
    return out;
}

std::vector<double> trend_score(const ReturnSeries& returns, int horizon, int vol_window) {
    const std::size_t n = returns.size();
    const std::size_t h = static_cast<std::size_t>(horizon);
    if (horizon < 2 || vol_window < 2)
        throw Error(ErrorCode::ParameterOutOfRange, "horizon and vol_window must be >= 2");
    if (n < h + static_cast<std::size_t>(vol_window))
        throw Error(ErrorCode::SeriesTooShort,
                    returns.instrument_id + ": need " + std::to_string(h + vol_window) +
                        " returns for horizon " + std::to_string(horizon));

    // prefix log-sums give the h-day compounded return in O(1) per date
    std::vector<double> log_cum(n + 1, 0.0);
    for (std::size_t t = 0; t < n; ++t) log_cum[t + 1] = log_cum[t] + std::log1p(returns.returns[t]);
    const std::vector<double> vol = trailing_vol(returns.returns, vol_window);

    std::vector<double> out(n, kNaN);
    const std::size_t first = h + static_cast<std::size_t>(vol_window) - 1;
    for (std::size_t t = first; t < n; ++t) {
        const double cum = std::expm1(log_cum[t + 1] - log_cum[t + 1 - h]);
        const double sigma = vol[t];
        if (sigma == 0.0) {
            if (cum == 0.0) {
                out[t] = 0.0;
                continue;
            }
            throw Error(ErrorCode::ZeroVolatility,
                        returns.instrument_id + " at " + returns.dates[t].to_iso());
        }
        const double z = cum / (sigma * std::sqrt(static_cast<double>(h)));
        out[t] = std::clamp(z / 2.0, -1.0, 1.0);
    }
    return out;
}

TrendScorePanel build_score_panel(const std::map<std::string, ReturnSeries>& returns,
                                  const HorizonSet& horizons, int vol_window) {
    horizons.validate();
    if (returns.empty()) throw Error(ErrorCode::EmptyUniverse, "no return series");

    TrendScorePanel panel;
    panel.horizons = horizons;
    const ReturnSeries& first = returns.begin()->second;
    panel.dates = first.dates;
    for (const auto& [id, series] : returns) {
        if (series.dates != panel.dates)
            throw Error(ErrorCode::MisalignedDates, id + " vs " + first.instrument_id);
        panel.assets.push_back(id);
    }

    const std::size_t T = panel.dates.size(), A = panel.assets.size(), H = horizons.size();
    panel.scores.assign(T * A * H, kNaN);
    std::size_t a = 0;
    for (const auto& [id, series] : returns) {
        for (std::size_t h = 0; h < H; ++h) {
            const auto scores = trend_score(series, horizons.horizons[h], vol_window);
            for (std::size_t t = 0; t < T; ++t) panel.score(t, a, h) = scores[t];
        }
        ++a;
    }
    return panel;
}

Eigen::MatrixXd aggregate_scores(const TrendScorePanel& panel,
                                 const std::map<std::string, HorizonWeights>& weights) {
    const std::size_t T = panel.dates.size(), A = panel.assets.size(), H = panel.horizons.size();
    Eigen::MatrixXd out(T, A);
    for (std::size_t a = 0; a < A; ++a) {
        const auto it = weights.find(panel.assets[a]);
        if (it == weights.end())
            throw Error(ErrorCode::HorizonMismatch, "no weights for asset " + panel.assets[a]);
        const HorizonWeights& w = it->second;
        if (w.weights.size() != H)
            throw Error(ErrorCode::HorizonMismatch,
                        panel.assets[a] + ": weight vector size != horizon count");
        w.validate();
        for (std::size_t t = 0; t < T; ++t) {
            double acc = 0.0;  // NaN in any constituent masks the aggregate
            for (std::size_t h = 0; h < H; ++h) acc += w.weights[h] * panel.score(t, a, h);
            out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a)) = acc;
        }
    }
    return out;
}

SleevePath sleeve_path(const Eigen::MatrixXd& scores,
                       const std::map<std::string, ReturnSeries>& returns,
                       double vol_target, int vol_window) {
    if (returns.empty()) throw Error(ErrorCode::EmptyUniverse, "no return series");
    const std::size_t A = returns.size();
    const ReturnSeries& first = returns.begin()->second;
    const std::size_t T = first.size();
    if (static_cast<std::size_t>(scores.rows()) != T ||
        static_cast<std::size_t>(scores.cols()) != A)
        throw Error(ErrorCode::MisalignedDates, "score matrix does not match universe shape");

    std::vector<const ReturnSeries*> series;
    std::vector<std::vector<double>> vols;
    for (const auto& [id, r] : returns) {
        if (r.dates != first.dates)
            throw Error(ErrorCode::MisalignedDates, id + " vs " + first.instrument_id);
        series.push_back(&r);
        vols.push_back(trailing_vol(r.returns, vol_window));
    }

    SleevePath out;
    out.positions = Eigen::MatrixXd::Zero(T, A);
    out.returns.instrument_id = "sleeve";
    out.returns.dates = first.dates;
    out.returns.returns.assign(T, 0.0);
    const double ann = std::sqrt(252.0);
    for (std::size_t t = 1; t < T; ++t) {
        double acc = 0.0;
        for (std::size_t a = 0; a < A; ++a) {
            const double s = scores(static_cast<Eigen::Index>(t - 1), static_cast<Eigen::Index>(a));
            const double sigma = vols[a][t - 1];
            if (std::isnan(s) || std::isnan(sigma) || sigma == 0.0) continue;
            const double pos = s * vol_target / (sigma * ann);
            out.positions(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(a)) = pos;
            acc += pos * series[a]->returns[t];
        }
        out.returns.returns[t] = acc / static_cast<double>(A);
    }
    return out;
}

ReturnSeries sleeve_returns(const Eigen::MatrixXd& scores,
                            const std::map<std::string, ReturnSeries>& returns,
                            double vol_target, int vol_window) {
    return sleeve_path(scores, returns, vol_target, vol_window).returns;
}

void write_score_panel_csv(const std::string& path, const TrendScorePanel& panel) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "date,asset,horizon,score\n";
    char buf[64];
    for (std::size_t t = 0; t < panel.dates.size(); ++t)
        for (std::size_t a = 0; a < panel.assets.size(); ++a)
            for (std::size_t h = 0; h < panel.horizons.size(); ++h) {
                const double s = panel.score(t, a, h);
                if (std::isnan(s)) continue;
                std::snprintf(buf, sizeof(buf), "%.10f", s);
                out << panel.dates[t].to_iso() << ',' << panel.assets[a] << ','
                    << panel.horizons.horizons[h] << ',' << buf << '\n';
            }
}

}  // namespace trendlab::signals
