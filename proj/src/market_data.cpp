#include "trendlab/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#if __has_include(<nlohmann/json.hpp>)
#include <nlohmann/json.hpp>
#else
#include <json.hpp>  // vendored single header
#endif

namespace trendlab::market_data {

namespace {

using json = nlohmann::json;

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

}  // namespace

const char* asset_class_name(AssetClass c) {
    switch (c) {
        case AssetClass::Commodity: return "Commodity";
        case AssetClass::Equity: return "Equity";
        case AssetClass::FixedIncome: return "FixedIncome";
        case AssetClass::FX: return "FX";
    }
    return "Equity";
}

AssetClass parse_asset_class(const std::string& name) {
    if (name == "Commodity") return AssetClass::Commodity;
    if (name == "Equity") return AssetClass::Equity;
    if (name == "FixedIncome") return AssetClass::FixedIncome;
    if (name == "FX") return AssetClass::FX;
    throw Error(ErrorCode::ConfigError, "unknown asset class '" + name + "'");
}

std::pair<double, double> default_costs_bps(AssetClass c) {
    switch (c) {
        case AssetClass::Commodity: return {2.0, 15.0};
        case AssetClass::Equity: return {2.0, 15.0};
        case AssetClass::FixedIncome: return {2.0, 10.0};
        case AssetClass::FX: return {2.0, 2.0};
    }
    return {2.0, 15.0};
}

void Instrument::validate() const {
    if (id.empty()) throw Error(ErrorCode::ConfigError, "instrument id is empty");
    if (tx_cost_bps < 0 || roll_cost_bps < 0)
        throw Error(ErrorCode::NegativeCost, "instrument " + id + " has a negative cost");
}

void PriceSeries::validate() const {
    if (dates.size() != prices.size())
        throw Error(ErrorCode::MalformedRow, instrument_id + ": dates/prices length mismatch");
    for (std::size_t k = 0; k < prices.size(); ++k) {
        if (!(prices[k] > 0.0))
            throw Error(ErrorCode::NonPositivePrice,
                        instrument_id + " at " + dates[k].to_iso());
        if (k > 0 && !(dates[k] > dates[k - 1]))
            throw Error(ErrorCode::DuplicateObservation,
                        instrument_id + " at " + dates[k].to_iso());
    }
}

void ReturnSeries::validate() const {
    if (dates.size() != returns.size())
        throw Error(ErrorCode::MalformedRow, instrument_id + ": dates/returns length mismatch");
    for (std::size_t k = 0; k < returns.size(); ++k) {
        if (!(returns[k] > -1.0))
            throw Error(ErrorCode::NonPositivePrice,
                        instrument_id + ": return <= -100% at " + dates[k].to_iso());
        if (k > 0 && !(dates[k] > dates[k - 1]))
            throw Error(ErrorCode::DuplicateObservation,
                        instrument_id + " at " + dates[k].to_iso());
    }
}

void SyntheticSpec::validate() const {
    if (n_assets < 1) throw Error(ErrorCode::InvalidSpec, "n_assets must be >= 1");
    if (n_days < 2) throw Error(ErrorCode::InvalidSpec, "n_days must be >= 2");
    if (drift_vol < 0 || noise_vol < 0)
        throw Error(ErrorCode::InvalidSpec, "volatilities must be non-negative");
    if (!(initial_price > 0)) throw Error(ErrorCode::InvalidSpec, "initial_price must be > 0");
    if (trend_half_lives.empty())
        throw Error(ErrorCode::InvalidSpec, "trend_half_lives is empty");
    for (double hl : trend_half_lives)
        if (!(hl > 0)) throw Error(ErrorCode::InvalidSpec, "half-lives must be > 0");
    if (medium_redundancy) {
        if (trend_half_lives.size() != 2)
            throw Error(ErrorCode::InvalidSpec,
                        "medium_redundancy expects exactly two half-lives (fast, slow)");
    } else if (trend_half_lives.size() != 1 &&
               trend_half_lives.size() != static_cast<std::size_t>(n_assets)) {
        throw Error(ErrorCode::InvalidSpec,
                    "trend_half_lives must hold one entry or one per asset");
    }
}

Universe load_prices_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, path);

    std::string line;
    if (!std::getline(in, line))
        throw Error(ErrorCode::MalformedRow, path + ": empty file");
    {
        std::string header = trim(line);
        if (header != "date,instrument_id,price")
            throw Error(ErrorCode::MalformedRow,
                        path + " line 1: expected header 'date,instrument_id,price'");
    }

    struct Row {
        Date date;
        double price;
    };
    std::map<std::string, std::vector<Row>> rows;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        std::stringstream ss(line);
        std::string date_s, id_s, price_s;
        if (!std::getline(ss, date_s, ',') || !std::getline(ss, id_s, ',') ||
            !std::getline(ss, price_s)) {
            throw Error(ErrorCode::MalformedRow, path + " line " + std::to_string(line_no));
        }
        Date date;
        double price;
        try {
            date = Date::parse_iso(trim(date_s));
            std::size_t pos = 0;
            price = std::stod(trim(price_s), &pos);
            if (pos != trim(price_s).size()) throw std::invalid_argument("trailing junk");
        } catch (const std::exception&) {
            throw Error(ErrorCode::MalformedRow, path + " line " + std::to_string(line_no));
        }
        if (!(price > 0.0))
            throw Error(ErrorCode::NonPositivePrice, path + " line " + std::to_string(line_no));
        rows[trim(id_s)].push_back({date, price});
    }

    Universe universe;
    for (auto& [id, series_rows] : rows) {
        std::stable_sort(series_rows.begin(), series_rows.end(),
                         [](const Row& a, const Row& b) { return a.date < b.date; });
        PriceSeries series;
        series.instrument_id = id;
        series.dates.reserve(series_rows.size());
        series.prices.reserve(series_rows.size());
        for (const Row& r : series_rows) {
            if (!series.dates.empty() && r.date == series.dates.back())
                throw Error(ErrorCode::DuplicateObservation, id + " at " + r.date.to_iso());
            series.dates.push_back(r.date);
            series.prices.push_back(r.price);
        }
        series.validate();
        universe.emplace(id, std::move(series));
    }
    return universe;
}

ReturnSeries to_returns(const PriceSeries& prices) {
    if (prices.size() < 2)
        throw Error(ErrorCode::SeriesTooShort,
                    prices.instrument_id + ": need at least 2 prices");
    ReturnSeries out;
    out.instrument_id = prices.instrument_id;
    out.dates.assign(prices.dates.begin() + 1, prices.dates.end());
    out.returns.resize(prices.size() - 1);
    for (std::size_t k = 0; k + 1 < prices.size(); ++k)
        out.returns[k] = prices.prices[k + 1] / prices.prices[k] - 1.0;
    return out;
}

PriceSeries from_returns(const ReturnSeries& returns, Date first_date, double first_price) {
    PriceSeries out;
    out.instrument_id = returns.instrument_id;
    out.dates.reserve(returns.size() + 1);
    out.prices.reserve(returns.size() + 1);
    out.dates.push_back(first_date);
    out.prices.push_back(first_price);
    double level = first_price;
    for (std::size_t k = 0; k < returns.size(); ++k) {
        level *= 1.0 + returns.returns[k];
        out.dates.push_back(returns.dates[k]);
        out.prices.push_back(level);
    }
    return out;
}

Universe generate_synthetic_universe(const SyntheticSpec& spec) {
    spec.validate();
    const double dt = 1.0 / 252.0;
    const auto dates = business_day_range(spec.start_date, static_cast<std::size_t>(spec.n_days));

    auto half_life_for = [&](int asset) -> double {
        if (spec.trend_half_lives.size() == 1) return spec.trend_half_lives[0];
        return spec.trend_half_lives[static_cast<std::size_t>(asset)];
    };

    Universe universe;
    for (int a = 0; a < spec.n_assets; ++a) {
        // independent substream per asset so generation order cannot matter
        std::mt19937_64 rng(spec.seed * 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(a) + 1);
        std::normal_distribution<double> gauss(0.0, 1.0);

        struct Component {
            double phi;
            double level_sd;
            double value = 0.0;
        };
        std::vector<Component> comps;
        if (spec.medium_redundancy) {
            const double sd = spec.drift_vol / std::sqrt(2.0);
            comps.push_back({std::pow(2.0, -1.0 / spec.trend_half_lives[0]), sd});
            comps.push_back({std::pow(2.0, -1.0 / spec.trend_half_lives[1]), sd});
        } else {
            comps.push_back({std::pow(2.0, -1.0 / half_life_for(a)), spec.drift_vol});
        }
        for (auto& c : comps) c.value = c.level_sd * gauss(rng);  // stationary start

        PriceSeries series;
        series.instrument_id = "A" + std::to_string(a);
        series.dates = dates;
        series.prices.resize(dates.size());
        double level = spec.initial_price;
        for (std::size_t t = 0; t < dates.size(); ++t) {
            double drift = spec.drift_mean;
            for (auto& c : comps) {
                if (t > 0) {
                    const double innov_sd = c.level_sd * std::sqrt(1.0 - c.phi * c.phi);
                    c.value = c.phi * c.value + innov_sd * gauss(rng);
                }
                drift += c.value;
            }
            const double shock = spec.noise_vol * std::sqrt(dt) * gauss(rng);
            if (t > 0) level *= std::exp(drift * dt + shock);
            series.prices[t] = level;
        }
        universe.emplace(series.instrument_id, std::move(series));
    }
    return universe;
}

AlignedUniverse align_universe(const Universe& universe, double max_missing) {
    std::set<Date> calendar;
    for (const auto& [id, series] : universe)
        calendar.insert(series.dates.begin(), series.dates.end());

    AlignedUniverse out;
    const double min_coverage = 1.0 - max_missing;
    std::vector<const PriceSeries*> kept;
    for (const auto& [id, series] : universe) {
        const double coverage =
            calendar.empty() ? 1.0
                             : static_cast<double>(series.dates.size()) /
                                   static_cast<double>(calendar.size());
        if (coverage < min_coverage)
            out.rejected_ids.push_back(id);
        else
            kept.push_back(&series);
    }

    std::vector<Date> common(calendar.begin(), calendar.end());
    for (const PriceSeries* series : kept) {
        std::set<Date> own(series->dates.begin(), series->dates.end());
        std::erase_if(common, [&](Date d) { return !own.count(d); });
    }

    for (const PriceSeries* series : kept) {
        PriceSeries aligned;
        aligned.instrument_id = series->instrument_id;
        std::size_t j = 0;
        for (Date d : common) {
            while (j < series->dates.size() && series->dates[j] < d) ++j;
            aligned.dates.push_back(d);
            aligned.prices.push_back(series->prices[j]);
        }
        out.universe.emplace(aligned.instrument_id, std::move(aligned));
    }
    return out;
}

std::vector<Instrument> load_universe_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ConfigError, path + ": " + e.what());
    }
    if (!doc.contains("instruments") || !doc["instruments"].is_array())
        throw Error(ErrorCode::ConfigError, path + ": missing 'instruments' array");

    std::vector<Instrument> out;
    std::set<std::string> seen;
    for (const auto& item : doc["instruments"]) {
        Instrument inst;
        try {
            inst.id = item.at("id").get<std::string>();
            inst.asset_class = parse_asset_class(item.at("asset_class").get<std::string>());
            auto [tx, roll] = default_costs_bps(inst.asset_class);
            inst.tx_cost_bps = item.value("tx_cost_bps", tx);
            inst.roll_cost_bps = item.value("roll_cost_bps", roll);
            inst.description = item.value("description", std::string{});
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ConfigError, path + ": " + e.what());
        }
        inst.validate();
        if (!seen.insert(inst.id).second)
            throw Error(ErrorCode::ConfigError, path + ": duplicate instrument id " + inst.id);
        out.push_back(std::move(inst));
    }
    return out;
}

void write_prices_csv(const std::string& path, const Universe& universe) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "date,instrument_id,price\n";
    char buf[64];
    for (const auto& [id, series] : universe) {
        for (std::size_t k = 0; k < series.size(); ++k) {
            std::snprintf(buf, sizeof(buf), "%.10f", series.prices[k]);
            out << series.dates[k].to_iso() << ',' << id << ',' << buf << '\n';
        }
    }
}

}  // namespace trendlab::market_data
