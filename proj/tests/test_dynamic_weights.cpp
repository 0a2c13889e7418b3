#include <doctest.h>

#include <Eigen/Cholesky>
#include <cmath>
#include <random>

#include "trendlab/allocator.hpp"
#include "trendlab/dynamic_weights.hpp"

using namespace trendlab;
using namespace trendlab::dynamic_weights;

namespace {

// sleeve block whose sample covariance is exactly `target` (affine transform
// of an arbitrary full-rank block)
Eigen::MatrixXd block_with_covariance(const Eigen::MatrixXd& target, Eigen::Index cols,
                                      std::mt19937_64& rng) {
    const Eigen::Index n = target.rows();
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd raw(n, cols);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) raw(i, j) = gauss(rng);
    const Eigen::VectorXd mean = raw.rowwise().mean();
    Eigen::MatrixXd centered = raw.colwise() - mean;
    const Eigen::MatrixXd sample = centered * centered.transpose() / double(cols - 1);
    const Eigen::MatrixXd l_sample = Eigen::LLT<Eigen::MatrixXd>(sample).matrixL();
    const Eigen::MatrixXd l_target = Eigen::LLT<Eigen::MatrixXd>(target).matrixL();
    return l_target * l_sample.triangularView<Eigen::Lower>().solve(centered);
}

}  // namespace

TEST_CASE("stability diagnostics") {
    SUBCASE("constant series") {
        const auto d = stability_diagnostics({0.2, 0.2, 0.2, 0.2});
        CHECK(d.std_dev == 0.0);
        CHECK(d.max_step == 0.0);
        CHECK(d.autocorr1 == 0.0);  // constant-series convention
    }
    SUBCASE("alternating series") {
        const auto d = stability_diagnostics({0.1, 0.3, 0.1, 0.3});
        CHECK(d.autocorr1 == doctest::Approx(-1.0).epsilon(1e-12));
        CHECK(d.max_step == doctest::Approx(0.2).epsilon(1e-12));
    }
    SUBCASE("ramp series") {
        const auto d = stability_diagnostics({0.1, 0.2, 0.3, 0.4});
        CHECK(d.std_dev == doctest::Approx(std::sqrt(0.05 / 3.0)).epsilon(1e-12));
        CHECK(d.max_step == doctest::Approx(0.1).epsilon(1e-12));
        // consecutive pairs of a ramp are perfectly linearly related
        CHECK(d.autocorr1 == doctest::Approx(1.0).epsilon(1e-12));
    }
    CHECK_THROWS_WITH_AS(stability_diagnostics({0.1, 0.2}), doctest::Contains("SeriesTooShort"),
                         Error);
}

TEST_CASE("percentile uses linear interpolation between order statistics") {
    CHECK(percentile({1, 2, 3, 4}, 40) == doctest::Approx(2.2));
    CHECK(percentile({4, 1, 3, 2}, 40) == doctest::Approx(2.2));  // order-free
    CHECK(percentile({5}, 60) == doctest::Approx(5));
    CHECK(percentile({1, 2, 3}, 0) == doctest::Approx(1));
    CHECK(percentile({1, 2, 3}, 100) == doctest::Approx(3));
    CHECK_THROWS_AS(percentile({}, 50), Error);
}

TEST_CASE("ema smoothing") {
    CHECK(ema_smooth({0.1, 0.7, 0.4}, 1.0) == 0.4);
    CHECK(ema_smooth({0.3, 0.3, 0.3, 0.3}, 0.4) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK(ema_smooth({0.2, 0.4}, 0.5) == doctest::Approx(0.3).epsilon(1e-15));
    CHECK_THROWS_WITH_AS(ema_smooth({}, 0.5), doctest::Contains("EmptySeries"), Error);
    CHECK_THROWS_WITH_AS(ema_smooth({0.1}, 1.5), doctest::Contains("AlphaOutOfRange"), Error);
    CHECK_THROWS_AS(ema_smooth({0.1}, 0.0), Error);

    SUBCASE("linearity in the series") {
        std::mt19937_64 rng(5);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            std::vector<double> x(12), y(12), mix(12);
            const double a = u(rng), b = u(rng), alpha = 0.1 + 0.9 * u(rng);
            for (std::size_t k = 0; k < 12; ++k) {
                x[k] = u(rng);
                y[k] = u(rng);
                mix[k] = a * x[k] + b * y[k];
            }
            CHECK(ema_smooth(mix, alpha) ==
                  doctest::Approx(a * ema_smooth(x, alpha) + b * ema_smooth(y, alpha))
                      .epsilon(1e-12));
        }
    }
}

TEST_CASE("subwindow weights") {
    RollingConfig config;
    std::mt19937_64 rng(11);

    SUBCASE("zero-variance sleeve absorbs the whole budget") {
        Eigen::MatrixXd target = Eigen::MatrixXd::Identity(3, 3);
        Eigen::MatrixXd sleeves(3, config.subwindow_days() * 2);
        const auto block = block_with_covariance(Eigen::MatrixXd::Identity(2, 2),
                                                 config.subwindow_days() * 2, rng);
        sleeves.row(0).setZero();
        sleeves.row(1) = block.row(0);
        sleeves.row(2) = block.row(1);
        const auto result = subwindow_weights(sleeves, config);
        REQUIRE(result.weights.size() == 2);
        for (const auto& w : result.weights) {
            CHECK(w(0) == doctest::Approx(1.0));
            CHECK(w(1) == doctest::Approx(0.0));
        }
    }

    SUBCASE("iid equal-variance sleeves are weighted equally (exact covariance)") {
        Eigen::MatrixXd sleeves =
            block_with_covariance(Eigen::MatrixXd::Identity(5, 5), config.subwindow_days(), rng);
        Eigen::MatrixXd two = Eigen::MatrixXd(5, 2 * config.subwindow_days());
        two << sleeves, sleeves;
        const auto result = subwindow_weights(two, config);
        for (const auto& w : result.weights)
            for (int h = 0; h < 5; ++h) CHECK(w(h) == doctest::Approx(0.2).epsilon(1e-9));
    }

    SUBCASE("planted Toeplitz covariance concentrates on the extremes") {
        const auto model = allocator::ToeplitzModel{0.8, 0.4, 0.05, 1.0};
        const Eigen::MatrixXd target = allocator::toeplitz_matrix(model).m;
        Eigen::MatrixXd sleeves(3, 16 * config.subwindow_days());
        for (int k = 0; k < 16; ++k)
            sleeves.middleCols(k * config.subwindow_days(), config.subwindow_days()) =
                block_with_covariance(target, config.subwindow_days(), rng);

        // population answer is the barbell (1/2, 0, 1/2): exact once the
        // covariance is not shrunk toward the diagonal
        RollingConfig raw = config;
        raw.shrinkage = 0.0;
        const auto exact = subwindow_weights(sleeves, raw);
        REQUIRE(exact.weights.size() == 16);
        for (const auto& w : exact.weights) {
            CHECK(w(1) < 1e-10);
            CHECK(w(0) + w(2) == doctest::Approx(1.0).epsilon(1e-10));
        }

        // default shrinkage dampens the off-diagonals, leaving a small
        // interior medium weight
        const auto shrunk = subwindow_weights(sleeves, config);
        double medium = 0.0;
        for (const auto& w : shrunk.weights) medium += w(1);
        CHECK(medium / 16 < 0.10);
    }

    SUBCASE("degenerate covariance falls back to flagged equal weights") {
        Eigen::MatrixXd sleeves = Eigen::MatrixXd::Zero(4, config.subwindow_days() * 2);
        const auto result = subwindow_weights(sleeves, config);
        for (std::size_t k = 0; k < result.weights.size(); ++k) {
            CHECK(result.degenerate[k]);
            for (int h = 0; h < 4; ++h) CHECK(result.weights[k](h) == doctest::Approx(0.25));
        }
    }

    SUBCASE("insufficient data") {
        Eigen::MatrixXd sleeves = Eigen::MatrixXd::Zero(3, config.subwindow_days());
        CHECK_THROWS_WITH_AS(subwindow_weights(sleeves, config),
                             doctest::Contains("InsufficientData"), Error);
    }
}

TEST_CASE("stability classification") {
    RollingConfig config;

    auto make_population = [](const std::vector<std::vector<double>>& series) {
        std::vector<WeightPath> population;
        for (std::size_t k = 0; k < series.size(); ++k) {
            WeightPath p;
            p.asset_id = "A" + std::to_string(k);
            p.horizon = 20;
            p.weights = series[k];
            population.push_back(p);
        }
        return population;
    };

    SUBCASE("a constant series dominates a noisy population") {
        std::mt19937_64 rng(3);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::vector<std::vector<double>> series{{0.2, 0.2, 0.2, 0.2, 0.2, 0.2}};
        for (int k = 0; k < 9; ++k) {
            std::vector<double> s(6);
            for (double& x : s) x = u(rng);
            series.push_back(s);
        }
        auto population = make_population(series);
        classify_stable(population, config);
        CHECK(population[0].passes_std);
        CHECK(population[0].passes_step);
        CHECK(population[0].is_stable);
    }

    SUBCASE("identical diagnostics tie at the threshold and fail") {
        std::vector<std::vector<double>> series(6, {0.1, 0.3, 0.2, 0.25, 0.15});
        auto population = make_population(series);
        classify_stable(population, config);
        for (const auto& p : population) CHECK_FALSE(p.is_stable);
    }

    SUBCASE("population floor") {
        std::vector<std::vector<double>> series(4, {0.1, 0.3, 0.2});
        auto population = make_population(series);
        CHECK_THROWS_WITH_AS(classify_stable(population, config),
                             doctest::Contains("PopulationTooSmall"), Error);
    }

    SUBCASE("planted smooth AR(1) paths are found; two-point noise is rejected") {
        // single-seed version of the acceptance construction
        std::mt19937_64 rng(0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<std::vector<double>> series;
        const double phi = 0.9, plant_sd = 0.02, noise_sd = 0.05;
        for (int k = 0; k < 10; ++k) {
            std::vector<double> s(16);
            double x = plant_sd * gauss(rng);
            for (std::size_t t = 0; t < 16; ++t) {
                if (t > 0) x = phi * x + plant_sd * std::sqrt(1 - phi * phi) * gauss(rng);
                s[t] = 0.2 + x;
            }
            series.push_back(s);
        }
        for (int k = 0; k < 40; ++k) {
            std::vector<double> s(16);
            for (double& v : s) v = 0.2 + ((rng() & 1) ? noise_sd : -noise_sd);
            series.push_back(s);
        }
        auto population = make_population(series);
        classify_stable(population, config);
        int planted_stable = 0, noise_stable = 0;
        for (std::size_t k = 0; k < population.size(); ++k)
            (k < 10 ? planted_stable : noise_stable) += population[k].is_stable ? 1 : 0;
        CHECK(planted_stable >= 9);
        CHECK(noise_stable <= 5);
    }

    SUBCASE("threshold monotonicity: dominating additions can only raise Q40") {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.01, 0.2);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<double> stds(10);
            for (double& x : stds) x = u(rng);
            const double before = percentile(stds, 40);
            auto extended = stds;
            const double top = *std::max_element(stds.begin(), stds.end());
            for (int k = 0; k < 3; ++k) extended.push_back(top + u(rng));
            CHECK(percentile(extended, 40) >= before - 1e-15);
        }
    }
}

TEST_CASE("dynamic horizon weights") {
    RollingConfig config;
    signals::HorizonSet horizons;
    const int H = 5;
    const Eigen::Index T = config.train_days() + 2 * config.test_days();

    SUBCASE("white-noise universe reverts to equal weights under fixed thresholds") {
        // adaptive percentiles always rank some series as relatively calm,
        // so the no-stable-assets path needs the fixed-threshold mode
        std::mt19937_64 rng(13);
        std::normal_distribution<double> gauss(0.0, 0.01);
        std::map<std::string, Eigen::MatrixXd> sleeves;
        for (int a = 0; a < 2; ++a) {
            Eigen::MatrixXd m(H, T);
            for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = gauss(rng);
            sleeves.emplace("A" + std::to_string(a), std::move(m));
        }
        RollingConfig fixed = config;
        fixed.fixed_std_threshold = 1e-6;
        fixed.fixed_autocorr_threshold = 0.99;
        fixed.fixed_step_threshold = 1e-6;
        const auto dates = business_day_range(Date(2005, 1, 3), static_cast<std::size_t>(T));
        const auto result = dynamic_horizon_weights(sleeves, dates, horizons, fixed);
        REQUIRE(result.windows.size() == 2);
        for (const auto& window : result.windows)
            for (const auto& [asset, hw] : window.weights) {
                CHECK_FALSE(window.asset_stable.at(asset));
                CHECK(hw.provenance == signals::Provenance::Equal);
                for (double w : hw.weights) CHECK(w == doctest::Approx(0.2).epsilon(1e-12));
            }
    }

    SUBCASE("constant planted optimum is recovered under fixed thresholds") {
        // diagonal planted covariance: minimum-variance weights are the
        // inverse variances, hand-computable
        Eigen::VectorXd variances(H);
        variances << 1, 2, 4, 8, 16;
        Eigen::VectorXd planted = variances.cwiseInverse();
        planted /= planted.sum();

        std::mt19937_64 rng(17);
        const Eigen::MatrixXd block = block_with_covariance(
            Eigen::MatrixXd(variances.asDiagonal()), config.subwindow_days(), rng);
        Eigen::MatrixXd sleeve(H, T);
        for (Eigen::Index c = 0; c < T; ++c) sleeve.col(c) = block.col(c % block.cols());

        RollingConfig fixed = config;
        fixed.fixed_std_threshold = 0.01;       // constant series pass strictly
        fixed.fixed_autocorr_threshold = -0.5;  // irrelevant: 2 of 3 criteria suffice
        fixed.fixed_step_threshold = 0.01;

        std::map<std::string, Eigen::MatrixXd> sleeves{{"A0", sleeve}};
        const auto dates = business_day_range(Date(2005, 1, 3), static_cast<std::size_t>(T));
        const auto result = dynamic_horizon_weights(sleeves, dates, horizons, fixed);
        for (const auto& window : result.windows) {
            CHECK(window.asset_stable.at("A0"));
            const auto& hw = window.weights.at("A0");
            CHECK(hw.provenance == signals::Provenance::Dynamic);
            for (int h = 0; h < H; ++h)
                CHECK(hw.weights[static_cast<std::size_t>(h)] ==
                      doctest::Approx(planted(h)).epsilon(1e-6));
        }
    }

    SUBCASE("forcing min_stable_series above the horizon count falls back everywhere") {
        std::mt19937_64 rng(19);
        std::normal_distribution<double> gauss(0.0, 0.01);
        Eigen::MatrixXd sleeve(H, T);
        for (Eigen::Index i = 0; i < sleeve.size(); ++i) sleeve(i) = gauss(rng) + 0.001;
        RollingConfig strict = config;
        strict.min_stable_series = 6;
        std::map<std::string, Eigen::MatrixXd> sleeves{{"A0", sleeve}};
        const auto dates = business_day_range(Date(2005, 1, 3), static_cast<std::size_t>(T));
        const auto result = dynamic_horizon_weights(sleeves, dates, horizons, strict);
        for (const auto& window : result.windows)
            for (const auto& [asset, hw] : window.weights)
                for (double w : hw.weights) CHECK(w == doctest::Approx(0.2));
    }

    SUBCASE("weights are always simplex-valid and runs are deterministic") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> gauss(0.0, 0.01);
        std::map<std::string, Eigen::MatrixXd> sleeves;
        for (int a = 0; a < 3; ++a) {
            Eigen::MatrixXd m(H, T);
            for (Eigen::Index i = 0; i < m.size(); ++i)
                m(i) = gauss(rng) + (a == 0 ? 0.0005 : 0.0);
            sleeves.emplace("A" + std::to_string(a), std::move(m));
        }
        const auto dates = business_day_range(Date(2005, 1, 3), static_cast<std::size_t>(T));
        const auto r1 = dynamic_horizon_weights(sleeves, dates, horizons, config);
        const auto r2 = dynamic_horizon_weights(sleeves, dates, horizons, config);
        REQUIRE(r1.windows.size() == r2.windows.size());
        for (std::size_t k = 0; k < r1.windows.size(); ++k)
            for (const auto& [asset, hw] : r1.windows[k].weights) {
                CHECK_NOTHROW(hw.validate());
                CHECK(hw.weights == r2.windows[k].weights.at(asset).weights);
            }
    }

    SUBCASE("insufficient history") {
        std::map<std::string, Eigen::MatrixXd> sleeves{
            {"A0", Eigen::MatrixXd::Zero(H, config.train_days())}};
        const auto dates =
            business_day_range(Date(2005, 1, 3), static_cast<std::size_t>(config.train_days()));
        CHECK_THROWS_WITH_AS(dynamic_horizon_weights(sleeves, dates, horizons, config),
                             doctest::Contains("InsufficientHistory"), Error);
    }
}
