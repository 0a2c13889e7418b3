#include <doctest.h>

#include <cmath>
#include <random>

#include "trendlab/backtest.hpp"

using namespace trendlab;
using namespace trendlab::backtest;
using market_data::AssetClass;
using market_data::ReturnSeries;

namespace {

ReturnSeries make_series(const std::string& id, const std::vector<double>& returns,
                         Date start = Date(2013, 1, 7)) {
    ReturnSeries out;
    out.instrument_id = id;
    out.dates = business_day_range(start, returns.size());
    out.returns = returns;
    return out;
}

}  // namespace

TEST_CASE("metrics") {
    SUBCASE("zero-mean alternating returns have sharpe 0") {
        std::vector<double> r(60);
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = (k % 2 == 0) ? 0.01 : -0.01;
        const auto bench = make_series("b", r);
        const auto row = metrics(make_series("s", r), bench);
        CHECK(row.sharpe == doctest::Approx(0.0));
        CHECK(row.ann_vol > 0.0);
        CHECK(row.benchmark_corr == doctest::Approx(1.0));  // strategy equals the benchmark
    }

    SUBCASE("drawdown of the +10/-20/+10 wealth path is exactly 20%") {
        // embedded in a longer series to satisfy the observation floor
        std::vector<double> r(39, 0.0);
        r.push_back(0.10);
        r.push_back(-0.20);
        r.push_back(0.10);
        std::vector<double> b(42);
        for (std::size_t k = 0; k < b.size(); ++k) b[k] = (k % 2 == 0) ? 0.01 : -0.008;
        const auto row = metrics(make_series("s", r), make_series("b", b));
        // wealth 1.10 -> 0.88 -> 0.968; peak 1.10, trough 0.88
        CHECK(row.max_drawdown == doctest::Approx(0.20).epsilon(1e-12));
        CHECK(row.ret_over_maxdd == doctest::Approx(row.ann_return / 0.20).epsilon(1e-12));
    }

    SUBCASE("sharpe is invariant to positive scaling") {
        std::mt19937_64 rng(7);
        std::normal_distribution<double> gauss(2e-4, 0.01);
        std::vector<double> r(252), r5(252);
        for (std::size_t k = 0; k < 252; ++k) {
            r[k] = gauss(rng);
            r5[k] = 5.0 * r[k];
        }
        std::vector<double> b = r;
        const auto a = metrics(make_series("s", r), make_series("b", b));
        std::vector<double> b5 = r5;
        const auto c = metrics(make_series("s", r5), make_series("b", b5));
        CHECK(a.sharpe == doctest::Approx(c.sharpe).epsilon(1e-12));
    }

    SUBCASE("prepending peak-setting gains never shrinks the drawdown") {
        std::mt19937_64 rng(11);
        std::normal_distribution<double> gauss(0.0, 0.01);
        std::vector<double> r(120);
        for (double& x : r) x = gauss(rng);
        std::vector<double> bench(r.size(), 0.001);
        bench[1] = -0.002;
        const auto base = metrics(make_series("s", r), make_series("b", bench));
        std::vector<double> grown = {0.02, 0.015, 0.01};
        grown.insert(grown.end(), r.begin(), r.end());
        std::vector<double> bench2(grown.size(), 0.001);
        bench2[1] = -0.002;
        const auto lifted = metrics(make_series("s", grown), make_series("b", bench2));
        CHECK(lifted.max_drawdown >= base.max_drawdown - 1e-15);
    }

    SUBCASE("errors") {
        CHECK_THROWS_WITH_AS(metrics(make_series("s", std::vector<double>(10, 0.01)),
                                     make_series("b", std::vector<double>(10, 0.01))),
                             doctest::Contains("SeriesTooShort"), Error);
        CHECK_THROWS_WITH_AS(metrics(make_series("s", std::vector<double>(50, 0.0)),
                                     make_series("b", std::vector<double>(50, 0.01))),
                             doctest::Contains("ZeroVol"), Error);
        std::vector<double> rising(50, 0.001);
        rising[10] = 0.002;
        CHECK_THROWS_WITH_AS(metrics(make_series("s", rising), make_series("b", rising)),
                             doctest::Contains("ZeroDrawdown"), Error);
    }
}

TEST_CASE("monthly aggregation and conditional sharpe") {
    SUBCASE("monthly compounding") {
        // 2013-01 has 23 business days from Jan 7; fill one month exactly
        std::vector<double> r(18, 0.01);
        const auto monthly = to_monthly(make_series("s", r, Date(2013, 1, 7)));
        REQUIRE(monthly.size() == 1);
        CHECK(monthly.returns[0] == doctest::Approx(std::pow(1.01, 18) - 1.0).epsilon(1e-12));
    }

    SUBCASE("crafted crisis months give exactly 0.5") {
        ReturnSeries strat, bench;
        strat.instrument_id = "s";
        bench.instrument_id = "b";
        const double x = 0.02;  // sample std of the strategy months
        const std::vector<double> sv = {0.01, 0.01 + x, 0.01 - x, 0.01 + x, 0.01 - x};
        const std::vector<double> bv = {-0.05, 0.01, 0.02, 0.00, 0.01};
        for (std::size_t k = 0; k < 5; ++k) {
            strat.dates.push_back(Date(2015, static_cast<unsigned>(k + 1), 28));
            bench.dates.push_back(Date(2015, static_cast<unsigned>(k + 1), 28));
            strat.returns.push_back(sv[k]);
            bench.returns.push_back(bv[k]);
        }
        CHECK(conditional_sharpe(strat, bench) == doctest::Approx(0.5).epsilon(1e-12));

        ReturnSeries calm = bench;
        for (double& v : calm.returns) v = 0.01;
        CHECK_THROWS_WITH_AS(conditional_sharpe(strat, calm), doctest::Contains("NoCrisisMonths"),
                             Error);
    }

    SUBCASE("uncorrelated noise washes out over many months") {
        std::mt19937_64 rng(13);
        std::normal_distribution<double> gauss(0.0, 0.02);
        ReturnSeries strat, bench;
        strat.instrument_id = "s";
        bench.instrument_id = "b";
        Date d(2000, 1, 31);
        for (int k = 0; k < 10000; ++k) {
            strat.dates.push_back(d);
            bench.dates.push_back(d);
            strat.returns.push_back(gauss(rng));
            bench.returns.push_back(gauss(rng));
            d += 30;
        }
        CHECK(std::abs(conditional_sharpe(strat, bench)) < 0.1);
    }
}

TEST_CASE("cobb-douglas utility") {
    CHECK(cobb_douglas_utility(0.42, 0.9, 1.0) == doctest::Approx(0.42).epsilon(1e-15));
    // full-sample inputs from the two replication variants, exponent arithmetic
    const double pure = cobb_douglas_utility(0.69, 0.82, 0.8);
    const double dynamic = cobb_douglas_utility(0.74, 0.83, 0.8);
    CHECK(pure == doctest::Approx(std::pow(0.69, 0.8) * std::pow(0.82, 0.2)).epsilon(1e-12));
    CHECK(dynamic > pure);
    CHECK_THROWS_WITH_AS(cobb_douglas_utility(-0.1, 0.8, 0.8), doctest::Contains("NonPositiveInput"),
                         Error);
    CHECK_THROWS_AS(cobb_douglas_utility(0.5, 0.0, 0.8), Error);
    CHECK_THROWS_AS(cobb_douglas_utility(0.5, 0.8, 1.5), Error);

    SUBCASE("strictly increasing in both arguments") {
        std::mt19937_64 rng(17);
        std::uniform_real_distribution<double> u(0.05, 1.0);
        for (int k = 0; k < 50; ++k) {
            const double x = u(rng), c = u(rng), alpha = 0.8;
            CHECK(cobb_douglas_utility(x * 1.01, c, alpha) > cobb_douglas_utility(x, c, alpha));
            CHECK(cobb_douglas_utility(x, std::min(c * 1.01, 1.0), alpha) >=
                  cobb_douglas_utility(x, c, alpha));
        }
    }
}

TEST_CASE("cost model") {
    std::vector<market_data::Instrument> instruments{
        {"A", AssetClass::FX, 2.0, 2.0, ""},
    };

    SUBCASE("fee-only path loses about 50 bps over a year") {
        const auto gross = make_series("g", std::vector<double>(252, 0.0));
        const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(252, 1);
        const auto net = apply_costs(gross, zeros, zeros, instruments, 50.0);
        double wealth = 1.0;
        for (double r : net.returns) {
            CHECK(r == doctest::Approx(-50.0 / 1e4 / 252.0).epsilon(1e-12));
            wealth *= 1.0 + r;
        }
        CHECK(std::abs((wealth - 1.0) - (-0.0050)) < 1e-4);
    }

    SUBCASE("a single turnover day is charged at the transaction cost") {
        const auto gross = make_series("g", std::vector<double>(50, 0.0));
        Eigen::MatrixXd turnover = Eigen::MatrixXd::Zero(50, 1);
        Eigen::MatrixXd positions = Eigen::MatrixXd::Zero(50, 1);
        turnover(10, 0) = 1.0;
        const auto net = apply_costs(gross, turnover, positions, instruments, 0.0);
        CHECK(net.returns[10] == doctest::Approx(-2.0 / 1e4).epsilon(1e-12));
        CHECK(net.returns[11] == 0.0);
    }

    SUBCASE("roll cost accrues on open positions") {
        const auto gross = make_series("g", std::vector<double>(50, 0.0));
        Eigen::MatrixXd turnover = Eigen::MatrixXd::Zero(50, 1);
        Eigen::MatrixXd positions = Eigen::MatrixXd::Constant(50, 1, -2.0);  // short 2x
        const auto net = apply_costs(gross, turnover, positions, instruments, 0.0);
        for (double r : net.returns)
            CHECK(r == doctest::Approx(-2.0 * 2.0 / 1e4 / 252.0).epsilon(1e-12));
    }

    SUBCASE("all costs zero is the identity; costs only ever subtract") {
        std::mt19937_64 rng(19);
        std::normal_distribution<double> gauss(0.0, 0.01);
        std::vector<double> r(100);
        for (double& x : r) x = gauss(rng);
        const auto gross = make_series("g", r);
        std::vector<market_data::Instrument> free{{"A", AssetClass::FX, 0.0, 0.0, ""}};
        Eigen::MatrixXd turnover = Eigen::MatrixXd::Constant(100, 1, 0.3);
        Eigen::MatrixXd positions = Eigen::MatrixXd::Constant(100, 1, 0.7);
        const auto same = apply_costs(gross, turnover, positions, free, 0.0);
        for (std::size_t k = 0; k < 100; ++k) CHECK(same.returns[k] == gross.returns[k]);
        const auto charged = apply_costs(gross, turnover, positions, instruments, 50.0);
        for (std::size_t k = 0; k < 100; ++k) CHECK(charged.returns[k] <= gross.returns[k]);
    }

    SUBCASE("negative fee is rejected") {
        const auto gross = make_series("g", std::vector<double>(10, 0.0));
        const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(10, 1);
        CHECK_THROWS_WITH_AS(apply_costs(gross, zeros, zeros, instruments, -1.0),
                             doctest::Contains("NegativeCost"), Error);
    }
}

TEST_CASE("ablation z-scores") {
    SUBCASE("two identical strategies hit the degenerate-column rule") {
        AblationInput input;
        input.strategies = {"a", "b"};
        input.periods = {"p1", "p2"};
        input.sharpe = Eigen::MatrixXd::Constant(2, 2, 0.5);
        input.ret_over_maxdd = Eigen::MatrixXd::Constant(2, 2, 0.4);
        input.corr = Eigen::MatrixXd::Constant(2, 2, 0.8);
        const auto ranking = ablation_zscores(input);
        CHECK(ranking.had_degenerate_column);
        for (const auto& row : ranking.rows) CHECK(row.z_overall == doctest::Approx(0.0));
    }

    SUBCASE("three strategies, one period, hand-computed standardization") {
        AblationInput input;
        input.strategies = {"a", "b", "c"};
        input.periods = {"p1"};
        input.sharpe = (Eigen::MatrixXd(1, 3) << 0.1, 0.2, 0.6).finished();
        input.ret_over_maxdd = (Eigen::MatrixXd(1, 3) << 0.3, 0.3, 0.3).finished();
        input.corr = (Eigen::MatrixXd(1, 3) << 0.7, 0.8, 0.9).finished();
        const auto ranking = ablation_zscores(input);
        // sharpe column: mean 0.3, population std sqrt(0.14/3)
        const double sd = std::sqrt((0.04 + 0.01 + 0.09) / 3.0);
        REQUIRE(ranking.rows.size() == 3);
        CHECK(ranking.rows[0].strategy == "c");
        CHECK(ranking.rows[0].z_sharpe == doctest::Approx(0.3 / sd).epsilon(1e-12));
        CHECK(ranking.rows[0].z_corr == doctest::Approx(0.1 / std::sqrt(0.02 / 3)).epsilon(1e-12));
        CHECK(ranking.rows[0].z_ret_over_maxdd == doctest::Approx(0.0));
        CHECK(ranking.had_degenerate_column);  // flat ret/maxdd column
        CHECK(ranking.rows[2].strategy == "a");
    }

    SUBCASE("affine transforms of a metric column leave z-scores unchanged") {
        std::mt19937_64 rng(23);
        std::uniform_real_distribution<double> u(0.1, 1.0);
        AblationInput input;
        input.strategies = {"a", "b", "c", "d"};
        input.periods = {"p1", "p2"};
        auto fill = [&] {
            Eigen::MatrixXd m(2, 4);
            for (int i = 0; i < m.size(); ++i) m(i) = u(rng);
            return m;
        };
        input.sharpe = fill();
        input.ret_over_maxdd = fill();
        input.corr = fill();
        const auto base = ablation_zscores(input);
        AblationInput scaled = input;
        scaled.sharpe = 3.0 * input.sharpe.array() + 7.0;  // same transform per period
        const auto moved = ablation_zscores(scaled);
        for (std::size_t k = 0; k < base.rows.size(); ++k) {
            CHECK(base.rows[k].strategy == moved.rows[k].strategy);
            CHECK(base.rows[k].z_sharpe == doctest::Approx(moved.rows[k].z_sharpe).epsilon(1e-10));
        }
    }

    SUBCASE("input validation") {
        AblationInput input;
        input.strategies = {"a"};
        input.periods = {"p"};
        input.sharpe = input.ret_over_maxdd = input.corr = Eigen::MatrixXd::Zero(1, 1);
        CHECK_THROWS_WITH_AS(ablation_zscores(input), doctest::Contains("InsufficientData"), Error);
    }
}

TEST_CASE("horizon clustering") {
    SUBCASE("identical series merge at distance zero") {
        std::vector<double> r(60);
        std::mt19937_64 rng(29);
        std::normal_distribution<double> gauss(0.0, 0.01);
        for (double& x : r) x = gauss(rng);
        const auto tree = horizon_cluster({{"x", make_series("x", r)}, {"y", make_series("y", r)}});
        REQUIRE(tree.merges.size() == 1);
        CHECK(tree.merges[0].distance == doctest::Approx(0.0));
    }

    SUBCASE("perfectly anti-correlated series merge at distance two") {
        std::vector<double> r(60), neg(60);
        std::mt19937_64 rng(31);
        std::normal_distribution<double> gauss(0.0, 0.01);
        for (std::size_t k = 0; k < 60; ++k) {
            r[k] = gauss(rng);
            neg[k] = -r[k];
        }
        const auto tree =
            horizon_cluster({{"x", make_series("x", r)}, {"y", make_series("y", neg)}});
        CHECK(tree.merges[0].distance == doctest::Approx(2.0));
    }

    SUBCASE("planted fast/slow clusters with a 125d blend") {
        std::mt19937_64 rng(37);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const int T = 2000;
        std::vector<double> fast(T), slow(T);
        for (int t = 0; t < T; ++t) {
            fast[t] = gauss(rng);
            slow[t] = gauss(rng);
        }
        auto mix = [&](double wf, double ws, double noise, unsigned seed) {
            std::mt19937_64 r2(seed);
            std::normal_distribution<double> g2(0.0, noise);
            std::vector<double> out(T);
            for (int t = 0; t < T; ++t) out[t] = wf * fast[t] + ws * slow[t] + g2(r2);
            return out;
        };
        const auto tree = horizon_cluster({
            {"20", make_series("20", mix(1.0, 0.0, 0.15, 1))},
            {"60", make_series("60", mix(1.0, 0.0, 0.30, 2))},
            {"125", make_series("125", mix(0.5, 0.5, 0.40, 3))},
            {"250", make_series("250", mix(0.0, 1.0, 0.30, 4))},
            {"500", make_series("500", mix(0.0, 1.0, 0.15, 5))},
        });
        REQUIRE(tree.merges.size() == 4);
        // first two merges join (20, 60) and (250, 500) in either order
        auto joins = [&](const MergeStep& m, int a, int b) {
            return (m.left == a && m.right == b) || (m.left == b && m.right == a);
        };
        CHECK((joins(tree.merges[0], 0, 1) || joins(tree.merges[0], 3, 4)));
        CHECK((joins(tree.merges[1], 0, 1) || joins(tree.merges[1], 3, 4)));
        CHECK(tree.merges[0].left != tree.merges[1].left);
        // the blend joins last, at the largest distance
        CHECK(tree.merges[3].distance >= tree.merges[2].distance);
        CHECK(tree.merges[2].distance >= tree.merges[1].distance);
        bool blend_in_last_two = false;
        for (int k = 2; k < 4; ++k)
            if (tree.merges[k].left == 2 || tree.merges[k].right == 2) blend_in_last_two = true;
        CHECK(blend_in_last_two);
    }

    SUBCASE("overlap floor and size floor") {
        CHECK_THROWS_AS(horizon_cluster({{"x", make_series("x", std::vector<double>(60, 0.01))}}),
                        Error);
        const auto a = make_series("a", std::vector<double>(60, 0.01), Date(2013, 1, 7));
        const auto b = make_series("b", std::vector<double>(60, 0.01), Date(2019, 1, 7));
        CHECK_THROWS_WITH_AS(horizon_cluster({{"a", a}, {"b", b}}),
                             doctest::Contains("InsufficientOverlap"), Error);
    }
}

TEST_CASE("strategy variant parsing") {
    CHECK(StrategyVariant::parse("pure_trend").kind == StrategyVariant::Kind::PureTrend);
    CHECK(StrategyVariant::parse("all_horizons").kind == StrategyVariant::Kind::PureTrend);
    CHECK(StrategyVariant::parse("no_125").horizon == 125);
    CHECK(StrategyVariant::parse("single_250").kind == StrategyVariant::Kind::SingleHorizon);
    CHECK(StrategyVariant::parse("dynamic_trend").name() == "dynamic_trend");
    CHECK_THROWS_WITH_AS(StrategyVariant::parse("bogus"), doctest::Contains("UnknownVariant"),
                         Error);
    signals::HorizonSet horizons;
    CHECK_THROWS_AS(StrategyVariant::leave_one_out(99).validate(horizons), Error);
    CHECK_NOTHROW(StrategyVariant::leave_one_out(125).validate(horizons));
}
