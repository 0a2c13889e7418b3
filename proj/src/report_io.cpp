#include "trendlab/report_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "trendlab/errors.hpp"

namespace trendlab::report_io {

namespace {

std::string fmt(double v, int digits = 10) {
    if (std::isnan(v)) return "null";
    if (std::isinf(v)) return v > 0 ? "\"inf\"" : "\"-inf\"";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

std::string metrics_json(const backtest::PeriodMetrics& pm) {
    std::ostringstream out;
    out << "{\"label\":\"" << pm.label << "\",\"ann_return\":" << fmt(pm.row.ann_return)
        << ",\"ann_vol\":" << fmt(pm.row.ann_vol) << ",\"sharpe\":" << fmt(pm.row.sharpe)
        << ",\"max_drawdown\":" << fmt(pm.row.max_drawdown)
        << ",\"ret_over_maxdd\":" << fmt(pm.row.ret_over_maxdd)
        << ",\"benchmark_corr\":" << fmt(pm.row.benchmark_corr)
        << ",\"conditional_sharpe\":" << fmt(pm.row.conditional_sharpe)
        << ",\"utility\":" << fmt(pm.utility) << "}";
    return out.str();
}

}  // namespace

std::string report_json(const std::vector<backtest::BacktestReport>& reports, double alpha) {
    std::ostringstream out;
    out << "{\"schema\":\"trendlab.report.v1\",\"alpha\":" << fmt(alpha) << ",\"conventions\":"
        << "{\"ann_return\":\"arithmetic daily mean x 252\","
        << "\"wealth_path\":\"geometric compounding\",\"risk_free\":0},\"variants\":[";
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const auto& report = reports[k];
        out << (k ? "," : "") << "{\"name\":\"" << report.variant.name() << "\"";
        out << ",\"oos_start\":\"" << report.dates.front().to_iso() << "\"";
        out << ",\"oos_end\":\"" << report.dates.back().to_iso() << "\"";
        out << ",\"n_days\":" << report.dates.size();
        out << ",\"n_windows\":" << report.window_starts.size();
        double turnover = 0.0;
        for (double t : report.turnover) turnover += t;
        out << ",\"avg_daily_turnover\":"
            << fmt(turnover / static_cast<double>(report.turnover.size()));
        out << ",\"full_sample\":" << metrics_json(report.full_sample);
        out << ",\"periods\":[";
        for (std::size_t p = 0; p < report.period_metrics.size(); ++p)
            out << (p ? "," : "") << metrics_json(report.period_metrics[p]);
        out << "]}";
    }
    out << "]}";
    return out.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << content;
}

void write_metrics_csv(const std::string& path,
                       const std::vector<backtest::BacktestReport>& reports) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "period,variant,sharpe,ret_over_maxdd,corr,utility\n";
    auto row = [&](const std::string& variant, const backtest::PeriodMetrics& pm) {
        out << pm.label << ',' << variant << ',' << fmt(pm.row.sharpe) << ','
            << fmt(pm.row.ret_over_maxdd) << ',' << fmt(pm.row.benchmark_corr) << ','
            << fmt(pm.utility) << '\n';
    };
    for (const auto& report : reports) {
        for (const auto& pm : report.period_metrics) row(report.variant.name(), pm);
        row(report.variant.name(), report.full_sample);
    }
}

void write_zscores_csv(const std::string& path, const backtest::AblationRanking& ranking) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "strategy,z_sharpe,z_ret_over_maxdd,z_corr,z_overall\n";
    for (const auto& row : ranking.rows)
        out << row.strategy << ',' << fmt(row.z_sharpe) << ',' << fmt(row.z_ret_over_maxdd) << ','
            << fmt(row.z_corr) << ',' << fmt(row.z_overall) << '\n';
}

backtest::AblationInput ablation_input_from_reports(
    const std::vector<backtest::BacktestReport>& reports) {
    if (reports.empty()) throw Error(ErrorCode::InsufficientData, "no reports");
    backtest::AblationInput input;
    for (const auto& report : reports) input.strategies.push_back(report.variant.name());
    for (const auto& pm : reports.front().period_metrics) input.periods.push_back(pm.label);
    const Eigen::Index P = static_cast<Eigen::Index>(input.periods.size());
    const Eigen::Index S = static_cast<Eigen::Index>(input.strategies.size());
    input.sharpe.resize(P, S);
    input.ret_over_maxdd.resize(P, S);
    input.corr.resize(P, S);
    for (Eigen::Index s = 0; s < S; ++s) {
        const auto& report = reports[static_cast<std::size_t>(s)];
        if (report.period_metrics.size() != static_cast<std::size_t>(P))
            throw Error(ErrorCode::MisalignedDates, "variants disagree on evaluation periods");
        for (Eigen::Index p = 0; p < P; ++p) {
            const auto& row = report.period_metrics[static_cast<std::size_t>(p)].row;
            input.sharpe(p, s) = row.sharpe;
            input.ret_over_maxdd(p, s) = row.ret_over_maxdd;
            input.corr(p, s) = row.benchmark_corr;
        }
    }
    return input;
}

std::string render_cluster_text(const backtest::ClusterTree& tree) {
    std::ostringstream out;
    out << "leaves:";
    for (const auto& leaf : tree.leaves) out << ' ' << leaf;
    out << '\n';
    auto name_of = [&](int id) {
        if (id < static_cast<int>(tree.leaves.size()))
            return tree.leaves[static_cast<std::size_t>(id)];
        return "cluster#" + std::to_string(id);
    };
    const int n = static_cast<int>(tree.leaves.size());
    for (std::size_t k = 0; k < tree.merges.size(); ++k) {
        const auto& m = tree.merges[k];
        out << "merge " << (n + static_cast<int>(k)) << ": " << name_of(m.left) << " + "
            << name_of(m.right) << " @ " << fmt(m.distance, 6) << " (size " << m.size << ")\n";
    }
    return out.str();
}

std::string cluster_svg(const backtest::ClusterTree& tree) {
    const int n = static_cast<int>(tree.leaves.size());
    const double width = 640, height = 80.0 + 40.0 * n, left = 140, right = width - 30;
    double max_dist = 1e-9;
    for (const auto& m : tree.merges) max_dist = std::max(max_dist, m.distance);
    auto x_of = [&](double d) { return left + (right - left) * d / (max_dist * 1.1); };

    // leaf rows in merge order so subtrees stay contiguous
    std::vector<double> node_y(static_cast<std::size_t>(n) + tree.merges.size(), 0.0);
    std::vector<double> node_x(node_y.size(), left);
    for (int i = 0; i < n; ++i) {
        node_y[static_cast<std::size_t>(i)] = 60.0 + 40.0 * i;
        node_x[static_cast<std::size_t>(i)] = left;
    }
    std::ostringstream body;
    for (std::size_t k = 0; k < tree.merges.size(); ++k) {
        const auto& m = tree.merges[k];
        const double ya = node_y[static_cast<std::size_t>(m.left)];
        const double yb = node_y[static_cast<std::size_t>(m.right)];
        const double x = x_of(m.distance);
        const double xa = node_x[static_cast<std::size_t>(m.left)];
        const double xb = node_x[static_cast<std::size_t>(m.right)];
        body << "<line x1='" << fmt(xa, 6) << "' y1='" << fmt(ya, 6) << "' x2='" << fmt(x, 6)
             << "' y2='" << fmt(ya, 6) << "' stroke='#36648b'/>";
        body << "<line x1='" << fmt(xb, 6) << "' y1='" << fmt(yb, 6) << "' x2='" << fmt(x, 6)
             << "' y2='" << fmt(yb, 6) << "' stroke='#36648b'/>";
        body << "<line x1='" << fmt(x, 6) << "' y1='" << fmt(ya, 6) << "' x2='" << fmt(x, 6)
             << "' y2='" << fmt(yb, 6) << "' stroke='#36648b'/>";
        node_y[static_cast<std::size_t>(n) + k] = 0.5 * (ya + yb);
        node_x[static_cast<std::size_t>(n) + k] = x;
    }
    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>";
    out << "<text x='20' y='30' font-family='monospace' font-size='14'>horizon dendrogram "
           "(1 - correlation)</text>";
    for (int i = 0; i < n; ++i)
        out << "<text x='20' y='" << fmt(64.0 + 40.0 * i, 6)
            << "' font-family='monospace' font-size='13'>" << tree.leaves[static_cast<std::size_t>(i)]
            << "</text>";
    out << body.str();
    // distance axis ticks
    for (int k = 0; k <= 4; ++k) {
        const double d = max_dist * 1.1 * k / 4.0;
        out << "<text x='" << fmt(x_of(d) - 10, 6) << "' y='" << fmt(height - 12, 6)
            << "' font-family='monospace' font-size='11'>" << fmt(d, 3) << "</text>";
    }
    out << "</svg>\n";
    return out.str();
}

std::string iso_utility_svg(const std::vector<backtest::BacktestReport>& reports, double alpha) {
    const double width = 720, height = 520;
    const double lpad = 70, rpad = 20, tpad = 40, bpad = 50;
    double max_y = 0.5;
    for (const auto& report : reports) {
        for (const auto& pm : report.period_metrics)
            if (std::isfinite(pm.row.ret_over_maxdd))
                max_y = std::max(max_y, pm.row.ret_over_maxdd);
        if (std::isfinite(report.full_sample.row.ret_over_maxdd))
            max_y = std::max(max_y, report.full_sample.row.ret_over_maxdd);
    }
    max_y *= 1.15;
    auto sx = [&](double corr) { return lpad + (width - lpad - rpad) * corr; };
    auto sy = [&](double r) { return height - bpad - (height - tpad - bpad) * (r / max_y); };

    std::ostringstream out;
    out << "<svg xmlns='http://www.w3.org/2000/svg' width='" << width << "' height='" << height
        << "'>";
    out << "<text x='20' y='24' font-family='monospace' font-size='14'>return/maxdd vs benchmark "
           "correlation, iso-utility alpha="
        << fmt(alpha, 4) << "</text>";
    // axes
    out << "<line x1='" << lpad << "' y1='" << sy(0) << "' x2='" << width - rpad << "' y2='"
        << sy(0) << "' stroke='#444'/>";
    out << "<line x1='" << lpad << "' y1='" << sy(0) << "' x2='" << lpad << "' y2='" << tpad
        << "' stroke='#444'/>";
    for (int k = 0; k <= 5; ++k) {
        const double c = k / 5.0;
        out << "<text x='" << fmt(sx(c) - 8, 6) << "' y='" << height - bpad + 18
            << "' font-family='monospace' font-size='11'>" << fmt(c, 2) << "</text>";
        const double r = max_y * k / 5.0;
        out << "<text x='" << 16 << "' y='" << fmt(sy(r) + 4, 6)
            << "' font-family='monospace' font-size='11'>" << fmt(r, 3) << "</text>";
    }
    // iso-utility contours U = x^alpha c^(1-alpha): x(c) = (U / c^(1-alpha))^(1/alpha)
    for (int level = 1; level <= 5; ++level) {
        const double U = max_y * level / 6.0;
        out << "<polyline fill='none' stroke='#bbb' stroke-dasharray='4 3' points='";
        for (double c = 0.05; c <= 1.0001; c += 0.01) {
            const double x = std::pow(U / std::pow(c, 1.0 - alpha), 1.0 / alpha);
            if (x > max_y * 1.3) continue;
            out << fmt(sx(c), 6) << ',' << fmt(sy(std::min(x, max_y)), 6) << ' ';
        }
        out << "'/>";
    }
    const char* palette[] = {"#c0392b", "#2e6da4", "#1e8449", "#8e44ad", "#b7950b", "#333333"};
    for (std::size_t k = 0; k < reports.size(); ++k) {
        const char* color = palette[k % 6];
        const auto& report = reports[k];
        for (const auto& pm : report.period_metrics) {
            if (!std::isfinite(pm.row.ret_over_maxdd) || !std::isfinite(pm.row.benchmark_corr))
                continue;
            out << "<circle cx='" << fmt(sx(pm.row.benchmark_corr), 6) << "' cy='"
                << fmt(sy(std::min(pm.row.ret_over_maxdd, max_y)), 6) << "' r='4' fill='" << color
                << "'/>";
        }
        out << "<text x='" << width - 200 << "' y='" << tpad + 18.0 * static_cast<double>(k)
            << "' font-family='monospace' font-size='12' fill='" << color << "'>"
            << report.variant.name() << "</text>";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace trendlab::report_io
