#pragma once

#include <string>
#include <vector>

#include "trendlab/backtest.hpp"

namespace trendlab::report_io {

/// One JSON document covering every variant of a run; identical inputs
/// produce identical bytes.
std::string report_json(const std::vector<backtest::BacktestReport>& reports, double alpha);

void write_text_file(const std::string& path, const std::string& content);

/// `period,variant,sharpe,ret_over_maxdd,corr,utility` rows for all variants.
void write_metrics_csv(const std::string& path,
                       const std::vector<backtest::BacktestReport>& reports);

void write_zscores_csv(const std::string& path, const backtest::AblationRanking& ranking);

/// Metric tables (periods x strategies) assembled from finished reports,
/// ready for ablation_zscores.
backtest::AblationInput ablation_input_from_reports(
    const std::vector<backtest::BacktestReport>& reports);

std::string render_cluster_text(const backtest::ClusterTree& tree);

/// Static dendrogram rendering.
std::string cluster_svg(const backtest::ClusterTree& tree);

/// Return/MaxDD vs benchmark-correlation scatter with iso-utility contours
/// at the given exponent.
std::string iso_utility_svg(const std::vector<backtest::BacktestReport>& reports, double alpha);

}  // namespace trendlab::report_io
