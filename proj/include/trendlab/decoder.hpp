#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "trendlab/market_data.hpp"

namespace trendlab::decoder {

using market_data::ReturnSeries;

struct StateSpaceParams {
    double obs_noise_var = 1e-4;       // variance of the observation noise
    Eigen::VectorXd state_noise_vars;  // tau_i^2 per asset (random-walk drift)
    Eigen::VectorXd initial_mean;      // prior exposure vector
    double initial_var = 1.0;          // prior covariance scale (times identity)

    void validate(Eigen::Index n_assets) const;
};

/// Filtered exposures of the random-walk-coefficient regression.
struct ExposurePath {
    std::vector<Date> dates;
    std::vector<std::string> assets;
    Eigen::MatrixXd means;      // (T x N) filtered posterior means
    Eigen::MatrixXd variances;  // (T x N) filtered posterior variances (diagonal)
    std::vector<double> innovations;      // one-step prediction errors
    std::vector<double> innovation_vars;  // their predicted variances
};

/// Observation r_t = x_t' w_t + eps, state w_t = w_{t-1} + eta. `design` is
/// (T x N); NaN entries are treated as zero (no information about that
/// asset). Standard predict/update recursion, filtering only.
ExposurePath kalman_filter(const ReturnSeries& portfolio_returns,
                           const Eigen::MatrixXd& design,
                           const std::vector<std::string>& assets,
                           const StateSpaceParams& params);

/// Observation variance from the residuals of a lightly ridge-regularized
/// regression of the returns on the design; state variance pinned at
/// obs_noise_var / snr_ratio. Deterministic.
StateSpaceParams fit_noise_params(const ReturnSeries& portfolio_returns,
                                  const Eigen::MatrixXd& design,
                                  double snr_ratio = 2500.0,
                                  double initial_var = 1.0);

/// Zeroes exposures below sparsity_eps, then rebuilds the path from its
/// per-step changes with each step vector proportionally clipped so that
/// sum_i |dw_i| <= max_turnover_per_step. Identity on compliant paths.
ExposurePath apply_exposure_controls(const ExposurePath& path, double sparsity_eps,
                                     double max_turnover_per_step);

void write_exposure_csv(const std::string& path, const ExposurePath& exposures);

}  // namespace trendlab::decoder
