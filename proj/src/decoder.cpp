#include "trendlab/decoder.hpp"

#include <cmath>
#include <fstream>

#include "trendlab/errors.hpp"

namespace trendlab::decoder {

void StateSpaceParams::validate(Eigen::Index n_assets) const {
    if (!(obs_noise_var > 0.0))
        throw Error(ErrorCode::ParameterOutOfRange, "obs_noise_var must be > 0");
    if (state_noise_vars.size() != n_assets || initial_mean.size() != n_assets)
        throw Error(ErrorCode::MisalignedDates, "parameter vectors do not match asset count");
    if ((state_noise_vars.array() < 0.0).any())
        throw Error(ErrorCode::ParameterOutOfRange, "state noise variances must be >= 0");
    if (!(initial_var > 0.0))
        throw Error(ErrorCode::ParameterOutOfRange, "initial_var must be > 0");
}

ExposurePath kalman_filter(const ReturnSeries& portfolio_returns,
                           const Eigen::MatrixXd& design,
                           const std::vector<std::string>& assets,
                           const StateSpaceParams& params) {
    const Eigen::Index T = design.rows();
    const Eigen::Index N = design.cols();
    if (N < 1) throw Error(ErrorCode::EmptyUniverse, "design matrix has no assets");
    if (static_cast<Eigen::Index>(portfolio_returns.size()) != T ||
        static_cast<Eigen::Index>(assets.size()) != N)
        throw Error(ErrorCode::MisalignedDates, "returns/design/assets shapes disagree");
    params.validate(N);

    ExposurePath out;
    out.dates = portfolio_returns.dates;
    out.assets = assets;
    out.means.resize(T, N);
    out.variances.resize(T, N);

    Eigen::VectorXd w = params.initial_mean;
    Eigen::MatrixXd P = params.initial_var * Eigen::MatrixXd::Identity(N, N);
    const Eigen::MatrixXd Q = params.state_noise_vars.asDiagonal();
    Eigen::VectorXd x(N);
    for (Eigen::Index t = 0; t < T; ++t) {
        P += Q;
        for (Eigen::Index i = 0; i < N; ++i) {
            const double v = design(t, i);
            x(i) = std::isnan(v) ? 0.0 : v;  // masked score: no information
        }
        const Eigen::VectorXd Px = P * x;
        const double innovation_var = x.dot(Px) + params.obs_noise_var;
        if (!(innovation_var > 0.0))
            throw Error(ErrorCode::SingularInnovation,
                        "innovation variance <= 0 at " + out.dates[static_cast<std::size_t>(t)].to_iso());
        const Eigen::VectorXd gain = Px / innovation_var;
        const double innovation = portfolio_returns.returns[static_cast<std::size_t>(t)] - x.dot(w);
        out.innovations.push_back(innovation);
        out.innovation_vars.push_back(innovation_var);
        w += gain * innovation;
        // Joseph form keeps P positive semidefinite under near-exact fits
        const Eigen::MatrixXd shrink =
            Eigen::MatrixXd::Identity(N, N) - gain * x.transpose();
        P = shrink * P * shrink.transpose() + params.obs_noise_var * gain * gain.transpose();
        P = 0.5 * (P + P.transpose());
        out.means.row(t) = w.transpose();
        out.variances.row(t) = P.diagonal().transpose();
    }
    return out;
}

StateSpaceParams fit_noise_params(const ReturnSeries& portfolio_returns,
                                  const Eigen::MatrixXd& design,
                                  double snr_ratio, double initial_var) {
    const Eigen::Index T = design.rows();
    const Eigen::Index N = design.cols();
    if (static_cast<Eigen::Index>(portfolio_returns.size()) != T)
        throw Error(ErrorCode::MisalignedDates, "returns/design shapes disagree");
    if (T < 252) throw Error(ErrorCode::InsufficientData, "need at least 252 observations");
    if (!(snr_ratio > 0.0))
        throw Error(ErrorCode::ParameterOutOfRange, "snr_ratio must be > 0");

    Eigen::MatrixXd X = design;
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index i = 0; i < N; ++i)
            if (std::isnan(X(t, i))) X(t, i) = 0.0;
    Eigen::VectorXd y(T);
    for (Eigen::Index t = 0; t < T; ++t) y(t) = portfolio_returns.returns[static_cast<std::size_t>(t)];

    const Eigen::MatrixXd gram = X.transpose() * X;
    const double ridge = 1e-8 * std::max(gram.trace(), 1e-300);
    const Eigen::MatrixXd reg = gram + ridge * Eigen::MatrixXd::Identity(N, N);
    const Eigen::VectorXd beta = reg.ldlt().solve(X.transpose() * y);
    const Eigen::VectorXd resid = y - X * beta;
    const double mean = resid.mean();
    const double resid_var =
        (resid.array() - mean).square().sum() / static_cast<double>(T - 1);

    const double y_var = (y.array() - y.mean()).square().sum() / static_cast<double>(T - 1);
    StateSpaceParams params;
    params.obs_noise_var = std::max({resid_var, 1e-10 * y_var, 1e-24});
    params.state_noise_vars = Eigen::VectorXd::Constant(N, params.obs_noise_var / snr_ratio);
    params.initial_mean = Eigen::VectorXd::Zero(N);
    params.initial_var = initial_var;
    return params;
}

ExposurePath apply_exposure_controls(const ExposurePath& path, double sparsity_eps,
                                     double max_turnover_per_step) {
    if (sparsity_eps < 0.0)
        throw Error(ErrorCode::ParameterOutOfRange, "sparsity_eps must be >= 0");
    if (!(max_turnover_per_step > 0.0))
        throw Error(ErrorCode::ParameterOutOfRange, "max_turnover_per_step must be > 0");

    ExposurePath out = path;
    const Eigen::Index T = out.means.rows();
    const Eigen::Index N = out.means.cols();
    if (T == 0) return out;

    Eigen::MatrixXd sparse = path.means;
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index i = 0; i < N; ++i)
            if (std::abs(sparse(t, i)) < sparsity_eps) sparse(t, i) = 0.0;

    // rebuild from per-step changes of the sparsified path, each step vector
    // scaled down so its L1 norm never exceeds the turnover budget; the carry
    // tracks clip shortfalls so unclipped stretches reproduce the input exactly
    out.means.row(0) = sparse.row(0);
    Eigen::RowVectorXd carry = Eigen::RowVectorXd::Zero(N);
    for (Eigen::Index t = 1; t < T; ++t) {
        const Eigen::RowVectorXd step = sparse.row(t) - sparse.row(t - 1);
        const double l1 = step.cwiseAbs().sum();
        if (l1 > max_turnover_per_step * (1.0 + 1e-12))  // rounding slack keeps reruns fixed points
            carry += (max_turnover_per_step / l1 - 1.0) * step;
        out.means.row(t) = sparse.row(t) + carry;
    }
    return out;
}

void write_exposure_csv(const std::string& path, const ExposurePath& exposures) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "date,asset,mean,variance\n";
    char buf[96];
    for (Eigen::Index t = 0; t < exposures.means.rows(); ++t)
        for (Eigen::Index i = 0; i < exposures.means.cols(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g", exposures.means(t, i),
                          exposures.variances(t, i));
            out << exposures.dates[static_cast<std::size_t>(t)].to_iso() << ','
                << exposures.assets[static_cast<std::size_t>(i)] << ',' << buf << '\n';
        }
}

}  // namespace trendlab::decoder
