#include "trendlab/allocator.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

#include "trendlab/errors.hpp"

namespace trendlab::allocator {

namespace {

constexpr double kSingularTol = 1e-12;  // relative cutoff for zero eigenvalues

void check_dim(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) throw Error(ErrorCode::DimensionZero, "empty covariance matrix");
}

/// Equality-constrained minimum on a (sub)matrix; PD fast path via Cholesky,
/// PSD fallback shared with min_variance_psd. Throws OnesInKernel when the
/// budget constraint cannot pin a solution.
AllocationResult solve_budget_constrained(const Eigen::MatrixXd& S) {
    check_dim(S);
    const Eigen::Index n = S.rows();
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(n);

    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() == Eigen::Success) {
        const Eigen::VectorXd sinv_ones = llt.solve(ones);
        const double denom = ones.dot(sinv_ones);
        // denormal pivots slip through Cholesky with infinite solves
        if (!(denom > 0) || !std::isfinite(denom) || !sinv_ones.allFinite())
            throw Error(ErrorCode::NotPositiveDefinite, "numerically singular covariance");
        AllocationResult out;
        out.weights = sinv_ones / denom;
        out.variance = 1.0 / denom;
        out.route = Route::ClosedForm;
        return out;
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S);
    if (eig.info() != Eigen::Success)
        throw Error(ErrorCode::NotPositiveDefinite, "eigendecomposition failed");
    const Eigen::VectorXd& evals = eig.eigenvalues();
    const Eigen::MatrixXd& evecs = eig.eigenvectors();
    const double lambda_max = std::max(evals.cwiseAbs().maxCoeff(), 0.0);
    const double tol = kSingularTol * std::max(lambda_max, 1.0);
    if (evals.minCoeff() < -tol)
        throw Error(ErrorCode::NotPositiveDefinite, "matrix has a negative eigenvalue");

    if ((S * ones).cwiseAbs().maxCoeff() <= tol * std::sqrt(static_cast<double>(n)))
        throw Error(ErrorCode::OnesInKernel, "1' S+ 1 vanishes");

    // kernel component of the ones vector -> zero-variance feasible solutions
    Eigen::VectorXd ker_ones = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k)
        if (evals(k) <= tol) ker_ones += evecs.col(k).dot(ones) * evecs.col(k);

    AllocationResult out;
    out.route = Route::Pseudoinverse;
    const double ker_norm2 = ker_ones.squaredNorm();
    if (ker_norm2 > kSingularTol * static_cast<double>(n)) {
        out.weights = ker_ones / ker_norm2;  // 1' w = |P_ker 1|^2 / |P_ker 1|^2 = 1
        out.variance = 0.0;
        return out;
    }

    Eigen::VectorXd pinv_ones = Eigen::VectorXd::Zero(n);
    for (Eigen::Index k = 0; k < n; ++k)
        if (evals(k) > tol) pinv_ones += evecs.col(k).dot(ones) / evals(k) * evecs.col(k);
    const double denom = ones.dot(pinv_ones);
    if (std::abs(denom) <= kSingularTol)
        throw Error(ErrorCode::OnesInKernel, "1' S+ 1 vanishes");
    out.weights = pinv_ones / denom;
    out.variance = std::max(out.weights.dot(S * out.weights), 0.0);
    return out;
}

}  // namespace

CovarianceMatrix CovarianceMatrix::from(const Eigen::MatrixXd& raw) {
    if (raw.rows() != raw.cols())
        throw Error(ErrorCode::NotSymmetric, "matrix is not square");
    check_dim(raw);
    const double scale = std::max(raw.cwiseAbs().maxCoeff(), 1.0);
    const double asym = (raw - raw.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12 * scale)
        throw Error(ErrorCode::NotSymmetric, "asymmetry exceeds 1e-12 tolerance");
    CovarianceMatrix out;
    out.m = 0.5 * (raw + raw.transpose());
    for (Eigen::Index i = 0; i < out.m.rows(); ++i)
        if (out.m(i, i) < 0)
            throw Error(ErrorCode::NotPositiveDefinite, "negative diagonal entry");
    return out;
}

void ToeplitzModel::validate() const {
    if (!(rho >= 0.0 && rho < 1.0))
        throw Error(ErrorCode::ParameterOutOfRange, "rho must lie in [0, 1)");
    if (!(delta >= 0.0 && delta < 1.0))
        throw Error(ErrorCode::ParameterOutOfRange, "delta must lie in [0, 1)");
    if (!(mu > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "mu must be > 0");
    if (!(sigma > 0.0)) throw Error(ErrorCode::ParameterOutOfRange, "sigma must be > 0");
}

bool ToeplitzModel::is_positive_definite() const { return rho * rho < (1.0 + delta) / 2.0; }

const char* route_name(Route r) {
    switch (r) {
        case Route::ClosedForm: return "closed_form";
        case Route::Whitened: return "whitened";
        case Route::Pseudoinverse: return "pseudoinverse";
        case Route::ConstrainedSimplex: return "constrained_simplex";
    }
    return "closed_form";
}

AllocationResult min_variance_closed_form(const CovarianceMatrix& S) {
    check_dim(S.m);
    Eigen::LLT<Eigen::MatrixXd> llt(S.m);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(S.dim());
    const Eigen::VectorXd sinv_ones = llt.solve(ones);
    const double denom = ones.dot(sinv_ones);
    if (!(denom > 0) || !std::isfinite(denom) || !sinv_ones.allFinite())
        throw Error(ErrorCode::NotPositiveDefinite, "numerically singular covariance");
    AllocationResult out;
    out.weights = sinv_ones / denom;
    out.variance = 1.0 / denom;
    out.route = Route::ClosedForm;
    return out;
}

AllocationResult min_variance_whitened(const CovarianceMatrix& S) {
    check_dim(S.m);
    Eigen::LLT<Eigen::MatrixXd> llt(S.m);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotPositiveDefinite, "Cholesky factorization failed");
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(S.dim());
    // a = L^-1 1, x* = a / |a|^2, w* = L^-T x*
    const Eigen::MatrixXd L = llt.matrixL();
    const Eigen::VectorXd a = L.triangularView<Eigen::Lower>().solve(ones);
    const double a_norm2 = a.squaredNorm();
    if (!std::isfinite(a_norm2) || !(a_norm2 > 0))
        throw Error(ErrorCode::NotPositiveDefinite, "numerically singular covariance");
    const Eigen::VectorXd x = a / a_norm2;
    AllocationResult out;
    out.weights = L.transpose().triangularView<Eigen::Upper>().solve(x);
    out.variance = x.squaredNorm();
    out.route = Route::Whitened;
    return out;
}

AllocationResult min_variance_psd(const CovarianceMatrix& S) {
    AllocationResult out = solve_budget_constrained(S.m);
    out.route = Route::Pseudoinverse;
    return out;
}

AllocationResult min_variance_simplex(const CovarianceMatrix& S) {
    const Eigen::Index n = S.dim();
    check_dim(S.m);
    if (n > 12)
        throw Error(ErrorCode::DimensionTooLarge,
                    "support enumeration refused above dimension 12");

    constexpr double kFeasTol = 1e-12;
    constexpr double kTieTol = 1e-12;
    bool found = false;
    Eigen::VectorXd best_w;
    double best_var = 0.0;
    int best_support = 0;

    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        std::vector<Eigen::Index> idx;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        Eigen::MatrixXd sub(idx.size(), idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r)
            for (std::size_t c = 0; c < idx.size(); ++c)
                sub(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                    S.m(idx[r], idx[c]);

        AllocationResult sol;
        try {
            sol = solve_budget_constrained(sub);
        } catch (const Error&) {
            continue;  // degenerate support
        }
        if (!sol.weights.allFinite() || (sol.weights.array() < -kFeasTol).any()) continue;

        Eigen::VectorXd full = Eigen::VectorXd::Zero(n);
        for (std::size_t r = 0; r < idx.size(); ++r) full(idx[r]) = sol.weights(static_cast<Eigen::Index>(r));
        const double var = std::max(full.dot(S.m * full), 0.0);
        const int support = static_cast<int>(idx.size());
        const bool better =
            !found || var < best_var - kTieTol ||
            (std::abs(var - best_var) <= kTieTol && support > best_support);
        if (better) {
            found = true;
            best_w = full;
            best_var = var;
            best_support = support;
        }
    }
    if (!found)
        throw Error(ErrorCode::DegenerateCovariance, "no feasible support produced a solution");

    // KKT: off-support entries of S w must not undercut the portfolio variance
    const Eigen::VectorXd grad = S.m * best_w;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (best_w(i) <= kFeasTol && grad(i) < best_var - 1e-9)
            throw Error(ErrorCode::DegenerateCovariance,
                        "KKT certificate failed on the enumerated optimum");
    }

    AllocationResult out;
    out.weights = best_w.cwiseMax(0.0);
    out.variance = best_var;
    out.route = Route::ConstrainedSimplex;
    return out;
}

CovarianceMatrix toeplitz_matrix(const ToeplitzModel& model) {
    model.validate();
    const double s2 = model.sigma * model.sigma;
    Eigen::MatrixXd m(3, 3);
    m << 1.0, model.rho, model.delta,
         model.rho, 1.0, model.rho,
         model.delta, model.rho, 1.0;
    CovarianceMatrix out;
    out.m = s2 * m;
    return out;
}

double toeplitz_determinant(const ToeplitzModel& model) {
    model.validate();
    const double s2 = model.sigma * model.sigma;
    return s2 * s2 * s2 * (1.0 - model.delta) *
           ((1.0 + model.delta) - 2.0 * model.rho * model.rho);
}

double barbell_profile(const ToeplitzModel& model, double w) {
    model.validate();
    if (!(w >= 0.0 && w <= 0.5))
        throw Error(ErrorCode::WOutOfRange, "barbell weight must lie in [0, 1/2]");
    const double f = 1.0 + 4.0 * (model.rho - 1.0) * w +
                     (6.0 + 2.0 * model.delta - 8.0 * model.rho) * w * w;
    return model.sigma * model.sigma * f;
}

std::optional<double> barbell_stationary_point(const ToeplitzModel& model) {
    model.validate();
    const double denom = 3.0 + model.delta - 4.0 * model.rho;
    if (std::abs(denom) < 1e-14) return std::nullopt;
    return (1.0 - model.rho) / denom;
}

AllocationResult barbell_optimal(const ToeplitzModel& model) {
    model.validate();
    if (!model.is_positive_definite())
        throw Error(ErrorCode::NotPositiveDefinite,
                    "Toeplitz model requires rho^2 < (1 + delta) / 2");
    if (model.rho >= (1.0 + model.delta) / 2.0) {
        AllocationResult out;
        out.weights = Eigen::Vector3d(0.5, 0.0, 0.5);
        out.variance = model.sigma * model.sigma * (1.0 + model.delta) / 2.0;
        out.route = Route::ConstrainedSimplex;
        return out;
    }
    return min_variance_simplex(toeplitz_matrix(model));
}

}  // namespace trendlab::allocator
