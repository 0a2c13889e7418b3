#pragma once

#include <Eigen/Dense>
#include <optional>

namespace trendlab::allocator {

struct CovarianceMatrix {
    Eigen::MatrixXd m;

    /// Validates symmetry (within 1e-12 relative to the largest entry,
    /// symmetrized by averaging) and non-negative diagonal.
    static CovarianceMatrix from(const Eigen::MatrixXd& raw);

    Eigen::Index dim() const { return m.rows(); }
};

/// Three-horizon correlation model: adjacent-horizon correlation rho,
/// extreme-horizon correlation delta, common mean mu and volatility sigma.
struct ToeplitzModel {
    double rho = 0.5;
    double delta = 0.0;
    double mu = 0.05;
    double sigma = 0.10;

    void validate() const;  // rho in [0,1), delta in [0,1), mu > 0, sigma > 0
    bool is_positive_definite() const;  // rho^2 < (1 + delta) / 2
};

enum class Route { ClosedForm, Whitened, Pseudoinverse, ConstrainedSimplex };

const char* route_name(Route r);

struct AllocationResult {
    Eigen::VectorXd weights;  // sum to 1
    double variance = 0.0;
    Route route = Route::ClosedForm;
};

/// w* = S^-1 1 / (1' S^-1 1), variance 1 / (1' S^-1 1). Requires SPD
/// (checked by Cholesky).
AllocationResult min_variance_closed_form(const CovarianceMatrix& S);

/// Same optimum through the whitening route: S = LL', a = L^-1 1,
/// x* = a / |a|^2, w* = L^-T x*.
AllocationResult min_variance_whitened(const CovarianceMatrix& S);

/// Positive semidefinite variant. If the ones vector has a component in the
/// kernel of S there are feasible zero-variance allocations and the
/// minimum-norm one is returned; otherwise the Moore-Penrose formula
/// w* = S+ 1 / (1' S+ 1) applies. Ones entirely in the kernel is an error.
AllocationResult min_variance_psd(const CovarianceMatrix& S);

/// Minimizer of w' S w over the probability simplex, by exact enumeration of
/// support sets (refused above dim 12). KKT multiplier signs certify the
/// optimum; ties within 1e-12 resolve to the largest support.
AllocationResult min_variance_simplex(const CovarianceMatrix& S);

/// sigma^2 * [[1, rho, delta], [rho, 1, rho], [delta, rho, 1]].
CovarianceMatrix toeplitz_matrix(const ToeplitzModel& model);

/// Closed-form determinant sigma^6 (1 - delta) [(1 + delta) - 2 rho^2].
double toeplitz_determinant(const ToeplitzModel& model);

/// Variance sigma^2 f(w) of the symmetric allocation (w, 1-2w, w), where
/// f(w) = 1 + 4(rho - 1) w + (6 + 2 delta - 8 rho) w^2. w must lie in [0, 1/2].
double barbell_profile(const ToeplitzModel& model, double w);

/// Stationary point w0 = (1 - rho) / (3 + delta - 4 rho) of the profile;
/// empty when the quadratic term vanishes.
std::optional<double> barbell_stationary_point(const ToeplitzModel& model);

/// For rho >= (1 + delta) / 2 the optimum is the barbell (1/2, 0, 1/2) with
/// variance sigma^2 (1 + delta) / 2; below that threshold the constrained
/// solver decides. Model must be positive definite.
AllocationResult barbell_optimal(const ToeplitzModel& model);

}  // namespace trendlab::allocator
