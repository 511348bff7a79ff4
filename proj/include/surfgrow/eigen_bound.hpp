#pragma once

// Upper bounds on the numerical range of the linearised operator
//
//     A_phi u = -u_xxxx - 2 (phi_x u)_xxx
//
// via the Galerkin eigenvalue lambda_n plus an explicit correction for the
// modes above n, and the cruder analytic worst-case estimate.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "json.hpp"
#include "surfgrow/errors.hpp"
#include "surfgrow/spectral.hpp"

namespace surfgrow {

/// Symmetrised Galerkin block 1/2 (P_n A P_n + (P_n A P_n)^*) in the real
/// orthonormal basis cos(kx)/sqrt(pi), sin(kx)/sqrt(pi), k = 1..n, ordered
/// (c_1, s_1, c_2, s_2, ...), so the leading 2m x 2m block is the H_m matrix.
struct OperatorMatrix {
    std::size_t n = 0;
    Eigen::MatrixXd entries;

    [[nodiscard]] Eigen::Index dim() const noexcept { return entries.rows(); }
};

namespace detail {

/// Coefficients psi_m of phi_x, as a lookup over all integers m.
class SlopeCoefficients {
public:
    explicit SlopeCoefficients(const FourierField& phi) : slope_(derivative(phi, 1)) {}
    [[nodiscard]] Complex operator()(long m) const noexcept { return slope_.coeff(m); }

private:
    FourierField slope_;
};

/// Hermitian part H_{kl} = -k^4 delta_kl + i (k^3 - l^3) psi_{k-l} / sqrt(2pi).
inline Complex hermitian_entry(const SlopeCoefficients& psi, long k, long l) {
    const double k3 = static_cast<double>(k) * k * k;
    const double l3 = static_cast<double>(l) * l * l;
    Complex h = Complex(0.0, k3 - l3) * psi(k - l) / kSqrt2Pi;
    if (k == l) h -= k3 * static_cast<double>(k);
    return h;
}

}  // namespace detail

/// Raw (non-symmetric) Galerkin matrix M_{kl} = <A e_l, e_k> in the complex
/// basis, rows/columns ordered k = -n..-1, 1..n.
inline Eigen::MatrixXcd assemble_complex(const FourierField& phi, std::size_t n) {
    const detail::SlopeCoefficients psi(phi);
    const auto dim = static_cast<Eigen::Index>(2 * n);
    const auto mode = [n](Eigen::Index i) {
        const long ni = static_cast<long>(n);
        return i < ni ? static_cast<long>(i) - ni : static_cast<long>(i) - ni + 1;
    };
    Eigen::MatrixXcd m(dim, dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
        const long k = mode(i);
        const double k3 = static_cast<double>(k) * k * k;
        for (Eigen::Index j = 0; j < dim; ++j) {
            const long l = mode(j);
            // -2 (ik)^3 = 2 i k^3
            Complex v = Complex(0.0, 2.0 * k3) * psi(k - l) / kSqrt2Pi;
            if (k == l) v -= k3 * static_cast<double>(k);
            m(i, j) = v;
        }
    }
    return m;
}

inline OperatorMatrix assemble(const FourierField& phi, std::size_t n) {
    if (n == 0) throw InvalidArgumentError("assemble: n must be positive");
    const detail::SlopeCoefficients psi(phi);
    const auto dim = static_cast<Eigen::Index>(2 * n);
    OperatorMatrix out{n, Eigen::MatrixXd(dim, dim)};

    // Real basis vectors in complex coordinates: c_k = (e_k + e_-k)/sqrt2,
    // s_k = (-i e_k + i e_-k)/sqrt2.
    const double r = 1.0 / std::numbers::sqrt2;
    const Complex cos_weights[2] = {Complex(r, 0.0), Complex(r, 0.0)};
    const Complex sin_weights[2] = {Complex(0.0, -r), Complex(0.0, r)};

    for (std::size_t ka = 1; ka <= n; ++ka) {
        for (std::size_t kb = ka; kb <= n; ++kb) {
            const long modes_a[2] = {static_cast<long>(ka), -static_cast<long>(ka)};
            const long modes_b[2] = {static_cast<long>(kb), -static_cast<long>(kb)};
            for (int ta = 0; ta < 2; ++ta) {
                const Complex* qa = ta == 0 ? cos_weights : sin_weights;
                for (int tb = 0; tb < 2; ++tb) {
                    const Complex* qb = tb == 0 ? cos_weights : sin_weights;
                    Complex sum{};
                    for (int p = 0; p < 2; ++p) {
                        for (int q = 0; q < 2; ++q) {
                            sum += std::conj(qa[p]) * detail::hermitian_entry(psi, modes_a[p], modes_b[q]) *
                                   qb[q];
                        }
                    }
                    const auto i = static_cast<Eigen::Index>(2 * (ka - 1) + ta);
                    const auto j = static_cast<Eigen::Index>(2 * (kb - 1) + tb);
                    out.entries(i, j) = sum.real();
                    out.entries(j, i) = sum.real();
                }
            }
        }
    }
    return out;
}

/// Coordinates of a real field in the basis used by `assemble`.
inline Eigen::VectorXd real_coordinates(const FourierField& u, std::size_t n) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(2 * n));
    const double sqrt_pi = std::sqrt(std::numbers::pi);
    for (std::size_t k = 1; k <= std::min(n, u.n_modes()); ++k) {
        v(static_cast<Eigen::Index>(2 * (k - 1))) = sqrt_pi * u.cos_coeff(static_cast<long>(k));
        v(static_cast<Eigen::Index>(2 * (k - 1) + 1)) = sqrt_pi * u.sin_coeff(static_cast<long>(k));
    }
    return v;
}

/// Largest eigenpair with its certificates.
struct EigenPair {
    double value = 0.0;        ///< Rayleigh quotient of `vector`
    Eigen::VectorXd vector;    ///< unit eigenvector
    double residual = 0.0;     ///< ||M v - value v||
    double upper = 0.0;        ///< shift s with s I - M positive definite, so lambda_max < s
    double gershgorin = 0.0;   ///< max_i (M_ii + sum_{j != i} |M_ij|)
};

/// Residual certificate tolerance for an eigenvalue of magnitude `lambda`.
inline double eigen_residual_tolerance(double lambda) { return 1e-8 * std::max(1.0, std::abs(lambda)); }

namespace detail {

inline Eigen::VectorXd start_vector(Eigen::Index dim) {
    Eigen::VectorXd v(dim);
    // deterministic, no component orthogonal by accident
    for (Eigen::Index i = 0; i < dim; ++i) v(i) = 1.0 + 0.5 * std::sin(1.7 * static_cast<double>(i) + 0.3);
    return v.normalized();
}

inline double gershgorin_upper(const Eigen::MatrixXd& m) {
    double g = -std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        g = std::max(g, m(i, i) + m.row(i).cwiseAbs().sum() - std::abs(m(i, i)));
    }
    return g;
}

}  // namespace detail

/// Largest eigenvalue of a symmetric matrix by shifted inverse iteration.
///
/// The shift s sits just above the current estimate; a successful Cholesky
/// factorisation of s I - M certifies lambda_max < s and drives the inverse
/// iteration. Starting from `warm` (e.g. the eigenvector of a nearby matrix)
/// usually avoids the dense eigensolve entirely. The returned pair satisfies
/// ||M v - lambda v|| <= 1e-8 max(1, |lambda|).
inline EigenPair top_eigenpair(const Eigen::MatrixXd& m, const Eigen::VectorXd* warm = nullptr) {
    const Eigen::Index dim = m.rows();
    if (dim == 0 || m.cols() != dim) throw InvalidArgumentError("top_eigenpair: matrix must be square and nonempty");
    if (!m.allFinite()) throw InvalidArgumentError("top_eigenpair: non-finite matrix entries");

    EigenPair out;
    out.gershgorin = detail::gershgorin_upper(m);

    Eigen::VectorXd v;
    double estimate = 0.0;
    bool cold = true;
    if (warm != nullptr && warm->size() > 0 && warm->norm() > 0.0) {
        v = Eigen::VectorXd::Zero(dim);
        const Eigen::Index copy = std::min(dim, warm->size());
        v.head(copy) = warm->head(copy);
        if (v.norm() > 0.0) {
            v.normalize();
            estimate = v.dot(m * v);
            cold = false;
        }
    }
    const auto dense_estimate = [&]() {
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
        if (es.info() != Eigen::Success) throw NoConvergenceError("top_eigenpair: dense eigensolver failed");
        return es.eigenvalues().maxCoeff();
    };
    if (cold) {
        estimate = dense_estimate();
        v = detail::start_vector(dim);
    }

    const double diag_scale = std::max(1.0, m.diagonal().cwiseAbs().maxCoeff());
    const double eps = std::numeric_limits<double>::epsilon();
    double offset = std::max(1e-9 * std::max(1.0, std::abs(estimate)), 4.0 * eps * diag_scale);

    Eigen::MatrixXd shifted(dim, dim);
    for (int attempt = 0; attempt < 24; ++attempt) {
        const double shift = estimate + offset;
        shifted = -m;
        shifted.diagonal().array() += shift;
        const Eigen::LLT<Eigen::MatrixXd> llt(shifted);
        if (llt.info() != Eigen::Success) {
            if (!cold) {
                // the top eigenvalue moved past the warm estimate
                estimate = dense_estimate();
                v = detail::start_vector(dim);
                cold = true;
            } else {
                offset *= 8.0;
            }
            continue;
        }
        double lambda = estimate;
        double residual = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 8; ++it) {
            v = llt.solve(v);
            v.normalize();
            const Eigen::VectorXd mv = m * v;
            lambda = v.dot(mv);
            residual = (mv - lambda * v).norm();
            if (residual <= 0.25 * eigen_residual_tolerance(lambda)) break;
        }
        if (residual <= eigen_residual_tolerance(lambda)) {
            if (lambda > out.gershgorin + 1e-12 * std::max(1.0, std::abs(out.gershgorin))) {
                throw NoConvergenceError("top_eigenpair: eigenvalue exceeds the Gershgorin bound");
            }
            out.value = lambda;
            out.vector = v;
            out.residual = residual;
            out.upper = shift;
            return out;
        }
        // poorly separated: move the shift to the refined estimate
        estimate = lambda;
        offset = std::max(offset, 4.0 * residual);
    }
    throw NoConvergenceError("top_eigenpair: iteration budget exhausted");
}

/// lambda_n, the largest eigenvalue of the symmetrised Galerkin matrix.
inline double lambda_n(const OperatorMatrix& m) { return top_eigenpair(m.entries).value; }

/// Sup-norm bounds on the derivatives of phi that enter both estimates.
struct PhiNorms {
    double dx_sup = 0.0;    ///< bound on ||phi_x||_inf
    double dxx_sup = 0.0;   ///< bound on ||phi_xx||_inf
    double dxxx_sup = 0.0;  ///< bound on ||phi_xxx||_inf
    double h1 = 0.0;        ///< ||phi_x||_L2

    static PhiNorms of(const FourierField& phi) {
        return {sup_norm_bound(derivative(phi, 1)), sup_norm_bound(derivative(phi, 2)),
                sup_norm_bound(derivative(phi, 3)), sobolev_norm(phi, 1)};
    }
};

/// C_phi = 2 ||phi_xxx|| + 6 ||phi_xx|| + 4 ||phi_x||, sup norms via the l1 bound.
inline double c_phi(const PhiNorms& norms) {
    return 2.0 * norms.dxxx_sup + 6.0 * norms.dxx_sup + 4.0 * norms.dx_sup;
}
inline double c_phi(const FourierField& phi) { return c_phi(PhiNorms::of(phi)); }

/// -1/2 + 9/2 ||phi_xx||_inf^2.
inline double worst_case_bound(double dxx_sup) { return -0.5 + 4.5 * dxx_sup * dxx_sup; }
inline double worst_case_bound(const FourierField& phi) {
    return worst_case_bound(sup_norm_bound(derivative(phi, 2)));
}

struct EigenBoundReport {
    std::size_t n = 0;
    double lambda_n = 0.0;
    double c_phi = 0.0;
    double eta_n = 0.0;
    double correction = 0.0;
    /// lambda_n + max(0, correction); empty unless feasible.
    std::optional<double> lambda_rigorous;
    double worst_case = 0.0;
    double n_min = 0.0;          ///< sqrt(2) C_phi
    double modes_needed = 0.0;   ///< 2 sqrt(2) C_phi + 1, counted as Fourier modes
    bool feasible = false;
    double dxx_sup = 0.0;
    double eigen_residual = 0.0;

    /// lambda_n + max(0, correction) regardless of feasibility, for plotting.
    [[nodiscard]] double formal_bound() const { return lambda_n + std::max(0.0, correction); }

    /// Throws InfeasibleError when n < sqrt(2) C_phi.
    [[nodiscard]] double certified_bound() const {
        if (!feasible || !lambda_rigorous) {
            throw InfeasibleError("rigorous_bound: n = " + std::to_string(n) + " is below sqrt(2) C_phi = " +
                                  std::to_string(n_min));
        }
        return *lambda_rigorous;
    }
};

/// Correction term 1/2 max{eta (9 s^2 - 2 lambda_n), 9 s^2 + |2 lambda_n| - n^4 / 2}.
///
/// The second branch takes |2 lambda_n|, which dominates both +2 lambda_n and
/// -2 lambda_n.
inline double eigen_correction(double lambda, double dxx_sup, double eta, std::size_t n) {
    const double s2 = dxx_sup * dxx_sup;
    const double nn = static_cast<double>(n);
    const double low = eta * (9.0 * s2 - 2.0 * lambda);
    const double high = 9.0 * s2 + std::abs(2.0 * lambda) - 0.5 * nn * nn * nn * nn;
    return 0.5 * std::max(low, high);
}

/// Reusable eigenvector between calls on nearby fields.
struct EigenWarmStart {
    Eigen::VectorXd vector;
};

inline EigenBoundReport rigorous_bound(const FourierField& phi, std::size_t n, EigenWarmStart* warm = nullptr) {
    const PhiNorms norms = PhiNorms::of(phi);
    EigenBoundReport r;
    r.n = n;
    r.dxx_sup = norms.dxx_sup;
    r.c_phi = c_phi(norms);
    r.worst_case = worst_case_bound(norms.dxx_sup);
    r.n_min = std::numbers::sqrt2 * r.c_phi;
    r.modes_needed = 2.0 * r.n_min + 1.0;
    const double nn = static_cast<double>(n);
    r.eta_n = 2.0 * r.c_phi * r.c_phi / (nn * nn);
    r.feasible = nn >= r.n_min;

    const OperatorMatrix m = assemble(phi, n);
    const EigenPair pair = top_eigenpair(m.entries, warm != nullptr ? &warm->vector : nullptr);
    if (warm != nullptr) warm->vector = pair.vector;
    r.lambda_n = pair.value;
    r.eigen_residual = pair.residual;
    r.correction = eigen_correction(r.lambda_n, norms.dxx_sup, r.eta_n, n);
    if (r.feasible) r.lambda_rigorous = r.lambda_n + std::max(0.0, r.correction);
    return r;
}

inline void to_json(nlohmann::json& j, const EigenBoundReport& r) {
    j = nlohmann::json{{"n", r.n},
                       {"lambda_n", r.lambda_n},
                       {"c_phi", r.c_phi},
                       {"eta_n", r.eta_n},
                       {"correction", r.correction},
                       {"lambda_rigorous", r.lambda_rigorous ? nlohmann::json(*r.lambda_rigorous) : nlohmann::json()},
                       {"worst_case", r.worst_case},
                       {"n_min", r.n_min},
                       {"modes_needed", r.modes_needed},
                       {"feasible", r.feasible}};
}

}  // namespace surfgrow
