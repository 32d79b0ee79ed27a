#pragma once

#include "romco/core_model.hpp"

#include <vector>

namespace romco {

/// Thin SVD M = P diag(sigma) Q^T with r = min(rows, cols). Singular values
/// below 1e-10 * max(sigma) are reported as exactly zero.
struct SvdTriple {
    Matrix P;
    Vector sigma;
    Matrix Q;

    Matrix reconstruct() const;
    /// Number of nonzero singular values.
    std::size_t rank() const;
};

inline constexpr double kSvdRelativeCutoff = 1e-10;

SvdTriple svd_thin(const Matrix &M);

/// Singular value thresholding: P diag([sigma - threshold]_+) Q^T.
/// threshold == 0 returns the input unchanged.
Matrix prox_nuclear(const Matrix &M_hat, double threshold);

/// Column-wise block soft thresholding:
/// v_i = max(0, 1 - threshold / ||v_i||) v_i.
Matrix prox_group_lasso(const Matrix &M_hat, double threshold);

/// Coefficients of a * s^3 + b * s^2 + c * s + d.
struct CubicCoeffs {
    double a = 1.0;
    double b = 0.0;
    double c = 0.0;
    double d = 0.0;

    /// Stationarity cubic of the scalar log-det prox objective
    /// (1/2rho)(s - sigma_hat)^2 + log(1 + s^2).
    static CubicCoeffs logdet(double sigma_hat, double rho);
    double eval(double s) const { return ((a * s + b) * s + c) * s + d; }
    double derivative(double s) const { return (3.0 * a * s + 2.0 * b) * s + c; }
    double scale() const;
};

/// Cardano quantities of the depressed cubic.
struct CubicDiscriminant {
    double alpha = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    /// |delta| is within the zero tolerance 1e-12 * max(alpha^2, |beta|^3, 1).
    bool near_zero = false;
};

CubicDiscriminant cubic_discriminant(const CubicCoeffs &k);

/// All distinct real roots in increasing order. delta > 0 gives one root,
/// delta == 0 a triple or a double plus a simple root, delta < 0 three
/// distinct roots (trigonometric form). Throws ParameterError if a == 0.
std::vector<double> solve_cubic(const CubicCoeffs &k);

/// Theta(s) = (1/2rho)(s - sigma_hat)^2 + log(1 + s^2).
double logdet_scalar_objective(double s, double sigma_hat, double rho);
/// Theta'(s) = 2s/(1 + s^2) + (s - sigma_hat)/rho.
double logdet_scalar_derivative(double s, double sigma_hat, double rho);

/// argmin over s >= 0 of Theta(s). Throws ParameterError if rho <= 0 or
/// sigma_hat < 0.
double logdet_scalar_prox(double sigma_hat, double rho);

/// Log-det prox with rho = eta1 * lambda1; lambda1 == 0 returns the input.
Matrix prox_logdet(const Matrix &M_hat, double eta1, double lambda1);
/// Same map parameterized directly by rho; rho == 0 returns the input.
Matrix prox_logdet_rho(const Matrix &M_hat, double rho);

// Regularizer values.
double nuclear_norm(const Matrix &M);
double logdet_penalty(const Matrix &M);
double group_lasso_norm(const Matrix &M);

} // namespace romco
