#include "romco/prox_ops.hpp"

#include "romco/error.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace romco {

Matrix SvdTriple::reconstruct() const {
    return P * sigma.asDiagonal() * Q.transpose();
}

std::size_t SvdTriple::rank() const {
    return static_cast<std::size_t>((sigma.array() > 0.0).count());
}

SvdTriple svd_thin(const Matrix &M) {
    if (!M.allFinite())
        throw StructuralError("svd_thin: matrix has non-finite entries");
    SvdTriple out;
    if (M.rows() == 0 || M.cols() == 0) {
        out.P = Matrix(M.rows(), 0);
        out.Q = Matrix(M.cols(), 0);
        out.sigma = Vector(0);
        return out;
    }
    Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.P = svd.matrixU();
    out.Q = svd.matrixV();
    out.sigma = svd.singularValues();
    const double cutoff = kSvdRelativeCutoff * (out.sigma.size() ? out.sigma[0] : 0.0);
    for (Eigen::Index i = 0; i < out.sigma.size(); ++i)
        if (out.sigma[i] < cutoff || out.sigma[i] < 0.0)
            out.sigma[i] = 0.0;
    return out;
}

Matrix prox_nuclear(const Matrix &M_hat, double threshold) {
    if (!(threshold >= 0.0))
        throw ParameterError("prox_nuclear: threshold must be nonnegative");
    if (threshold == 0.0)
        return M_hat;
    SvdTriple f = svd_thin(M_hat);
    f.sigma = (f.sigma.array() - threshold).cwiseMax(0.0);
    return f.reconstruct();
}

Matrix prox_group_lasso(const Matrix &M_hat, double threshold) {
    if (!(threshold >= 0.0))
        throw ParameterError("prox_group_lasso: threshold must be nonnegative");
    if (threshold == 0.0)
        return M_hat;
    Matrix out(M_hat.rows(), M_hat.cols());
    for (Eigen::Index j = 0; j < M_hat.cols(); ++j) {
        const double norm = M_hat.col(j).norm();
        if (norm <= threshold)
            out.col(j).setZero();
        else
            out.col(j) = (1.0 - threshold / norm) * M_hat.col(j);
    }
    return out;
}

CubicCoeffs CubicCoeffs::logdet(double sigma_hat, double rho) {
    const double inv = 1.0 / rho;
    return {inv, -inv * sigma_hat, inv + 2.0, -inv * sigma_hat};
}

double CubicCoeffs::scale() const {
    return std::max({1.0, std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
}

CubicDiscriminant cubic_discriminant(const CubicCoeffs &k) {
    const double a = k.a, b = k.b, c = k.c, d = k.d;
    CubicDiscriminant q;
    q.alpha = b * c / (6.0 * a * a) - b * b * b / (27.0 * a * a * a) - d / (2.0 * a);
    q.beta = c / (3.0 * a) - b * b / (9.0 * a * a);
    q.delta = q.alpha * q.alpha + q.beta * q.beta * q.beta;
    const double scale =
        std::max({q.alpha * q.alpha, std::abs(q.beta * q.beta * q.beta), 1.0});
    q.near_zero = std::abs(q.delta) <= 1e-12 * scale;
    return q;
}

namespace {

// Newton refinement on the original cubic; keeps the better of each iterate.
double polish_root(const CubicCoeffs &k, double r) {
    double best = r;
    double best_res = std::abs(k.eval(r));
    for (int it = 0; it < 4 && best_res > 0.0; ++it) {
        const double slope = k.derivative(best);
        if (slope == 0.0 || !std::isfinite(slope))
            break;
        const double next = best - k.eval(best) / slope;
        const double res = std::abs(k.eval(next));
        if (!(res < best_res))
            break;
        best = next;
        best_res = res;
    }
    return best;
}

} // namespace

std::vector<double> solve_cubic(const CubicCoeffs &k) {
    if (k.a == 0.0 || !std::isfinite(k.a))
        throw ParameterError("solve_cubic: leading coefficient must be nonzero");
    const CubicDiscriminant q = cubic_discriminant(k);
    const double shift = -k.b / (3.0 * k.a);
    std::vector<double> roots;

    if (q.near_zero) {
        const double scale = std::max({q.alpha * q.alpha, std::abs(q.beta * q.beta * q.beta), 1.0});
        if (q.alpha * q.alpha <= 1e-12 * scale && std::abs(q.beta * q.beta * q.beta) <= 1e-12 * scale) {
            roots.push_back(shift);
        } else {
            const double u = std::cbrt(q.alpha);
            roots.push_back(shift + 2.0 * u);
            roots.push_back(shift - u);
        }
    } else if (q.delta > 0.0) {
        // u v = -beta; taking the larger-magnitude branch for u avoids
        // cancellation in alpha - sqrt(delta).
        const double s = std::sqrt(q.delta);
        const double u = std::cbrt(q.alpha + std::copysign(s, q.alpha));
        const double v = u != 0.0 ? -q.beta / u : 0.0;
        roots.push_back(shift + u + v);
    } else {
        const double r = std::sqrt(-q.beta);
        const double cos3 = std::clamp(q.alpha / (r * r * r), -1.0, 1.0);
        const double theta = std::acos(cos3);
        for (int j = 0; j < 3; ++j)
            roots.push_back(shift +
                            2.0 * r * std::cos((theta - 2.0 * std::numbers::pi * j) / 3.0));
    }

    for (double &r : roots)
        r = polish_root(k, r);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double x, double y) {
                                return std::abs(x - y) <= 1e-12 * std::max(1.0, std::abs(x));
                            }),
                roots.end());
    return roots;
}

double logdet_scalar_objective(double s, double sigma_hat, double rho) {
    const double diff = s - sigma_hat;
    return diff * diff / (2.0 * rho) + std::log1p(s * s);
}

double logdet_scalar_derivative(double s, double sigma_hat, double rho) {
    return 2.0 * s / (1.0 + s * s) + (s - sigma_hat) / rho;
}

namespace {

// Theta' is negative at 0 and positive at sigma_hat whenever sigma_hat > 0.
double bisect_stationary(double sigma_hat, double rho) {
    double lo = 0.0, hi = sigma_hat;
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi)
            break;
        if (logdet_scalar_derivative(mid, sigma_hat, rho) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

} // namespace

double logdet_scalar_prox(double sigma_hat, double rho) {
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw ParameterError("logdet_scalar_prox: rho must be positive");
    if (!(sigma_hat >= 0.0) || !std::isfinite(sigma_hat))
        throw ParameterError("logdet_scalar_prox: sigma_hat must be nonnegative");
    if (sigma_hat == 0.0)
        return 0.0;

    const CubicCoeffs k = CubicCoeffs::logdet(sigma_hat, rho);
    if (1.0 / rho > 0.25) {
        // Strictly convex: a single stationary point in (0, sigma_hat).
        if (cubic_discriminant(k).near_zero)
            return bisect_stationary(sigma_hat, rho);
        for (double r : solve_cubic(k))
            if (r > 0.0 && r < sigma_hat)
                return r;
        return bisect_stationary(sigma_hat, rho);
    }

    double best = 0.0;
    double best_val = logdet_scalar_objective(0.0, sigma_hat, rho);
    for (double r : solve_cubic(k)) {
        if (!(r > 0.0))
            continue;
        const double val = logdet_scalar_objective(r, sigma_hat, rho);
        if (val < best_val - 1e-12) {
            best = r;
            best_val = val;
        } else if (std::abs(val - best_val) <= 1e-12 && r < best) {
            best = r;
            best_val = std::min(val, best_val);
        }
    }
    return best;
}

Matrix prox_logdet_rho(const Matrix &M_hat, double rho) {
    if (!(rho >= 0.0) || !std::isfinite(rho))
        throw ParameterError("prox_logdet: rho must be nonnegative");
    if (rho == 0.0)
        return M_hat;
    SvdTriple f = svd_thin(M_hat);
    for (Eigen::Index i = 0; i < f.sigma.size(); ++i)
        f.sigma[i] = logdet_scalar_prox(f.sigma[i], rho);
    return f.reconstruct();
}

Matrix prox_logdet(const Matrix &M_hat, double eta1, double lambda1) {
    if (!(eta1 > 0.0))
        throw ParameterError("prox_logdet: eta1 must be positive");
    if (!(lambda1 >= 0.0))
        throw ParameterError("prox_logdet: lambda1 must be nonnegative");
    return prox_logdet_rho(M_hat, eta1 * lambda1);
}

double nuclear_norm(const Matrix &M) { return svd_thin(M).sigma.sum(); }

double logdet_penalty(const Matrix &M) {
    const Vector s = svd_thin(M).sigma;
    double total = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i)
        total += std::log1p(s[i] * s[i]);
    return total;
}

double group_lasso_norm(const Matrix &M) { return M.colwise().norm().sum(); }

} // namespace romco
