#include <saptlem/proposals.hpp>

#include <saptlem/errors.hpp>

#include <cmath>

namespace saptlem {

std::vector<double> default_min_steps(const PriorBounds& bounds) {
    std::vector<double> steps(bounds.size());
    for (std::size_t j = 0; j < steps.size(); ++j) {
        steps[j] = 0.01 * (bounds.upper[j] - bounds.lower[j]);
    }
    return steps;
}

ChainHistory::ChainHistory(std::size_t dim)
    : dim_(dim), mean_(dim, 0.0), comoment_(dim * dim, 0.0), delta_(dim, 0.0) {}

void ChainHistory::append(const std::vector<double>& theta) {
    if (theta.size() != dim_) throw DimensionMismatch("history entry has wrong dimension");
    ++count_;
    const double inv_n = 1.0 / static_cast<double>(count_);
    for (std::size_t j = 0; j < dim_; ++j) {
        delta_[j] = theta[j] - mean_[j];
        mean_[j] += delta_[j] * inv_n;
    }
    // Lower triangle of sum (x - mean_before) (x - mean_after)^T; exact
    // symmetry comes from mirroring at materialization time.
    for (std::size_t i = 0; i < dim_; ++i) {
        const double post_i = theta[i] - mean_[i];
        for (std::size_t j = 0; j <= i; ++j) {
            comoment_[i * dim_ + j] += delta_[j] * post_i;
        }
    }
}

Matrix ChainHistory::covariance() const {
    if (count_ < 2) throw InsufficientHistory("need at least 2 history entries");
    Matrix cov(static_cast<int>(dim_), static_cast<int>(dim_));
    const double inv = 1.0 / static_cast<double>(count_ - 1);
    for (std::size_t i = 0; i < dim_; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const double v = comoment_[i * dim_ + j] * inv;
            cov.at(static_cast<int>(i), static_cast<int>(j)) = v;
            cov.at(static_cast<int>(j), static_cast<int>(i)) = v;
        }
    }
    return cov;
}

Matrix update_covariance(const ChainHistory& history, const std::vector<double>& min_steps) {
    if (min_steps.size() != history.dim()) {
        throw DimensionMismatch("min_steps length mismatch");
    }
    Matrix sigma = history.covariance();
    for (std::size_t j = 0; j < min_steps.size(); ++j) {
        sigma.at(static_cast<int>(j), static_cast<int>(j)) += min_steps[j] * min_steps[j];
    }
    return sigma;
}

CholeskyFactor cholesky(const Matrix& sigma) {
    if (sigma.rows != sigma.cols || sigma.rows == 0) {
        throw FactorizationFailure("matrix must be square and non-empty");
    }
    const int n = sigma.rows;
    CholeskyFactor f;
    f.dim = n;
    f.lower.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double sum = sigma.at(i, j);
            for (int k = 0; k < j; ++k) sum -= f.lower[i * n + k] * f.lower[j * n + k];
            if (i == j) {
                if (!(sum > 0.0)) throw FactorizationFailure("matrix is not positive definite");
                f.lower[i * n + j] = std::sqrt(sum);
            } else {
                f.lower[i * n + j] = sum / f.lower[j * n + j];
            }
        }
    }
    return f;
}

double reflect_into(double x, double lo, double hi) {
    const double width = hi - lo;
    if (x >= lo && x <= hi) return x;
    // Fold onto the triangular wave with period 2*width.
    double y = std::fmod(x - lo, 2.0 * width);
    if (y < 0.0) y += 2.0 * width;
    return lo + (y <= width ? y : 2.0 * width - y);
}

std::vector<double> propose_rw(const std::vector<double>& theta, const PriorBounds& bounds,
                               double phi, RngStream& rng) {
    if (theta.size() != bounds.size()) throw DimensionMismatch("theta/bounds size mismatch");
    std::vector<double> out(theta.size());
    for (std::size_t j = 0; j < theta.size(); ++j) {
        const double sigma = (bounds.upper[j] - bounds.lower[j]) * phi;
        const double draw = theta[j] + sigma * rng.normal();
        out[j] = reflect_into(draw, bounds.lower[j], bounds.upper[j]);
    }
    return out;
}

std::vector<double> propose_arw_with_factor(const std::vector<double>& theta,
                                            const CholeskyFactor& factor,
                                            const PriorBounds& bounds, RngStream& rng) {
    const std::size_t n = theta.size();
    if (factor.dim != static_cast<int>(n) || bounds.size() != n) {
        throw DimensionMismatch("factor/theta/bounds size mismatch");
    }
    std::vector<double> z(n);
    for (std::size_t j = 0; j < n; ++j) z[j] = rng.normal();
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double delta = 0.0;
        for (std::size_t k = 0; k <= i; ++k) delta += factor.lower[i * n + k] * z[k];
        out[i] = reflect_into(theta[i] + delta, bounds.lower[i], bounds.upper[i]);
    }
    return out;
}

std::vector<double> propose_arw(const std::vector<double>& theta, const Matrix& sigma,
                                const PriorBounds& bounds, RngStream& rng) {
    return propose_arw_with_factor(theta, cholesky(sigma), bounds, rng);
}

double log_prior(const std::vector<double>& theta, const PriorBounds& bounds) {
    if (theta.size() != bounds.size()) throw DimensionMismatch("theta/bounds size mismatch");
    for (std::size_t j = 0; j < theta.size(); ++j) {
        if (theta[j] < bounds.lower[j] || theta[j] > bounds.upper[j]) return -1e10;
    }
    return 0.0;
}

} // namespace saptlem
