#include <saptlem/diagnostics.hpp>

#include <saptlem/errors.hpp>

#include <cmath>

namespace saptlem {

PsrfReport psrf(const std::vector<Matrix>& chains) {
    const std::size_t c = chains.size();
    if (c < 2) throw ConfigError("psrf needs at least 2 chains");
    const int length = chains[0].rows;
    const int params = chains[0].cols;
    if (length < 4) throw ConfigError("psrf needs at least 4 samples per chain");
    for (const Matrix& chain : chains) {
        if (chain.rows != length || chain.cols != params) {
            throw DimensionMismatch("chains differ in shape");
        }
    }

    PsrfReport report;
    report.per_parameter.resize(params);
    const double dl = static_cast<double>(length);
    for (int p = 0; p < params; ++p) {
        double w = 0.0;
        std::vector<double> means(c);
        for (std::size_t k = 0; k < c; ++k) {
            double mean = 0.0;
            for (int i = 0; i < length; ++i) mean += chains[k].at(i, p);
            mean /= dl;
            means[k] = mean;
            double var = 0.0;
            for (int i = 0; i < length; ++i) {
                const double d = chains[k].at(i, p) - mean;
                var += d * d;
            }
            w += var / (dl - 1.0);
        }
        w /= static_cast<double>(c);
        if (w == 0.0) throw DegenerateChains("within-chain variance is zero");

        double grand = 0.0;
        for (double m : means) grand += m;
        grand /= static_cast<double>(c);
        double b_over_l = 0.0;
        for (double m : means) {
            const double d = m - grand;
            b_over_l += d * d;
        }
        b_over_l /= static_cast<double>(c - 1);

        const double v_hat = (1.0 - 1.0 / dl) * w + b_over_l;
        report.per_parameter[p] = std::sqrt(v_hat / w);
    }

    double total = 0.0;
    for (double r : report.per_parameter) total += r;
    report.mean = total / static_cast<double>(params);
    return report;
}

namespace {

double rmse(const double* a, const double* b, std::size_t n) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return std::sqrt(acc / static_cast<double>(n));
}

} // namespace

double rmse_elev(const GridTopography& pred, const GridTopography& truth) {
    if (pred.rows != truth.rows || pred.cols != truth.cols) {
        throw DimensionMismatch("elevation grids differ in shape");
    }
    return rmse(pred.elevation.data(), truth.elevation.data(), pred.cell_count());
}

double rmse_sed(const Matrix& pred, const Matrix& truth) {
    if (!pred.same_shape(truth)) throw DimensionMismatch("sediment matrices differ in shape");
    return rmse(pred.data.data(), truth.data.data(), pred.data.size());
}

double rmse_sur(const std::vector<double>& true_logliks,
                const std::vector<double>& pseudo_logliks) {
    if (true_logliks.size() != pseudo_logliks.size()) {
        throw LengthMismatch("paired series differ in length");
    }
    if (true_logliks.empty()) throw LengthMismatch("empty paired series");
    return rmse(true_logliks.data(), pseudo_logliks.data(), true_logliks.size());
}

} // namespace saptlem
