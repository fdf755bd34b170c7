#pragma once

#include <optional>
#include <string>
#include <vector>

namespace saptlem {

/**
 * The sampled parameter set. c_marine/c_surface are present for margin-type
 * problems, uplift for mountain-type; the four fluvial parameters are always
 * present. Optional fields that are absent stay absent through a run.
 */
struct ParameterVector {
    double rainfall = 0.0;     // m/a
    double erodibility = 0.0;  // 1/a, scale ~1e-6
    double m_exponent = 0.0;   // discharge exponent
    double n_exponent = 0.0;   // slope exponent
    std::optional<double> c_marine;  // m^2/a, diffusion below sea level
    std::optional<double> c_surface; // m^2/a, diffusion above sea level
    std::optional<double> uplift;    // mm/a

    /** Throws ConfigError on non-finite values. */
    void validate() const;
};

/** Closed per-parameter prior box [lower_j, upper_j]. */
struct PriorBounds {
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t size() const { return lower.size(); }

    /** Throws ConfigError unless lower_j < upper_j for all j. */
    void validate() const;
};

/**
 * Canonical flat ordering: rainfall, erodibility, m, n, then c_marine and
 * c_surface when present, then uplift when present. All flat vectors,
 * bounds, and CSV columns follow this order.
 */
std::vector<std::string> parameter_names(const ParameterVector& layout);
std::vector<double> to_vector(const ParameterVector& p);

/** Rebuild a ParameterVector from a flat vector; `layout` fixes field presence. */
ParameterVector from_vector(const std::vector<double>& v, const ParameterVector& layout);

} // namespace saptlem
