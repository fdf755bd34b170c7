#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace saptlem {

/**
 * 2D elevation field in meters, row-major. Serves both as model state and
 * as an observation. Invariants: rows >= 2, cols >= 2, cell_size > 0, all
 * elevations finite.
 */
struct GridTopography {
    int rows = 0;
    int cols = 0;
    double cell_size = 1000.0; // meters per cell edge
    double sea_level = 0.0;    // meters
    std::vector<double> elevation; // rows * cols entries

    GridTopography() = default;
    GridTopography(int rows_, int cols_, double cell_size_, double sea_level_ = 0.0,
                   double fill = 0.0);

    double& at(int r, int c) { return elevation[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return elevation[static_cast<std::size_t>(r) * cols + c]; }

    std::size_t cell_count() const { return static_cast<std::size_t>(rows) * cols; }

    /** Throws ConfigError when an invariant is violated. */
    void validate() const;
};

/** Dense row-major matrix; used for the J x n_t sediment records. */
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int rows_, int cols_, double fill = 0.0)
        : rows(rows_), cols(cols_),
          data(static_cast<std::size_t>(rows_) * cols_, fill) {}

    double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }

    bool same_shape(const Matrix& other) const {
        return rows == other.rows && cols == other.cols;
    }
};

/**
 * Plain-text grid format: header line `rows cols cell_size sea_level`,
 * then `rows` lines of `cols` space-separated elevations.
 */
void write_grid(const std::filesystem::path& path, const GridTopography& grid);
GridTopography read_grid(const std::filesystem::path& path);

std::string grid_to_string(const GridTopography& grid);
GridTopography grid_from_string(const std::string& text);

} // namespace saptlem
