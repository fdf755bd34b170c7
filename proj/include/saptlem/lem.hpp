#pragma once

#include <saptlem/grid.hpp>
#include <saptlem/parameters.hpp>

#include <cstdint>
#include <utility>
#include <vector>

namespace saptlem {

/**
 * Forward-model run configuration. Checkpoint times are the n_checkpoints
 * evenly spaced multiples of duration/n_checkpoints, so the last checkpoint
 * always lands on `duration`. Boundary cells are held at their initial
 * elevation (open boundary).
 */
struct LemConfig {
    double duration = 1e6;   // years
    double time_step = 1000; // years; must divide duration
    int n_checkpoints = 4;   // sediment recording times n_t
    std::vector<std::pair<int, int>> sediment_sites; // J (row, col) sites

    /** Throws ConfigError when invariants fail for a grid of this shape. */
    void validate(int rows, int cols) const;

    long long steps() const;
};

/** Steepest-descent routing result: per-cell receiver and drainage area. */
struct FlowField {
    std::vector<std::int32_t> receiver; // flat index; self for pits and flats
    std::vector<double> area;           // m^2, cell_size^2 + upstream donors
};

struct SimulationOutput {
    GridTopography final_topography;
    Matrix sediment; // J x n_t cumulative change minus uplift, deposition positive
};

/**
 * Route flow by steepest descent: each cell's receiver is its lowest
 * strictly-lower 8-neighbor (ties broken by scan order), or itself when no
 * neighbor is lower. Drainage area accumulates donor areas topologically.
 */
FlowField flow_route(const GridTopography& topo);

/**
 * One explicit time step: uplift on interior cells, stream-power erosion
 * clamped at the receiver's elevation, then 5-point Laplacian diffusion with
 * the surface/marine coefficient chosen by elevation against sea_level.
 * Boundary cells never change. Throws NumericalOverflow when any elevation
 * becomes non-finite.
 */
GridTopography step(const GridTopography& topo, const ParameterVector& params, double dt,
                    double sea_level);

/** Run duration/time_step steps and record the sediment matrix at checkpoints. */
SimulationOutput simulate(const GridTopography& initial, const ParameterVector& params,
                          const LemConfig& config);

} // namespace saptlem
