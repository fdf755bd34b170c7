#include <saptlem/lem.hpp>

#include <saptlem/errors.hpp>
#include <saptlem/problem.hpp>
#include <saptlem/rng.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace saptlem {

namespace {

constexpr int kNeighborDr[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
constexpr int kNeighborDc[8] = {-1, 0, 1, -1, 1, -1, 0, 1};

/** Reused buffers so the inner loops allocate nothing per step. */
struct RouteWork {
    std::vector<std::int32_t> receiver;
    std::vector<std::uint8_t> diagonal; // receiver offset is diagonal
    std::vector<std::int32_t> count;    // drainage area in cell units (exact)
    std::vector<std::int32_t> indegree;
    std::vector<std::int32_t> queue;

    void resize(std::size_t n) {
        receiver.resize(n);
        diagonal.resize(n);
        count.resize(n);
        indegree.resize(n);
        queue.resize(n);
    }
};

/**
 * Steepest-descent receivers plus integer drainage-area counts. Counts are
 * accumulated donor-first over the receiver DAG, so the result is exact and
 * independent of processing order.
 */
void route_flow(const double* h, int rows, int cols, RouteWork& w) {
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    w.resize(n);

    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            const std::int32_t i = r * cols + c;
            double best = h[i];
            std::int32_t best_idx = i;
            std::uint8_t best_diag = 0;
            for (int k = 0; k < 8; ++k) {
                const int nr = r + kNeighborDr[k];
                const int nc = c + kNeighborDc[k];
                if (nr < 0 || nr >= rows || nc < 0 || nc >= cols) continue;
                const std::int32_t j = nr * cols + nc;
                if (h[j] < best) {
                    best = h[j];
                    best_idx = j;
                    best_diag = static_cast<std::uint8_t>(
                        kNeighborDr[k] != 0 && kNeighborDc[k] != 0);
                }
            }
            w.receiver[i] = best_idx;
            w.diagonal[i] = best_diag;
        }
    }

    std::fill(w.count.begin(), w.count.end(), 1);
    std::fill(w.indegree.begin(), w.indegree.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t r = w.receiver[i];
        if (r != static_cast<std::int32_t>(i)) ++w.indegree[r];
    }
    std::size_t head = 0;
    std::size_t tail = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (w.indegree[i] == 0) w.queue[tail++] = static_cast<std::int32_t>(i);
    }
    while (head < tail) {
        const std::int32_t i = w.queue[head++];
        const std::int32_t r = w.receiver[i];
        if (r == i) continue;
        w.count[r] += w.count[i];
        if (--w.indegree[r] == 0) w.queue[tail++] = r;
    }
}

/** Per-drainage-count erosion prefactor: erodibility * (rainfall * A)^m * dt. */
void build_erosion_table(std::vector<double>& pref, std::size_t n_cells,
                         const ParameterVector& p, double cell_size, double dt) {
    pref.assign(n_cells + 1, 0.0);
    if (p.rainfall <= 0.0 || p.erodibility <= 0.0) return; // no discharge, no incision
    const double cell2 = cell_size * cell_size;
    for (std::size_t k = 1; k <= n_cells; ++k) {
        pref[k] = p.erodibility * std::pow(p.rainfall * cell2 * static_cast<double>(k),
                                           p.m_exponent) * dt;
    }
}

struct StepWork {
    RouteWork route;
    std::vector<double> scratch;
    std::vector<double> erosion_pref;
};

/**
 * One time step over the flat elevation array `h` (modified in place).
 * `work.erosion_pref` must already match (params, cell_size, dt).
 */
void step_in_place(std::vector<double>& h, StepWork& work, int rows, int cols,
                   double cell_size, double sea_level, const ParameterVector& params,
                   double dt) {
    const std::size_t n = h.size();
    const double cell2 = cell_size * cell_size;
    const double diag_dist = cell_size * std::numbers::sqrt2;

    if (params.uplift) {
        const double rise = *params.uplift * 1e-3 * dt; // mm/a to m over dt
        for (int r = 1; r < rows - 1; ++r) {
            double* row = h.data() + static_cast<std::size_t>(r) * cols;
            for (int c = 1; c < cols - 1; ++c) row[c] += rise;
        }
    }

    route_flow(h.data(), rows, cols, work.route);

    // Erosion reads a snapshot: every cell erodes against pre-erosion
    // elevations, clamped so it never drops below its receiver.
    work.scratch = h;
    std::vector<double>& eroded = work.scratch;
    const double n_exp = params.n_exponent;
    const bool erosion_active = work.erosion_pref.size() > 1 && work.erosion_pref[1] != 0.0;
    if (erosion_active) {
        for (int r = 1; r < rows - 1; ++r) {
            for (int c = 1; c < cols - 1; ++c) {
                const std::int32_t i = r * cols + c;
                const std::int32_t recv = work.route.receiver[i];
                if (recv == i) continue; // pits and flats carry no slope
                const double drop = h[i] - h[recv];
                if (drop <= 0.0) continue;
                const double dist = work.route.diagonal[i] ? diag_dist : cell_size;
                const double slope = drop / dist;
                const double sn = (n_exp == 1.0) ? slope : std::pow(slope, n_exp);
                const double amount = work.erosion_pref[work.route.count[i]] * sn;
                eroded[i] = h[i] - std::min(amount, drop);
            }
        }
    }

    const bool diffusion_active = params.c_marine.has_value() || params.c_surface.has_value();
    if (diffusion_active) {
        const double c_surf = params.c_surface.value_or(0.0);
        const double c_mar = params.c_marine.value_or(0.0);
        const double scale = dt / cell2;
        for (int r = 1; r < rows - 1; ++r) {
            for (int c = 1; c < cols - 1; ++c) {
                const std::size_t i = static_cast<std::size_t>(r) * cols + c;
                const double center = eroded[i];
                const double lap = eroded[i - cols] + eroded[i + cols] + eroded[i - 1]
                                 + eroded[i + 1] - 4.0 * center;
                const double coeff = center >= sea_level ? c_surf : c_mar;
                h[i] = center + coeff * scale * lap;
            }
        }
        // Boundary rows/cols stay at the eroded (= original) values.
        for (int c = 0; c < cols; ++c) {
            h[c] = eroded[c];
            h[static_cast<std::size_t>(rows - 1) * cols + c] =
                eroded[static_cast<std::size_t>(rows - 1) * cols + c];
        }
        for (int r = 0; r < rows; ++r) {
            h[static_cast<std::size_t>(r) * cols] = eroded[static_cast<std::size_t>(r) * cols];
            h[static_cast<std::size_t>(r) * cols + cols - 1] =
                eroded[static_cast<std::size_t>(r) * cols + cols - 1];
        }
    } else {
        h.swap(eroded);
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += h[i];
    if (!std::isfinite(sum)) {
        throw NumericalOverflow("non-finite elevation after step");
    }
}

} // namespace

void LemConfig::validate(int rows, int cols) const {
    if (!(time_step > 0.0)) throw ConfigError("time_step must be positive");
    if (duration < 0.0) throw ConfigError("duration must be non-negative");
    const double ratio = duration / time_step;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 * std::max(1.0, ratio)) {
        throw ConfigError("duration must be divisible by time_step");
    }
    if (n_checkpoints < 1) throw ConfigError("need at least one checkpoint");
    if (sediment_sites.empty()) throw ConfigError("need at least one sediment site");
    for (const auto& [r, c] : sediment_sites) {
        if (r < 0 || r >= rows || c < 0 || c >= cols) {
            throw ConfigError("sediment site outside grid");
        }
    }
}

long long LemConfig::steps() const {
    return std::llround(duration / time_step);
}

FlowField flow_route(const GridTopography& topo) {
    topo.validate();
    RouteWork work;
    route_flow(topo.elevation.data(), topo.rows, topo.cols, work);
    FlowField field;
    field.receiver = work.receiver;
    const double cell2 = topo.cell_size * topo.cell_size;
    field.area.resize(topo.cell_count());
    for (std::size_t i = 0; i < field.area.size(); ++i) {
        field.area[i] = cell2 * static_cast<double>(work.count[i]);
    }
    return field;
}

GridTopography step(const GridTopography& topo, const ParameterVector& params, double dt,
                    double sea_level) {
    if (!(dt > 0.0)) throw ConfigError("dt must be positive");
    topo.validate();
    params.validate();
    GridTopography out = topo;
    StepWork work;
    build_erosion_table(work.erosion_pref, out.cell_count(), params, out.cell_size, dt);
    step_in_place(out.elevation, work, out.rows, out.cols, out.cell_size, sea_level, params,
                  dt);
    return out;
}

SimulationOutput simulate(const GridTopography& initial, const ParameterVector& params,
                          const LemConfig& config) {
    initial.validate();
    params.validate();
    config.validate(initial.rows, initial.cols);

    const long long n_steps = config.steps();
    const int n_t = config.n_checkpoints;
    const int n_sites = static_cast<int>(config.sediment_sites.size());
    const double uplift_rate = params.uplift.value_or(0.0) * 1e-3; // m/a

    SimulationOutput out;
    out.sediment = Matrix(n_sites, n_t);

    std::vector<double> h = initial.elevation;
    StepWork work;
    build_erosion_table(work.erosion_pref, h.size(), params, initial.cell_size,
                        config.time_step);

    const double checkpoint_dt = config.duration / n_t;
    const double eps = 1e-6 * config.time_step;
    int next_checkpoint = 0;

    auto record_due = [&](double elapsed) {
        while (next_checkpoint < n_t
               && checkpoint_dt * (next_checkpoint + 1) <= elapsed + eps) {
            for (int j = 0; j < n_sites; ++j) {
                const auto& [r, c] = config.sediment_sites[j];
                const std::size_t i = static_cast<std::size_t>(r) * initial.cols + c;
                out.sediment.at(j, next_checkpoint) =
                    h[i] - initial.elevation[i] - uplift_rate * elapsed;
            }
            ++next_checkpoint;
        }
    };

    record_due(0.0);
    for (long long s = 1; s <= n_steps; ++s) {
        step_in_place(h, work, initial.rows, initial.cols, initial.cell_size,
                      initial.sea_level, params, config.time_step);
        record_due(static_cast<double>(s) * config.time_step);
    }

    out.final_topography = initial;
    out.final_topography.elevation = std::move(h);
    return out;
}

void Problem::validate() const {
    initial.validate();
    bounds.validate();
    true_parameters.validate();
    config.validate(initial.rows, initial.cols);
    const auto truth = to_vector(true_parameters);
    if (truth.size() != bounds.size()) throw ConfigError("bounds/parameter count mismatch");
    for (std::size_t j = 0; j < truth.size(); ++j) {
        if (truth[j] < bounds.lower[j] || truth[j] > bounds.upper[j]) {
            throw ConfigError("true parameter outside prior bounds");
        }
    }
    const bool shape_ok =
        ground_truth.final_topography.rows == initial.rows
        && ground_truth.final_topography.cols == initial.cols
        && ground_truth.sediment.rows == static_cast<int>(config.sediment_sites.size())
        && ground_truth.sediment.cols == config.n_checkpoints;
    if (!shape_ok) throw ConfigError("ground truth shape mismatch");
}

Problem make_synthetic_problem(const std::string& kind, int grid_size, std::uint64_t seed,
                               const ProblemOptions& options) {
    if (kind != "mountain" && kind != "margin") {
        throw UnknownKind("unknown problem kind: '" + kind + "'");
    }
    if (grid_size < 8) throw ConfigError("grid_size must be at least 8");

    Problem p;
    p.name = kind;
    p.initial = GridTopography(grid_size, grid_size, options.cell_size, options.sea_level);
    p.config.duration = options.duration;
    p.config.time_step = options.time_step;
    p.config.n_checkpoints = options.n_checkpoints;

    // J sites evenly spaced along the interior diagonal.
    const int lo = 1;
    const int hi = grid_size - 2;
    const int n_sites = std::max(1, options.n_sites);
    for (int j = 0; j < n_sites; ++j) {
        const double frac = n_sites == 1 ? 0.5 : static_cast<double>(j) / (n_sites - 1);
        const int idx = lo + static_cast<int>(std::lround(frac * (hi - lo)));
        p.config.sediment_sites.emplace_back(idx, idx);
    }

    ParameterVector truth;
    truth.rainfall = 1.5;
    truth.erodibility = 5e-6;
    truth.m_exponent = 0.5;
    truth.n_exponent = 1.0;
    p.bounds.lower = {0.0, 3e-6, 0.0, 0.0};
    p.bounds.upper = {3.0, 7e-6, 2.0, 2.0};

    if (kind == "mountain") {
        // Flat start; relief builds from uplift against incision.
        truth.uplift = 1.0;
        p.bounds.lower.push_back(0.1);
        p.bounds.upper.push_back(1.7);
    } else {
        // Sloped noisy coastal surface crossing sea level.
        truth.c_marine = 0.5;
        truth.c_surface = 0.8;
        p.bounds.lower.insert(p.bounds.lower.end(), {0.3, 0.6});
        p.bounds.upper.insert(p.bounds.upper.end(), {0.7, 1.0});
        RngStream rng(derive_stream_seed(seed, 0));
        for (int r = 0; r < grid_size; ++r) {
            const double base = options.sea_level + 150.0
                              - 300.0 * static_cast<double>(r) / (grid_size - 1);
            for (int c = 0; c < grid_size; ++c) {
                p.initial.at(r, c) = base + rng.uniform(-10.0, 10.0);
            }
        }
    }

    p.true_parameters = truth;
    p.ground_truth = simulate(p.initial, truth, p.config);
    p.validate();
    return p;
}

} // namespace saptlem
