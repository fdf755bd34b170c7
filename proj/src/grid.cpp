#include <saptlem/grid.hpp>

#include <saptlem/errors.hpp>
#include <saptlem/textio.hpp>

#include <cmath>
#include <sstream>

namespace saptlem {

GridTopography::GridTopography(int rows_, int cols_, double cell_size_, double sea_level_,
                               double fill)
    : rows(rows_), cols(cols_), cell_size(cell_size_), sea_level(sea_level_),
      elevation(static_cast<std::size_t>(rows_) * cols_, fill) {}

void GridTopography::validate() const {
    if (rows < 2 || cols < 2) throw ConfigError("grid needs at least 2x2 cells");
    if (!(cell_size > 0.0)) throw ConfigError("cell_size must be positive");
    if (elevation.size() != cell_count()) throw ConfigError("elevation size mismatch");
    for (double h : elevation) {
        if (!std::isfinite(h)) throw ConfigError("non-finite elevation");
    }
}

std::string grid_to_string(const GridTopography& grid) {
    std::string out;
    out += std::to_string(grid.rows) + " " + std::to_string(grid.cols) + " "
         + format_double(grid.cell_size) + " " + format_double(grid.sea_level) + "\n";
    for (int r = 0; r < grid.rows; ++r) {
        for (int c = 0; c < grid.cols; ++c) {
            if (c > 0) out += ' ';
            out += format_double(grid.at(r, c));
        }
        out += '\n';
    }
    return out;
}

GridTopography grid_from_string(const std::string& text) {
    std::istringstream in(text);
    std::string header;
    if (!std::getline(in, header)) throw IoError("empty grid file");
    auto fields = split(header, ' ');
    if (fields.size() != 4) throw IoError("grid header needs 4 fields");

    GridTopography grid;
    grid.rows = static_cast<int>(parse_int(fields[0]));
    grid.cols = static_cast<int>(parse_int(fields[1]));
    grid.cell_size = parse_double(fields[2]);
    grid.sea_level = parse_double(fields[3]);
    if (grid.rows < 2 || grid.cols < 2) throw IoError("grid too small");
    grid.elevation.reserve(grid.cell_count());

    std::string line;
    for (int r = 0; r < grid.rows; ++r) {
        if (!std::getline(in, line)) throw IoError("grid file truncated");
        auto cells = split(line, ' ');
        if (static_cast<int>(cells.size()) != grid.cols) {
            throw IoError("grid row has wrong column count");
        }
        for (const auto& cell : cells) grid.elevation.push_back(parse_double(cell));
    }
    grid.validate();
    return grid;
}

void write_grid(const std::filesystem::path& path, const GridTopography& grid) {
    write_text_file(path, grid_to_string(grid));
}

GridTopography read_grid(const std::filesystem::path& path) {
    return grid_from_string(read_text_file(path));
}

} // namespace saptlem
