#include <saptlem/parameters.hpp>
#include <saptlem/problem.hpp>

#include <saptlem/errors.hpp>
#include <saptlem/textio.hpp>

#include <json.hpp>

#include <cmath>

namespace saptlem {

using nlohmann::json;

void ParameterVector::validate() const {
    auto check = [](double v) {
        if (!std::isfinite(v)) throw ConfigError("non-finite parameter value");
    };
    check(rainfall);
    check(erodibility);
    check(m_exponent);
    check(n_exponent);
    if (c_marine) check(*c_marine);
    if (c_surface) check(*c_surface);
    if (uplift) check(*uplift);
}

void PriorBounds::validate() const {
    if (lower.size() != upper.size()) throw ConfigError("prior bound arrays differ in length");
    if (lower.empty()) throw ConfigError("empty prior bounds");
    for (std::size_t j = 0; j < lower.size(); ++j) {
        if (!(lower[j] < upper[j])) throw ConfigError("prior bounds need lower < upper");
    }
}

std::vector<std::string> parameter_names(const ParameterVector& layout) {
    std::vector<std::string> names = {"rainfall", "erodibility", "m", "n"};
    if (layout.c_marine) names.push_back("c_marine");
    if (layout.c_surface) names.push_back("c_surface");
    if (layout.uplift) names.push_back("uplift");
    return names;
}

std::vector<double> to_vector(const ParameterVector& p) {
    std::vector<double> v = {p.rainfall, p.erodibility, p.m_exponent, p.n_exponent};
    if (p.c_marine) v.push_back(*p.c_marine);
    if (p.c_surface) v.push_back(*p.c_surface);
    if (p.uplift) v.push_back(*p.uplift);
    return v;
}

ParameterVector from_vector(const std::vector<double>& v, const ParameterVector& layout) {
    std::size_t expected = 4 + (layout.c_marine ? 1 : 0) + (layout.c_surface ? 1 : 0)
                         + (layout.uplift ? 1 : 0);
    if (v.size() != expected) throw DimensionMismatch("parameter vector length mismatch");
    ParameterVector p;
    std::size_t k = 0;
    p.rainfall = v[k++];
    p.erodibility = v[k++];
    p.m_exponent = v[k++];
    p.n_exponent = v[k++];
    if (layout.c_marine) p.c_marine = v[k++];
    if (layout.c_surface) p.c_surface = v[k++];
    if (layout.uplift) p.uplift = v[k++];
    return p;
}

namespace {

json grid_to_json(const GridTopography& g) {
    json rows = json::array();
    for (int r = 0; r < g.rows; ++r) {
        json row = json::array();
        for (int c = 0; c < g.cols; ++c) row.push_back(g.at(r, c));
        rows.push_back(std::move(row));
    }
    return json{{"rows", g.rows},
                {"cols", g.cols},
                {"cell_size", g.cell_size},
                {"sea_level", g.sea_level},
                {"elevation", std::move(rows)}};
}

GridTopography grid_from_json(const json& j) {
    GridTopography g(j.at("rows").get<int>(), j.at("cols").get<int>(),
                     j.at("cell_size").get<double>(), j.at("sea_level").get<double>());
    const auto& rows = j.at("elevation");
    if (static_cast<int>(rows.size()) != g.rows) throw IoError("grid row count mismatch");
    for (int r = 0; r < g.rows; ++r) {
        const auto& row = rows[r];
        if (static_cast<int>(row.size()) != g.cols) throw IoError("grid column count mismatch");
        for (int c = 0; c < g.cols; ++c) g.at(r, c) = row[c].get<double>();
    }
    g.validate();
    return g;
}

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (int r = 0; r < m.rows; ++r) {
        json row = json::array();
        for (int c = 0; c < m.cols; ++c) row.push_back(m.at(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j) {
    int rows = static_cast<int>(j.size());
    if (rows == 0) return Matrix();
    int cols = static_cast<int>(j[0].size());
    Matrix m(rows, cols);
    for (int r = 0; r < rows; ++r) {
        if (static_cast<int>(j[r].size()) != cols) throw IoError("ragged matrix in bundle");
        for (int c = 0; c < cols; ++c) m.at(r, c) = j[r][c].get<double>();
    }
    return m;
}

json params_to_json(const ParameterVector& p) {
    json j{{"rainfall", p.rainfall},
           {"erodibility", p.erodibility},
           {"m", p.m_exponent},
           {"n", p.n_exponent}};
    if (p.c_marine) j["c_marine"] = *p.c_marine;
    if (p.c_surface) j["c_surface"] = *p.c_surface;
    if (p.uplift) j["uplift"] = *p.uplift;
    return j;
}

ParameterVector params_from_json(const json& j) {
    ParameterVector p;
    p.rainfall = j.at("rainfall").get<double>();
    p.erodibility = j.at("erodibility").get<double>();
    p.m_exponent = j.at("m").get<double>();
    p.n_exponent = j.at("n").get<double>();
    if (j.contains("c_marine")) p.c_marine = j["c_marine"].get<double>();
    if (j.contains("c_surface")) p.c_surface = j["c_surface"].get<double>();
    if (j.contains("uplift")) p.uplift = j["uplift"].get<double>();
    return p;
}

} // namespace

std::string problem_to_json_string(const Problem& problem) {
    json sites = json::array();
    for (const auto& [r, c] : problem.config.sediment_sites) {
        sites.push_back(json::array({r, c}));
    }
    json j{{"name", problem.name},
           {"initial_topography", grid_to_json(problem.initial)},
           {"true_parameters", params_to_json(problem.true_parameters)},
           {"parameter_names", parameter_names(problem.true_parameters)},
           {"prior_lower", problem.bounds.lower},
           {"prior_upper", problem.bounds.upper},
           {"config",
            {{"duration", problem.config.duration},
             {"time_step", problem.config.time_step},
             {"n_checkpoints", problem.config.n_checkpoints},
             {"sediment_sites", std::move(sites)}}},
           {"ground_truth",
            {{"final_topography", grid_to_json(problem.ground_truth.final_topography)},
             {"sediment", matrix_to_json(problem.ground_truth.sediment)}}}};
    return j.dump(1);
}

Problem problem_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError(std::string("problem bundle parse failure: ") + e.what());
    }
    try {
        Problem p;
        p.name = j.at("name").get<std::string>();
        p.initial = grid_from_json(j.at("initial_topography"));
        p.true_parameters = params_from_json(j.at("true_parameters"));
        p.bounds.lower = j.at("prior_lower").get<std::vector<double>>();
        p.bounds.upper = j.at("prior_upper").get<std::vector<double>>();
        const auto& cfg = j.at("config");
        p.config.duration = cfg.at("duration").get<double>();
        p.config.time_step = cfg.at("time_step").get<double>();
        p.config.n_checkpoints = cfg.at("n_checkpoints").get<int>();
        for (const auto& site : cfg.at("sediment_sites")) {
            p.config.sediment_sites.emplace_back(site[0].get<int>(), site[1].get<int>());
        }
        p.ground_truth.final_topography = grid_from_json(j.at("ground_truth").at("final_topography"));
        p.ground_truth.sediment = matrix_from_json(j.at("ground_truth").at("sediment"));
        p.validate();
        return p;
    } catch (const json::exception& e) {
        throw IoError(std::string("problem bundle field failure: ") + e.what());
    }
}

void write_problem(const std::filesystem::path& path, const Problem& problem) {
    write_text_file(path, problem_to_json_string(problem));
}

Problem read_problem(const std::filesystem::path& path) {
    return problem_from_json_string(read_text_file(path));
}

} // namespace saptlem
