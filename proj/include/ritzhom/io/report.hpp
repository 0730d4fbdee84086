#pragma once

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ritzhom/assembly.hpp"
#include "ritzhom/io/config.hpp"
#include "ritzhom/oracle.hpp"
#include "ritzhom/training.hpp"

namespace ritzhom {

constexpr int kReportVersion = 1;

// Field CSV: header `x1,x2,value`, one row per node in row-major order
// (x2 outer, x1 inner), 17 significant digits, LF line endings.
inline void export_field_csv(const FieldGrid& field, const std::string& path) {
    if (field.n < 1 || field.values.empty())
        throw std::invalid_argument("export_field_csv: empty grid");
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write field file: " + path);
    std::fputs("x1,x2,value\n", f);
    for (int j = 0; j < field.n; ++j) {
        for (int i = 0; i < field.n; ++i) {
            const Vec2 p = field.node(i, j);
            std::fprintf(f, "%.17g,%.17g,%.17g\n", p[0], p[1], field(i, j));
        }
    }
    std::fclose(f);
}

inline FieldGrid import_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open field file: " + path);
    std::string header;
    std::getline(in, header);
    if (header != "x1,x2,value")
        throw std::runtime_error("field file " + path + ": bad header: " + header);
    std::vector<double> xs, ys, vs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double a, b, c;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
            throw std::runtime_error("field file " + path + ": bad row: " + line);
        xs.push_back(a);
        ys.push_back(b);
        vs.push_back(c);
    }
    const auto count = vs.size();
    const int n = static_cast<int>(std::llround(std::sqrt(static_cast<double>(count))));
    if (static_cast<std::size_t>(n) * n != count || n < 1)
        throw std::runtime_error("field file " + path + ": not a square grid");
    // reconstruct the rectangle from the first/last nodes (cell centers)
    const double hx = n > 1 ? (xs[1] - xs[0]) : 1.0;
    const double hy = n > 1 ? (ys[count - 1] - ys[0]) / (n - 1) : 1.0;
    FieldGrid g({{xs[0] - 0.5 * hx, ys[0] - 0.5 * hy},
                 {xs[0] - 0.5 * hx + n * hx, ys[0] - 0.5 * hy + n * hy}},
                n);
    g.values = std::move(vs);
    return g;
}

inline nlohmann::ordered_json tensor_json(const Mat2& a) {
    return nlohmann::ordered_json::array(
        {nlohmann::ordered_json::array({a(0, 0), a(0, 1)}),
         nlohmann::ordered_json::array({a(1, 0), a(1, 1)})});
}

inline Mat2 tensor_from_json(const nlohmann::json& j) {
    return {j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(),
            j[1][1].get<double>()};
}

inline void save_tensor(const HomogenizedTensor& t, int quadrature_n, const std::string& path) {
    nlohmann::ordered_json j;
    j["format_version"] = kReportVersion;
    j["tensor"] = tensor_json(t.a);
    j["quadrature_points"] = quadrature_n;
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write tensor file: " + path);
    out << j.dump(2) << "\n";
}

inline HomogenizedTensor load_tensor(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open tensor file: " + path);
    nlohmann::json j;
    in >> j;
    return {tensor_from_json(j.at("tensor"))};
}

inline nlohmann::ordered_json config_echo(const RunConfig& cfg) {
    nlohmann::ordered_json p;
    if (const auto* c = std::get_if<CircleCase>(&cfg.problem_case))
        p = {{"case", "circle"}, {"radius", c->radius}, {"inclusion_conductivity", c->inclusion_k}};
    else if (const auto* s = std::get_if<SquareCase>(&cfg.problem_case))
        p = {{"case", "square"}, {"side", s->side}, {"inclusion_conductivity", s->inclusion_k}};
    else if (const auto* t = std::get_if<TwoCircleCase>(&cfg.problem_case))
        p = {{"case", "two_circles"},
             {"inclusion_conductivity", t->k_lower},
             {"inclusion_conductivity_b", t->k_upper}};
    else if (const auto* l = std::get_if<LaminateCase>(&cfg.problem_case))
        p = {{"case", "laminate"}, {"inclusion_conductivity", l->left_k}};
    else
        p = {{"case", "homogeneous"},
             {"matrix_conductivity", std::get<HomogeneousCase>(cfg.problem_case).k}};
    p["matrix_conductivity"] = cfg.matrix_conductivity;
    p["cell_size"] = cfg.macro.cell_size;
    p["source"] = cfg.macro.source;

    auto stage = [](const StagePlan& s) {
        return nlohmann::ordered_json{{"width", s.arch.width},
                                      {"blocks", s.arch.blocks},
                                      {"activation", activation_name(s.arch.activation)},
                                      {"epochs", s.train.epochs},
                                      {"lr0", s.train.lr0},
                                      {"decay_factor", s.train.decay_factor},
                                      {"decay_every", s.train.decay_every},
                                      {"interior_points", s.sampling.n_interior},
                                      {"boundary_points", s.sampling.n_boundary},
                                      {"resample", s.sampling.resample_each_epoch}};
    };
    nlohmann::ordered_json j;
    j["problem"] = p;
    j["constraint"] =
        cfg.loss.mode == ConstraintMode::kHardConstraint ? "hard" : "soft";
    j["lambda_f"] = cfg.loss.lambda_f;
    j["lambda_b"] = cfg.loss.lambda_b;
    j["train_cells"] = stage(cfg.cells);
    j["train_macro"] = stage(cfg.macro_stage);
    j["train_higher"] = stage(cfg.higher);
    j["quadrature_points"] = cfg.quadrature_n;
    j["oracle"] = {{"cell_n", cfg.oracle_cell_n},
                   {"macro_n", cfg.oracle_macro_n},
                   {"dns_n", cfg.dns_resolution_or_default()}};
    j["assembly_order"] = cfg.assembly_order;
    j["seed"] = cfg.seed;
    return j;
}

struct RunReport {
    ErrorReport errors;
    Mat2 drm_tensor;
    Mat2 oracle_tensor;
    std::map<std::string, double> stage_losses;
    std::map<std::string, double> wall_times;
    nlohmann::ordered_json config;

    nlohmann::ordered_json to_json() const {
        nlohmann::ordered_json j;
        j["format_version"] = kReportVersion;
        j["config"] = config;
        j["tensor"] = tensor_json(drm_tensor);
        j["oracle_tensor"] = tensor_json(oracle_tensor);
        j["tensor_rel_error"] = errors.tensor_rel_error;
        j["errors"] = {{"error1", errors.error1},
                       {"error2", errors.error2},
                       {"error3", errors.error3}};
        j["cell_errors"] = errors.cell_errors;
        j["macro_error"] = errors.macro_error;
        j["stage_losses"] = stage_losses;
        j["wall_times"] = wall_times;
        return j;
    }
};

inline void write_history_csv(const TrainRecord& rec, const TrainConfig& cfg,
                              const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw std::runtime_error("cannot write history file: " + path);
    std::fputs("epoch,loss,lr\n", f);
    for (std::size_t e = 0; e < rec.loss_history.size(); ++e)
        std::fprintf(f, "%zu,%.17g,%.17g\n", e, rec.loss_history[e],
                     lr_at(cfg, static_cast<long>(e)));
    std::fclose(f);
}

}  // namespace ritzhom
