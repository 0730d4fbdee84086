#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "ritzhom/losses.hpp"
#include "ritzhom/material.hpp"
#include "ritzhom/network.hpp"
#include "ritzhom/oracle.hpp"
#include "ritzhom/sampling.hpp"
#include "ritzhom/training.hpp"

// Run configuration. The file format is a small INI dialect:
//   * `key = value` pairs, one per line
//   * `[section]` headers group per-stage settings
//   * `#` and `;` start comments
// Keys before any section header are global (seed, output). The full grammar
// and defaults are documented in the README.

namespace ritzhom {

using ConfigTree = std::map<std::string, std::map<std::string, std::string>>;

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace detail

inline ConfigTree parse_config_text(const std::string& text) {
    ConfigTree tree;
    std::string section;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto comment = line.find_first_of("#;");
        if (comment != std::string::npos) line.erase(comment);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unterminated section header");
            section = detail::trim(line.substr(1, line.size() - 2));
            tree[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
        tree[section][key] = value;
    }
    return tree;
}

inline ConfigTree parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

// `section.key=value` (or `key=value` for globals), as given on the CLI
inline void apply_override(ConfigTree& tree, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw std::invalid_argument("override must look like section.key=value: " + assignment);
    std::string key = detail::trim(assignment.substr(0, eq));
    const std::string value = detail::trim(assignment.substr(eq + 1));
    std::string section;
    const auto dot = key.find('.');
    if (dot != std::string::npos) {
        section = key.substr(0, dot);
        key = key.substr(dot + 1);
    }
    tree[section][key] = value;
}

struct StagePlan {
    TrainConfig train;
    SamplingPlan sampling;
    NetArch arch;
};

struct RunConfig {
    CaseSpec problem_case = CircleCase{0.3, 0.1};
    double matrix_conductivity = 1.0;
    MacroProblem macro;

    StagePlan cells;   // both lower-order cell nets
    StagePlan macro_stage;
    StagePlan higher;  // all four higher-order cell nets

    LossSpec loss;
    int quadrature_n = 200;
    int oracle_cell_n = 256;
    int oracle_macro_n = 256;
    int dns_n = 0;  // 0 = resolution rule
    int assembly_order = 2;

    std::string output_dir = "out";
    std::uint64_t seed = 1;

    void validate() const {
        make_microstructure(problem_case, matrix_conductivity);  // positivity checks
        const double inv = 1.0 / macro.cell_size;
        if (macro.cell_size <= 0.0 || std::abs(inv - std::round(inv)) > 1e-9)
            throw std::invalid_argument("1/cell_size must be a positive integer");
        cells.train.validate();
        macro_stage.train.validate();
        higher.train.validate();
        for (const StagePlan* s : {&cells, &macro_stage, &higher}) {
            if (s->sampling.n_interior < 1)
                throw std::invalid_argument("interior_points must be >= 1");
            if (s->arch.width < 1 || s->arch.blocks < 0)
                throw std::invalid_argument("invalid network architecture");
        }
        if (quadrature_n < 1 || oracle_cell_n < 64 || oracle_macro_n < 16)
            throw std::invalid_argument("invalid grid resolutions");
        if (assembly_order < 0 || assembly_order > 2)
            throw std::invalid_argument("assembly order must be 0, 1 or 2");
    }

    Microstructure microstructure() const {
        return make_microstructure(problem_case, matrix_conductivity);
    }
    int dns_resolution_or_default() const {
        return dns_n > 0 ? dns_n : dns_resolution(macro.cell_size);
    }
};

namespace detail {

inline const std::string* find(const ConfigTree& t, const std::string& sec,
                               const std::string& key) {
    const auto s = t.find(sec);
    if (s == t.end()) return nullptr;
    const auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
}

inline double get_num(const ConfigTree& t, const std::string& sec, const std::string& key,
                      double fallback) {
    const std::string* v = find(t, sec, key);
    if (!v) return fallback;
    std::size_t pos = 0;
    const double x = std::stod(*v, &pos);
    if (pos != v->size())
        throw std::invalid_argument("config " + sec + "." + key + ": not a number: " + *v);
    return x;
}

inline long get_int(const ConfigTree& t, const std::string& sec, const std::string& key,
                    long fallback) {
    const double x = get_num(t, sec, key, static_cast<double>(fallback));
    if (x != std::floor(x))
        throw std::invalid_argument("config " + sec + "." + key + ": expected an integer");
    return static_cast<long>(x);
}

inline bool get_bool(const ConfigTree& t, const std::string& sec, const std::string& key,
                     bool fallback) {
    const std::string* v = find(t, sec, key);
    if (!v) return fallback;
    if (*v == "true" || *v == "1" || *v == "yes") return true;
    if (*v == "false" || *v == "0" || *v == "no") return false;
    throw std::invalid_argument("config " + sec + "." + key + ": expected a boolean");
}

inline std::string get_str(const ConfigTree& t, const std::string& sec, const std::string& key,
                           const std::string& fallback) {
    const std::string* v = find(t, sec, key);
    return v ? *v : fallback;
}

inline StagePlan read_stage(const ConfigTree& t, const std::string& sec, StagePlan base) {
    base.train.epochs = get_int(t, sec, "epochs", base.train.epochs);
    base.train.lr0 = get_num(t, sec, "lr0", base.train.lr0);
    base.train.decay_factor = get_num(t, sec, "decay_factor", base.train.decay_factor);
    base.train.decay_every = get_int(t, sec, "decay_every", base.train.decay_every);
    base.sampling.n_interior =
        static_cast<int>(get_int(t, sec, "interior_points", base.sampling.n_interior));
    base.sampling.n_boundary =
        static_cast<int>(get_int(t, sec, "boundary_points", base.sampling.n_boundary));
    base.sampling.resample_each_epoch =
        get_bool(t, sec, "resample", base.sampling.resample_each_epoch);
    base.arch.width = static_cast<int>(get_int(t, sec, "width", base.arch.width));
    base.arch.blocks = static_cast<int>(get_int(t, sec, "blocks", base.arch.blocks));
    return base;
}

}  // namespace detail

inline RunConfig run_config_from_tree(const ConfigTree& t) {
    RunConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(detail::get_int(t, "", "seed", 1));
    cfg.output_dir = detail::get_str(t, "", "output", "out");

    const std::string kind = detail::get_str(t, "problem", "case", "circle");
    const double inc_k = detail::get_num(t, "problem", "inclusion_conductivity", 0.1);
    if (kind == "circle")
        cfg.problem_case = CircleCase{detail::get_num(t, "problem", "radius", 0.3), inc_k};
    else if (kind == "square")
        cfg.problem_case = SquareCase{detail::get_num(t, "problem", "side", 0.5), inc_k};
    else if (kind == "two_circles")
        cfg.problem_case = TwoCircleCase{
            inc_k, detail::get_num(t, "problem", "inclusion_conductivity_b", inc_k)};
    else if (kind == "laminate")
        cfg.problem_case = LaminateCase{inc_k};
    else if (kind == "homogeneous")
        cfg.problem_case =
            HomogeneousCase{detail::get_num(t, "problem", "matrix_conductivity", 1.0)};
    else
        throw std::invalid_argument("unknown problem case: " + kind);
    cfg.matrix_conductivity = detail::get_num(t, "problem", "matrix_conductivity", 1.0);
    cfg.macro.cell_size = detail::get_num(t, "problem", "cell_size", 0.1);
    cfg.macro.source = detail::get_num(t, "problem", "source", 10.0);

    StagePlan base;
    base.arch.width = static_cast<int>(detail::get_int(t, "network", "width", 10));
    base.arch.blocks = static_cast<int>(detail::get_int(t, "network", "blocks", 4));
    base.arch.activation =
        activation_from_name(detail::get_str(t, "network", "activation", "tanh"));
    base.sampling.n_interior = 10000;
    base.sampling.n_boundary = 400;
    base.sampling.resample_each_epoch = true;
    cfg.cells = detail::read_stage(t, "train_cells", base);
    cfg.macro_stage = detail::read_stage(t, "train_macro", base);
    cfg.higher = detail::read_stage(t, "train_higher", base);

    const std::string constraint = detail::get_str(t, "network", "constraint", "hard");
    if (constraint == "hard")
        cfg.loss.mode = ConstraintMode::kHardConstraint;
    else if (constraint == "soft")
        cfg.loss.mode = ConstraintMode::kSoftPenalty;
    else
        throw std::invalid_argument("constraint must be hard or soft");
    cfg.loss.lambda_f = detail::get_num(t, "network", "lambda_f", 1.0);
    cfg.loss.lambda_b = detail::get_num(t, "network", "lambda_b", 100.0);

    cfg.quadrature_n = static_cast<int>(detail::get_int(t, "quadrature", "points", 200));
    cfg.oracle_cell_n = static_cast<int>(detail::get_int(t, "oracle", "cell_n", 256));
    cfg.oracle_macro_n = static_cast<int>(detail::get_int(t, "oracle", "macro_n", 256));
    cfg.dns_n = static_cast<int>(detail::get_int(t, "oracle", "dns_n", 0));
    cfg.assembly_order = static_cast<int>(detail::get_int(t, "assembly", "order", 2));
    cfg.validate();
    return cfg;
}

}  // namespace ritzhom
