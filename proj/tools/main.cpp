// Command-line driver: trains the cell/macro networks, runs the grid
// reference solvers, assembles the multi-scale field and writes the error
// report. Stages can run individually or end to end (`run`); completed
// stages are picked up from their artifacts unless --fresh is given.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ritzhom/io/config.hpp"
#include "ritzhom/pipeline.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string output_dir;
    std::vector<std::string> overrides;
    long seed = -1;
    bool fresh = false;
};

ritzhom::RunConfig load_config(const CliOptions& opt) {
    ritzhom::ConfigTree tree;
    if (!opt.config_path.empty()) tree = ritzhom::parse_config_file(opt.config_path);
    for (const std::string& o : opt.overrides) ritzhom::apply_override(tree, o);
    if (opt.seed >= 0) tree[""]["seed"] = std::to_string(opt.seed);
    if (!opt.output_dir.empty()) tree[""]["output"] = opt.output_dir;
    return ritzhom::run_config_from_tree(tree);
}

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("-c,--config", opt.config_path, "configuration file (INI-style)");
    cmd->add_option("-o,--out", opt.output_dir, "output directory (overrides config)");
    cmd->add_option("--set", opt.overrides,
                    "override a config value, e.g. --set problem.radius=0.2");
    cmd->add_option("--seed", opt.seed, "override the global seed");
    cmd->add_flag("--fresh", opt.fresh, "ignore existing artifacts and recompute");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"higher-order multi-scale deep Ritz solver for periodic composites"};
    app.require_subcommand(1);

    CliOptions opt;
    const char* stage_names[] = {"run",          "cells-lower", "homogenize", "macro",
                                 "cells-higher", "oracle",      "assemble",   "report"};
    const char* stage_help[] = {
        "full pipeline: all stages in order",
        "train the two lower-order cell networks",
        "quadrature of the homogenized tensor from the trained cell networks",
        "train the homogenized macro network",
        "train the four higher-order cell networks",
        "fine-grid and cell reference solves (CSV artifacts)",
        "export the assembled multi-scale field on the fine grid",
        "compute the error metrics and write report.json"};
    for (int k = 0; k < 8; ++k) add_common(app.add_subcommand(stage_names[k], stage_help[k]), opt);

    CLI11_PARSE(app, argc, argv);
    const std::string stage = app.get_subcommands().front()->get_name();

    try {
        ritzhom::Pipeline pipeline(load_config(opt), opt.fresh);
        if (stage == "run") {
            const ritzhom::RunReport rep = pipeline.run();
            std::printf("error1 = %.6f  error2 = %.6f  error3 = %.6f\n", rep.errors.error1,
                        rep.errors.error2, rep.errors.error3);
        } else if (stage == "cells-lower") {
            pipeline.cells_lower();
        } else if (stage == "homogenize") {
            pipeline.homogenize();
        } else if (stage == "macro") {
            pipeline.macro();
        } else if (stage == "cells-higher") {
            pipeline.cells_higher();
        } else if (stage == "oracle") {
            pipeline.oracle();
        } else if (stage == "assemble") {
            pipeline.assemble();
        } else if (stage == "report") {
            const ritzhom::RunReport rep = pipeline.report();
            std::printf("error1 = %.6f  error2 = %.6f  error3 = %.6f\n", rep.errors.error1,
                        rep.errors.error2, rep.errors.error3);
        }
    } catch (const ritzhom::PipelineError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error (%s): %s\n", stage.c_str(), e.what());
        return 1;
    }
    return 0;
}
