#pragma once

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

#include "ritzhom/assembly.hpp"
#include "ritzhom/io/checkpoint.hpp"
#include "ritzhom/io/config.hpp"
#include "ritzhom/io/report.hpp"
#include "ritzhom/losses.hpp"
#include "ritzhom/oracle.hpp"
#include "ritzhom/training.hpp"

// Stage orchestration: cells-lower -> homogenize -> macro -> cells-higher ->
// oracle -> assemble -> report. Every stage persists its artifacts under the
// output directory and is skipped on re-runs when a matching artifact exists
// (same architecture, seeds and epoch count), so a resumed pipeline
// reproduces an uninterrupted one bit-exactly.

namespace ritzhom {

class PipelineError : public std::runtime_error {
  public:
    PipelineError(const std::string& stage, const std::string& what)
        : std::runtime_error("stage " + stage + ": " + what), stage(stage) {}
    std::string stage;
};

class Pipeline {
  public:
    explicit Pipeline(RunConfig cfg, bool fresh = false)
        : cfg_(std::move(cfg)), fresh_(fresh), micro_(cfg_.microstructure()) {
        cfg_.validate();
        if (cfg_.loss.mode != ConstraintMode::kHardConstraint)
            throw PipelineError("setup",
                                "the full pipeline requires hard-constraint mode; the "
                                "soft-penalty loss is available at the library level");
        namespace fs = std::filesystem;
        fs::create_directories(out() / "checkpoints");
        fs::create_directories(out() / "history");
        fs::create_directories(out() / "oracle");
        fs::create_directories(out() / "fields");
    }

    const RunConfig& config() const { return cfg_; }

    // Step 2 (first half): lower-order cell nets
    void cells_lower() {
        for (int alpha : {1, 2}) {
            const std::string name = alpha == 1 ? "n1" : "n2";
            train_stage(name, cfg_.cells, [&](const SamplingPlan& plan) {
                return make_lower_cell_objective(cfg_.cells.arch, unit_square(), alpha, micro_,
                                                 plan, cfg_.loss);
            });
        }
    }

    // Step 2 (second half): quadrature of the homogenized tensor
    void homogenize() {
        const auto path = out() / "tensor.json";
        if (!fresh_ && std::filesystem::exists(path)) return;
        const auto t0 = now();
        const HardConstrainedNet n1 = need_net("n1");
        const HardConstrainedNet n2 = need_net("n2");
        const HomogenizedTensor a0 =
            homog_coefficient(n1, n2, micro_, midpoint_grid(unit_square(), cfg_.quadrature_n));
        if (!a0.positive_definite())
            throw PipelineError("homogenize", "computed tensor is not positive definite");
        save_tensor(a0, cfg_.quadrature_n, path.string());
        times_["homogenize"] = since(t0);
    }

    // Step 3: homogenized macro solution
    void macro() {
        const HomogenizedTensor a0 = need_tensor();
        train_stage("u0", cfg_.macro_stage, [&](const SamplingPlan& plan) {
            return make_macro_objective(cfg_.macro_stage.arch, cfg_.macro.domain, a0,
                                        cfg_.macro.source, plan, cfg_.loss);
        });
    }

    // Step 4: higher-order cell nets against frozen lower-order ones
    void cells_higher() {
        const HomogenizedTensor a0 = need_tensor();
        for (int a1 : {1, 2}) {
            const HardConstrainedNet lower = need_net(a1 == 1 ? "n1" : "n2");
            for (int a2 : {1, 2}) {
                const std::string name = "n" + std::to_string(a1) + std::to_string(a2);
                train_stage(name, cfg_.higher, [&](const SamplingPlan& plan) {
                    return make_higher_cell_objective(cfg_.higher.arch, unit_square(), a1, a2,
                                                      lower, a0, micro_, plan, cfg_.loss);
                });
            }
        }
    }

    // reference solves; persisted as CSV grids + the oracle tensor
    void oracle() {
        namespace fs = std::filesystem;
        const char* names[8] = {"dns", "u0", "n1", "n2", "n11", "n12", "n21", "n22"};
        bool all = fs::exists(out() / "oracle" / "tensor.json");
        for (const char* n : names) all = all && fs::exists(out() / "oracle" / (std::string(n) + ".csv"));
        if (!fresh_ && all && oracle_meta_matches()) return;
        const auto t0 = now();
        try {
            const HomsReference ref(micro_, cfg_.macro, cfg_.oracle_cell_n, cfg_.oracle_macro_n);
            const FieldGrid dns =
                dns_solve(micro_, cfg_.macro, cfg_.dns_resolution_or_default());
            export_field_csv(dns, (out() / "oracle" / "dns.csv").string());
            export_field_csv(ref.u0(), (out() / "oracle" / "u0.csv").string());
            export_field_csv(ref.cell_grid(1), (out() / "oracle" / "n1.csv").string());
            export_field_csv(ref.cell_grid(2), (out() / "oracle" / "n2.csv").string());
            export_field_csv(ref.cell_grid(1, 1), (out() / "oracle" / "n11.csv").string());
            export_field_csv(ref.cell_grid(1, 2), (out() / "oracle" / "n12.csv").string());
            export_field_csv(ref.cell_grid(2, 1), (out() / "oracle" / "n21.csv").string());
            export_field_csv(ref.cell_grid(2, 2), (out() / "oracle" / "n22.csv").string());
            save_tensor(ref.tensor(), cfg_.oracle_cell_n,
                        (out() / "oracle" / "tensor.json").string());
            std::ofstream meta((out() / "oracle" / "meta.json").string());
            meta << oracle_meta().dump(2) << "\n";
        } catch (const SolverError& e) {
            throw PipelineError("oracle", e.what());
        }
        times_["oracle"] = since(t0);
    }

    // Step 5: export the assembled field on the fine grid
    void assemble() {
        const auto t0 = now();
        MultiscaleSolution sol = solution();
        MultiscaleField field(sol);
        FieldGrid grid(cfg_.macro.domain, cfg_.dns_resolution_or_default());
        export_field_csv(field.on_grid(grid), (out() / "fields" / "u_drm.csv").string());
        times_["assemble"] = since(t0);
    }

    RunReport report() {
        const auto t0 = now();
        MultiscaleSolution sol = solution();
        const HomsReference ref = load_oracle();
        const FieldGrid dns = import_field_csv((out() / "oracle" / "dns.csv").string());
        const HomogenizedTensor drm_tensor = need_tensor();

        RunReport rep;
        rep.errors = error_suite(sol, ref, dns, drm_tensor);
        if (!rep.errors.all_finite())
            throw PipelineError("report", "non-finite entries in the error report");
        rep.drm_tensor = drm_tensor.a;
        rep.oracle_tensor = ref.tensor().a;
        for (const char* n : {"n1", "n2", "u0", "n11", "n12", "n21", "n22"}) {
            const auto ck = try_load_checkpoint((out() / "checkpoints" / (std::string(n) + ".json")).string());
            if (ck) rep.stage_losses[n] = ck->meta.final_loss;
        }
        times_["report"] = since(t0);
        rep.wall_times = times_;
        rep.config = config_echo(cfg_);
        std::ofstream js((out() / "report.json").string());
        if (!js) throw PipelineError("report", "cannot write report.json");
        js << rep.to_json().dump(2) << "\n";
        return rep;
    }

    RunReport run() {
        cells_lower();
        homogenize();
        macro();
        cells_higher();
        oracle();
        assemble();
        return report();
    }

    // the trained nets as one evaluable multi-scale solution
    MultiscaleSolution solution() {
        MultiscaleSolution sol;
        sol.u0 = need_net("u0");
        sol.cell_lower = {need_net("n1"), need_net("n2")};
        sol.cell_higher = {need_net("n11"), need_net("n12"), need_net("n21"), need_net("n22")};
        sol.xi = cfg_.macro.cell_size;
        sol.order = cfg_.assembly_order;
        return sol;
    }

    // a single trained net by stage name (n1, n2, u0, n11, n12, n21, n22)
    HardConstrainedNet net(const std::string& name) { return need_net(name); }

    HomogenizedTensor tensor() { return need_tensor(); }

  private:
    using Clock = std::chrono::steady_clock;
    static Clock::time_point now() { return Clock::now(); }
    static double since(Clock::time_point t0) {
        return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    std::filesystem::path out() const { return cfg_.output_dir; }

    // identifies what the nets were trained on; deliberately excludes the
    // cell size so solutions can be reused across scale ratios
    std::string problem_tag() const {
        char buf[256];
        std::string shape;
        if (const auto* c = std::get_if<CircleCase>(&cfg_.problem_case)) {
            std::snprintf(buf, sizeof buf, "circle r=%.12g k=%.12g", c->radius, c->inclusion_k);
        } else if (const auto* q = std::get_if<SquareCase>(&cfg_.problem_case)) {
            std::snprintf(buf, sizeof buf, "square s=%.12g k=%.12g", q->side, q->inclusion_k);
        } else if (const auto* t = std::get_if<TwoCircleCase>(&cfg_.problem_case)) {
            std::snprintf(buf, sizeof buf, "two_circles k=%.12g/%.12g", t->k_lower, t->k_upper);
        } else if (const auto* l = std::get_if<LaminateCase>(&cfg_.problem_case)) {
            std::snprintf(buf, sizeof buf, "laminate k=%.12g", l->left_k);
        } else {
            std::snprintf(buf, sizeof buf, "homogeneous k=%.12g",
                          std::get<HomogeneousCase>(cfg_.problem_case).k);
        }
        shape = buf;
        std::snprintf(buf, sizeof buf, " m=%.12g f=%.12g lf=%.12g", cfg_.matrix_conductivity,
                      cfg_.macro.source, cfg_.loss.lambda_f);
        return shape + buf;
    }

    static std::uint64_t stage_salt(const std::string& name) {
        std::uint64_t s = 0;
        for (char c : name) s = s * 131 + static_cast<unsigned char>(c);
        return s;
    }

    void train_stage(const std::string& name, const StagePlan& plan,
                     const std::function<EnergyObjective(const SamplingPlan&)>& make_objective) {
        const auto path = out() / "checkpoints" / (name + ".json");
        const std::uint64_t net_seed = mix_seed(cfg_.seed, stage_salt(name));
        const std::uint64_t samp_seed = mix_seed(cfg_.seed, stage_salt(name) + 0x9000);
        if (!fresh_) {
            const auto existing = try_load_checkpoint(path.string());
            if (existing && existing->net.base.arch == plan.arch &&
                existing->meta.seed == net_seed && existing->meta.sampling_seed == samp_seed &&
                existing->meta.epochs == plan.train.epochs &&
                existing->meta.problem == problem_tag())
                return;  // resume: artifact matches this configuration
        }
        const auto t0 = now();
        ResidualNet net =
            init_params(plan.arch.width, plan.arch.blocks, plan.arch.activation, net_seed);
        SamplingPlan sampling = plan.sampling;
        sampling.seed = samp_seed;
        EnergyObjective objective = make_objective(sampling);
        TrainRecord rec;
        try {
            rec = train(net, objective, plan.train);
        } catch (const TrainingDiverged& e) {
            throw PipelineError(name, e.what());
        }
        CheckpointMeta meta;
        meta.seed = net_seed;
        meta.sampling_seed = samp_seed;
        meta.epochs = plan.train.epochs;
        meta.final_loss = rec.loss_history.empty() ? 0.0 : rec.loss_history.back();
        meta.problem = problem_tag();
        const Rect domain =
            name == "u0" ? cfg_.macro.domain : unit_square();
        save_checkpoint({net, domain}, meta, path.string());
        write_history_csv(rec, plan.train, (out() / "history" / (name + ".csv")).string());
        times_[name] = since(t0);
    }

    HardConstrainedNet need_net(const std::string& name) {
        const auto path = out() / "checkpoints" / (name + ".json");
        const auto ck = try_load_checkpoint(path.string());
        if (!ck)
            throw PipelineError(name, "missing checkpoint " + path.string() +
                                          " (run the earlier stages first)");
        return ck->net;
    }

    HomogenizedTensor need_tensor() {
        const auto path = out() / "tensor.json";
        if (!std::filesystem::exists(path))
            throw PipelineError("homogenize",
                                "missing tensor.json (run the homogenize stage first)");
        return load_tensor(path.string());
    }

    nlohmann::ordered_json oracle_meta() const {
        nlohmann::ordered_json j;
        j["problem"] = problem_tag();
        j["cell_size"] = cfg_.macro.cell_size;
        j["cell_n"] = cfg_.oracle_cell_n;
        j["macro_n"] = cfg_.oracle_macro_n;
        j["dns_n"] = cfg_.dns_resolution_or_default();
        return j;
    }

    bool oracle_meta_matches() const {
        std::ifstream in((out() / "oracle" / "meta.json").string());
        if (!in) return false;
        try {
            nlohmann::json j;
            in >> j;
            return j == oracle_meta();
        } catch (const nlohmann::json::exception&) {
            return false;
        }
    }

    HomsReference load_oracle() {
        namespace fs = std::filesystem;
        const auto dir = out() / "oracle";
        if (!fs::exists(dir / "tensor.json"))
            throw PipelineError("oracle", "missing oracle artifacts (run the oracle stage first)");
        return HomsReference::from_grids(
            cfg_.macro.cell_size, load_tensor((dir / "tensor.json").string()),
            import_field_csv((dir / "u0.csv").string()),
            import_field_csv((dir / "n1.csv").string()),
            import_field_csv((dir / "n2.csv").string()),
            import_field_csv((dir / "n11.csv").string()),
            import_field_csv((dir / "n12.csv").string()),
            import_field_csv((dir / "n21.csv").string()),
            import_field_csv((dir / "n22.csv").string()));
    }

    RunConfig cfg_;
    bool fresh_;
    Microstructure micro_;
    std::map<std::string, double> times_;
};

inline RunReport run_pipeline(const RunConfig& cfg, bool fresh = false) {
    Pipeline p(cfg, fresh);
    return p.run();
}

}  // namespace ritzhom
