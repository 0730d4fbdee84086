#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "ritzhom/io/checkpoint.hpp"
#include "ritzhom/io/config.hpp"
#include "ritzhom/io/report.hpp"
#include "ritzhom/rng.hpp"

using namespace ritzhom;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("ritzhom_test_" + std::to_string(Rng(std::random_device{}()).raw()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing with sections, comments and overrides") {
    const std::string text = R"(
# global settings
seed = 7
output = /tmp/somewhere

[problem]
case = square           ; inline comment
side = 0.5
inclusion_conductivity = 0.01
cell_size = 0.1

[train_cells]
epochs = 123
interior_points = 777
resample = false
)";
    ConfigTree tree = parse_config_text(text);
    apply_override(tree, "train_macro.epochs=55");
    apply_override(tree, "seed=9");
    const RunConfig cfg = run_config_from_tree(tree);
    CHECK(cfg.seed == 9);
    CHECK(cfg.output_dir == "/tmp/somewhere");
    CHECK(std::get<SquareCase>(cfg.problem_case).inclusion_k == 0.01);
    CHECK(cfg.cells.train.epochs == 123);
    CHECK(cfg.cells.sampling.n_interior == 777);
    CHECK_FALSE(cfg.cells.sampling.resample_each_epoch);
    CHECK(cfg.macro_stage.train.epochs == 55);
    CHECK(cfg.macro_stage.sampling.resample_each_epoch);  // untouched default
    CHECK(cfg.higher.train.epochs == 30000);
}

TEST_CASE("config validation rejects bad input") {
    ConfigTree tree;
    tree["problem"]["cell_size"] = "0.3";
    CHECK_THROWS_AS(run_config_from_tree(tree), std::invalid_argument);
    tree = {};
    tree["problem"]["inclusion_conductivity"] = "-1";
    CHECK_THROWS_AS(run_config_from_tree(tree), std::invalid_argument);
    tree = {};
    tree["train_cells"]["epochs"] = "-5";
    CHECK_THROWS_AS(run_config_from_tree(tree), std::invalid_argument);
    tree = {};
    tree["network"]["activation"] = "swish";
    CHECK_THROWS_AS(run_config_from_tree(tree), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("novalue\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config_text("[open\n"), std::invalid_argument);
}

TEST_CASE("checkpoint round trip reproduces forwards bit-exactly") {
    TempDir tmp;
    const HardConstrainedNet net{init_params(10, 4, Activation::kTanh, 77), unit_square()};
    CheckpointMeta meta;
    meta.seed = 123;
    meta.sampling_seed = 456;
    meta.epochs = 42;
    meta.final_loss = -0.0123;
    const std::string path = (tmp.path / "net.json").string();
    save_checkpoint(net, meta, path);
    const LoadedCheckpoint loaded = load_checkpoint(path);
    CHECK(loaded.meta.seed == 123);
    CHECK(loaded.meta.epochs == 42);
    CHECK(loaded.net.base.arch == net.base.arch);
    REQUIRE(loaded.net.base.params.size() == 1031);
    Rng rng(5);
    for (int k = 0; k < 100; ++k) {
        const Vec2 y{rng.uniform01(), rng.uniform01()};
        REQUIRE(forward(loaded.net, y) == forward(net, y));
    }
}

TEST_CASE("checkpoint with wrong parameter count is rejected with counts named") {
    TempDir tmp;
    const HardConstrainedNet net{init_params(4, 1, Activation::kTanh, 3), unit_square()};
    const std::string path = (tmp.path / "net.json").string();
    save_checkpoint(net, {}, path);
    // corrupt: drop one parameter
    std::ifstream in(path);
    nlohmann::json j;
    in >> j;
    in.close();
    auto params = j["params"].get<std::vector<double>>();
    params.pop_back();
    j["params"] = params;
    std::ofstream out(path);
    out << j.dump();
    out.close();
    try {
        load_checkpoint(path);
        FAIL("expected CheckpointError");
    } catch (const CheckpointError& e) {
        const std::string msg = e.what();
        CHECK(msg.find(std::to_string(param_count({4, 1, {}}))) != std::string::npos);
        CHECK(msg.find(std::to_string(param_count({4, 1, {}}) - 1)) != std::string::npos);
    }
    // version mismatch
    j["format_version"] = 99;
    std::ofstream out2(path);
    out2 << j.dump();
    out2.close();
    CHECK_THROWS_AS(load_checkpoint(path), CheckpointError);
}

TEST_CASE("field CSV format and round trip") {
    TempDir tmp;
    FieldGrid g(unit_square(), 2);
    g(0, 0) = 1.0;
    g(1, 0) = 1.0;
    g(0, 1) = 1.0;
    g(1, 1) = 1.0;
    const std::string path = (tmp.path / "f.csv").string();
    export_field_csv(g, path);

    std::ifstream in(path);
    std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    const int lines = static_cast<int>(std::count(all.begin(), all.end(), '\n'));
    CHECK(lines == 5);  // header + 4 rows
    CHECK(all.rfind("x1,x2,value\n", 0) == 0);
    CHECK(all.find("\r") == std::string::npos);

    // row-major: x2 outer, x1 inner
    std::istringstream ss(all);
    std::string line;
    std::getline(ss, line);
    std::getline(ss, line);
    CHECK(line.rfind("0.25,0.25", 0) == 0);
    std::getline(ss, line);
    CHECK(line.rfind("0.75,0.25", 0) == 0);

    // bit-exact round trip with awkward values
    FieldGrid h(unit_square(), 3);
    Rng rng(9);
    for (double& v : h.values) v = (rng.uniform01() - 0.5) * 1e-7;
    export_field_csv(h, path);
    const FieldGrid back = import_field_csv(path);
    REQUIRE(back.n == 3);
    for (std::size_t k = 0; k < h.values.size(); ++k) REQUIRE(back.values[k] == h.values[k]);

    FieldGrid empty;
    CHECK_THROWS_AS(export_field_csv(empty, path), std::invalid_argument);
}

TEST_CASE("tensor file round trip") {
    TempDir tmp;
    const HomogenizedTensor t{{0.63081, 1.2e-9, -3.4e-9, 0.63080}};
    const std::string path = (tmp.path / "tensor.json").string();
    save_tensor(t, 200, path);
    const HomogenizedTensor back = load_tensor(path);
    CHECK(back.a(0, 0) == t.a(0, 0));
    CHECK(back.a(0, 1) == t.a(0, 1));
    CHECK(back.a(1, 0) == t.a(1, 0));
    CHECK(back.a(1, 1) == t.a(1, 1));
}

TEST_CASE("history CSV has the documented columns") {
    TempDir tmp;
    TrainRecord rec;
    rec.loss_history = {1.0, 0.5, 0.25};
    TrainConfig cfg;
    const std::string path = (tmp.path / "h.csv").string();
    write_history_csv(rec, cfg, path);
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "epoch,loss,lr");
    std::getline(in, line);
    CHECK(line.rfind("0,1,", 0) == 0);
}
