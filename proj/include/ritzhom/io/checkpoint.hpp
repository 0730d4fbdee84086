#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "ritzhom/network.hpp"

// Versioned JSON checkpoints. The flat parameter array follows the layout
// documented in network.hpp (entry, blocks in order with inner-then-outer
// layer, exit, head; row-major weights). Doubles survive the round trip
// bit-exactly.

namespace ritzhom {

constexpr int kCheckpointVersion = 1;

struct CheckpointMeta {
    std::uint64_t seed = 0;
    std::uint64_t sampling_seed = 0;
    long epochs = 0;
    double final_loss = 0.0;
    std::string problem;  // fingerprint of the trained problem (cell-size free)
};

class CheckpointError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void save_checkpoint(const HardConstrainedNet& net, const CheckpointMeta& meta,
                            const std::string& path) {
    nlohmann::ordered_json j;
    j["format_version"] = kCheckpointVersion;
    j["arch"] = {{"input_dim", kInputDim},
                 {"width", net.base.arch.width},
                 {"blocks", net.base.arch.blocks},
                 {"activation", activation_name(net.base.arch.activation)}};
    j["hard_constraint"] = {{"lo", {net.domain.lo[0], net.domain.lo[1]}},
                            {"hi", {net.domain.hi[0], net.domain.hi[1]}}};
    j["params"] = net.base.params;
    j["meta"] = {{"seed", meta.seed},
                 {"sampling_seed", meta.sampling_seed},
                 {"epochs", meta.epochs},
                 {"final_loss", meta.final_loss},
                 {"problem", meta.problem}};
    std::ofstream out(path);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path);
    out << j.dump(2) << "\n";
}

struct LoadedCheckpoint {
    HardConstrainedNet net;
    CheckpointMeta meta;
};

inline LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw CheckpointError("cannot open checkpoint: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("malformed checkpoint " + path + ": " + e.what());
    }
    if (!j.contains("format_version") || j["format_version"].get<int>() != kCheckpointVersion)
        throw CheckpointError("checkpoint " + path + ": unsupported format version");
    LoadedCheckpoint r;
    const auto& arch = j.at("arch");
    r.net.base.arch.width = arch.at("width").get<int>();
    r.net.base.arch.blocks = arch.at("blocks").get<int>();
    r.net.base.arch.activation = activation_from_name(arch.at("activation").get<std::string>());
    const auto& hc = j.at("hard_constraint");
    r.net.domain.lo = {hc.at("lo")[0].get<double>(), hc.at("lo")[1].get<double>()};
    r.net.domain.hi = {hc.at("hi")[0].get<double>(), hc.at("hi")[1].get<double>()};
    r.net.base.params = j.at("params").get<std::vector<double>>();
    const std::size_t expected = param_count(r.net.base.arch);
    if (r.net.base.params.size() != expected)
        throw CheckpointError("checkpoint " + path + ": expected " + std::to_string(expected) +
                              " parameters, found " + std::to_string(r.net.base.params.size()));
    if (j.contains("meta")) {
        const auto& m = j["meta"];
        r.meta.seed = m.value("seed", std::uint64_t{0});
        r.meta.sampling_seed = m.value("sampling_seed", std::uint64_t{0});
        r.meta.epochs = m.value("epochs", 0L);
        r.meta.final_loss = m.value("final_loss", 0.0);
        r.meta.problem = m.value("problem", std::string{});
    }
    return r;
}

inline std::optional<LoadedCheckpoint> try_load_checkpoint(const std::string& path) {
    std::ifstream probe(path);
    if (!probe) return std::nullopt;
    probe.close();
    try {
        return load_checkpoint(path);
    } catch (const CheckpointError&) {
        return std::nullopt;
    }
}

}  // namespace ritzhom
