#include "lgan/nn/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace lgan::nn {

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

std::size_t NetworkState::index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    throw SpecError("network has no parameter '" + name + "'");
}

std::size_t NetworkState::parameter_count() const {
    std::size_t total = 0;
    for (const auto& p : params) total += p.size();
    return total;
}

Gradients zero_gradients(const NetworkState& state) {
    Gradients g;
    g.reserve(state.params.size());
    for (const auto& p : state.params) g.emplace_back(p.shape());
    return g;
}

void add_parameter(NetworkState& state, Rng& rng, std::string name, Shape shape, bool gaussian, double fill) {
    Tensor t(shape, fill);
    if (gaussian) {
        for (double& v : t.values()) v = rng.normal(0.0, state.init_std);
    }
    state.names.push_back(std::move(name));
    state.params.push_back(std::move(t));
}

bool all_finite(const NetworkState& state) {
    for (const auto& p : state.params) {
        for (double v : p.values()) {
            if (!std::isfinite(v)) return false;
        }
    }
    return true;
}

double max_abs_parameter(const NetworkState& state) {
    double m = 0.0;
    for (const auto& p : state.params) {
        for (double v : p.values()) m = std::max(m, std::abs(v));
    }
    return m;
}

void save_checkpoint(const std::filesystem::path& path, const NetworkState& state, const nlohmann::json& extra) {
    nlohmann::json header;
    header["kind"] = state.kind;
    header["spec"] = state.spec;
    header["seed"] = state.seed;
    header["init_std"] = state.init_std;
    header["extra"] = extra;
    auto& params = header["params"] = nlohmann::json::array();
    for (std::size_t i = 0; i < state.params.size(); ++i) {
        const Shape& s = state.params[i].shape();
        params.push_back({{"name", state.names[i]}, {"shape", {s.n, s.c, s.h, s.w}}});
    }
    const std::string text = header.dump();

    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IOError("cannot write checkpoint " + path.string());
        out << "LGAN-CHECKPOINT " << kCheckpointVersion << '\n' << text.size() << '\n' << text;
        for (const auto& p : state.params) {
            out.write(reinterpret_cast<const char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
        }
        if (!out) throw IOError("checkpoint write failed: " + path.string());
    }
    std::filesystem::rename(tmp, path);
}

NetworkState load_checkpoint(const std::filesystem::path& path, nlohmann::json* extra) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CheckpointError("cannot open checkpoint " + path.string());
    std::string magic;
    int version = 0;
    std::size_t length = 0;
    in >> magic >> version >> length;
    if (!in || magic != "LGAN-CHECKPOINT") throw CheckpointError(path.string() + " is not a checkpoint");
    if (version != kCheckpointVersion) {
        throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
    }
    in.get();  // newline after the length
    std::string text(length, '\0');
    in.read(text.data(), static_cast<std::streamsize>(length));
    if (!in) throw CheckpointError("truncated checkpoint header in " + path.string());

    NetworkState state;
    try {
        const auto header = nlohmann::json::parse(text);
        state.kind = header.at("kind").get<std::string>();
        state.spec = header.at("spec");
        state.seed = header.at("seed").get<std::uint64_t>();
        state.init_std = header.at("init_std").get<double>();
        if (extra) *extra = header.value("extra", nlohmann::json::object());
        for (const auto& p : header.at("params")) {
            const auto dims = p.at("shape").get<std::vector<int>>();
            if (dims.size() != 4) throw CheckpointError("parameter shape must have 4 dims");
            state.names.push_back(p.at("name").get<std::string>());
            state.params.emplace_back(Shape{dims[0], dims[1], dims[2], dims[3]});
        }
    } catch (const nlohmann::json::exception& e) {
        throw CheckpointError("malformed checkpoint header in " + path.string() + ": " + e.what());
    }
    for (auto& p : state.params) {
        in.read(reinterpret_cast<char*>(p.data()), static_cast<std::streamsize>(p.size() * sizeof(double)));
        if (!in) throw CheckpointError("truncated checkpoint payload in " + path.string());
    }
    return state;
}

}  // namespace lgan::nn
