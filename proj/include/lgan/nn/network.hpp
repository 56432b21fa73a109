#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "lgan/rng.hpp"
#include "lgan/tensor.hpp"

namespace lgan::nn {

// Learnable-parameter bundle of one network plus the metadata needed to
// rebuild its topology (kind, spec, seed). States are values: optimisers
// return new states rather than mutating shared ones.
struct NetworkState {
    std::string kind;          // "generator" or "critic"
    nlohmann::json spec;       // serialised GeneratorSpec / CriticSpec
    std::uint64_t seed = 0;
    double init_std = 0.02;
    std::vector<std::string> names;
    std::vector<Tensor> params;

    [[nodiscard]] std::size_t index_of(const std::string& name) const;
    [[nodiscard]] const Tensor& param(const std::string& name) const { return params[index_of(name)]; }
    Tensor& param(const std::string& name) { return params[index_of(name)]; }
    [[nodiscard]] std::size_t parameter_count() const;

    bool operator==(const NetworkState&) const = default;
};

// Gradient buffers parallel to NetworkState::params.
using Gradients = std::vector<Tensor>;

Gradients zero_gradients(const NetworkState& state);

// Appends a parameter, drawing values from N(0, init_std^2) when `gaussian`
// is set and filling with `fill` otherwise.
void add_parameter(NetworkState& state, Rng& rng, std::string name, Shape shape, bool gaussian, double fill = 0.0);

bool all_finite(const NetworkState& state);
double max_abs_parameter(const NetworkState& state);

// Checkpoint container:
//   line 1  "LGAN-CHECKPOINT <version>"
//   line 2  byte length L of the JSON header
//   L bytes JSON header {kind, spec, seed, init_std, params:[{name, shape}], extra}
//   raw little-endian IEEE-754 doubles of every parameter in header order
inline constexpr int kCheckpointVersion = 1;

void save_checkpoint(const std::filesystem::path& path, const NetworkState& state,
                     const nlohmann::json& extra = nlohmann::json::object());
NetworkState load_checkpoint(const std::filesystem::path& path, nlohmann::json* extra = nullptr);

}  // namespace lgan::nn
