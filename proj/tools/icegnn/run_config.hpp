#pragma once

#include "icegnn/data/synthetic.hpp"
#include "icegnn/graph/geo.hpp"
#include "icegnn/training/trainer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace icegnn::cli {

/// Bad flags, bad config files or unknown config keys. Maps to exit code 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Paths {
    std::string dataset;
    std::string out;
    std::string masks;
    std::string tracks;
    std::string checkpoint;
    std::string summary;
};

/// Every knob of a run. Defaults are the published hyperparameters.
struct RunConfig {
    /// One kind, or all four when empty.
    std::vector<models::ModelKind> models{models::ModelKind::agcn_lstm};
    graph::HaversineMode haversine_mode = graph::HaversineMode::paper;
    double epsilon_offset = graph::kDefaultEpsilonOffset;
    int epochs = 300;
    double lr_initial = 0.01;
    int lr_half_life_epochs = 75;
    double dropout = 0.2;
    int trials = 5;
    std::uint64_t seed = 0;
    int chebyshev_order = 1;
    std::int64_t hidden = 256;
    std::int64_t fc1 = 128;
    std::int64_t fc2 = 64;
    std::size_t min_layers = 20;
    bool parallel = false;
    unsigned workers = 1;
    Paths paths;
    data::SyntheticConfig synthetic;
};

/// Parses a config document over the defaults. Unknown keys at any level and
/// values of the wrong type throw UsageError naming the key.
RunConfig config_from_json(const nlohmann::ordered_json& doc, RunConfig base = {});
RunConfig load_config(const std::filesystem::path& path, RunConfig base = {});

/// Full config as JSON, keys in a fixed order; parsing it back gives the
/// same config.
nlohmann::ordered_json config_to_json(const RunConfig& config);

/// Model list as the config spells it: a kind name or "all".
std::vector<models::ModelKind> parse_models(const std::string& text);

models::ModelDims model_dims(const RunConfig& config);
train::ExperimentConfig experiment_config(const RunConfig& config, models::ModelKind kind);

} // namespace icegnn::cli
