#include "run_config.hpp"

#include "icegnn/errors.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace icegnn::cli {

using Json = nlohmann::ordered_json;

namespace {

/// Reads typed fields out of one JSON object and remembers which keys were
/// consumed, so that leftovers can be reported as unknown.
class ObjectReader {
public:
    ObjectReader(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw UsageError(label() + " must be a JSON object");
    }

    template <class T>
    void read(const char* key, T& target) {
        seen_.insert(key);
        auto it = obj_.find(key);
        if (it == obj_.end()) return;
        try {
            target = it->template get<T>();
        } catch (const nlohmann::json::exception&) {
            throw UsageError(label(key) + " has the wrong type (" + std::string(it->type_name()) + ")");
        }
    }

    const Json* child(const char* key) {
        seen_.insert(key);
        auto it = obj_.find(key);
        return it == obj_.end() ? nullptr : &*it;
    }

    std::string label(const std::string& key = {}) const {
        std::string path = where_.empty() ? key : (key.empty() ? where_ : where_ + "." + key);
        return path.empty() ? "config" : "config key '" + path + "'";
    }
    std::string path(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

    void finish() const {
        std::string unknown;
        for (auto it = obj_.begin(); it != obj_.end(); ++it) {
            if (seen_.count(it.key())) continue;
            unknown += (unknown.empty() ? "" : ", ") + path(it.key().c_str());
        }
        if (!unknown.empty()) throw UsageError("unknown config key(s): " + unknown);
    }

private:
    const Json& obj_;
    std::string where_;
    std::set<std::string, std::less<>> seen_;
};

void read_synthetic(const Json& obj, data::SyntheticConfig& s) {
    ObjectReader r(obj, "synthetic");
    r.read("records", s.records);
    r.read("n_nodes", s.n_nodes);
    r.read("n_shallow", s.n_shallow);
    r.read("n_deep", s.n_deep);
    r.read("origin_lat", s.origin_lat);
    r.read("origin_lon", s.origin_lon);
    r.read("origin_spread_deg", s.origin_spread_deg);
    r.read("heading_deg", s.heading_deg);
    r.read("heading_spread_deg", s.heading_spread_deg);
    r.read("heading_drift", s.heading_drift);
    r.read("spacing_m", s.spacing_m);
    r.read("shallow_base", s.shallow_base);
    r.read("bumps", s.bumps);
    r.read("bump_amplitude", s.bump_amplitude);
    r.read("correlation_length", s.correlation_length);
    r.read("temporal_smoothness", s.temporal_smoothness);
    r.read("column_jitter", s.column_jitter);
    r.read("deep_base", s.deep_base);
    r.read("rule_scale", s.rule_scale);
    r.read("rule_level", s.rule_level);
    r.read("rule_level_slope", s.rule_level_slope);
    r.read("rule_trend_gain", s.rule_trend_gain);
    r.read("rule_tanh_gain", s.rule_tanh_gain);
    r.read("rule_tanh_scale", s.rule_tanh_scale);
    r.read("window_radius", s.window_radius);
    r.read("location_gain", s.location_gain);
    r.read("noise_std", s.noise_std);
    r.read("min_thickness", s.min_thickness);
    r.read("surface_top", s.surface_top);
    r.read("quantum", s.quantum);
    r.read("seed", s.seed);
    r.finish();
}

Json synthetic_to_json(const data::SyntheticConfig& s) {
    return Json{{"records", s.records},
                {"n_nodes", s.n_nodes},
                {"n_shallow", s.n_shallow},
                {"n_deep", s.n_deep},
                {"origin_lat", s.origin_lat},
                {"origin_lon", s.origin_lon},
                {"origin_spread_deg", s.origin_spread_deg},
                {"heading_deg", s.heading_deg},
                {"heading_spread_deg", s.heading_spread_deg},
                {"heading_drift", s.heading_drift},
                {"spacing_m", s.spacing_m},
                {"shallow_base", s.shallow_base},
                {"bumps", s.bumps},
                {"bump_amplitude", s.bump_amplitude},
                {"correlation_length", s.correlation_length},
                {"temporal_smoothness", s.temporal_smoothness},
                {"column_jitter", s.column_jitter},
                {"deep_base", s.deep_base},
                {"rule_scale", s.rule_scale},
                {"rule_level", s.rule_level},
                {"rule_level_slope", s.rule_level_slope},
                {"rule_trend_gain", s.rule_trend_gain},
                {"rule_tanh_gain", s.rule_tanh_gain},
                {"rule_tanh_scale", s.rule_tanh_scale},
                {"window_radius", s.window_radius},
                {"location_gain", s.location_gain},
                {"noise_std", s.noise_std},
                {"min_thickness", s.min_thickness},
                {"surface_top", s.surface_top},
                {"quantum", s.quantum},
                {"seed", s.seed}};
}

std::string models_to_string(const std::vector<models::ModelKind>& kinds) {
    if (kinds.size() == std::size(models::kAllModelKinds)) return "all";
    return std::string(models::to_string(kinds.front()));
}

void check_ranges(const RunConfig& c) {
    if (c.epochs <= 0) throw UsageError("config key 'epochs' must be positive");
    if (c.trials <= 0) throw UsageError("config key 'trials' must be positive");
    if (!(c.lr_initial > 0.0)) throw UsageError("config key 'lr.initial' must be positive");
    if (c.lr_half_life_epochs <= 0) throw UsageError("config key 'lr.half_life_epochs' must be positive");
    if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw UsageError("config key 'dropout' must be in [0, 1)");
    if (!(c.epsilon_offset > 0.0 && c.epsilon_offset < 0.5))
        throw UsageError("config key 'epsilon_offset' must be in (0, 0.5)");
    if (c.chebyshev_order < 1) throw UsageError("config key 'chebyshev_order' must be at least 1");
    if (c.hidden <= 0 || c.fc1 <= 0 || c.fc2 <= 0)
        throw UsageError("config key 'dims' entries must be positive");
    if (c.workers == 0) throw UsageError("config key 'workers' must be at least 1");
    try {
        data::validate(c.synthetic);
    } catch (const InvalidArgument& e) {
        throw UsageError(std::string("config key 'synthetic': ") + e.what());
    }
}

} // namespace

std::vector<models::ModelKind> parse_models(const std::string& text) {
    if (text == "all") return {std::begin(models::kAllModelKinds), std::end(models::kAllModelKinds)};
    try {
        return {models::parse_model_kind(text)};
    } catch (const std::exception&) {
        throw UsageError("unknown model '" + text + "' (expected agcn_lstm, gcn_lstm, gcn, lstm or all)");
    }
}

RunConfig config_from_json(const Json& doc, RunConfig c) {
    ObjectReader r(doc, "");
    std::string model = models_to_string(c.models);
    r.read("model", model);
    c.models = parse_models(model);

    std::string mode(graph::to_string(c.haversine_mode));
    r.read("haversine_mode", mode);
    try {
        c.haversine_mode = graph::parse_haversine_mode(mode);
    } catch (const std::exception&) {
        throw UsageError("config key 'haversine_mode' must be 'paper' or 'standard', got '" + mode + "'");
    }

    r.read("epsilon_offset", c.epsilon_offset);
    r.read("epochs", c.epochs);
    if (const Json* lr = r.child("lr")) {
        ObjectReader lr_reader(*lr, "lr");
        lr_reader.read("initial", c.lr_initial);
        lr_reader.read("half_life_epochs", c.lr_half_life_epochs);
        lr_reader.finish();
    }
    r.read("dropout", c.dropout);
    r.read("trials", c.trials);
    r.read("seed", c.seed);
    r.read("chebyshev_order", c.chebyshev_order);
    if (const Json* dims = r.child("dims")) {
        ObjectReader d(*dims, "dims");
        d.read("hidden", c.hidden);
        d.read("fc1", c.fc1);
        d.read("fc2", c.fc2);
        d.finish();
    }
    r.read("min_layers", c.min_layers);
    r.read("parallel", c.parallel);
    r.read("workers", c.workers);
    if (const Json* paths = r.child("paths")) {
        ObjectReader p(*paths, "paths");
        p.read("dataset", c.paths.dataset);
        p.read("out", c.paths.out);
        p.read("masks", c.paths.masks);
        p.read("tracks", c.paths.tracks);
        p.read("checkpoint", c.paths.checkpoint);
        p.read("summary", c.paths.summary);
        p.finish();
    }
    if (const Json* synth = r.child("synthetic")) read_synthetic(*synth, c.synthetic);
    r.finish();
    check_ranges(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot open config file '" + path.string() + "'");
    std::stringstream buffer;
    buffer << in.rdbuf();
    Json doc;
    try {
        doc = Json::parse(buffer.str());
    } catch (const nlohmann::json::parse_error& e) {
        throw UsageError("config file '" + path.string() + "' is not valid JSON: " + e.what());
    }
    return config_from_json(doc, std::move(base));
}

Json config_to_json(const RunConfig& c) {
    return Json{{"model", models_to_string(c.models)},
                {"haversine_mode", std::string(graph::to_string(c.haversine_mode))},
                {"epsilon_offset", c.epsilon_offset},
                {"epochs", c.epochs},
                {"lr", Json{{"initial", c.lr_initial}, {"half_life_epochs", c.lr_half_life_epochs}}},
                {"dropout", c.dropout},
                {"trials", c.trials},
                {"seed", c.seed},
                {"chebyshev_order", c.chebyshev_order},
                {"dims", Json{{"hidden", c.hidden}, {"fc1", c.fc1}, {"fc2", c.fc2}}},
                {"min_layers", c.min_layers},
                {"parallel", c.parallel},
                {"workers", c.workers},
                {"paths", Json{{"dataset", c.paths.dataset},
                               {"out", c.paths.out},
                               {"masks", c.paths.masks},
                               {"tracks", c.paths.tracks},
                               {"checkpoint", c.paths.checkpoint},
                               {"summary", c.paths.summary}}},
                {"synthetic", synthetic_to_json(c.synthetic)}};
}

models::ModelDims model_dims(const RunConfig& c) {
    models::ModelDims d;
    d.steps = c.synthetic.n_shallow;
    d.outputs = c.synthetic.n_deep;
    d.hidden = c.hidden;
    d.fc1 = c.fc1;
    d.fc2 = c.fc2;
    d.chebyshev_order = c.chebyshev_order;
    d.dropout = c.dropout;
    return d;
}

train::ExperimentConfig experiment_config(const RunConfig& c, models::ModelKind kind) {
    train::ExperimentConfig e;
    e.kind = kind;
    e.dims = model_dims(c);
    e.trial.epochs = c.epochs;
    e.trial.schedule.initial = c.lr_initial;
    e.trial.schedule.half_life_epochs = c.lr_half_life_epochs;
    e.trials = c.trials;
    e.base_seed = c.seed;
    e.epsilon_offset = c.epsilon_offset;
    e.parallel = c.parallel;
    return e;
}

} // namespace icegnn::cli
