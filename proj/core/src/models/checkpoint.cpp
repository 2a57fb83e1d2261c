#include "icegnn/models/checkpoint.hpp"

#include "icegnn/errors.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace icegnn::models {

namespace {

constexpr std::string_view kMagic = "icegnn-checkpoint";

void write_values(std::ostream& out, const double* data, std::size_t n) {
    out << std::hexfloat;
    for (std::size_t i = 0; i < n; ++i) out << (i ? " " : "") << data[i];
    out << std::defaultfloat << '\n';
}

void write_vector(std::ostream& out, std::string_view key, const std::vector<double>& v) {
    out << key << ' ' << v.size() << '\n';
    write_values(out, v.data(), v.size());
}

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}

    std::string word() {
        std::string w;
        if (!(in_ >> w)) fail("unexpected end of checkpoint");
        return w;
    }

    void expect(std::string_view w) {
        const auto got = word();
        if (got != w) fail("expected '" + std::string(w) + "', found '" + got + "'");
    }

    long long integer() {
        const auto w = word();
        char* end = nullptr;
        const long long v = std::strtoll(w.c_str(), &end, 10);
        if (end == w.c_str() || *end != '\0') fail("expected an integer, found '" + w + "'");
        return v;
    }

    double real() {
        const auto w = word();
        char* end = nullptr;
        const double v = std::strtod(w.c_str(), &end);
        if (end == w.c_str() || *end != '\0') fail("expected a number, found '" + w + "'");
        return v;
    }

    std::vector<double> vector(std::string_view key) {
        expect(key);
        const auto n = integer();
        if (n < 0) fail("negative length");
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = real();
        return v;
    }

    [[noreturn]] void fail(const std::string& what) {
        const auto pos = in_.tellg();
        in_.clear();
        throw ParseError("checkpoint: " + what, pos < 0 ? 0 : static_cast<std::size_t>(pos));
    }

private:
    std::istream& in_;
};

} // namespace

void write_checkpoint(std::ostream& out, const SequenceModel& model,
                      const graph::NormalizationStats& stats, graph::HaversineMode mode) {
    const auto& d = model.dims();
    out << kMagic << ' ' << kCheckpointVersion << '\n';
    out << "kind " << to_string(model.kind()) << '\n';
    out << "haversine_mode " << graph::to_string(mode) << '\n';
    out << "dims features " << d.features << " steps " << d.steps << " hidden " << d.hidden
        << " fc1 " << d.fc1 << " fc2 " << d.fc2 << " outputs " << d.outputs << " order "
        << d.chebyshev_order << " dropout " << std::hexfloat << d.dropout << std::defaultfloat
        << '\n';
    write_vector(out, "feature_mean", stats.feature_mean);
    write_vector(out, "feature_std", stats.feature_std);
    write_vector(out, "target_mean", stats.target_mean);
    write_vector(out, "target_std", stats.target_std);
    const std::vector<double> adj{stats.adjacency_raw_min, stats.adjacency_raw_max,
                                  stats.epsilon_offset};
    write_vector(out, "adjacency", adj);

    const auto& params = model.parameters().items();
    out << "params " << params.size() << '\n';
    for (const auto& p : params) {
        const auto& v = p.tensor.value();
        out << "param " << p.name << ' ' << v.rows() << ' ' << v.cols() << '\n';
        write_values(out, v.data(), static_cast<std::size_t>(v.size()));
    }
    out << "end\n";
}

LoadedCheckpoint read_checkpoint(std::istream& in) {
    Reader r(in);
    r.expect(kMagic);
    const auto version = r.integer();
    if (version != kCheckpointVersion)
        r.fail("unsupported checkpoint version " + std::to_string(version));

    LoadedCheckpoint ck;
    r.expect("kind");
    const ModelKind kind = parse_model_kind(r.word());
    r.expect("haversine_mode");
    ck.haversine_mode = graph::parse_haversine_mode(r.word());

    ModelDims d;
    r.expect("dims");
    r.expect("features");
    d.features = r.integer();
    r.expect("steps");
    d.steps = r.integer();
    r.expect("hidden");
    d.hidden = r.integer();
    r.expect("fc1");
    d.fc1 = r.integer();
    r.expect("fc2");
    d.fc2 = r.integer();
    r.expect("outputs");
    d.outputs = r.integer();
    r.expect("order");
    d.chebyshev_order = static_cast<int>(r.integer());
    r.expect("dropout");
    d.dropout = r.real();

    ck.stats.feature_mean = r.vector("feature_mean");
    ck.stats.feature_std = r.vector("feature_std");
    ck.stats.target_mean = r.vector("target_mean");
    ck.stats.target_std = r.vector("target_std");
    const auto adj = r.vector("adjacency");
    if (adj.size() != 3) r.fail("adjacency stats need 3 values");
    ck.stats.adjacency_raw_min = adj[0];
    ck.stats.adjacency_raw_max = adj[1];
    ck.stats.epsilon_offset = adj[2];

    ck.model = make_model(kind, d, 0);
    const auto& registry = ck.model->parameters();
    r.expect("params");
    const auto count = r.integer();
    if (count != static_cast<long long>(registry.size()))
        r.fail("checkpoint has " + std::to_string(count) + " parameters, model needs " +
               std::to_string(registry.size()));
    for (const auto& p : registry.items()) {
        r.expect("param");
        r.expect(p.name);
        const auto rows = r.integer();
        const auto cols = r.integer();
        if (rows != p.tensor.rows() || cols != p.tensor.cols())
            r.fail("parameter '" + p.name + "' has shape " + ad::shape_string(rows, cols) +
                   ", expected " + p.tensor.shape());
        ad::Tensor t = p.tensor;
        for (Index i = 0; i < t.value().size(); ++i) t.value().data()[i] = r.real();
    }
    r.expect("end");
    return ck;
}

void save_checkpoint(const std::filesystem::path& path, const SequenceModel& model,
                     const graph::NormalizationStats& stats, graph::HaversineMode mode) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path.string());
    write_checkpoint(out, model, stats, mode);
    if (!out) throw std::runtime_error("failed writing checkpoint " + path.string());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
    return read_checkpoint(in);
}

} // namespace icegnn::models
