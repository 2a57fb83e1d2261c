#include "icegnn/models/models.hpp"

#include "icegnn/errors.hpp"

namespace icegnn::models {

namespace {

constexpr std::uint64_t kInitStream = 0x696e6974; // "init"

void check_dims(const ModelDims& d) {
    if (d.features < 1 || d.steps < 1 || d.hidden < 1 || d.fc1 < 1 || d.fc2 < 1 || d.outputs < 1)
        throw InvalidArgument("model dims must be positive");
    if (d.chebyshev_order < 1) throw InvalidArgument("chebyshev order must be >= 1");
    if (!(d.dropout >= 0.0 && d.dropout < 1.0)) throw InvalidArgument("dropout must lie in [0, 1)");
}

std::vector<Tensor> propagation_basis(const TemporalGraphSequence& seq, int order) {
    std::vector<Tensor> out;
    if (order == 1) {
        out.emplace_back(seq.propagation);
    } else {
        for (auto& m : graph::chebyshev_basis(seq.propagation, order)) out.emplace_back(std::move(m));
    }
    return out;
}

} // namespace

ModelKind parse_model_kind(std::string_view text) {
    if (text == "agcn_lstm") return ModelKind::agcn_lstm;
    if (text == "gcn_lstm") return ModelKind::gcn_lstm;
    if (text == "gcn") return ModelKind::gcn;
    if (text == "lstm") return ModelKind::lstm;
    throw InvalidArgument("unknown model kind '" + std::string(text) +
                          "' (expected agcn_lstm, gcn_lstm, gcn or lstm)");
}

std::string_view to_string(ModelKind kind) {
    switch (kind) {
    case ModelKind::agcn_lstm: return "agcn_lstm";
    case ModelKind::gcn_lstm: return "gcn_lstm";
    case ModelKind::gcn: return "gcn";
    case ModelKind::lstm: return "lstm";
    }
    return "?";
}

DenseHead DenseHead::create(const ModelDims& dims, Index in, Rng& rng) {
    DenseHead h;
    h.fc1 = nn::DenseLayer::create(in, dims.fc1, rng);
    h.fc2 = nn::DenseLayer::create(dims.fc1, dims.fc2, rng);
    h.fc3 = nn::DenseLayer::create(dims.fc2, dims.outputs, rng);
    h.dropout = dims.dropout;
    return h;
}

Tensor DenseHead::forward(Tape& tape, const Tensor& x, Mode mode, Rng& rng) const {
    Tensor y = fc1.forward(tape, ad::hardswish(tape, x));
    y = ad::dropout(tape, ad::hardswish(tape, y), dropout, mode, rng);
    y = ad::dropout(tape, ad::hardswish(tape, fc2.forward(tape, y)), dropout, mode, rng);
    return fc3.forward(tape, y);
}

void DenseHead::register_parameters(ad::ParameterRegistry& registry) const {
    fc1.register_parameters(registry, "fc1");
    fc2.register_parameters(registry, "fc2");
    fc3.register_parameters(registry, "fc3");
}

ModelOutput SequenceModel::predict(const TemporalGraphSequence& seq,
                                   const graph::NormalizationStats& stats) const {
    Tape tape;
    Rng unused(0);
    const Tensor y = forward(tape, seq, Mode::eval, unused);
    return {y.value(), graph::denormalize_targets(y.value(), stats)};
}

void SequenceModel::check_input(const TemporalGraphSequence& seq) const {
    if (!seq.normalized)
        throw ContractError("model input '" + seq.source_id + "' has not been normalized");
    if (seq.step_count() != dims_.steps)
        throw DimensionError("model expects " + std::to_string(dims_.steps) + " steps, sequence '" +
                             seq.source_id + "' has " + std::to_string(seq.step_count()));
    for (const auto& g : seq.graphs)
        if (g.features.cols() != graph::kFeatureWidth || g.features.rows() != seq.node_count())
            throw DimensionError("sequence '" + seq.source_id + "' has malformed features " +
                                 ad::shape_string(g.features.rows(), g.features.cols()));
}

RecurrentGraphModel::RecurrentGraphModel(bool adaptive, const ModelDims& dims, Rng& rng)
    : SequenceModel(adaptive ? ModelKind::agcn_lstm : ModelKind::gcn_lstm, dims) {
    check_dims(dims);
    if (dims.features != graph::kFeatureWidth)
        throw InvalidArgument("recurrent graph model takes 3 features per node");
    if (adaptive) evolve_ = nn::EvolveGCNHLayer::create(dims.features, rng);
    cell_ = nn::GConvLSTMCell::create(dims.features, dims.hidden, dims.chebyshev_order, rng);
    head_ = DenseHead::create(dims, dims.hidden, rng);

    if (evolve_) evolve_->register_parameters(registry_, "evolve");
    cell_.register_parameters(registry_, "gconvlstm");
    head_.register_parameters(registry_);
}

Tensor RecurrentGraphModel::forward(Tape& tape, const TemporalGraphSequence& seq, Mode mode,
                                    Rng& rng) const {
    check_input(seq);
    const auto basis = propagation_basis(seq, dims().chebyshev_order);

    std::vector<Tensor> steps;
    steps.reserve(seq.graphs.size());
    for (const auto& g : seq.graphs) steps.emplace_back(g.features);

    if (evolve_) {
        // The evolve layer sees the one-hop propagation; its weight state
        // restarts from W0 for every sequence.
        Tensor w = evolve_->w0;
        for (auto& x : steps) {
            auto [out, next] = evolve_->step(tape, basis.front(), x, w);
            x = out;
            w = next;
        }
    }
    return forward_features(tape, basis, steps, mode, rng);
}

Tensor RecurrentGraphModel::forward_features(Tape& tape, std::span<const Tensor> propagation,
                                             std::span<const Tensor> steps, Mode mode,
                                             Rng& rng) const {
    if (steps.empty()) throw InvalidArgument("recurrent model needs at least one step");
    const auto fused = cell_.fuse(tape);
    auto state = cell_.initial_state(steps.front().rows());
    for (const auto& x : steps) state = cell_.step(tape, fused, propagation, x, state);
    return head_.forward(tape, state.h, mode, rng);
}

GCNModel::GCNModel(const ModelDims& dims, Rng& rng) : SequenceModel(ModelKind::gcn, dims) {
    check_dims(dims);
    gcn_ = nn::GCNLayer::create(2 + dims.steps, dims.hidden, rng);
    head_ = DenseHead::create(dims, dims.hidden, rng);
    gcn_.register_parameters(registry_, "gcn");
    head_.register_parameters(registry_);
}

Matrix GCNModel::collapse_features(const TemporalGraphSequence& seq) {
    if (seq.graphs.empty()) throw InvalidArgument("sequence has no graphs");
    const Index n = seq.node_count();
    Matrix x(n, 2 + seq.step_count());
    x.col(0) = seq.graphs.front().features.col(graph::kLatColumn);
    x.col(1) = seq.graphs.front().features.col(graph::kLonColumn);
    for (Index t = 0; t < seq.step_count(); ++t)
        x.col(2 + t) = seq.graphs[static_cast<std::size_t>(t)].features.col(graph::kThicknessColumn);
    return x;
}

Tensor GCNModel::forward(Tape& tape, const TemporalGraphSequence& seq, Mode mode, Rng& rng) const {
    check_input(seq);
    const Tensor x(collapse_features(seq));
    const Tensor p(seq.propagation);
    return head_.forward(tape, gcn_.forward(tape, p, x, false), mode, rng);
}

LSTMModel::LSTMModel(const ModelDims& dims, Rng& rng) : SequenceModel(ModelKind::lstm, dims) {
    check_dims(dims);
    cell_ = nn::GConvLSTMCell::create(dims.features, dims.hidden, 1, rng);
    head_ = DenseHead::create(dims, dims.hidden, rng);
    cell_.register_parameters(registry_, "lstm");
    head_.register_parameters(registry_);
}

Tensor LSTMModel::forward(Tape& tape, const TemporalGraphSequence& seq, Mode mode, Rng& rng) const {
    check_input(seq);
    const auto fused = cell_.fuse(tape);
    auto state = cell_.initial_state(seq.node_count());
    for (const auto& g : seq.graphs) state = cell_.step(tape, fused, {}, Tensor(g.features), state);
    return head_.forward(tape, state.h, mode, rng);
}

std::unique_ptr<SequenceModel> make_model(ModelKind kind, const ModelDims& dims,
                                          std::uint64_t seed) {
    Rng rng(derive_seed(seed, {kInitStream}));
    switch (kind) {
    case ModelKind::agcn_lstm: return std::make_unique<RecurrentGraphModel>(true, dims, rng);
    case ModelKind::gcn_lstm: return std::make_unique<RecurrentGraphModel>(false, dims, rng);
    case ModelKind::gcn: return std::make_unique<GCNModel>(dims, rng);
    case ModelKind::lstm: return std::make_unique<LSTMModel>(dims, rng);
    }
    throw InvalidArgument("unknown model kind");
}

std::size_t expected_parameter_count(ModelKind kind, const ModelDims& d) {
    const auto u = [](Index v) { return static_cast<std::size_t>(v); };
    const std::size_t head =
        u(d.hidden) * u(d.fc1) + u(d.fc1) + u(d.fc1) * u(d.fc2) + u(d.fc2) + u(d.fc2) * u(d.outputs) +
        u(d.outputs);
    const auto lstm = [&](std::size_t order) {
        return 4 * order * (u(d.features) * u(d.hidden) + u(d.hidden) * u(d.hidden)) +
               3 * u(d.hidden) + 4 * u(d.hidden);
    };
    const std::size_t order = static_cast<std::size_t>(d.chebyshev_order);
    switch (kind) {
    case ModelKind::agcn_lstm: {
        const std::size_t w = u(d.features);
        const std::size_t evolve = w * w + w + 6 * w * w + 3 * w;
        return evolve + lstm(order) + head;
    }
    case ModelKind::gcn_lstm: return lstm(order) + head;
    case ModelKind::gcn: return (2 + u(d.steps)) * u(d.hidden) + u(d.hidden) + head;
    case ModelKind::lstm: return lstm(1) + head;
    }
    return 0;
}

std::size_t copy_parameters(const ad::ParameterRegistry& from, const ad::ParameterRegistry& to) {
    std::size_t copied = 0;
    for (const auto& p : to.items()) {
        const auto* src = from.find(p.name);
        if (src == nullptr) continue;
        if (src->tensor.rows() != p.tensor.rows() || src->tensor.cols() != p.tensor.cols())
            throw DimensionError("parameter '" + p.name + "' shape " + src->tensor.shape() +
                                 " vs " + p.tensor.shape());
        Tensor dst = p.tensor;
        dst.value() = src->tensor.value();
        ++copied;
    }
    return copied;
}

} // namespace icegnn::models
