#pragma once

#include "icegnn/autodiff/ops.hpp"
#include "icegnn/autodiff/parameter.hpp"
#include "icegnn/graph/normalization.hpp"
#include "icegnn/graph/sequence.hpp"
#include "icegnn/nn/evolve.hpp"
#include "icegnn/nn/layers.hpp"
#include "icegnn/nn/recurrent.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

namespace icegnn::models {

using ad::Index;
using ad::Matrix;
using ad::Mode;
using ad::Tape;
using ad::Tensor;
using graph::TemporalGraphSequence;

enum class ModelKind {
    agcn_lstm, ///< EvolveGCNH -> GCN-LSTM -> dense head
    gcn_lstm,  ///< GCN-LSTM -> dense head (non-adaptive)
    gcn,       ///< single GCN over stacked thicknesses (non-temporal)
    lstm,      ///< per-node LSTM, no adjacency (non-geometric)
};

ModelKind parse_model_kind(std::string_view text);
std::string_view to_string(ModelKind kind);
inline constexpr ModelKind kAllModelKinds[] = {ModelKind::lstm, ModelKind::gcn, ModelKind::gcn_lstm,
                                               ModelKind::agcn_lstm};

/// Layer widths and regularization. Defaults are the published architecture.
struct ModelDims {
    Index features = graph::kFeatureWidth;
    Index steps = 5;
    Index hidden = 256;
    Index fc1 = 128;
    Index fc2 = 64;
    Index outputs = 15;
    int chebyshev_order = 1;
    double dropout = 0.2;

    friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

struct ModelOutput {
    Matrix predictions;  ///< normalized target space
    Matrix denormalized; ///< pixels
};

/// hardswish -> fc1 -> hardswish -> dropout -> fc2 -> hardswish -> dropout -> fc3
struct DenseHead {
    nn::DenseLayer fc1, fc2, fc3;
    double dropout = 0.2;

    static DenseHead create(const ModelDims& dims, Index in, Rng& rng);
    Tensor forward(Tape& tape, const Tensor& x, Mode mode, Rng& rng) const;
    void register_parameters(ad::ParameterRegistry& registry) const;
};

/// Maps a normalized TemporalGraphSequence to per-node predictions.
class SequenceModel {
public:
    virtual ~SequenceModel() = default;

    ModelKind kind() const noexcept { return kind_; }
    const ModelDims& dims() const noexcept { return dims_; }
    /// Every trainable tensor, in layer order then field order.
    const ad::ParameterRegistry& parameters() const noexcept { return registry_; }

    /// Normalized-space predictions, n x outputs. rng feeds dropout in train
    /// mode and is untouched in eval mode. Throws ContractError on a raw
    /// sequence.
    virtual Tensor forward(Tape& tape, const TemporalGraphSequence& seq, Mode mode,
                           Rng& rng) const = 0;

    /// Eval-mode forward plus de-normalization to pixels.
    ModelOutput predict(const TemporalGraphSequence& seq,
                        const graph::NormalizationStats& stats) const;

protected:
    SequenceModel(ModelKind kind, const ModelDims& dims) : kind_(kind), dims_(dims) {}
    void check_input(const TemporalGraphSequence& seq) const;

    ad::ParameterRegistry registry_;

private:
    ModelKind kind_;
    ModelDims dims_;
};

/// GCN-LSTM with an optional EvolveGCNH front end (agcn_lstm / gcn_lstm).
class RecurrentGraphModel final : public SequenceModel {
public:
    RecurrentGraphModel(bool adaptive, const ModelDims& dims, Rng& rng);

    bool adaptive() const noexcept { return evolve_.has_value(); }
    const nn::EvolveGCNHLayer* evolve() const { return evolve_ ? &*evolve_ : nullptr; }
    const nn::GConvLSTMCell& cell() const { return cell_; }
    const DenseHead& head() const { return head_; }

    Tensor forward(Tape& tape, const TemporalGraphSequence& seq, Mode mode,
                   Rng& rng) const override;

    /// The part after the evolve layer: recurrent graph convolution over the
    /// given per-step features, last hidden state into the head.
    Tensor forward_features(Tape& tape, std::span<const Tensor> propagation,
                            std::span<const Tensor> steps, Mode mode, Rng& rng) const;

private:
    std::optional<nn::EvolveGCNHLayer> evolve_;
    nn::GConvLSTMCell cell_;
    DenseHead head_;
};

/// Non-temporal baseline: one GCN over lat, lon and the stacked thicknesses.
class GCNModel final : public SequenceModel {
public:
    GCNModel(const ModelDims& dims, Rng& rng);

    /// n x (2 + steps): lat, lon, then one thickness column per year.
    static Matrix collapse_features(const TemporalGraphSequence& seq);

    const nn::GCNLayer& gcn() const { return gcn_; }
    const DenseHead& head() const { return head_; }

    Tensor forward(Tape& tape, const TemporalGraphSequence& seq, Mode mode,
                   Rng& rng) const override;

private:
    nn::GCNLayer gcn_;
    DenseHead head_;
};

/// Non-geometric baseline: an LSTM run on every node independently.
class LSTMModel final : public SequenceModel {
public:
    LSTMModel(const ModelDims& dims, Rng& rng);

    const nn::GConvLSTMCell& cell() const { return cell_; }
    const DenseHead& head() const { return head_; }

    Tensor forward(Tape& tape, const TemporalGraphSequence& seq, Mode mode,
                   Rng& rng) const override;

private:
    nn::GConvLSTMCell cell_;
    DenseHead head_;
};

std::unique_ptr<SequenceModel> make_model(ModelKind kind, const ModelDims& dims,
                                          std::uint64_t seed);

/// Closed-form trainable scalar count for a kind and dims.
std::size_t expected_parameter_count(ModelKind kind, const ModelDims& dims);

/// Copies values between registries by name; returns how many were copied.
/// Shapes must agree for every shared name.
std::size_t copy_parameters(const ad::ParameterRegistry& from, const ad::ParameterRegistry& to);

} // namespace icegnn::models
