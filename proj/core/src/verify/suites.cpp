#include "icegnn/verify/suites.hpp"

#include "icegnn/autodiff/gradcheck.hpp"
#include "icegnn/autodiff/ops.hpp"
#include "icegnn/data/synthetic.hpp"
#include "icegnn/errors.hpp"
#include "icegnn/graph/adjacency.hpp"
#include "icegnn/graph/geo.hpp"
#include "icegnn/models/models.hpp"
#include "icegnn/nn/evolve.hpp"
#include "icegnn/nn/layers.hpp"
#include "icegnn/nn/recurrent.hpp"
#include "icegnn/random.hpp"
#include "icegnn/training/optimizer.hpp"
#include "icegnn/training/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

namespace icegnn::verify {

using ad::Index;
using ad::Matrix;
using ad::Tape;
using ad::Tensor;

namespace {

/// Running max error against one tolerance; keeps the first failure message.
class Tracker {
public:
    Tracker(std::string name, double tolerance) {
        result_.name = std::move(name);
        result_.tolerance = tolerance;
        result_.passed = true;
    }

    void record(double error, const std::string& what) {
        ++result_.checks;
        const bool ok = std::isfinite(error) && error <= result_.tolerance;
        if (!std::isfinite(error)) result_.max_error = error;
        else if (std::isfinite(result_.max_error)) result_.max_error = std::max(result_.max_error, error);
        if (!ok && result_.passed) {
            result_.passed = false;
            result_.detail = what + ": error " + std::to_string(error);
        }
    }
    void require(bool condition, const std::string& what) { record(condition ? 0.0 : INFINITY, what); }
    void fail(const std::string& what) {
        ++result_.checks;
        if (result_.passed) {
            result_.passed = false;
            result_.detail = what;
        }
    }

    SuiteResult finish() { return std::move(result_); }

private:
    SuiteResult result_;
};

Matrix random_matrix(Index r, Index c, Rng& rng, double lo = -2.0, double hi = 2.0) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, lo, hi);
    return m;
}

/// Values in [-4, 4] at least 1e-3 away from hardswish's kinks.
Matrix hardswish_inputs(Index r, Index c, Rng& rng) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i) {
        double v;
        do v = uniform(rng, -4.0, 4.0);
        while (std::abs(v - 3.0) < 1e-3 || std::abs(v + 3.0) < 1e-3);
        m.data()[i] = v;
    }
    return m;
}

/// Away from zero, either sign.
Matrix nonzero_matrix(Index r, Index c, Rng& rng) {
    Matrix m(r, c);
    for (Index i = 0; i < m.size(); ++i)
        m.data()[i] = (uniform01(rng) < 0.5 ? -1.0 : 1.0) * uniform(rng, 0.5, 2.0);
    return m;
}

Tensor leaf(Matrix m) { return Tensor(std::move(m), true); }

void check(Tracker& t, const std::string& name, const ad::TensorFunction& f,
           std::vector<Tensor> inputs, std::uint64_t seed) {
    try {
        ad::GradCheckOptions opts;
        opts.seed = seed;
        opts.eps = 1e-2;
        opts.ladder = 5;
        const auto r = ad::gradient_check(f, inputs, opts);
        t.record(r.max_relative_error, name + " (seed " + std::to_string(seed) + ", input " +
                                           std::to_string(r.worst_input) + ")");
    } catch (const std::exception& e) {
        t.fail(name + ": " + e.what());
    }
}

models::ModelDims toy_dims() {
    models::ModelDims d;
    d.hidden = 4;
    d.fc1 = 6;
    d.fc2 = 5;
    return d;
}

} // namespace

ToyData make_toy_data(std::size_t count, std::size_t nodes, std::uint64_t seed) {
    data::SyntheticConfig cfg;
    cfg.records = count;
    cfg.n_nodes = nodes;
    cfg.seed = seed;
    cfg.spacing_m = 2000.0; // spread the toy nodes so adjacency weights differ
    const auto records = data::generate_synthetic(cfg);
    graph::SequenceConfig sc;
    sc.haversine_mode = graph::HaversineMode::standard;
    std::vector<graph::TemporalGraphSequence> raw;
    for (const auto& r : records) raw.push_back(graph::assemble_sequence(r, sc));
    ToyData out;
    out.stats = graph::compute_stats(raw);
    out.sequences = graph::apply_normalization(raw, out.stats);
    return out;
}

graph::TemporalGraphSequence permute_nodes(const graph::TemporalGraphSequence& seq,
                                           const std::vector<Index>& perm) {
    const Index n = seq.node_count();
    if (static_cast<Index>(perm.size()) != n) throw InvalidArgument("permute_nodes: size mismatch");
    const auto rows = [&](const Matrix& m) {
        Matrix out(m.rows(), m.cols());
        for (Index i = 0; i < n; ++i) out.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
        return out;
    };
    const auto both = [&](const Matrix& m) {
        Matrix out(n, n);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j)
                out(i, j) = m(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
        return out;
    };
    graph::TemporalGraphSequence out = seq;
    for (auto& g : out.graphs) g.features = rows(g.features);
    out.raw_adjacency = both(seq.raw_adjacency);
    out.targets = rows(seq.targets);
    if (seq.normalized) {
        out.adjacency = graph::WeightedAdjacency(both(seq.adjacency->weights()));
        out.propagation = both(seq.propagation);
        out.normalized_targets = rows(seq.normalized_targets);
    }
    return out;
}

SuiteResult gradient_primitives_suite(const VerifyOptions& options) {
    Tracker t("gradient/primitives", kPrimitiveTolerance);
    const auto dhsw = options.hardswish_derivative
                          ? options.hardswish_derivative
                          : std::function<double(double)>(ad::hardswish_derivative);
    for (int s = 0; s < options.seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        Rng rng(derive_seed(seed, {0x707269}));
        using In = std::span<const Tensor>;

        check(t, "matmul", [](Tape& tp, In x) { return ad::matmul(tp, x[0], x[1]); },
              {leaf(random_matrix(4, 3, rng)), leaf(random_matrix(3, 5, rng))}, seed);
        for (auto kind : {ad::ElementwiseKind::add, ad::ElementwiseKind::sub, ad::ElementwiseKind::mul}) {
            const auto f = [kind](Tape& tp, In x) { return ad::elementwise(tp, x[0], x[1], kind); };
            check(t, "elementwise", f, {leaf(random_matrix(3, 2, rng)), leaf(random_matrix(3, 2, rng))}, seed);
            check(t, "elementwise/broadcast", f,
                  {leaf(random_matrix(3, 2, rng)), leaf(random_matrix(1, 2, rng))}, seed);
        }
        check(t, "sigmoid", [](Tape& tp, In x) { return ad::sigmoid(tp, x[0]); },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "tanh", [](Tape& tp, In x) { return ad::tanh(tp, x[0]); },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "hardswish",
              [&dhsw](Tape& tp, In x) { return ad::map_unary(tp, x[0], ad::hardswish_value, dhsw, "hardswish"); },
              {leaf(hardswish_inputs(3, 4, rng))}, seed);
        check(t, "hardswish/op", [](Tape& tp, In x) { return ad::hardswish(tp, x[0]); },
              {leaf(hardswish_inputs(3, 4, rng))}, seed);
        check(t, "dropout",
              [seed](Tape& tp, In x) {
                  Rng mask(seed);
                  return ad::dropout(tp, x[0], 0.3, ad::Mode::train, mask);
              },
              {leaf(random_matrix(4, 4, rng))}, seed);
        check(t, "mse_loss", [](Tape& tp, In x) { return ad::mse_loss(tp, x[0], x[1]); },
              {leaf(random_matrix(8, 15, rng)), leaf(random_matrix(8, 15, rng))}, seed);
        check(t, "sum", [](Tape& tp, In x) { return ad::sum(tp, x[0]); },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "mean", [](Tape& tp, In x) { return ad::mean(tp, x[0]); },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "row_concat", [](Tape& tp, In x) { return ad::row_concat(tp, x); },
              {leaf(random_matrix(3, 2, rng)), leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "slice_cols", [](Tape& tp, In x) { return ad::slice_cols(tp, x[0], 1, 2); },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "transpose", [](Tape& tp, In x) { return ad::transpose(tp, x[0]); },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "gather_rows",
              [](Tape& tp, In x) {
                  const Index rows[] = {2, 0, 2};
                  return ad::gather_rows(tp, x[0], rows);
              },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "scale", [](Tape& tp, In x) { return ad::scale(tp, x[0], -1.7); },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "l2_norm", [](Tape& tp, In x) { return ad::l2_norm(tp, x[0]); },
              {leaf(random_matrix(3, 4, rng))}, seed);
        check(t, "reciprocal", [](Tape& tp, In x) { return ad::reciprocal(tp, x[0]); },
              {leaf(nonzero_matrix(3, 4, rng))}, seed);
    }
    return t.finish();
}

SuiteResult gradient_layers_suite(const VerifyOptions& options) {
    Tracker t("gradient/layers", kLayerTolerance);
    using In = std::span<const Tensor>;
    for (int s = 0; s < options.seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        Rng rng(derive_seed(seed, {0x6c6179}));
        const auto toy = make_toy_data(1, 6, seed + 100);
        const auto& seq = toy.sequences.front();
        const Tensor P(seq.propagation);
        const Tensor x0(seq.graphs[0].features);

        {
            auto layer = nn::DenseLayer::create(3, 4, rng);
            check(t, "dense", [&](Tape& tp, In x) { return layer.forward(tp, x[0]); },
                  {leaf(random_matrix(6, 3, rng)), layer.weight, layer.bias}, seed);
        }
        {
            auto layer = nn::GCNLayer::create(3, 4, rng);
            for (bool act : {false, true})
                check(t, act ? "gcn+hardswish" : "gcn",
                      [&](Tape& tp, In x) { return layer.forward(tp, P, x[0], act); },
                      {leaf(x0.value()), layer.weight, layer.bias}, seed);
        }
        {
            auto gru = nn::GRUCell::create(3, rng);
            check(t, "gru",
                  [&](Tape& tp, In x) { return gru.step(tp, x[0], x[1]); },
                  {leaf(random_matrix(3, 3, rng)), leaf(random_matrix(3, 3, rng)), gru.u_z, gru.w_z,
                   gru.b_z, gru.u_r, gru.w_r, gru.b_r, gru.u_h, gru.w_h, gru.b_h},
                  seed);
        }
        for (int order : {1, 2}) {
            auto cell = nn::GConvLSTMCell::create(3, 4, order, rng);
            const auto basis = graph::chebyshev_basis(seq.propagation, order);
            std::vector<Tensor> props(basis.begin(), basis.end());
            std::vector<Tensor> inputs{leaf(x0.value()), leaf(random_matrix(6, 4, rng)),
                                       leaf(random_matrix(6, 4, rng))};
            for (int g = 0; g < nn::GConvLSTMCell::kGates; ++g) {
                for (auto& w : cell.w_x[g]) inputs.push_back(w);
                for (auto& w : cell.w_h[g]) inputs.push_back(w);
                inputs.push_back(cell.bias[g]);
            }
            inputs.push_back(cell.w_ci);
            inputs.push_back(cell.w_cf);
            inputs.push_back(cell.w_co);
            check(t, "gconvlstm/K" + std::to_string(order),
                  [&](Tape& tp, In x) {
                      const auto st = cell.step(tp, props, x[0], {x[1], x[2]});
                      return ad::row_concat(tp, std::vector<Tensor>{st.h, st.c});
                  },
                  inputs, seed);
        }
        {
            const Tensor q = leaf(random_matrix(1, 3, rng));
            check(t, "summarize", [](Tape& tp, In x) { return nn::summarize(tp, x[0], 3, x[1]); },
                  {leaf(random_matrix(6, 3, rng)), q}, seed);
        }
        {
            auto layer = nn::EvolveGCNHLayer::create(3, rng);
            // Two chained steps so the gradient flows through the evolved weights.
            check(t, "evolve_gcnh",
                  [&](Tape& tp, In x) {
                      auto [y1, w1] = layer.step(tp, P, x[0], layer.w0);
                      auto [y2, w2] = layer.step(tp, P, x[1], w1);
                      return ad::row_concat(tp, std::vector<Tensor>{y1, y2});
                  },
                  {leaf(x0.value()), leaf(seq.graphs[1].features), layer.w0, layer.q,
                   layer.gru.u_z, layer.gru.w_z, layer.gru.b_z, layer.gru.u_r, layer.gru.w_r,
                   layer.gru.b_r, layer.gru.u_h, layer.gru.w_h, layer.gru.b_h},
                  seed);
        }
        {
            const auto dims = toy_dims();
            auto head = models::DenseHead::create(dims, 4, rng);
            check(t, "dense_head",
                  [&](Tape& tp, In x) {
                      Rng drop(seed);
                      return head.forward(tp, x[0], ad::Mode::train, drop);
                  },
                  {leaf(random_matrix(6, 4, rng)), head.fc1.weight, head.fc1.bias, head.fc2.weight,
                   head.fc2.bias, head.fc3.weight, head.fc3.bias},
                  seed);
        }
    }
    return t.finish();
}

SuiteResult gradient_models_suite(const VerifyOptions& options) {
    Tracker t("gradient/models", kLayerTolerance);
    for (int s = 0; s < options.seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        const auto toy = make_toy_data(1, 6, seed + 200);
        const auto& seq = toy.sequences.front();
        const Tensor target(seq.normalized_targets);
        for (auto kind : models::kAllModelKinds) {
            auto model = models::make_model(kind, toy_dims(), seed);
            std::vector<Tensor> params;
            for (const auto& p : model->parameters().items()) params.push_back(p.tensor);
            check(t, std::string(models::to_string(kind)),
                  [&](Tape& tp, std::span<const Tensor>) {
                      Rng drop(derive_seed(seed, {0x64726f70}));
                      return ad::mse_loss(tp, model->forward(tp, seq, ad::Mode::train, drop), target);
                  },
                  params, seed);
        }
    }
    return t.finish();
}

SuiteResult adjacency_suite(const VerifyOptions& options) {
    Tracker t("adjacency", 1e-9);
    const double pi = std::numbers::pi;

    // Spot values from the closed form: (0,0)-(0,90) has h = 1/2.
    t.record(std::abs(graph::haversine_angle({0, 0}, {0, 90}, graph::HaversineMode::paper) - pi / 3),
             "paper-mode spot value");
    t.record(std::abs(graph::haversine_angle({0, 0}, {0, 90}, graph::HaversineMode::standard) - pi / 2),
             "standard-mode spot value");

    for (int s = 0; s < options.adjacency_sets; ++s) {
        Rng rng(derive_seed(static_cast<std::uint64_t>(s), {0x61646a}));
        const auto n = static_cast<std::size_t>(3 + rng() % 10);
        std::vector<graph::GeoPoint> pts(n);
        for (auto& p : pts) p = {uniform(rng, -60.0, 60.0), uniform(rng, -170.0, 170.0)};
        for (auto mode : {graph::HaversineMode::paper, graph::HaversineMode::standard}) {
            const Matrix raw = graph::build_raw_adjacency(pts, mode);
            const auto range = graph::off_diagonal_range(raw);
            Matrix a;
            try {
                a = graph::normalize_adjacency(raw, range.min, range.max).weights();
            } catch (const std::exception& e) {
                t.fail(std::string("normalize_adjacency: ") + e.what());
                continue;
            }
            const auto N = static_cast<Index>(n);
            for (Index i = 0; i < N; ++i) {
                t.require(a(i, i) == graph::kSelfLoopWeight, "diagonal is exactly 2");
                for (Index j = 0; j < N; ++j) {
                    t.require(a(i, j) == a(j, i), "exact symmetry");
                    if (i != j) t.require(a(i, j) >= 0.01 && a(i, j) <= 0.99, "off-diagonal in [0.01, 0.99]");
                }
            }
            if (mode != graph::HaversineMode::standard) continue;
            // Weight never increases with separation.
            std::vector<std::pair<double, double>> pairs;
            for (Index i = 0; i < N; ++i)
                for (Index j = i + 1; j < N; ++j)
                    pairs.emplace_back(graph::haversine_angle(pts[static_cast<std::size_t>(i)],
                                                              pts[static_cast<std::size_t>(j)], mode),
                                       a(i, j));
            std::sort(pairs.begin(), pairs.end());
            for (std::size_t k = 1; k < pairs.size(); ++k)
                t.require(pairs[k].second <= pairs[k - 1].second, "monotone decrease with separation");
        }
    }
    return t.finish();
}

SuiteResult closed_form_suite(const VerifyOptions& options) {
    Tracker t("closed-form", 1e-12);
    for (int s = 0; s < options.seeds; ++s) {
        Rng rng(derive_seed(static_cast<std::uint64_t>(s), {0x636c6f}));
        const Index n = 5, in = 3, hidden = 4;
        Tape tape;

        const auto cell = nn::GConvLSTMCell::zeros(in, hidden, 1);
        const Matrix c_prev = random_matrix(n, hidden, rng);
        const Matrix h_prev = random_matrix(n, hidden, rng);
        const Tensor P(random_matrix(n, n, rng));
        const Tensor props[] = {P};
        const auto st = cell.step(tape, props, Tensor(random_matrix(n, in, rng)),
                                  {Tensor(h_prev), Tensor(c_prev)});
        const Matrix c_expect = 0.5 * c_prev;
        const Matrix h_expect = 0.5 * (0.5 * c_prev).array().tanh().matrix();
        t.record((st.c.value() - c_expect).cwiseAbs().maxCoeff(), "zero-weight GConvLSTM c_t");
        t.record((st.h.value() - h_expect).cwiseAbs().maxCoeff(), "zero-weight GConvLSTM h_t");

        const auto gru = nn::GRUCell::zeros(in);
        const Matrix w_prev = random_matrix(in, in, rng);
        const Tensor w_t = gru.step(tape, Tensor(random_matrix(in, in, rng)), Tensor(w_prev));
        t.record((w_t.value() - 0.5 * w_prev).cwiseAbs().maxCoeff(), "zero-weight GRU");

        nn::EvolveGCNHLayer evolve;
        evolve.w0 = Tensor(random_matrix(in, in, rng));
        evolve.q = Tensor(random_matrix(1, in, rng));
        evolve.gru = nn::GRUCell::zeros(in);
        const auto [y, w_evolved] =
            evolve.step(tape, P, Tensor(random_matrix(n, in, rng)), Tensor(w_prev));
        t.record((w_evolved.value() - 0.5 * w_prev).cwiseAbs().maxCoeff(), "zero-weight EvolveGCNH");
    }
    return t.finish();
}

SuiteResult oracle_suite(const VerifyOptions& options) {
    Tracker t("oracle", 1e-9);

    const double lr_expect[] = {0.01, 0.01, 0.005, 0.005, 0.0025, 0.0025, 0.00125, 0.00125};
    const int lr_epochs[] = {0, 74, 75, 149, 150, 224, 225, 299};
    for (int i = 0; i < 8; ++i)
        t.require(train::lr_at_epoch(lr_epochs[i]) == lr_expect[i], "lr schedule");

    t.require(train::train_size(703) == 562, "703 sequences give 562 training");
    const auto splits = train::make_splits(703, 5, 0);
    std::set<std::vector<std::size_t>> distinct;
    for (const auto& sp : splits) {
        distinct.insert(sp.test);
        t.require(sp.train.size() == 562 && sp.test.size() == 141, "split sizes");
        std::vector<std::size_t> all(sp.train);
        all.insert(all.end(), sp.test.begin(), sp.test.end());
        std::sort(all.begin(), all.end());
        std::vector<std::size_t> expect(703);
        std::iota(expect.begin(), expect.end(), std::size_t{0});
        t.require(all == expect, "split is a disjoint cover");
    }
    t.require(distinct.size() == splits.size(), "splits pairwise distinct");

    for (int s = 0; s < options.seeds; ++s) {
        Rng rng(derive_seed(static_cast<std::uint64_t>(s), {0x726d73}));
        std::vector<Matrix> pred, truth;
        for (int k = 0; k < 3; ++k) {
            pred.push_back(random_matrix(4 + k, 15, rng, 0.0, 30.0));
            truth.push_back(random_matrix(4 + k, 15, rng, 0.0, 30.0));
        }
        const auto report = train::rmse_from_predictions(pred, truth);
        double total = 0.0;
        std::size_t count = 0;
        for (Index c = 0; c < 15; ++c) {
            double acc = 0.0;
            std::size_t nc = 0;
            for (std::size_t m = 0; m < pred.size(); ++m)
                for (Index r = 0; r < pred[m].rows(); ++r) {
                    const double d = pred[m](r, c) - truth[m](r, c);
                    acc += d * d;
                    ++nc;
                }
            total += acc;
            count += nc;
            t.record(std::abs(report.per_layer[static_cast<std::size_t>(c)] - std::sqrt(acc / static_cast<double>(nc))),
                     "per-layer RMSE vs two-loop recomputation");
        }
        t.record(std::abs(report.total - std::sqrt(total / static_cast<double>(count))),
                 "total RMSE vs two-loop recomputation");
        const auto perfect = train::rmse_from_predictions(truth, truth);
        t.require(perfect.total == 0.0, "perfect predictions give exactly 0");
    }

    // Node relabeling commutes with every graph model in eval mode.
    for (int s = 0; s < options.seeds; ++s) {
        const auto seed = static_cast<std::uint64_t>(s);
        const auto toy = make_toy_data(1, 5, seed + 300);
        const auto& seq = toy.sequences.front();
        std::vector<Index> perm(5);
        std::iota(perm.begin(), perm.end(), Index{0});
        Rng prng(seed);
        std::shuffle(perm.begin(), perm.end(), prng);
        const auto moved = permute_nodes(seq, perm);
        for (auto kind : models::kAllModelKinds) {
            auto model = models::make_model(kind, toy_dims(), seed);
            Rng unused(0);
            Tape a, b;
            const Matrix y = model->forward(a, seq, ad::Mode::eval, unused).value();
            const Matrix y_moved = model->forward(b, moved, ad::Mode::eval, unused).value();
            double err = 0.0;
            for (Index i = 0; i < 5; ++i)
                err = std::max(err, (y_moved.row(i) - y.row(perm[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff());
            t.record(err, std::string("permutation equivariance of ") + std::string(models::to_string(kind)));
        }
    }
    return t.finish();
}

std::vector<SuiteResult> run_all_suites(const VerifyOptions& options) {
    return {gradient_primitives_suite(options), gradient_layers_suite(options),
            gradient_models_suite(options),     adjacency_suite(options),
            closed_form_suite(options),         oracle_suite(options)};
}

} // namespace icegnn::verify
