#include "icegnn/autodiff/ops.hpp"
#include "icegnn/data/synthetic.hpp"
#include "icegnn/graph/adjacency.hpp"
#include "icegnn/graph/sequence.hpp"
#include "icegnn/models/models.hpp"
#include "icegnn/nn/recurrent.hpp"
#include "icegnn/verify/suites.hpp"

#include <benchmark/benchmark.h>

using namespace icegnn;

namespace {

ad::Matrix random_matrix(ad::Index r, ad::Index c, std::uint64_t seed) {
    Rng rng(seed);
    ad::Matrix m(r, c);
    for (ad::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -1.0, 1.0);
    return m;
}

void BM_Matmul(benchmark::State& state) {
    const auto n = state.range(0);
    ad::Tensor a(random_matrix(n, n, 1), true), b(random_matrix(n, n, 2), true);
    for (auto _ : state) {
        ad::Tape tape;
        benchmark::DoNotOptimize(ad::matmul(tape, a, b).value().data());
    }
    state.SetItemsProcessed(state.iterations() * n * n * n);
}
BENCHMARK(BM_Matmul)->Arg(16)->Arg(64)->Arg(256);

void BM_GConvLSTMStep(benchmark::State& state) {
    const auto nodes = state.range(0);
    Rng rng(3);
    const auto cell = nn::GConvLSTMCell::create(3, 32, 1, rng);
    const std::vector<ad::Tensor> prop{ad::Tensor(random_matrix(nodes, nodes, 4))};
    const ad::Tensor x(random_matrix(nodes, 3, 5));
    for (auto _ : state) {
        ad::Tape tape;
        auto s = cell.step(tape, prop, x, cell.initial_state(nodes));
        benchmark::DoNotOptimize(s.h.value().data());
    }
}
BENCHMARK(BM_GConvLSTMStep)->Arg(16)->Arg(64)->Arg(256);

void BM_ForwardBackward(benchmark::State& state) {
    const auto kind = static_cast<models::ModelKind>(state.range(0));
    const auto data = verify::make_toy_data(1, 16, 6);
    models::ModelDims d;
    d.hidden = 32;
    d.fc1 = 32;
    d.fc2 = 16;
    const auto model = models::make_model(kind, d, 7);
    const ad::Tensor target(data.sequences[0].normalized_targets);
    Rng rng(8);
    for (auto _ : state) {
        ad::Tape tape;
        const auto loss = ad::mse_loss(tape, model->forward(tape, data.sequences[0], ad::Mode::train, rng), target);
        ad::backward(loss, tape);
        benchmark::DoNotOptimize(loss.item());
    }
    state.SetLabel(std::string(models::to_string(kind)));
}
BENCHMARK(BM_ForwardBackward)->DenseRange(0, 3);

void BM_Adjacency(benchmark::State& state) {
    data::SyntheticConfig sc;
    sc.records = 1;
    sc.n_nodes = static_cast<std::size_t>(state.range(0));
    const auto rec = data::generate_synthetic(sc).front();
    std::vector<graph::GeoPoint> pts;
    for (const auto& c : rec.columns) pts.push_back(c.location);
    for (auto _ : state) {
        const auto raw = graph::build_raw_adjacency(pts, graph::HaversineMode::paper);
        const auto r = graph::off_diagonal_range(raw);
        const auto adj = graph::normalize_adjacency(raw, r.min, r.max);
        benchmark::DoNotOptimize(graph::symmetric_normalize(adj).data());
    }
}
BENCHMARK(BM_Adjacency)->Arg(16)->Arg(256);

} // namespace
BENCHMARK_MAIN();
