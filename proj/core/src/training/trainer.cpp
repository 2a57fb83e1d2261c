#include "icegnn/training/trainer.hpp"

#include "icegnn/errors.hpp"
#include "icegnn/hash.hpp"
#include "icegnn/random.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <optional>

namespace icegnn::train {

namespace {

constexpr std::uint64_t kShuffleStream = 0x73687566; // "shuf"
constexpr std::uint64_t kDropoutStream = 0x64726f70; // "drop"
constexpr std::uint64_t kSplitStream = 0x73706c74;   // "splt"

std::uint64_t split_hash(const std::vector<std::size_t>& train, const std::vector<std::size_t>& test) {
    Fnv1a h;
    h.update_u64(train.size());
    for (auto i : train) h.update_u64(i);
    h.update_u64(test.size());
    for (auto i : test) h.update_u64(i);
    return h.digest();
}

struct TrialOutcome {
    TrialReport report;
    std::unique_ptr<models::SequenceModel> model;
    graph::NormalizationStats stats;
};

TrialOutcome run_one_trial(std::span<const TemporalGraphSequence> dataset, const Split& split,
                           int trial, const ExperimentConfig& config) {
    std::vector<TemporalGraphSequence> train_raw;
    std::vector<TemporalGraphSequence> test_raw;
    for (auto i : split.train) train_raw.push_back(dataset[i]);
    for (auto i : split.test) test_raw.push_back(dataset[i]);

    TrialOutcome out;
    out.stats = graph::compute_stats(train_raw, config.epsilon_offset);
    const auto train_set = graph::apply_normalization(train_raw, out.stats);
    const auto test_set = graph::apply_normalization(test_raw, out.stats);

    TrialConfig tc = config.trial;
    tc.seed = config.base_seed + static_cast<std::uint64_t>(trial);
    out.model = models::make_model(config.kind, config.dims, tc.seed);

    auto& r = out.report;
    r.trial = trial;
    r.seed = tc.seed;
    r.train_size = split.train.size();
    r.test_size = split.test.size();
    r.split_hash = split.manifest_hash;
    try {
        r.loss_curve = train_model(*out.model, train_set, tc);
    } catch (const NumericError& e) {
        throw NumericError("trial " + std::to_string(trial) + ": " + e.what());
    }
    const auto rmse = evaluate_rmse(*out.model, test_set, out.stats);
    r.per_layer_rmse = rmse.per_layer;
    r.total_rmse = rmse.total;
    return out;
}

} // namespace

std::vector<double> train_model(models::SequenceModel& model,
                                std::span<const TemporalGraphSequence> train,
                                const TrialConfig& config) {
    if (config.epochs <= 0) throw InvalidArgument("epochs must be positive");
    if (train.empty()) throw InvalidArgument("training set is empty");

    const auto& params = model.parameters();
    AdamState adam(params);
    Rng dropout_rng(derive_seed(config.seed, {kDropoutStream}));

    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), std::size_t{0});

    std::vector<ad::Tensor> targets;
    targets.reserve(train.size());
    for (const auto& s : train) {
        if (!s.normalized) throw ContractError("training sequence '" + s.source_id + "' is raw");
        targets.emplace_back(s.normalized_targets);
    }

    std::vector<double> curve;
    curve.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        if (config.shuffle) {
            Rng rng(derive_seed(config.seed, {kShuffleStream, static_cast<std::uint64_t>(epoch)}));
            std::shuffle(order.begin(), order.end(), rng);
        }
        const double lr = lr_at_epoch(epoch, config.schedule);
        double total = 0.0;
        for (auto idx : order) {
            const auto& seq = train[idx];
            try {
                ad::Tape tape;
                params.zero_grad();
                const auto pred = model.forward(tape, seq, ad::Mode::train, dropout_rng);
                const auto loss = ad::mse_loss(tape, pred, targets[idx]);
                if (!std::isfinite(loss.item())) throw NumericError("non-finite training loss");
                ad::backward(loss, tape);
                adam.step(params, lr);
                total += loss.item();
            } catch (const NumericError& e) {
                throw NumericError("epoch " + std::to_string(epoch) + ", sequence '" +
                                   seq.source_id + "': " + e.what());
            }
        }
        curve.push_back(total / static_cast<double>(train.size()));
    }
    return curve;
}

RmseReport rmse_from_predictions(std::span<const Matrix> predictions,
                                 std::span<const Matrix> truths) {
    if (predictions.size() != truths.size())
        throw DimensionError("prediction and truth counts differ");
    if (predictions.empty()) throw InvalidArgument("rmse of an empty set");

    const Index cols = truths.front().cols();
    std::vector<double> sq(static_cast<std::size_t>(cols), 0.0);
    double rows = 0.0;
    for (std::size_t s = 0; s < predictions.size(); ++s) {
        const auto& p = predictions[s];
        const auto& t = truths[s];
        if (p.rows() != t.rows() || p.cols() != t.cols() || t.cols() != cols)
            throw DimensionError("prediction " + ad::shape_string(p.rows(), p.cols()) +
                                 " vs truth " + ad::shape_string(t.rows(), t.cols()));
        const Matrix diff = p - t;
        for (Index c = 0; c < cols; ++c) sq[static_cast<std::size_t>(c)] += diff.col(c).squaredNorm();
        rows += static_cast<double>(t.rows());
    }

    RmseReport r;
    double pooled = 0.0;
    for (double s : sq) {
        r.per_layer.push_back(std::sqrt(s / rows));
        pooled += s;
    }
    r.total = std::sqrt(pooled / (rows * static_cast<double>(cols)));
    return r;
}

RmseReport evaluate_rmse(const models::SequenceModel& model,
                         std::span<const TemporalGraphSequence> test,
                         const graph::NormalizationStats& stats) {
    if (test.empty()) throw InvalidArgument("evaluate_rmse: empty test set");
    std::vector<Matrix> preds;
    std::vector<Matrix> truths;
    for (const auto& seq : test) {
        preds.push_back(model.predict(seq, stats).denormalized);
        truths.push_back(seq.targets);
    }
    return rmse_from_predictions(preds, truths);
}

std::size_t train_size(std::size_t n, int train_parts, int test_parts) {
    if (train_parts <= 0 || test_parts <= 0) throw InvalidArgument("split ratio parts must be positive");
    const double share = static_cast<double>(train_parts) / static_cast<double>(train_parts + test_parts);
    return static_cast<std::size_t>(std::llround(share * static_cast<double>(n)));
}

std::vector<Split> make_splits(std::size_t n, int trials, std::uint64_t base_seed, int train_parts,
                               int test_parts) {
    if (trials <= 0) throw InvalidArgument("trial count must be positive");
    const std::size_t n_train = train_size(n, train_parts, test_parts);
    if (n_train == 0 || n_train >= n)
        throw InvalidArgument("dataset of " + std::to_string(n) + " cannot be split " +
                              std::to_string(train_parts) + ":" + std::to_string(test_parts));

    constexpr int kMaxRedraws = 256;
    std::vector<Split> splits;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t seed = base_seed + static_cast<std::uint64_t>(trial);
        std::optional<Split> chosen;
        for (int attempt = 0; attempt < kMaxRedraws && !chosen; ++attempt) {
            std::vector<std::size_t> perm(n);
            std::iota(perm.begin(), perm.end(), std::size_t{0});
            Rng rng(derive_seed(seed, {kSplitStream, static_cast<std::uint64_t>(attempt)}));
            std::shuffle(perm.begin(), perm.end(), rng);

            Split s;
            s.train.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
            s.test.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
            std::sort(s.train.begin(), s.train.end());
            std::sort(s.test.begin(), s.test.end());
            const bool repeat = std::any_of(splits.begin(), splits.end(),
                                            [&](const Split& o) { return o.test == s.test; });
            if (!repeat || attempt + 1 == kMaxRedraws) chosen = std::move(s);
        }
        chosen->manifest_hash = split_hash(chosen->train, chosen->test);
        splits.push_back(std::move(*chosen));
    }
    return splits;
}

MeanStd mean_and_sample_std(std::span<const double> values) {
    MeanStd r;
    if (values.empty()) return r;
    r.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0.0;
        for (double v : values) ss += (v - r.mean) * (v - r.mean);
        r.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
    return r;
}

void aggregate(TrialSummary& summary) {
    std::vector<double> totals;
    for (const auto& t : summary.trials) totals.push_back(t.total_rmse);
    const auto total = mean_and_sample_std(totals);
    summary.mean_total = total.mean;
    summary.std_total = total.std;

    summary.per_layer_mean.clear();
    summary.per_layer_std.clear();
    if (summary.trials.empty()) return;
    const auto layers = summary.trials.front().per_layer_rmse.size();
    for (std::size_t k = 0; k < layers; ++k) {
        std::vector<double> col;
        for (const auto& t : summary.trials) col.push_back(t.per_layer_rmse.at(k));
        const auto ms = mean_and_sample_std(col);
        summary.per_layer_mean.push_back(ms.mean);
        summary.per_layer_std.push_back(ms.std);
    }
}

TrialSummary run_trials(std::span<const TemporalGraphSequence> dataset,
                        const ExperimentConfig& config, const TrialCallback& on_trial) {
    if (dataset.size() < 5)
        throw InvalidArgument("run_trials needs at least 5 sequences, got " +
                              std::to_string(dataset.size()));
    const auto splits = make_splits(dataset.size(), config.trials, config.base_seed,
                                    config.trial.split_train_parts, config.trial.split_test_parts);

    std::vector<TrialOutcome> outcomes;
    if (config.parallel) {
        std::vector<std::future<TrialOutcome>> jobs;
        for (int t = 0; t < config.trials; ++t)
            jobs.push_back(std::async(std::launch::async, run_one_trial, dataset,
                                      std::cref(splits[static_cast<std::size_t>(t)]), t,
                                      std::cref(config)));
        for (auto& j : jobs) outcomes.push_back(j.get());
    } else {
        for (int t = 0; t < config.trials; ++t)
            outcomes.push_back(run_one_trial(dataset, splits[static_cast<std::size_t>(t)], t, config));
    }

    TrialSummary summary;
    summary.kind = config.kind;
    for (auto& o : outcomes) {
        if (on_trial) on_trial({o.report, *o.model, o.stats});
        summary.trials.push_back(std::move(o.report));
    }
    aggregate(summary);
    return summary;
}

} // namespace icegnn::train
