#pragma once

#include "icegnn/graph/normalization.hpp"
#include "icegnn/graph/sequence.hpp"
#include "icegnn/models/models.hpp"
#include "icegnn/training/optimizer.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace icegnn::train {

using graph::TemporalGraphSequence;

struct TrialConfig {
    std::uint64_t seed = 0;
    int epochs = 300;
    int split_train_parts = 4;
    int split_test_parts = 1;
    LRSchedule schedule;
    bool shuffle = true;
};

/// Trains in place, one sequence per optimizer step, reshuffling every epoch
/// from (seed, epoch). Returns the mean training MSE of each epoch.
/// Numeric failures are rethrown with epoch and sequence context.
std::vector<double> train_model(models::SequenceModel& model,
                                std::span<const TemporalGraphSequence> train,
                                const TrialConfig& config);

struct RmseReport {
    std::vector<double> per_layer; ///< pixels, one per target column
    double total = 0.0;            ///< pixels, pooled over every residual
};

/// Per-column and pooled RMSE between matching prediction/truth matrices.
RmseReport rmse_from_predictions(std::span<const Matrix> predictions,
                                 std::span<const Matrix> truths);

/// Eval-mode predictions, de-normalized with stats and scored against the
/// raw pixel targets. Throws InvalidArgument on an empty test set.
RmseReport evaluate_rmse(const models::SequenceModel& model,
                         std::span<const TemporalGraphSequence> test,
                         const graph::NormalizationStats& stats);

/// Number of training items for an a:b split, round(n * a / (a + b)).
std::size_t train_size(std::size_t n, int train_parts = 4, int test_parts = 1);

struct Split {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t manifest_hash = 0;
};

/// One split per trial from a permutation seeded by base_seed + trial. A
/// trial whose test set repeats an earlier trial's is redrawn from the next
/// sub-seed, so the splits are pairwise distinct whenever that is possible.
std::vector<Split> make_splits(std::size_t n, int trials, std::uint64_t base_seed,
                               int train_parts = 4, int test_parts = 1);

struct TrialReport {
    int trial = 0;
    std::uint64_t seed = 0;
    std::size_t train_size = 0;
    std::size_t test_size = 0;
    std::uint64_t split_hash = 0;
    std::vector<double> per_layer_rmse;
    double total_rmse = 0.0;
    std::vector<double> loss_curve;
};

struct TrialSummary {
    models::ModelKind kind = models::ModelKind::agcn_lstm;
    std::vector<TrialReport> trials;
    double mean_total = 0.0;
    double std_total = 0.0; ///< sample (n - 1) standard deviation; 0 for one trial
    std::vector<double> per_layer_mean;
    std::vector<double> per_layer_std;
};

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
};
/// Mean and sample standard deviation.
MeanStd mean_and_sample_std(std::span<const double> values);

/// Fills the aggregate fields of a summary from its trials.
void aggregate(TrialSummary& summary);

struct ExperimentConfig {
    models::ModelKind kind = models::ModelKind::agcn_lstm;
    models::ModelDims dims;
    TrialConfig trial;
    int trials = 5;
    std::uint64_t base_seed = 0;
    double epsilon_offset = graph::kDefaultEpsilonOffset;
    /// Run trials on separate threads. Results are identical either way.
    bool parallel = false;
};

struct TrialArtifacts {
    const TrialReport& report;
    const models::SequenceModel& model;
    const graph::NormalizationStats& stats;
};
using TrialCallback = std::function<void(const TrialArtifacts&)>;

/// The repeated-split protocol over raw (un-normalized) sequences: per trial,
/// split, fit stats on the training part, train, and score the test part.
/// Throws InvalidArgument when the dataset has fewer than 5 sequences.
TrialSummary run_trials(std::span<const TemporalGraphSequence> dataset,
                        const ExperimentConfig& config, const TrialCallback& on_trial = {});

} // namespace icegnn::train
