#pragma once

#include "icegnn/training/trainer.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace icegnn::train {

inline constexpr int kReportVersion = 1;

/// Display name used in result tables ("AGCN-LSTM", ...).
std::string_view display_name(models::ModelKind kind);

/// Versioned JSON document: the echoed run config, then per model one record
/// per trial and one aggregate record. config_json must be a JSON object
/// (or empty for none).
std::string summaries_to_json(std::span<const TrialSummary> summaries,
                              std::string_view config_json = {});
std::vector<TrialSummary> summaries_from_json(std::string_view text);

/// Two-column CSV with header "epoch,mse"; epochs count from 1.
std::string loss_curve_csv(std::span<const double> curve);

/// Fixed-width table: one column per model, a "Total RMSE" row as
/// mean ± std, then one row per predicted layer.
std::string results_table(std::span<const TrialSummary> summaries, int first_target_year = 1992);

/// Grouped bar chart of mean per-layer RMSE with one series per model.
std::string per_layer_rmse_svg(std::span<const TrialSummary> summaries, int first_target_year = 1992);

/// Training loss per epoch, one polyline per trial.
std::string loss_curves_svg(const TrialSummary& summary);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

} // namespace icegnn::train
