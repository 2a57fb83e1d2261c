#include "icegnn/training/report.hpp"

#include "icegnn/errors.hpp"
#include "icegnn/hash.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace icegnn::train {

using json = nlohmann::ordered_json;

namespace {

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

constexpr const char* kPalette[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3",
                                    "#937860", "#da8bc3"};

std::string pad(std::string s, std::size_t width) {
    // Count code points so the ± sign takes one column.
    std::size_t visible = 0;
    for (unsigned char c : s)
        if ((c & 0xC0) != 0x80) ++visible;
    if (visible < width) s.append(width - visible, ' ');
    return s;
}

} // namespace

std::string_view display_name(models::ModelKind kind) {
    switch (kind) {
    case models::ModelKind::agcn_lstm: return "AGCN-LSTM";
    case models::ModelKind::gcn_lstm: return "GCN-LSTM";
    case models::ModelKind::gcn: return "GCN";
    case models::ModelKind::lstm: return "LSTM";
    }
    return "?";
}

std::string summaries_to_json(std::span<const TrialSummary> summaries, std::string_view config_json) {
    json doc;
    doc["format"] = "icegnn-trial-report";
    doc["version"] = kReportVersion;
    doc["config"] = config_json.empty() ? json::object() : json::parse(config_json);
    json models = json::array();
    for (const auto& s : summaries) {
        json m;
        m["model"] = std::string(models::to_string(s.kind));
        json trials = json::array();
        for (const auto& t : s.trials) {
            trials.push_back({{"trial", t.trial},
                              {"seed", t.seed},
                              {"train_size", t.train_size},
                              {"test_size", t.test_size},
                              {"split_hash", to_hex(t.split_hash)},
                              {"per_layer_rmse", t.per_layer_rmse},
                              {"total_rmse", t.total_rmse},
                              {"loss_curve", t.loss_curve}});
        }
        m["trials"] = std::move(trials);
        m["aggregate"] = {{"trials", s.trials.size()},
                          {"mean_total_rmse", s.mean_total},
                          {"std_total_rmse", s.std_total},
                          {"per_layer_mean_rmse", s.per_layer_mean},
                          {"per_layer_std_rmse", s.per_layer_std}};
        models.push_back(std::move(m));
    }
    doc["models"] = std::move(models);
    return doc.dump(2) + "\n";
}

std::vector<TrialSummary> summaries_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("trial report: ") + e.what(), e.byte);
    }
    if (doc.value("format", "") != "icegnn-trial-report")
        throw ParseError("not an icegnn trial report", 0);
    if (doc.value("version", 0) != kReportVersion)
        throw ParseError("unsupported trial report version", 0);

    std::vector<TrialSummary> out;
    try {
        for (const auto& m : doc.at("models")) {
            TrialSummary s;
            s.kind = models::parse_model_kind(m.at("model").get<std::string>());
            for (const auto& t : m.at("trials")) {
                TrialReport r;
                r.trial = t.at("trial").get<int>();
                r.seed = t.at("seed").get<std::uint64_t>();
                r.train_size = t.at("train_size").get<std::size_t>();
                r.test_size = t.at("test_size").get<std::size_t>();
                r.split_hash = std::stoull(t.at("split_hash").get<std::string>(), nullptr, 16);
                r.per_layer_rmse = t.at("per_layer_rmse").get<std::vector<double>>();
                r.total_rmse = t.at("total_rmse").get<double>();
                r.loss_curve = t.at("loss_curve").get<std::vector<double>>();
                s.trials.push_back(std::move(r));
            }
            aggregate(s);
            out.push_back(std::move(s));
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("trial report: ") + e.what(), 0);
    }
    return out;
}

std::string loss_curve_csv(std::span<const double> curve) {
    std::ostringstream out;
    out << "epoch,mse\n";
    char buf[64];
    for (std::size_t e = 0; e < curve.size(); ++e) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g\n", e + 1, curve[e]);
        out << buf;
    }
    return out.str();
}

std::string results_table(std::span<const TrialSummary> summaries, int first_target_year) {
    constexpr std::size_t kLabel = 12;
    constexpr std::size_t kCell = 18;
    std::ostringstream out;
    out << pad("", kLabel);
    for (const auto& s : summaries) out << " | " << pad(std::string(display_name(s.kind)), kCell);
    out << '\n';
    out << std::string(kLabel, '-');
    for (std::size_t i = 0; i < summaries.size(); ++i) out << "-+-" << std::string(kCell, '-');
    out << '\n';
    out << pad("Total RMSE", kLabel);
    for (const auto& s : summaries)
        out << " | " << pad(fixed(s.mean_total, 3) + " ± " + fixed(s.std_total, 3), kCell);
    out << '\n';

    std::size_t layers = 0;
    for (const auto& s : summaries) layers = std::max(layers, s.per_layer_mean.size());
    for (std::size_t k = 0; k < layers; ++k) {
        out << pad(std::to_string(first_target_year + static_cast<int>(k)), kLabel);
        for (const auto& s : summaries) {
            std::string cell;
            if (k < s.per_layer_mean.size())
                cell = fixed(s.per_layer_mean[k], 3) + " ± " + fixed(s.per_layer_std[k], 3);
            out << " | " << pad(cell, kCell);
        }
        out << '\n';
    }
    return out.str();
}

std::string per_layer_rmse_svg(std::span<const TrialSummary> summaries, int first_target_year) {
    constexpr double kWidth = 900, kHeight = 420, kLeft = 60, kRight = 150, kTop = 30, kBottom = 50;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    std::size_t layers = 0;
    double ymax = 0.0;
    for (const auto& s : summaries) {
        layers = std::max(layers, s.per_layer_mean.size());
        for (double v : s.per_layer_mean) ymax = std::max(ymax, v);
    }
    if (ymax <= 0.0) ymax = 1.0;
    ymax *= 1.1;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"13\">Mean per-layer test RMSE (pixels)</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"black\"/>\n";
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = ymax * tick / 4.0;
        const double y = kTop + plot_h - plot_h * tick / 4.0;
        out << "<text x=\"" << kLeft - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">"
            << fixed(v, 2) << "</text>\n";
    }

    if (layers > 0 && !summaries.empty()) {
        const double group_w = plot_w / static_cast<double>(layers);
        const double bar_w = group_w * 0.8 / static_cast<double>(summaries.size());
        for (std::size_t k = 0; k < layers; ++k) {
            const double gx = kLeft + group_w * static_cast<double>(k) + group_w * 0.1;
            for (std::size_t m = 0; m < summaries.size(); ++m) {
                if (k >= summaries[m].per_layer_mean.size()) continue;
                const double v = summaries[m].per_layer_mean[k];
                const double h = plot_h * v / ymax;
                out << "<rect x=\"" << fixed(gx + bar_w * static_cast<double>(m), 2) << "\" y=\""
                    << fixed(kTop + plot_h - h, 2) << "\" width=\"" << fixed(bar_w, 2)
                    << "\" height=\"" << fixed(h, 2) << "\" fill=\"" << kPalette[m % 7] << "\"/>\n";
            }
            out << "<text x=\"" << fixed(gx + group_w * 0.4, 2) << "\" y=\"" << kTop + plot_h + 16
                << "\" text-anchor=\"middle\">" << first_target_year + static_cast<int>(k)
                << "</text>\n";
        }
        for (std::size_t m = 0; m < summaries.size(); ++m) {
            const double y = kTop + 10 + 18.0 * static_cast<double>(m);
            out << "<rect x=\"" << kLeft + plot_w + 20 << "\" y=\"" << y - 9
                << "\" width=\"12\" height=\"12\" fill=\"" << kPalette[m % 7] << "\"/>\n";
            out << "<text x=\"" << kLeft + plot_w + 38 << "\" y=\"" << y + 1 << "\">"
                << display_name(summaries[m].kind) << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

std::string loss_curves_svg(const TrialSummary& summary) {
    constexpr double kWidth = 700, kHeight = 400, kLeft = 70, kRight = 110, kTop = 30, kBottom = 40;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    std::size_t epochs = 0;
    double ymax = 0.0;
    for (const auto& t : summary.trials) {
        epochs = std::max(epochs, t.loss_curve.size());
        for (double v : t.loss_curve)
            if (std::isfinite(v)) ymax = std::max(ymax, v);
    }
    if (ymax <= 0.0) ymax = 1.0;

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kLeft << "\" y=\"18\" font-size=\"13\">" << display_name(summary.kind)
        << " training MSE (normalized targets)</text>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
        << "\" y2=\"" << kTop + plot_h << "\" stroke=\"black\"/>\n";
    out << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
        << kTop + plot_h << "\" stroke=\"black\"/>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + 4 << "\" text-anchor=\"end\">"
        << fixed(ymax, 3) << "</text>\n";
    out << "<text x=\"" << kLeft - 6 << "\" y=\"" << kTop + plot_h + 4
        << "\" text-anchor=\"end\">0</text>\n";
    out << "<text x=\"" << kLeft + plot_w << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"end\">epoch " << epochs << "</text>\n";

    for (std::size_t i = 0; i < summary.trials.size(); ++i) {
        const auto& curve = summary.trials[i].loss_curve;
        if (curve.empty()) continue;
        out << "<polyline fill=\"none\" stroke=\"" << kPalette[i % 7] << "\" points=\"";
        for (std::size_t e = 0; e < curve.size(); ++e) {
            const double x = kLeft + (epochs > 1 ? plot_w * static_cast<double>(e) /
                                                       static_cast<double>(epochs - 1)
                                                 : 0.0);
            const double v = std::isfinite(curve[e]) ? curve[e] : ymax;
            const double y = kTop + plot_h - plot_h * std::min(v, ymax) / ymax;
            out << (e ? " " : "") << fixed(x, 2) << ',' << fixed(y, 2);
        }
        out << "\"/>\n";
        out << "<text x=\"" << kLeft + plot_w + 10 << "\" y=\"" << kTop + 12 + 16.0 * static_cast<double>(i)
            << "\" fill=\"" << kPalette[i % 7] << "\">trial " << summary.trials[i].trial << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace icegnn::train
