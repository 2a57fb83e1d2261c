#include "commands.hpp"

#include "icegnn/data/dataset_io.hpp"
#include "icegnn/data/ingest.hpp"
#include "icegnn/errors.hpp"
#include "icegnn/graph/normalization.hpp"
#include "icegnn/hash.hpp"
#include "icegnn/models/checkpoint.hpp"
#include "icegnn/training/report.hpp"
#include "icegnn/verify/suites.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <optional>
#include <ostream>

namespace icegnn::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

const std::string& require_path(const std::string& value, const char* flag) {
    if (value.empty()) throw UsageError(std::string("missing required ") + flag);
    return value;
}

std::string config_echo(const RunConfig& config) { return config_to_json(config).dump(); }

void write_dataset(const std::vector<data::EchogramRecord>& accepted, data::DatasetManifest manifest,
                   const fs::path& out, const RunConfig& config) {
    if (out.has_parent_path()) fs::create_directories(out.parent_path());
    // save_dataset describes what it wrote; the verdicts come from the filter.
    const auto written = data::save_dataset(accepted, out, config.min_layers);
    manifest.content_hash = written.content_hash;
    manifest.record_count = written.record_count;
    train::write_text_file(data::manifest_path_for(out),
                           data::manifest_to_json(manifest, config_echo(config)));
}

void print_dataset_summary(const Io& io, const fs::path& out, const data::DatasetManifest& m) {
    std::size_t accepted = 0;
    for (const auto& e : m.entries) accepted += e.verdict == "accepted";
    io.out << "dataset " << out.string() << ": " << accepted << " of " << m.entries.size()
           << " records accepted (min_layers " << m.min_layers << "), hash " << to_hex(m.content_hash)
           << "\n";
}

std::vector<graph::TemporalGraphSequence> assemble_all(const std::vector<data::EchogramRecord>& records,
                                                       const RunConfig& config,
                                                       graph::HaversineMode mode) {
    graph::SequenceConfig sc;
    sc.n_shallow = config.synthetic.n_shallow;
    sc.n_deep = config.synthetic.n_deep;
    sc.haversine_mode = mode;
    std::vector<graph::TemporalGraphSequence> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(graph::assemble_sequence(r, sc));
    return out;
}

std::string xml_escape(std::string_view text) {
    std::string s;
    for (char ch : text) {
        switch (ch) {
        case '&': s += "&amp;"; break;
        case '<': s += "&lt;"; break;
        case '>': s += "&gt;"; break;
        default: s += ch;
        }
    }
    return s;
}

// Puts the run config into the SVG as <metadata>, right after the root tag.
std::string with_metadata(std::string svg, const std::string& config_json) {
    const auto root = svg.find("<svg");
    const auto close = root == std::string::npos ? root : svg.find('>', root);
    if (close == std::string::npos) return svg;
    svg.insert(close + 1, "\n<metadata>" + xml_escape(config_json) + "</metadata>");
    return svg;
}

std::string with_config_footer(std::string text, const std::string& config_json) {
    return text + "\n# config " + config_json + "\n";
}

void write_report_files(const std::vector<train::TrialSummary>& summaries, const fs::path& dir,
                        const std::string& config_json, int first_target_year) {
    fs::create_directories(dir);
    train::write_text_file(dir / "table.txt",
                           with_config_footer(train::results_table(summaries, first_target_year),
                                              config_json));
    train::write_text_file(dir / "per_layer_rmse.svg",
                           with_metadata(train::per_layer_rmse_svg(summaries, first_target_year),
                                         config_json));
    for (const auto& s : summaries)
        train::write_text_file(dir / ("loss_curves_" + std::string(models::to_string(s.kind)) + ".svg"),
                               with_metadata(train::loss_curves_svg(s), config_json));
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

} // namespace

void cmd_synth(const RunConfig& config, const Io& io) {
    const fs::path out = require_path(config.paths.out, "--out");
    const auto records = data::generate_synthetic(config.synthetic);
    auto filtered = data::filter_dataset(records, config.min_layers);
    write_dataset(filtered.accepted, filtered.manifest, out, config);
    print_dataset_summary(io, out, data::describe_dataset(filtered.accepted, config.min_layers));
}

void cmd_ingest(const RunConfig& config, const Io& io) {
    const fs::path masks = require_path(config.paths.masks, "--masks");
    const fs::path tracks = require_path(config.paths.tracks, "--tracks");
    const fs::path out = require_path(config.paths.out, "--out");
    data::IngestConfig ic;
    ic.min_layers = config.min_layers;
    const auto outcomes = data::ingest_directory(masks, tracks, ic, config.workers);
    auto filtered = data::filter_outcomes(outcomes, config.min_layers);
    for (const auto& e : filtered.manifest.entries) {
        io.log << "ingest " << e.id << ": " << e.verdict << " (" << e.layer_count << " layers)";
        if (!e.diagnostic.empty()) io.log << " " << e.diagnostic;
        io.log << "\n";
    }
    write_dataset(filtered.accepted, filtered.manifest, out, config);
    auto described = data::describe_dataset(filtered.accepted, config.min_layers);
    described.entries = filtered.manifest.entries;
    print_dataset_summary(io, out, described);
}

void cmd_train(const RunConfig& config, const Io& io) {
    const fs::path dataset = require_path(config.paths.dataset, "--dataset");
    const fs::path out = require_path(config.paths.out, "--out");
    const auto records = data::load_dataset(dataset);
    const auto sequences = assemble_all(records, config, config.haversine_mode);
    const std::string echo = config_echo(config);

    fs::create_directories(out / "checkpoints");
    fs::create_directories(out / "loss");
    train::write_text_file(out / "run_config.json", config_to_json(config).dump(2) + "\n");

    std::vector<train::TrialSummary> summaries;
    for (auto kind : config.models) {
        const std::string name(models::to_string(kind));
        io.log << "training " << train::display_name(kind) << ": " << config.trials << " trial(s), "
               << sequences.size() << " sequences\n";
        auto on_trial = [&](const train::TrialArtifacts& a) {
            const std::string stem = name + "-trial" + std::to_string(a.report.trial);
            models::save_checkpoint(out / "checkpoints" / (stem + ".ckpt"), a.model, a.stats,
                                    config.haversine_mode);
            train::write_text_file(out / "loss" / (stem + ".csv"),
                                   train::loss_curve_csv(a.report.loss_curve));
            io.log << "  trial " << a.report.trial << ": total RMSE "
                   << fixed(a.report.total_rmse, 4) << " px\n";
        };
        try {
            summaries.push_back(train::run_trials(sequences, experiment_config(config, kind), on_trial));
        } catch (const NumericError& e) {
            throw NumericError(name + ": " + e.what());
        }
    }

    train::write_text_file(out / "summary.json", train::summaries_to_json(summaries, echo));
    const int first_year = sequences.empty() ? 1992 : sequences.front().first_target_year;
    write_report_files(summaries, out, echo, first_year);
    io.out << train::results_table(summaries, first_year);
}

void cmd_eval(const RunConfig& config, const Io& io) {
    const fs::path ckpt_path = require_path(config.paths.checkpoint, "--checkpoint");
    const fs::path dataset = require_path(config.paths.dataset, "--dataset");
    const auto ckpt = models::load_checkpoint(ckpt_path);
    const auto records = data::load_dataset(dataset);
    const auto raw = assemble_all(records, config, ckpt.haversine_mode);
    if (raw.empty()) throw InvalidArgument("eval: dataset '" + dataset.string() + "' is empty");
    const auto normalized = graph::apply_normalization(raw, ckpt.stats);
    const auto report = train::evaluate_rmse(*ckpt.model, normalized, ckpt.stats);

    Json doc{{"format", "icegnn-eval-report"},
             {"version", 1},
             {"config", config_to_json(config)},
             {"model", std::string(models::to_string(ckpt.model->kind()))},
             {"sequences", normalized.size()},
             {"per_layer_rmse", report.per_layer},
             {"total_rmse", report.total}};
    const std::string text = doc.dump(2) + "\n";
    if (!config.paths.out.empty()) {
        const fs::path out = config.paths.out;
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        train::write_text_file(out, text);
    }
    io.out << text;
}

bool cmd_verify(const RunConfig& config, const Io& io) {
    (void)config;
    const auto results = verify::run_all_suites();
    bool ok = true;
    Json suites = Json::array();
    for (const auto& r : results) {
        ok = ok && r.passed;
        char line[256];
        std::snprintf(line, sizeof line, "%-22s %s  max_error %.3e  tolerance %.0e  checks %zu",
                      r.name.c_str(), r.passed ? "PASS" : "FAIL", r.max_error, r.tolerance, r.checks);
        io.out << line << "\n";
        if (!r.detail.empty()) io.out << "  " << r.detail << "\n";
        suites.push_back(Json{{"name", r.name},
                              {"passed", r.passed},
                              {"max_error", r.max_error},
                              {"tolerance", r.tolerance},
                              {"checks", r.checks},
                              {"detail", r.detail}});
    }
    io.out << (ok ? "verify: all suites passed" : "verify: FAILED") << "\n";
    if (!config.paths.out.empty()) {
        const fs::path out = config.paths.out;
        if (out.has_parent_path()) fs::create_directories(out.parent_path());
        Json doc{{"format", "icegnn-verify-report"},
                 {"version", 1},
                 {"config", config_to_json(config)},
                 {"passed", ok},
                 {"suites", suites}};
        train::write_text_file(out, doc.dump(2) + "\n");
    }
    return ok;
}

void cmd_report(const RunConfig& config, const Io& io) {
    const fs::path summary = require_path(config.paths.summary, "--summary");
    const fs::path out = require_path(config.paths.out, "--out");
    const auto summaries = train::summaries_from_json(train::read_text_file(summary));
    // The report echoes the config of the run that produced the summary.
    const auto doc = nlohmann::ordered_json::parse(train::read_text_file(summary));
    const std::string echo = doc.contains("config") ? doc.at("config").dump() : config_echo(config);
    write_report_files(summaries, out, echo, 1992);
    io.out << train::results_table(summaries);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& log) {
    CLI::App app{"icegnn: spatiotemporal graph models for ice layer thickness"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "icegnn 0.1.0");

    struct Flags {
        std::string config;
        std::optional<std::string> dataset, model, out, haversine_mode, masks, tracks, checkpoint,
            summary;
        std::optional<int> trials;
        std::optional<std::uint64_t> seed;
        std::optional<bool> parallel;
    } flags;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", flags.config, "JSON run config")
            ->envname("ICEGNN_CONFIG")
            ->check(CLI::ExistingFile);
        sub->add_option("--out", flags.out, "Output path")->envname("ICEGNN_OUT");
        sub->add_option("--seed", flags.seed, "Base seed")->envname("ICEGNN_SEED");
    };
    auto add_dataset = [&](CLI::App* sub) {
        sub->add_option("--dataset", flags.dataset, "Dataset container")->envname("ICEGNN_DATASET");
    };
    auto add_model = [&](CLI::App* sub) {
        sub->add_option("--model", flags.model, "agcn_lstm, gcn_lstm, gcn, lstm or all")
            ->envname("ICEGNN_MODEL");
        sub->add_option("--haversine-mode", flags.haversine_mode, "paper or standard")
            ->envname("ICEGNN_HAVERSINE_MODE");
    };

    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    add_common(synth);

    auto* ingest = app.add_subcommand("ingest", "Ingest mask images and track CSVs");
    add_common(ingest);
    ingest->add_option("--masks", flags.masks, "Directory of <id>.pgm masks")->envname("ICEGNN_MASKS");
    ingest->add_option("--tracks", flags.tracks, "Directory of <id>.csv tracks")->envname("ICEGNN_TRACKS");

    auto* train_cmd = app.add_subcommand("train", "Run training trials and write reports");
    add_common(train_cmd);
    add_dataset(train_cmd);
    add_model(train_cmd);
    train_cmd->add_option("--trials", flags.trials, "Number of trials")->envname("ICEGNN_TRIALS");
    train_cmd->add_flag("--parallel,!--serial", flags.parallel, "Run trials on separate threads")
        ->envname("ICEGNN_PARALLEL");

    auto* eval = app.add_subcommand("eval", "Score a checkpoint on a dataset");
    add_common(eval);
    add_dataset(eval);
    eval->add_option("--checkpoint", flags.checkpoint, "Checkpoint file")->envname("ICEGNN_CHECKPOINT");

    auto* verify_cmd = app.add_subcommand("verify", "Run the verification suites");
    add_common(verify_cmd);

    auto* report = app.add_subcommand("report", "Rebuild tables and plots from a summary");
    add_common(report);
    report->add_option("--summary", flags.summary, "summary.json from train")->envname("ICEGNN_SUMMARY");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion& e) {
        out << e.what() << "\n";
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front();
        if (e.get_exit_code() == 0) {
            out << (sub ? sub->help() : app.help());
            return kExitOk;
        }
        log << "error: " << e.what() << "\n";
        return kExitUsage;
    }

    const Io io{out, log};
    try {
        RunConfig config;
        if (!flags.config.empty()) config = load_config(flags.config);
        if (flags.dataset) config.paths.dataset = *flags.dataset;
        if (flags.out) config.paths.out = *flags.out;
        if (flags.masks) config.paths.masks = *flags.masks;
        if (flags.tracks) config.paths.tracks = *flags.tracks;
        if (flags.checkpoint) config.paths.checkpoint = *flags.checkpoint;
        if (flags.summary) config.paths.summary = *flags.summary;
        if (flags.model) config.models = parse_models(*flags.model);
        if (flags.trials) {
            if (*flags.trials <= 0) throw UsageError("--trials must be positive");
            config.trials = *flags.trials;
        }
        if (flags.seed) {
            config.seed = *flags.seed;
            config.synthetic.seed = *flags.seed;
        }
        if (flags.parallel) config.parallel = *flags.parallel;
        if (flags.haversine_mode) {
            try {
                config.haversine_mode = graph::parse_haversine_mode(*flags.haversine_mode);
            } catch (const std::exception&) {
                throw UsageError("--haversine-mode must be 'paper' or 'standard'");
            }
        }

        const std::string name = app.get_subcommands().front()->get_name();
        if (name == "synth") cmd_synth(config, io);
        else if (name == "ingest") cmd_ingest(config, io);
        else if (name == "train") cmd_train(config, io);
        else if (name == "eval") cmd_eval(config, io);
        else if (name == "verify") return cmd_verify(config, io) ? kExitOk : kExitFailure;
        else if (name == "report") cmd_report(config, io);
        return kExitOk;
    } catch (const UsageError& e) {
        log << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

} // namespace icegnn::cli
