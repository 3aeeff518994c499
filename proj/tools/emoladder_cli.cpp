// Command line front end: synthetic corpus generation, training runs,
// checkpoint evaluation, gradient checking, and report assembly.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "emoladder/checkpoint.hpp"
#include "emoladder/config_io.hpp"
#include "emoladder/data.hpp"
#include "emoladder/experiment.hpp"
#include "emoladder/gradcheck.hpp"

namespace fs = std::filesystem;
using namespace emoladder;

namespace {

FullTable load_table_for(const RunConfig& config) {
    if (!config.synth_spec_path.empty()) {
        return generate_synthetic(load_synth_spec(config.synth_spec_path));
    }
    if (config.features_path.empty() || config.labels_path.empty()) {
        throw ConfigError("run config needs features_path+labels_path or synth_spec_path");
    }
    return load_corpus(config.features_path, config.labels_path);
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os << text;
}

void write_metrics_log(const SeedResult& r, const ModelConfig& model, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw ParseError("cannot open for writing: " + path);
    os << "epoch,train_loss";
    for (Attr a : model.output_attrs) os << ",val_ccc_" << attr_name(a);
    os << "\n";
    for (const EpochRecord& rec : r.log) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", rec.train_loss);
        os << rec.epoch << ',' << buf;
        for (double v : rec.val_ccc) {
            std::snprintf(buf, sizeof(buf), "%.17g", v);
            os << ',' << buf;
        }
        os << "\n";
    }
}

int cmd_synth_data(const std::string& spec_path, const std::string& out_dir) {
    const SynthSpec spec = load_synth_spec(spec_path);
    const FullTable table = generate_synthetic(spec);
    fs::create_directories(out_dir);
    const std::string features = out_dir + "/features.csv";
    const std::string labels = out_dir + "/labels.csv";
    write_features_file(table, features);
    write_labels_file(table, labels);
    std::cout << "wrote " << table.size() << " segments (" << table.features.cols()
              << " features, " << spec.n_speakers << " speakers)\n"
              << "  " << features << "\n  " << labels << "\n";
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& out_dir_flag,
              const std::vector<std::uint64_t>& seeds_flag) {
    RunConfig config = load_run_config(config_path);
    if (!out_dir_flag.empty()) config.output_dir = out_dir_flag;
    if (!seeds_flag.empty()) config.seeds = seeds_flag;
    if (config.output_dir.empty()) config.output_dir = "runs/" + variant_name(config.model.variant);
    config.validate();
    fs::create_directories(config.output_dir);

    FullTable table = load_table_for(config);
    Rng split_rng(config.split_seed);
    Splits splits = split_by_speaker(table, config.fractions, split_rng);
    const Standardizer standardizer = standardize(splits);
    config.model.input_dim = splits.train.features.cols();

    std::cout << "training " << variant_name(config.model.variant) << " ("
              << config.seeds.size() << " seeds, monitor "
              << attr_name(config.primary_attr) << ")\n"
              << "  train/val/test: " << splits.train.size() << "/"
              << splits.validation.size() << "/" << splits.test.size() << "\n";

    auto on_seed = [&](const SeedResult& r) {
        const std::string tag = "seed" + std::to_string(r.seed);
        if (r.failed) {
            std::cout << "  " << tag << ": FAILED (" << r.failure << ")\n";
            return;
        }
        save_checkpoint(r.best_params, config.output_dir + "/" + tag + ".ckpt", nullptr,
                        &standardizer);
        write_metrics_log(r, config.model, config.output_dir + "/" + tag + "_metrics.csv");
        std::cout << "  " << tag << ": best epoch " << r.best_epoch << ", val "
                  << attr_name(config.primary_attr) << " CCC "
                  << r.best_val_ccc[config.primary_index()] << ", test "
                  << r.test_ccc[config.primary_index()] << "\n";
    };

    RunSummary summary = run_experiment(config, splits, on_seed);
    save_run_summary(summary, config.output_dir + "/summary.json");
    const std::string table_text = render_report({summary});
    write_text_file(config.output_dir + "/summary.txt", table_text);
    write_text_file(config.output_dir + "/summary.csv", render_report_delimited({summary}));
    std::cout << table_text;
    if (!summary.failed_seeds.empty()) {
        std::cout << "warning: " << summary.failed_seeds.size() << " failed seed(s) excluded\n";
    }
    return 0;
}

int cmd_evaluate(const std::string& checkpoint_path, const std::string& features_path,
                 const std::string& labels_path) {
    Checkpoint ckpt = load_checkpoint(checkpoint_path);
    FullTable table = load_corpus(features_path, labels_path);
    Matrix features = ckpt.standardizer ? ckpt.standardizer->apply(table.features)
                                        : table.features;
    DatasetSplit split;
    split.segment_ids = table.segment_ids;
    split.features = std::move(features);
    split.targets = table.targets;
    split.speaker_ids = table.speaker_ids;
    const std::vector<double> scores = evaluate_ccc(ckpt.params, split);
    std::cout << "segments: " << split.size() << "\n";
    for (std::size_t a = 0; a < scores.size(); ++a) {
        std::cout << attr_name(ckpt.params.config.output_attrs[a]) << " CCC: " << scores[a]
                  << "\n";
    }
    return 0;
}

int cmd_gradcheck(const std::string& variant_flag) {
    std::vector<Variant> variants;
    if (variant_flag == "all") {
        variants = {Variant::autoencoder, Variant::stl, Variant::mtl, Variant::ladder_stl,
                    Variant::ladder_mtl};
    } else {
        variants = {variant_from_name(variant_flag)};
    }
    bool ok = true;
    for (Variant v : variants) {
        const GradCheckReport rep = variant_grad_check(v, 7, {5, 3}, 4, 20240601 + static_cast<std::uint64_t>(v));
        const bool pass = rep.max_rel_error < 1e-4;
        ok = ok && pass;
        std::printf("%-12s max rel err %.3e  %s%s%s\n", variant_name(v).c_str(),
                    rep.max_rel_error, pass ? "ok" : "FAIL (worst: ",
                    pass ? "" : rep.worst.c_str(), pass ? "" : ")");
    }
    return ok ? 0 : 1;
}

int cmd_report(const std::vector<std::string>& summary_paths, const std::string& out_path,
               const std::string& csv_path) {
    std::vector<RunSummary> summaries;
    for (const std::string& p : summary_paths) summaries.push_back(load_run_summary(p));
    const std::string text = render_report(summaries);
    std::cout << text;
    if (!out_path.empty()) write_text_file(out_path, text);
    if (!csv_path.empty()) write_text_file(csv_path, render_report_delimited(summaries));
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Emotion-attribute regression with ladder networks"};
    app.require_subcommand(1);

    std::string spec_path, out_dir = "data";
    CLI::App* synth = app.add_subcommand("synth-data", "Generate a synthetic corpus");
    synth->add_option("--spec", spec_path, "Synthetic spec file (key = value text)")->required();
    synth->add_option("--out-dir", out_dir, "Output directory");

    std::string config_path, train_out;
    std::vector<std::uint64_t> seeds;
    CLI::App* train = app.add_subcommand("train", "Run the training protocol for one config");
    train->add_option("--config", config_path, "Run config JSON")->required();
    train->add_option("--out", train_out, "Output directory (overrides config)");
    train->add_option("--seeds", seeds, "Seed list (overrides config)")->delimiter(',');

    std::string ckpt_path, eval_features, eval_labels;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a labeled table");
    evaluate->add_option("--checkpoint", ckpt_path, "Checkpoint file")->required();
    evaluate->add_option("--features", eval_features, "Features file")->required();
    evaluate->add_option("--labels", eval_labels, "Labels file")->required();

    std::string variant = "all";
    CLI::App* gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient check");
    gradcheck->add_option("--variant", variant, "autoencoder|stl|mtl|ladder_stl|ladder_mtl|all");

    std::vector<std::string> summary_paths;
    std::string report_out, report_csv;
    CLI::App* report = app.add_subcommand("report", "Comparison table from run summaries");
    report->add_option("summaries", summary_paths, "summary.json files")->required();
    report->add_option("--out", report_out, "Write the table here");
    report->add_option("--csv", report_csv, "Write the delimited form here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return cmd_synth_data(spec_path, out_dir);
        if (train->parsed()) return cmd_train(config_path, train_out, seeds);
        if (evaluate->parsed()) return cmd_evaluate(ckpt_path, eval_features, eval_labels);
        if (gradcheck->parsed()) return cmd_gradcheck(variant);
        if (report->parsed()) return cmd_report(summary_paths, report_out, report_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
