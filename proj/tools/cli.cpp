#include "cli.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

#include "aquaclear/error.hpp"
#include "aquaclear/pipeline.hpp"

namespace aquaclear::cli {

namespace {

struct Args {
    std::string config;
    std::string input;
    std::string output;
    std::string reference;
    std::string labels;
    std::string scores;
    std::string method;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    bool verbose = false;
};

void add_common(CLI::App& cmd, Args& a) {
    cmd.add_option("--config", a.config, "JSON configuration file");
    cmd.add_option("--output", a.output, "Output directory (defaults to output_dir from the config)");
    cmd.add_option("--seed", a.seed, "Seed for splitting, augmentation and weight initialization");
    cmd.add_option("--threads", a.threads, "Worker threads")->check(CLI::PositiveNumber);
    cmd.add_flag("--verbose", a.verbose, "Write per-step diagnostics");
}

int exit_for(const Error& e) {
    switch (e.code()) {
        case Errc::MissingWeights: return pipeline::kExitMissingWeights;
        case Errc::ParseError:
        case Errc::CorruptBlob:
        case Errc::ShapeMismatchInManifest:
        case Errc::EmptyDataset:
        case Errc::EmptyBatch: return pipeline::kExitEmptyOrParse;
        case Errc::IoFailure: return 1;
        default: return pipeline::kExitBadParameters;
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& log) {
    CLI::App app{"Underwater image degradation analysis and enhancement", "aquaclear"};
    app.require_subcommand(1);
    Args a;

    auto* classify = app.add_subcommand("classify", "Label images with degradation flags and categories");
    auto* enhance = app.add_subcommand("enhance", "Enhance images according to their degradation");
    auto* evaluate = app.add_subcommand("evaluate", "Score images with PSNR, UCIQE and UIQM");
    auto* split = app.add_subcommand("split", "Assign files to train/val/test buckets");
    auto* augment = app.add_subcommand("augment", "Write randomly cropped and colour-jittered copies");
    auto* report = app.add_subcommand("report", "Combine labels and scores into one report");

    for (auto* cmd : {classify, enhance, evaluate, split, augment, report}) add_common(*cmd, a);
    for (auto* cmd : {classify, enhance, evaluate, split, augment}) {
        cmd->add_option("--input", a.input, "Input directory")->required();
    }
    enhance->add_option("--method", a.method, "classic, vgg, resnet or unite")
        ->check(CLI::IsMember({"classic", "vgg", "resnet", "unite"}));
    evaluate->add_option("--reference", a.reference, "Directory of reference images named <id>.ppm");
    report->add_option("--labels", a.labels, "labels.csv from classify")->required();
    report->add_option("--scores", a.scores, "scores.csv from evaluate")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, log, log);
        return code == 0 ? 0 : pipeline::kExitEmptyOrParse;
    }

    pipeline::PipelineConfig config;
    try {
        if (!a.config.empty()) config = pipeline::load_config(a.config);
        if (a.seed) {
            config.seed = *a.seed;
            config.neural.seed = *a.seed;
        }
        if (a.threads) config.threads = *a.threads;
        if (!a.method.empty()) config.neural.method = *pipeline::parse_method(a.method);
        if (a.verbose) config.verbose = true;
        config.validate();
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return e.code() == Errc::ParseError || e.code() == Errc::IoFailure ? pipeline::kExitEmptyOrParse
                                                                           : pipeline::kExitBadParameters;
    }

    pipeline::CommandOptions opts;
    opts.input = a.input;
    opts.output = a.output.empty() ? config.output_dir : std::filesystem::path(a.output);
    if (!a.reference.empty()) opts.reference = a.reference;
    opts.labels = a.labels;
    opts.scores = a.scores;

    try {
        if (*classify) return pipeline::cmd_classify(config, opts, log);
        if (*enhance) return pipeline::cmd_enhance(config, opts, log);
        if (*evaluate) return pipeline::cmd_evaluate(config, opts, log);
        if (*split) return pipeline::cmd_split(config, opts, log);
        if (*augment) return pipeline::cmd_augment(config, opts, log);
        return pipeline::cmd_report(config, opts, log);
    } catch (const Error& e) {
        log << "error: " << e.what() << "\n";
        return exit_for(e);
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace aquaclear::cli
