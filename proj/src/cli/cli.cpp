#include "lgan/cli.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "lgan/generator.hpp"
#include "lgan/manifest.hpp"
#include "lgan/phantom.hpp"
#include "lgan/png_io.hpp"
#include "lgan/report.hpp"
#include "lgan/trainer.hpp"

namespace lgan::cli {

namespace fs = std::filesystem;

namespace {

struct PhantomArgs {
    phantom::PhantomConfig cfg;
    std::string out;
};

struct TrainArgs {
    std::string config;
    std::string variant;
    std::string data;
    std::string out;
    std::vector<std::string> overrides;  // "key=value"
};

struct EvalArgs {
    std::string checkpoint;
    std::string data;
    std::string out;
    std::string stub;
    std::string model;
    double threshold = kDefaultThreshold;
};

struct SegmentArgs {
    std::string checkpoint;
    std::string image;
    std::string out;
    double threshold = kDefaultThreshold;
};

struct CompareArgs {
    std::vector<std::string> runs;
    std::string out;
};

struct InspectArgs {
    std::string checkpoint;
    std::string image;
    std::string out;
};

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    if (!in) throw IOError("cannot read " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
    fs::path tmp = p;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IOError("cannot write " + p.string());
        out << text;
    }
    fs::rename(tmp, p);
}

int cmd_phantom(const PhantomArgs& a) {
    const auto manifest = phantom::generate(a.cfg, a.out);
    std::cout << "wrote " << manifest.entries.size() << " slices (" << manifest.count(Split::Train) << " train, "
              << manifest.count(Split::Test) << " test) to " << (fs::path(a.out) / "manifest.tsv").string() << '\n';
    return kExitOk;
}

int cmd_train(const TrainArgs& a) {
    trainer::TrainConfig cfg;
    if (!a.config.empty()) cfg.apply_text(read_text(a.config));
    for (const auto& kv : a.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw SpecError("--set expects key=value, got '" + kv + "'");
        cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!a.variant.empty()) cfg.variant = trainer::parse_model(a.variant);
    cfg.validate();
    std::cout << cfg.header() << '\n';
    const auto data = load_manifest(a.data);
    const auto result = trainer::train(cfg, data, a.out, {[](const nn::NetworkState&) {},
                                                          [](const trainer::TrainLogRecord& r) {
                                                              if (r.eval) {
                                                                  std::cout << "step " << r.step << " iou "
                                                                            << r.eval->iou << " ("
                                                                            << r.wall_seconds << " s)\n";
                                                              }
                                                          }});
    std::cout << "generator updates " << result.generator_updates << ", critic updates " << result.critic_updates
              << "; run directory " << a.out << '\n';
    return kExitOk;
}

int cmd_eval(const EvalArgs& a) {
    const auto data = load_manifest(a.data);
    metrics::MetricReport report;
    if (!a.stub.empty()) {
        // Test hooks: score the ground truth itself or an all-background mask.
        const auto test = load_slices(data, Split::Test);
        std::vector<BinaryMask> predictions;
        for (const auto& s : test) {
            predictions.push_back(a.stub == "perfect" ? s.mask : BinaryMask::zeros(s.mask.height(), s.mask.width()));
        }
        report = trainer::evaluate_predictions(a.model.empty() ? "stub-" + a.stub : a.model, test, predictions);
    } else {
        nlohmann::json extra;
        const auto gen = nn::load_checkpoint(a.checkpoint, &extra);
        const std::string model = !a.model.empty() ? a.model : extra.value("model", std::string("generator"));
        report = trainer::evaluate_checkpoint(gen, data, model, a.threshold);
    }
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw IOError("cannot create " + a.out + ": " + ec.message());
    report::write_report(fs::path(a.out) / "report.tsv", report);
    const std::string table = report::comparison_table({report}) + "\n" + report::dice_3d_table({report});
    write_text(fs::path(a.out) / "table.txt", table);
    std::cout << table;
    return kExitOk;
}

int cmd_segment(const SegmentArgs& a) {
    if (!(a.threshold > 0.0 && a.threshold < 1.0)) throw SpecError("--threshold must lie in (0,1)");
    const auto gen = nn::load_checkpoint(a.checkpoint);
    const auto spec = generator::spec_of(gen);
    const GrayImage original = load_gray_png(a.image);
    const GrayImage input = resample_bilinear(original, spec.input_size, spec.input_size);
    const BinaryMask mask = binarize(generator::forward(gen, input), a.threshold);
    save_mask_png(a.out, resample_nearest(mask, original.height(), original.width()));
    std::cout << "wrote " << original.height() << "x" << original.width() << " mask to " << a.out << '\n';
    return kExitOk;
}

int cmd_compare(const CompareArgs& a) {
    std::vector<metrics::MetricReport> reports;
    for (const auto& dir : a.runs) {
        const fs::path p = fs::path(dir) / "report.tsv";
        if (!fs::is_regular_file(p)) throw IOError("run directory " + dir + " has no report.tsv");
        reports.push_back(report::read_report(p));
    }
    const std::string table = report::comparison_table(reports) + "\n" + report::dice_3d_table(reports);
    if (!a.out.empty()) write_text(a.out, table);
    std::cout << table;
    return kExitOk;
}

int cmd_inspect(const InspectArgs& a) {
    const auto gen = nn::load_checkpoint(a.checkpoint);
    const auto spec = generator::spec_of(gen);
    const GrayImage input = resample_bilinear(load_gray_png(a.image), spec.input_size, spec.input_size);
    std::error_code ec;
    fs::create_directories(a.out, ec);
    if (ec) throw IOError("cannot create " + a.out + ": " + ec.message());
    const auto maps = generator::capture_activations(gen, input);
    save_gray_png(fs::path(a.out) / "input.png", input);
    for (std::size_t i = 0; i < maps.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "layer_%02zu_%s.png", i + 1, maps[i].layer.c_str());
        save_gray_png(fs::path(a.out) / name, maps[i].map);
    }
    save_mask_png(fs::path(a.out) / "mask.png", binarize(generator::forward(gen, input)));
    std::cout << "wrote " << maps.size() << " activation maps to " << a.out << '\n';
    return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"Adversarial lung segmentation: phantom data, training, evaluation and inspection", "lgan"};
    app.require_subcommand(1);

    PhantomArgs phantom_args;
    auto* phantom_cmd = app.add_subcommand("phantom-gen", "Generate a synthetic lung phantom dataset");
    phantom_cmd->add_option("--seed", phantom_args.cfg.seed, "Random seed")->required();
    phantom_cmd->add_option("--count", phantom_args.cfg.count, "Number of slices")->required()->check(CLI::PositiveNumber);
    phantom_cmd->add_option("--size", phantom_args.cfg.size, "Slice size in pixels")->required()->check(CLI::Range(32, 4096));
    phantom_cmd->add_option("--out", phantom_args.out, "Output directory")->required();
    phantom_cmd->add_option("--noise", phantom_args.cfg.noise_sigma, "Gaussian noise sigma")->check(CLI::Range(0.0, 0.5));
    phantom_cmd->add_option("--slices-per-scan", phantom_args.cfg.slices_per_scan, "Slices grouped per scan id")
        ->check(CLI::PositiveNumber);
    phantom_cmd->add_option("--test-fraction", phantom_args.cfg.test_fraction, "Fraction of scans held out")
        ->check(CLI::Range(0.0, 0.99));

    TrainArgs train_args;
    auto* train_cmd = app.add_subcommand("train", "Train a generator (and critic) on a manifest");
    train_cmd->add_option("--config", train_args.config, "Flat key = value config file")->check(CLI::ExistingFile);
    train_cmd->add_option("--variant", train_args.variant, trainer::variant_option_list());
    train_cmd->add_option("--data", train_args.data, "Dataset manifest")->required();
    train_cmd->add_option("--out", train_args.out, "Run directory")->required();
    train_cmd->add_option("--set", train_args.overrides, "Config override key=value (repeatable)");
    // Common overrides as first-class flags; they win over the config file.
    struct Flag {
        const char* flag;
        const char* key;
        std::string value;
    };
    auto flags = std::make_shared<std::vector<Flag>>(std::vector<Flag>{{"--epochs", "epochs", {}},
                                                                       {"--batch", "batch_size", {}},
                                                                       {"--lr", "lr", {}},
                                                                       {"--seed", "seed", {}},
                                                                       {"--n-critic", "n_critic", {}},
                                                                       {"--clip", "clip_c", {}},
                                                                       {"--image-size", "image_size", {}},
                                                                       {"--depth", "depth", {}},
                                                                       {"--eval-every", "eval_every", {}},
                                                                       {"--max-steps", "max_steps", {}}});
    for (auto& f : *flags) train_cmd->add_option(f.flag, f.value, std::string("Override ") + f.key);

    EvalArgs eval_args;
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a generator checkpoint on the test split");
    auto* ckpt_opt = eval_cmd->add_option("--checkpoint", eval_args.checkpoint, "Generator checkpoint");
    eval_cmd->add_option("--data", eval_args.data, "Dataset manifest")->required();
    eval_cmd->add_option("--out", eval_args.out, "Output directory for report.tsv and table.txt")->required();
    auto* stub_opt = eval_cmd->add_option("--stub", eval_args.stub, "Test hook: score 'perfect' or 'empty' predictions")
                         ->check(CLI::IsMember({"perfect", "empty"}));
    eval_cmd->add_option("--model", eval_args.model, "Model name for the report");
    eval_cmd->add_option("--threshold", eval_args.threshold, "Binarisation threshold")->check(CLI::Range(0.0, 1.0));
    ckpt_opt->excludes(stub_opt);

    SegmentArgs seg_args;
    auto* seg_cmd = app.add_subcommand("segment", "Segment one image");
    seg_cmd->add_option("--checkpoint", seg_args.checkpoint, "Generator checkpoint")->required();
    seg_cmd->add_option("--image", seg_args.image, "Input PNG")->required();
    seg_cmd->add_option("--out", seg_args.out, "Output mask PNG")->required();
    seg_cmd->add_option("--threshold", seg_args.threshold, "Binarisation threshold");

    CompareArgs cmp_args;
    auto* cmp_cmd = app.add_subcommand("compare", "Tabulate reports of several runs");
    cmp_cmd->add_option("--runs", cmp_args.runs, "Run directories containing report.tsv")->required()->expected(1, -1);
    cmp_cmd->add_option("--out", cmp_args.out, "Also write the table to this file");

    InspectArgs insp_args;
    auto* insp_cmd = app.add_subcommand("inspect", "Export representative activation maps");
    insp_cmd->add_option("--checkpoint", insp_args.checkpoint, "Generator checkpoint")->required();
    insp_cmd->add_option("--image", insp_args.image, "Input PNG")->required();
    insp_cmd->add_option("--out", insp_args.out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    }

    try {
        if (*phantom_cmd) return cmd_phantom(phantom_args);
        if (*train_cmd) {
            for (const auto& f : *flags) {
                if (!f.value.empty()) train_args.overrides.push_back(std::string(f.key) + "=" + f.value);
            }
            return cmd_train(train_args);
        }
        if (*eval_cmd) {
            if (eval_args.stub.empty() && eval_args.checkpoint.empty()) {
                throw SpecError("eval requires --checkpoint (or --stub)");
            }
            return cmd_eval(eval_args);
        }
        if (*seg_cmd) return cmd_segment(seg_args);
        if (*cmp_cmd) return cmd_compare(cmp_args);
        if (*insp_cmd) return cmd_inspect(insp_args);
    } catch (const UserError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUser;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
    return kExitInternal;
}

int run(const std::vector<std::string>& args) {
    std::vector<std::string> storage{"lgan"};
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage) argv.push_back(s.data());
    return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace lgan::cli
