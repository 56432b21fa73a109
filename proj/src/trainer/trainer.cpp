#include "lgan/trainer.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "lgan/losses.hpp"
#include "lgan/nn/optimizer.hpp"
#include "lgan/report.hpp"

namespace lgan::trainer {

using critic::CriticVariant;
using nn::NetworkState;

namespace {

constexpr const char* kBaseline = "baseline-unet";

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::string fmt_g(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string join(const std::vector<int>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
    std::vector<int> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const std::string t = trim(item);
            out.push_back(std::stoi(t, &used));
            if (used != t.size()) throw std::invalid_argument(t);
        } catch (const std::exception&) {
            throw SpecError("config key '" + key + "' expects a comma-separated integer list, got '" + value + "'");
        }
    }
    if (out.empty()) throw SpecError("config key '" + key + "' is empty");
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        T v;
        if constexpr (std::is_same_v<T, double>) {
            v = std::stod(value, &used);
        } else if constexpr (std::is_same_v<T, std::uint64_t>) {
            v = std::stoull(value, &used);
        } else {
            v = std::stoi(value, &used);
        }
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw SpecError("config key '" + key + "' has invalid value '" + value + "'");
    }
}

}  // namespace

std::string variant_option_list() {
    std::string s = kBaseline;
    for (auto v : critic::kAllVariants) s += "|" + std::string(critic::short_name(v));
    return s;
}

std::optional<CriticVariant> parse_model(const std::string& name) {
    if (name == kBaseline) return std::nullopt;
    auto v = critic::parse_variant(name);
    if (!v) throw SpecError("invalid variant '" + name + "'; expected one of " + variant_option_list());
    return v;
}

void TrainConfig::validate() const {
    if (batch_size < 1) throw SpecError("batch_size must be >= 1");
    if (!(lr > 0.0) || !(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || weight_decay < 0.0) {
        throw SpecError("optimizer rates must be positive and betas in [0,1)");
    }
    if (n_critic < 1) throw SpecError("n_critic must be >= 1");
    if (!(clip_c > 0.0)) throw SpecError("clip_c must be positive");
    if (epochs < 1) throw SpecError("epochs must be >= 1");
    if (eval_every < 0 || max_steps < 0) throw SpecError("eval_every and max_steps must be >= 0");
    if (!(threshold > 0.0 && threshold < 1.0)) throw SpecError("threshold must lie in (0,1)");
    generator_spec().validate();
    if (variant) critic_spec().validate();
}

std::string TrainConfig::model_name() const {
    return variant ? std::string(critic::display_name(*variant)) : std::string("Benchmark");
}

generator::GeneratorSpec TrainConfig::generator_spec() const {
    generator::GeneratorSpec s;
    s.input_size = image_size;
    s.depth = depth;
    s.base_channels = generator_channels.empty() ? 16 : generator_channels.front();
    s.channel_schedule = generator_channels;
    s.init_std = init_std;
    return s;
}

critic::CriticSpec TrainConfig::critic_spec() const {
    critic::CriticSpec s = critic::CriticSpec::desk_scale(variant.value_or(CriticVariant::Basic), image_size);
    s.channel_schedule = critic_channels;
    s.fc_widths = {critic_fc_width, 1};
    s.init_std = init_std;
    return s;
}

std::string TrainConfig::to_text() const {
    std::ostringstream o;
    o << "variant = " << (variant ? std::string(critic::short_name(*variant)) : kBaseline) << '\n'
      << "batch_size = " << batch_size << '\n'
      << "lr = " << fmt_g(lr) << '\n'
      << "beta1 = " << fmt_g(beta1) << '\n'
      << "beta2 = " << fmt_g(beta2) << '\n'
      << "weight_decay = " << fmt_g(weight_decay) << '\n'
      << "n_critic = " << n_critic << '\n'
      << "clip_c = " << fmt_g(clip_c) << '\n'
      << "epochs = " << epochs << '\n'
      << "seed = " << seed << '\n'
      << "image_size = " << image_size << '\n'
      << "depth = " << depth << '\n'
      << "generator_channels = " << join(generator_channels) << '\n'
      << "critic_channels = " << join(critic_channels) << '\n'
      << "critic_fc_width = " << critic_fc_width << '\n'
      << "init_std = " << fmt_g(init_std) << '\n'
      << "eval_every = " << eval_every << '\n'
      << "max_steps = " << max_steps << '\n'
      << "threshold = " << fmt_g(threshold) << '\n';
    return o.str();
}

void TrainConfig::set(const std::string& key, const std::string& value) {
    if (key == "variant") {
        variant = parse_model(value);
    } else if (key == "batch_size" || key == "batch") {
        batch_size = parse_number<int>(key, value);
    } else if (key == "lr") {
        lr = parse_number<double>(key, value);
    } else if (key == "beta1" || key == "momentum") {
        beta1 = parse_number<double>(key, value);
    } else if (key == "beta2") {
        beta2 = parse_number<double>(key, value);
    } else if (key == "weight_decay" || key == "wd") {
        weight_decay = parse_number<double>(key, value);
    } else if (key == "n_critic") {
        n_critic = parse_number<int>(key, value);
    } else if (key == "clip_c") {
        clip_c = parse_number<double>(key, value);
    } else if (key == "epochs") {
        epochs = parse_number<int>(key, value);
    } else if (key == "seed") {
        seed = parse_number<std::uint64_t>(key, value);
    } else if (key == "image_size") {
        image_size = parse_number<int>(key, value);
    } else if (key == "depth") {
        depth = parse_number<int>(key, value);
    } else if (key == "generator_channels") {
        generator_channels = parse_int_list(key, value);
    } else if (key == "critic_channels") {
        critic_channels = parse_int_list(key, value);
    } else if (key == "critic_fc_width") {
        critic_fc_width = parse_number<int>(key, value);
    } else if (key == "init_std") {
        init_std = parse_number<double>(key, value);
    } else if (key == "eval_every") {
        eval_every = parse_number<int>(key, value);
    } else if (key == "max_steps") {
        max_steps = parse_number<int>(key, value);
    } else if (key == "threshold") {
        threshold = parse_number<double>(key, value);
    } else {
        throw SpecError("unknown config key '" + key + "'");
    }
}

void TrainConfig::apply_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw SpecError("config line " + std::to_string(line_no) + ": expected key = value");
        }
        set(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
}

std::string TrainConfig::header() const {
    std::ostringstream o;
    o << "model=" << model_name() << " lr=" << fmt_g(lr) << " batch=" << batch_size << " beta1=" << fmt_g(beta1)
      << " beta2=" << fmt_g(beta2) << " wd=" << fmt_g(weight_decay) << " n_critic=" << n_critic
      << " clip_c=" << fmt_g(clip_c) << " epochs=" << epochs << " seed=" << seed << " image_size=" << image_size
      << " depth=" << depth;
    return o.str();
}

std::string format_log_line(const TrainLogRecord& r) {
    using report::format_real;
    std::string s = std::to_string(r.step) + "\t" + format_real(r.g_total) + "\t" + format_real(r.g_bce) + "\t" +
                    format_real(r.g_adv) + "\t" + format_real(r.d_loss);
    if (r.eval) {
        s += "\t" + format_real(r.eval->iou) + "\t" + format_real(r.eval->dice) + "\t" +
             (r.eval->hausdorff ? format_real(*r.eval->hausdorff) : "NA");
    }
    return s;
}

std::vector<BinaryMask> predict(const NetworkState& generator, const std::vector<LabeledSlice>& slices,
                                double threshold) {
    constexpr std::size_t kChunk = 16;
    std::vector<BinaryMask> out;
    out.reserve(slices.size());
    for (std::size_t start = 0; start < slices.size(); start += kChunk) {
        const std::size_t end = std::min(slices.size(), start + kChunk);
        std::vector<GrayImage> images;
        for (std::size_t i = start; i < end; ++i) images.push_back(slices[i].image);
        const Tensor probs = generator::forward(generator, to_tensor(std::span<const GrayImage>(images)));
        for (std::size_t i = start; i < end; ++i) {
            out.push_back(binarize(prob_from_tensor(probs, static_cast<int>(i - start)), threshold));
        }
    }
    return out;
}

metrics::MetricReport evaluate_predictions(const std::string& model, const std::vector<LabeledSlice>& slices,
                                           const std::vector<BinaryMask>& predictions) {
    if (slices.size() != predictions.size()) throw ShapeError("prediction count does not match slice count");
    if (slices.empty()) throw EmptyReport("evaluation split is empty");
    std::vector<metrics::SliceMetrics> rows;
    std::vector<LabeledSlice> predicted_slices;
    for (std::size_t i = 0; i < slices.size(); ++i) {
        const auto& s = slices[i];
        if (!predictions[i].same_shape(s.mask)) {
            throw ShapeError("prediction for " + s.scan_id + "/" + std::to_string(s.slice_index) +
                             " does not match its mask size");
        }
        rows.push_back(metrics::evaluate_slice(s.scan_id, s.slice_index, predictions[i], s.mask));
        predicted_slices.push_back({s.scan_id, s.slice_index, s.image, predictions[i]});
    }
    const auto truth_scans = group_scans(slices);
    const auto pred_scans = group_scans(predicted_slices);
    std::vector<metrics::ScanDice> scans;
    for (std::size_t k = 0; k < truth_scans.size(); ++k) {
        std::vector<BinaryMask> p;
        std::vector<BinaryMask> t;
        for (const auto& s : pred_scans[k].slices) p.push_back(s.mask);
        for (const auto& s : truth_scans[k].slices) t.push_back(s.mask);
        scans.push_back({truth_scans[k].scan_id, metrics::dice_3d(p, t)});
    }
    return metrics::aggregate(model, std::move(rows), std::move(scans));
}

metrics::MetricReport evaluate_checkpoint(const NetworkState& generator, const DatasetManifest& data,
                                          const std::string& model, double threshold) {
    const auto spec = generator::spec_of(generator);
    const auto test = load_slices(data, Split::Test, spec.input_size);
    if (test.empty()) throw EmptyReport("manifest has no test split");
    return evaluate_predictions(model, test, predict(generator, test, threshold));
}

namespace {

void check_finite(double v, const char* what, long step) {
    if (!std::isfinite(v)) {
        throw NonFiniteLoss(std::string(what) + " became non-finite at generator step " + std::to_string(step));
    }
}

struct BatchTensors {
    Tensor images;
    Tensor masks;
};

BatchTensors gather(const std::vector<LabeledSlice>& data, std::span<const std::size_t> idx) {
    std::vector<GrayImage> images;
    std::vector<BinaryMask> masks;
    for (std::size_t i : idx) {
        images.push_back(data[i].image);
        masks.push_back(data[i].mask);
    }
    return {to_tensor(std::span<const GrayImage>(images)), to_tensor(std::span<const BinaryMask>(masks))};
}

EvalSummary summarize_eval(const metrics::MetricReport& r) {
    EvalSummary e{r.iou.mean, r.dice.mean, std::nullopt};
    if (r.hausdorff) e.hausdorff = r.hausdorff->mean;
    return e;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const std::vector<LabeledSlice>& train_set,
                  const std::vector<LabeledSlice>& test_set, const TrainHooks& hooks) {
    cfg.validate();
    if (train_set.empty()) throw ManifestError("training split is empty");
    const auto batches_per_epoch = train_set.size() / static_cast<std::size_t>(cfg.batch_size);
    if (batches_per_epoch == 0) {
        throw ManifestError("training split (" + std::to_string(train_set.size()) + " slices) is smaller than batch_size " +
                            std::to_string(cfg.batch_size));
    }
    for (const auto& s : train_set) {
        if (!s.image.same_shape(cfg.image_size, cfg.image_size)) {
            throw ShapeError("training slices must be " + std::to_string(cfg.image_size) + " pixels square");
        }
    }

    Rng master(cfg.seed);
    const std::uint64_t gen_seed = master.next();
    const std::uint64_t critic_seed = master.next();
    Rng order_rng(master.next());

    TrainResult result;
    result.generator = generator::build_generator(cfg.generator_spec(), gen_seed);
    if (cfg.variant) result.critic = critic::build_critic(cfg.critic_spec(), critic_seed);

    nn::AdamConfig adam{cfg.lr, cfg.beta1, cfg.beta2, 1e-8, cfg.weight_decay};
    nn::Adam gen_opt(result.generator, adam);
    std::optional<nn::Adam> critic_opt;
    if (result.critic) critic_opt.emplace(*result.critic, adam);
    const losses::ClipConfig clip{cfg.clip_c};

    const long total_steps = [&] {
        long s = static_cast<long>(batches_per_epoch) * cfg.epochs;
        return cfg.max_steps > 0 ? std::min<long>(s, cfg.max_steps) : s;
    }();
    const auto start = std::chrono::steady_clock::now();
    std::vector<std::size_t> order(train_set.size());

    long step = 0;
    for (int epoch = 0; epoch < cfg.epochs && step < total_steps; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        order_rng.shuffle(std::span<std::size_t>(order));
        for (std::size_t b = 0; b < batches_per_epoch && step < total_steps; ++b) {
            const auto idx = std::span<const std::size_t>(order).subspan(b * cfg.batch_size, cfg.batch_size);
            const BatchTensors batch = gather(train_set, idx);
            TrainLogRecord rec;
            rec.step = step + 1;

            // The generator is fixed during the critic phase, so one forward
            // pass serves all n_critic updates and the generator step.
            generator::GeneratorTape tape;
            const Tensor generated = generator::forward(result.generator, batch.images, &tape);
            if (result.critic) {
                const losses::Batch lb{generated, batch.masks, batch.images};
                for (int k = 0; k < cfg.n_critic; ++k) {
                    auto cl = losses::critic_loss_with_grad(*result.critic, lb);
                    check_finite(cl.loss.value, "critic loss", rec.step);
                    critic_opt->step_inplace(*result.critic, cl.dparams);
                    losses::clip_parameters_inplace(*result.critic, clip);
                    ++result.critic_updates;
                    rec.d_loss = cl.loss.value;
                    if (hooks.after_critic_step) hooks.after_critic_step(*result.critic);
                }
            }

            Tensor dgenerated;
            if (result.critic) {
                auto gl = losses::generator_loss_with_grad(*result.critic, {generated, batch.masks, batch.images});
                rec.g_total = gl.loss.value;
                rec.g_bce = gl.loss.component("bce");
                rec.g_adv = gl.loss.component("adversarial");
                dgenerated = std::move(gl.dgenerated);
            } else {
                rec.g_bce = losses::bce(generated, batch.masks).value;
                rec.g_total = rec.g_bce;
                dgenerated = losses::bce_gradient(generated, batch.masks);
            }
            check_finite(rec.g_total, "generator loss", rec.step);
            gen_opt.step_inplace(result.generator, generator::backward(result.generator, tape, dgenerated));
            if (!nn::all_finite(result.generator)) {
                throw NonFiniteLoss("generator parameters became non-finite at step " + std::to_string(rec.step));
            }
            ++result.generator_updates;
            ++step;

            const bool last = step == total_steps;
            if (!test_set.empty() && (last || (cfg.eval_every > 0 && step % cfg.eval_every == 0))) {
                auto report = evaluate_predictions(cfg.model_name(), test_set,
                                                   predict(result.generator, test_set, cfg.threshold));
                rec.eval = summarize_eval(report);
                if (last) result.final_report = std::move(report);
            }
            rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            if (hooks.on_record) hooks.on_record(rec);
            result.log.push_back(rec);
        }
    }
    return result;
}

TrainResult train(const TrainConfig& cfg, const DatasetManifest& data, const std::filesystem::path& out_dir,
                  const TrainHooks& hooks) {
    cfg.validate();
    const auto train_set = load_slices(data, Split::Train, cfg.image_size);
    const auto test_set = load_slices(data, Split::Test, cfg.image_size);
    if (train_set.empty()) throw ManifestError("manifest has an empty train split");

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "checkpoints", ec);
    if (ec) throw IOError("cannot create run directory " + out_dir.string() + ": " + ec.message());
    {
        std::ofstream echo(out_dir / "config.echo", std::ios::trunc);
        if (!echo) throw IOError("cannot write " + (out_dir / "config.echo").string());
        echo << cfg.to_text();
    }
    std::ofstream log(out_dir / "train.log", std::ios::trunc);
    if (!log) throw IOError("cannot write " + (out_dir / "train.log").string());
    log << "# " << cfg.header() << '\n' << "# step\tg_total\tg_bce\tg_adv\td_loss\tiou\tdice\thausdorff\n";

    TrainHooks wrapped = hooks;
    wrapped.on_record = [&](const TrainLogRecord& r) {
        log << format_log_line(r) << '\n';
        log.flush();
        if (hooks.on_record) hooks.on_record(r);
    };
    TrainResult result = train(cfg, train_set, test_set, wrapped);

    const nlohmann::json extra{{"model", cfg.model_name()}, {"threshold", cfg.threshold}};
    nn::save_checkpoint(out_dir / "checkpoints" / "generator.ckpt", result.generator, extra);
    if (result.critic) nn::save_checkpoint(out_dir / "checkpoints" / "critic.ckpt", *result.critic, extra);
    if (result.final_report) {
        report::write_report(out_dir / "report.tsv", *result.final_report);
        std::ofstream table(out_dir / "table.txt", std::ios::trunc);
        table << report::comparison_table({*result.final_report}) << '\n'
              << report::dice_3d_table({*result.final_report});
    }
    return result;
}

}  // namespace lgan::trainer
