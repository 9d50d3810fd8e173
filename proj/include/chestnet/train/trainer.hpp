#pragma once

#include <chrono>
#include <functional>
#include <optional>
#include <ostream>

#include "chestnet/core/parallel.hpp"
#include "chestnet/data/augment.hpp"
#include "chestnet/data/dataset.hpp"
#include "chestnet/metrics/report.hpp"
#include "chestnet/models/builders.hpp"
#include "chestnet/models/checkpoint.hpp"
#include "chestnet/models/finetune.hpp"
#include "chestnet/nn/loss.hpp"
#include "chestnet/nn/sgd.hpp"

namespace chestnet::train {

struct TrainConfig {
    std::string model = "paper-cnn"; // empty = take from the checkpoint
    std::filesystem::path data_root;
    int epochs = 1;
    std::size_t batch = 64;
    double lr = 0.001;
    double momentum = 0.0;
    std::uint64_t val_every = 20; // iterations between validation passes
    std::uint64_t seed = 0;
    double ratio = 0.8;
    std::optional<std::filesystem::path> manifest_path;
    data::AugmentConfig augment;
    std::size_t input_size = 0; // 0 = the builder's native size
    models::FineTuneMode fine_tune = models::FineTuneMode::none;
    std::optional<std::filesystem::path> init_checkpoint;
    std::filesystem::path out_checkpoint = "model.ckpt";

    void validate() const {
        if (epochs < 1) throw ValueError("epochs must be >= 1");
        if (batch < 1) throw ValueError("batch must be >= 1");
        if (!(lr > 0.0)) throw ValueError("learning rate must be > 0");
        if (val_every < 1) throw ValueError("validation frequency must be >= 1");
    }
};

struct ValidationEvent {
    std::uint64_t iteration = 0;
    double loss = 0.0;
    double accuracy = 0.0;
};

struct TrainHistory {
    std::vector<double> train_loss; // one entry per iteration
    std::vector<ValidationEvent> validations;
    double wall_seconds = 0.0; // in-memory only; the history file stays
                               // deterministic across identical runs
};

// Serialized history: everything except timing.
inline void write_history(const TrainHistory& h, const std::filesystem::path& path) {
    nlohmann::json j;
    j["train_loss"] = h.train_loss;
    auto vals = nlohmann::json::array();
    for (const ValidationEvent& v : h.validations)
        vals.push_back({{"iteration", v.iteration}, {"loss", v.loss}, {"accuracy", v.accuracy}});
    j["validations"] = vals;
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw DataError("cannot write history " + path.string());
    os << j.dump(2) << "\n";
}

// Loads one training batch into an NxCxHxW tensor. With augmentation the
// image is decoded at (input + margin) and randomly cropped back to the
// input size; per-sample randomness depends only on (seed, sample id,
// epoch), so worker scheduling cannot change the result.
inline std::pair<Tensor, std::vector<int>> assemble_batch(
    const data::Dataset& ds, std::span<const std::uint32_t> ids, const models::InputSpec& in,
    const data::AugmentConfig& aug, std::uint64_t epoch, bool train) {
    Tensor x({ids.size(), in.c, in.h, in.w});
    std::vector<int> y(ids.size(), 0);
    const bool use_aug = train && aug.enabled;
    const std::size_t load_h = use_aug ? in.h + aug.resize_margin : in.h;
    const std::size_t load_w = use_aug ? in.w + aug.resize_margin : in.w;
    const std::size_t plane = in.c * in.h * in.w;

    parallel_for(ids.size(), [&](std::size_t i) {
        Tensor img = data::load_image(ds.sample_path(ids[i]), in.c, load_h, load_w);
        if (use_aug) {
            data::AugmentConfig cfg = aug;
            cfg.crop = in.h;
            img = data::augment(img, ds.samples[ids[i]].class_id, cfg, ids[i], epoch).first;
        }
        std::copy(img.data(), img.data() + plane, x.data() + i * plane);
        y[i] = ds.samples[ids[i]].class_id;
    });
    return {std::move(x), std::move(y)};
}

struct EvalOptions {
    std::size_t batch = 32;
    bool center_crop = false; // decode oversized and center-crop, matching
                              // models trained with random crops
    std::size_t crop_margin = 32;
};

inline std::pair<Tensor, std::vector<int>> assemble_eval_batch(
    const data::Dataset& ds, std::span<const std::uint32_t> ids, const models::InputSpec& in,
    const EvalOptions& opt) {
    Tensor x({ids.size(), in.c, in.h, in.w});
    std::vector<int> y(ids.size(), 0);
    const std::size_t plane = in.c * in.h * in.w;
    parallel_for(ids.size(), [&](std::size_t i) {
        Tensor img;
        if (opt.center_crop) {
            img = data::load_image(ds.sample_path(ids[i]), in.c, in.h + opt.crop_margin,
                                   in.w + opt.crop_margin);
            img = data::center_crop(img, in.h);
        } else {
            img = data::load_image(ds.sample_path(ids[i]), in.c, in.h, in.w);
        }
        std::copy(img.data(), img.data() + plane, x.data() + i * plane);
        y[i] = ds.samples[ids[i]].class_id;
    });
    return {std::move(x), std::move(y)};
}

// Ties go to the lowest class id.
template <typename T>
int argmax_row(const TensorT<T>& logits, std::size_t row) {
    const std::size_t k = logits.dim(1);
    const T* p = logits.data() + row * k;
    int best = 0;
    for (std::size_t j = 1; j < k; ++j)
        if (p[j] > p[best]) best = static_cast<int>(j);
    return best;
}

// Eval-mode pass (dropout off) over the given sample ids.
inline metrics::EvalReport evaluate_model(models::Model<float>& model, const data::Dataset& ds,
                                          std::span<const std::uint32_t> ids,
                                          const EvalOptions& opt = {}) {
    if (ids.empty()) throw DataError("evaluate_model: no samples to evaluate");
    if (ds.class_count() != model.spec().classes)
        throw DataError("dataset has " + std::to_string(ds.class_count()) +
                        " classes but the model produces " + std::to_string(model.spec().classes));
    const auto start = std::chrono::steady_clock::now();

    metrics::ConfusionMatrix cm(model.spec().classes, ds.class_names);
    for (std::size_t i = 0; i < ids.size(); i += opt.batch) {
        const std::size_t hi = std::min(ids.size(), i + opt.batch);
        auto [x, y] = assemble_eval_batch(ds, ids.subspan(i, hi - i), model.spec().input, opt);
        const Tensor logits = model.forward(x, /*train=*/false);
        for (std::size_t r = 0; r < y.size(); ++r)
            cm.cell(static_cast<std::size_t>(y[r]),
                    static_cast<std::size_t>(argmax_row(logits, r)))++;
    }

    metrics::EvalReport report;
    report.model = model.spec().name;
    report.cm = cm;
    report.accuracy = metrics::accuracy(cm);
    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

struct EpochInfo {
    int epoch = 0;
    double mean_loss = 0.0;
    // Lazy eval-mode accuracy over the train side; cheap at toy scale.
    std::function<double()> train_accuracy;
};

struct TrainResult {
    models::ModelSpec spec;
    TrainHistory history;
    models::CheckpointMeta meta;
    std::filesystem::path checkpoint_path;
    std::filesystem::path history_path;
};

namespace detail {
// Stratified monitoring subset of the train side, max(1, floor(0.1 n)) per
// class; the subset is observed, not removed from the gradient set.
inline std::vector<std::uint32_t> validation_subset(const data::Dataset& ds,
                                                    const std::vector<std::uint32_t>& train_ids,
                                                    std::uint64_t seed) {
    std::vector<std::uint32_t> subset;
    for (std::size_t cid = 0; cid < ds.class_count(); ++cid) {
        std::vector<std::uint32_t> ids;
        for (std::uint32_t id : train_ids)
            if (ds.samples[id].class_id == static_cast<int>(cid)) ids.push_back(id);
        if (ids.empty()) continue;
        rng::Stream stream(rng::mix(seed, rng::label("val"), cid));
        stream.shuffle(ids);
        const std::size_t take = std::max<std::size_t>(1, ids.size() / 10);
        subset.insert(subset.end(), ids.begin(), ids.begin() + take);
    }
    std::sort(subset.begin(), subset.end());
    return subset;
}
} // namespace detail

// The full training pipeline: scan, split, build or load the model, run
// epochs of forward/loss/backward/step with the configured validation
// cadence, save checkpoint + history. Deterministic for a fixed config.
inline TrainResult run_training(const TrainConfig& cfg, std::ostream& log,
                                const std::function<bool(const EpochInfo&)>& after_epoch = {}) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();

    data::Dataset ds = data::scan_dataset(cfg.data_root);
    log << "[data] " << ds.samples.size() << " samples in " << ds.class_count() << " classes";
    if (ds.skipped_files) log << " (" << ds.skipped_files << " non-image files skipped)";
    log << "\n";

    data::SplitManifest manifest = cfg.manifest_path
                                       ? data::load_manifest(*cfg.manifest_path, ds)
                                       : data::split(ds, cfg.ratio, cfg.seed);
    log << "[split] train " << manifest.train_ids.size() << " / test " << manifest.test_ids.size()
        << "\n";

    // Build fresh or resume from a checkpoint (the transfer-learning path).
    models::Model<float> model;
    if (cfg.init_checkpoint) {
        models::LoadedCheckpoint loaded =
            cfg.model.empty()
                ? models::load_checkpoint(*cfg.init_checkpoint)
                : models::load_checkpoint_for(
                      models::build_model_spec(cfg.model, cfg.input_size, ds.class_count()),
                      *cfg.init_checkpoint);
        model = std::move(loaded.model);
        log << "[init] resumed from " << cfg.init_checkpoint->string() << "\n";
    } else {
        const std::string name = cfg.model.empty() ? "paper-cnn" : cfg.model;
        model = models::Model<float>::build(
            models::build_model_spec(name, cfg.input_size, ds.class_count()),
            rng::mix(cfg.seed, rng::label("model")));
    }
    if (model.spec().classes != ds.class_count())
        throw DataError("model produces " + std::to_string(model.spec().classes) +
                        " classes but the dataset has " + std::to_string(ds.class_count()));
    model.mutable_spec().class_names = ds.class_names;

    models::fine_tune_setup(model, cfg.fine_tune);
    auto params = model.params();
    nn::Sgd<float> sgd(nn::SgdConfig{cfg.lr, cfg.momentum});

    const std::vector<std::uint32_t> val_ids =
        detail::validation_subset(ds, manifest.train_ids, cfg.seed);

    data::AugmentConfig aug = cfg.augment;
    aug.seed = rng::mix(cfg.seed, rng::label("augment"));

    TrainHistory history;
    std::uint64_t iter = 0;
    int epochs_run = 0;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const auto plan =
            data::batch_plan(manifest.train_ids, cfg.batch, cfg.seed,
                             static_cast<std::uint64_t>(epoch), /*shuffle=*/true);
        double epoch_loss = 0.0;
        for (const auto& batch_ids : plan) {
            ++iter;
            auto [x, y] = assemble_batch(ds, batch_ids, model.spec().input, aug,
                                         static_cast<std::uint64_t>(epoch), /*train=*/true);
            const Tensor logits = model.forward(x, /*train=*/true);
            const auto loss = nn::softmax_cross_entropy<float>(logits, y);
            if (!std::isfinite(loss.loss))
                throw NumericError(iter, "non-finite training loss at iteration " +
                                             std::to_string(iter));
            model.backward(loss.grad_logits);
            sgd.step(params);
            model.zero_grads();
            history.train_loss.push_back(loss.loss);
            epoch_loss += loss.loss;
            log << "[train] epoch " << epoch << " iter " << iter << " loss " << loss.loss << "\n";

            if (iter % cfg.val_every == 0 && !val_ids.empty()) {
                double vloss = 0.0;
                std::uint64_t correct = 0;
                for (std::size_t i = 0; i < val_ids.size(); i += 32) {
                    const std::size_t hi = std::min(val_ids.size(), i + 32);
                    auto [vx, vy] = assemble_eval_batch(
                        ds, std::span(val_ids).subspan(i, hi - i), model.spec().input, {});
                    const Tensor vlogits = model.forward(vx, /*train=*/false);
                    vloss += nn::softmax_cross_entropy<float>(vlogits, vy).loss *
                             static_cast<double>(vy.size());
                    for (std::size_t r = 0; r < vy.size(); ++r)
                        if (argmax_row(vlogits, r) == vy[r]) ++correct;
                }
                vloss /= static_cast<double>(val_ids.size());
                const double vacc =
                    static_cast<double>(correct) / static_cast<double>(val_ids.size());
                history.validations.push_back({iter, vloss, vacc});
                log << "[val] iter " << iter << " loss " << vloss << " acc " << vacc << "\n";
            }
        }
        epochs_run = epoch;
        if (after_epoch) {
            EpochInfo info;
            info.epoch = epoch;
            info.mean_loss = epoch_loss / static_cast<double>(plan.size());
            info.train_accuracy = [&]() {
                return evaluate_model(model, ds, manifest.train_ids).accuracy;
            };
            if (after_epoch(info)) break;
        }
    }

    models::CheckpointMeta meta;
    meta.epochs = static_cast<std::uint32_t>(epochs_run);
    meta.seed = cfg.seed;
    meta.final_train_loss = history.train_loss.empty() ? 0.0 : history.train_loss.back();

    if (cfg.out_checkpoint.has_parent_path())
        std::filesystem::create_directories(cfg.out_checkpoint.parent_path());
    models::save_checkpoint(model, meta, cfg.out_checkpoint);
    const std::filesystem::path history_path = cfg.out_checkpoint.string() + ".history.json";
    write_history(history, history_path);

    history.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    log << "[done] " << iter << " iterations in " << history.wall_seconds << "s, checkpoint "
        << cfg.out_checkpoint.string() << "\n";

    TrainResult result;
    result.spec = model.spec();
    result.history = std::move(history);
    result.meta = meta;
    result.checkpoint_path = cfg.out_checkpoint;
    result.history_path = history_path;
    return result;
}

// Test-side evaluation of a stored checkpoint. With a manifest the held-out
// test side is used; otherwise every sample under the root.
inline metrics::EvalReport evaluate_checkpoint(const std::filesystem::path& ckpt_path,
                                               const std::filesystem::path& data_root,
                                               const std::optional<std::filesystem::path>& manifest,
                                               const EvalOptions& opt, std::ostream& log) {
    models::LoadedCheckpoint loaded = models::load_checkpoint(ckpt_path);
    data::Dataset ds = data::scan_dataset(data_root);

    std::vector<std::uint32_t> ids;
    if (manifest) {
        ids = data::load_manifest(*manifest, ds).test_ids;
        log << "[eval] test side: " << ids.size() << " samples\n";
    } else {
        ids.resize(ds.samples.size());
        for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);
        log << "[eval] full corpus: " << ids.size() << " samples\n";
    }

    metrics::EvalReport report = evaluate_model(loaded.model, ds, ids, opt);
    report.epochs = static_cast<int>(loaded.meta.epochs);
    report.seed = loaded.meta.seed;
    return report;
}

struct Prediction {
    std::string class_name;
    std::vector<double> probs; // one per class, sums to 1
};

inline Prediction predict_image(const std::filesystem::path& ckpt_path,
                                const std::filesystem::path& image_path) {
    models::LoadedCheckpoint loaded = models::load_checkpoint(ckpt_path);
    const models::InputSpec& in = loaded.spec.input;
    const Tensor img = data::load_image(image_path, in.c, in.h, in.w);
    Tensor x({1, in.c, in.h, in.w}, img.flat());
    const Tensor logits = loaded.model.forward(x, /*train=*/false);

    // stable softmax over the single row
    const std::size_t k = logits.dim(1);
    double m = logits[0];
    for (std::size_t j = 1; j < k; ++j) m = std::max(m, static_cast<double>(logits[j]));
    double denom = 0.0;
    std::vector<double> probs(k);
    for (std::size_t j = 0; j < k; ++j) {
        probs[j] = std::exp(static_cast<double>(logits[j]) - m);
        denom += probs[j];
    }
    for (double& p : probs) p /= denom;

    const int top = argmax_row(logits, 0);
    Prediction out;
    out.probs = std::move(probs);
    out.class_name = loaded.spec.class_names.empty()
                         ? "class_" + std::to_string(top)
                         : loaded.spec.class_names[static_cast<std::size_t>(top)];
    return out;
}

} // namespace chestnet::train
