// chestnet command line: train / eval / predict / split / report.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.

#include <iostream>

#include <CLI11.hpp>

#include "chestnet/train/trainer.hpp"

namespace {

using namespace chestnet;

struct CommonArgs {
    std::string data;
    std::string model;
    int epochs = 1;
    std::size_t batch = 64;
    double lr = 0.001;
    std::uint64_t val_every = 20;
    std::uint64_t seed = 0;
    double ratio = 0.8;
    std::string out;
    std::string ckpt;
    std::string image;
    std::string manifest;
    std::string format = "md";
    std::size_t input_size = 0;
    std::string fine_tune = "none";
    std::string augment = "off";
    std::vector<std::string> report_inputs;
};

int run_train(const CommonArgs& a) {
    train::TrainConfig cfg;
    cfg.model = a.model;
    cfg.data_root = a.data;
    cfg.epochs = a.epochs;
    cfg.batch = a.batch;
    cfg.lr = a.lr;
    cfg.val_every = a.val_every;
    cfg.seed = a.seed;
    cfg.ratio = a.ratio;
    if (!a.manifest.empty()) cfg.manifest_path = a.manifest;
    cfg.augment.enabled = a.augment == "on";
    cfg.input_size = a.input_size;
    cfg.fine_tune = a.fine_tune == "head" ? models::FineTuneMode::freeze_all_but_final_fc
                                          : models::FineTuneMode::none;
    if (!a.ckpt.empty()) cfg.init_checkpoint = a.ckpt;
    cfg.out_checkpoint = a.out.empty() ? "model.ckpt" : a.out;

    train::run_training(cfg, std::cerr);
    return 0;
}

int run_eval(const CommonArgs& a) {
    train::EvalOptions opt;
    opt.center_crop = a.augment == "on";
    std::optional<std::filesystem::path> manifest;
    if (!a.manifest.empty()) manifest = a.manifest;

    metrics::EvalReport report =
        train::evaluate_checkpoint(a.ckpt, a.data, manifest, opt, std::cerr);

    if (!a.out.empty()) {
        std::ofstream os(a.out, std::ios::trunc);
        if (!os) throw DataError("cannot write report " + a.out);
        os << metrics::report_to_json(report).dump(2) << "\n";
    }
    const metrics::EvalReport rows[] = {report};
    std::cout << metrics::emit_report(rows, metrics::ReportFormat::markdown);
    return 0;
}

int run_predict(const CommonArgs& a) {
    train::Prediction p = train::predict_image(a.ckpt, a.image);
    std::cout << "class: " << p.class_name << "\n";
    std::cout << "probabilities:";
    for (double v : p.probs) std::cout << " " << v;
    std::cout << "\n";
    return 0;
}

int run_split(const CommonArgs& a) {
    data::Dataset ds = data::scan_dataset(a.data);
    data::SplitManifest manifest = data::split(ds, a.ratio, a.seed);
    const std::string out = a.out.empty() ? "manifest.json" : a.out;
    data::save_manifest(manifest, ds, out);
    std::cerr << "[split] train " << manifest.train_ids.size() << " / test "
              << manifest.test_ids.size() << " -> " << out << "\n";
    return 0;
}

int run_report(const CommonArgs& a) {
    std::vector<metrics::EvalReport> reports;
    for (const std::string& file : a.report_inputs) {
        std::ifstream is(file);
        if (!is) throw DataError("cannot open report " + file);
        nlohmann::json j;
        try {
            is >> j;
            reports.push_back(metrics::report_from_json(j));
        } catch (const nlohmann::json::exception& e) {
            throw DataError("malformed report " + file + ": " + e.what());
        }
    }
    const std::string doc = metrics::emit_report(reports, metrics::report_format_from_string(a.format));
    if (a.out.empty()) {
        std::cout << doc;
    } else {
        std::ofstream os(a.out, std::ios::trunc);
        if (!os) throw DataError("cannot write " + a.out);
        os << doc;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"chest X-ray classification toolkit"};
    app.require_subcommand(1);

    CommonArgs a;
    const std::vector<std::string> model_names = {"paper-cnn", "mini-alexnet", "mini-resnet",
                                                  "mini-inception"};

    CLI::App* train_cmd = app.add_subcommand("train", "train a model on a class-folder corpus");
    train_cmd->add_option("--data", a.data, "corpus root (one folder per class)")->required();
    train_cmd->add_option("--model", a.model)->check(CLI::IsMember(model_names));
    train_cmd->add_option("--epochs", a.epochs);
    train_cmd->add_option("--batch", a.batch);
    train_cmd->add_option("--lr", a.lr);
    train_cmd->add_option("--val-every", a.val_every);
    train_cmd->add_option("--seed", a.seed);
    train_cmd->add_option("--ratio", a.ratio);
    train_cmd->add_option("--manifest", a.manifest, "reuse a split manifest");
    train_cmd->add_option("--ckpt", a.ckpt, "initial checkpoint to fine-tune");
    train_cmd->add_option("--out", a.out, "output checkpoint path");
    train_cmd->add_option("--input-size", a.input_size, "override the model's input resolution");
    train_cmd->add_option("--fine-tune", a.fine_tune)->check(CLI::IsMember({"none", "head"}));
    train_cmd->add_option("--augment", a.augment)->check(CLI::IsMember({"on", "off"}));

    CLI::App* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    eval_cmd->add_option("--ckpt", a.ckpt)->required();
    eval_cmd->add_option("--data", a.data)->required();
    eval_cmd->add_option("--manifest", a.manifest, "evaluate the manifest's test side");
    eval_cmd->add_option("--out", a.out, "write the full JSON report here");
    eval_cmd->add_option("--augment", a.augment, "on = center-crop preprocessing")
        ->check(CLI::IsMember({"on", "off"}));

    CLI::App* predict_cmd = app.add_subcommand("predict", "classify one image");
    predict_cmd->add_option("--ckpt", a.ckpt)->required();
    predict_cmd->add_option("--image", a.image)->required();

    CLI::App* split_cmd = app.add_subcommand("split", "write a train/test manifest");
    split_cmd->add_option("--data", a.data)->required();
    split_cmd->add_option("--ratio", a.ratio);
    split_cmd->add_option("--seed", a.seed);
    split_cmd->add_option("--out", a.out, "manifest path");

    CLI::App* report_cmd = app.add_subcommand("report", "render eval reports as a table");
    report_cmd->add_option("inputs", a.report_inputs, "JSON report files")->required();
    report_cmd->add_option("--format", a.format)->check(CLI::IsMember({"json", "csv", "md"}));
    report_cmd->add_option("--out", a.out, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (train_cmd->parsed()) return run_train(a);
        if (eval_cmd->parsed()) return run_eval(a);
        if (predict_cmd->parsed()) return run_predict(a);
        if (split_cmd->parsed()) return run_split(a);
        if (report_cmd->parsed()) return run_report(a);
    } catch (const chestnet::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const chestnet::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
