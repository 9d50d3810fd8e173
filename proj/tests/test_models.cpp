#include <catch2/catch_amalgamated.hpp>

#include <fstream>

#include "chestnet/models/builders.hpp"
#include "chestnet/models/checkpoint.hpp"
#include "chestnet/models/finetune.hpp"
#include "chestnet/nn/sgd.hpp"
#include "support/tempdir.hpp"

using namespace chestnet;
using namespace chestnet::models;

namespace {

// spatial sizes after every layer that changes them
std::vector<std::size_t> spatial_trace(const ModelSpec& spec) {
    std::vector<std::size_t> trace{spec.input.h};
    for (const ValueDims& d : propagate_shapes(spec))
        if (!d.flat && d.h != trace.back()) trace.push_back(d.h);
    return trace;
}

std::size_t total_param_count(Model<float>& m) {
    std::size_t n = 0;
    for (const auto& p : m.params()) n += p.value->size();
    return n;
}

} // namespace

TEST_CASE("paper cnn structure") {
    ModelSpec spec = build_paper_cnn(1);
    CHECK(spec.input.h == 299);

    SECTION("spatial trace matches the hand derivation") {
        const std::vector<std::size_t> want = {299, 300, 149, 74, 36, 17, 8, 3};
        CHECK(spatial_trace(spec) == want);
        // FC input is 1024 * 3 * 3
        const auto dims = propagate_shapes(spec);
        const std::size_t flatten_idx = spec.layers.size() - 2;
        CHECK(dims[flatten_idx].features() == 9216);
    }

    SECTION("conv parameter count matches the closed form") {
        Model<float> m = Model<float>::build(build_paper_cnn(1, 64), 1);
        const std::size_t convs[][3] = {{32, 1, 8},   {64, 32, 3},   {128, 64, 5},
                                        {256, 128, 5}, {512, 256, 5}, {1024, 512, 5}};
        std::size_t want = 0;
        for (auto [out, in, k] : convs) want += out * in * k * k + out;
        want += 4 * 1024 + 4; // FC at the 64px trace (1024*1*1 features)
        CHECK(total_param_count(m) == want);
    }

    SECTION("zeros input produces finite 4-wide logits") {
        Model<float> m = Model<float>::build(build_paper_cnn(1, 64), 2);
        Tensor logits = m.forward(Tensor({1, 1, 64, 64}), false);
        REQUIRE(logits.shape() == Shape{1, 4});
        CHECK(logits.all_finite());
    }

    SECTION("small input overrides stay legal down to 32 px") {
        for (std::size_t size : {32, 64, 96, 128}) {
            ModelSpec s = build_paper_cnn(1, size);
            CHECK_NOTHROW(propagate_shapes(s));
        }
    }
}

TEST_CASE("mini alexnet structure") {
    ModelSpec spec = build_mini_alexnet();
    CHECK(spec.input.c == 3);
    CHECK(spec.input.h == 227);

    SECTION("pool-boundary trace") {
        const std::vector<std::size_t> want = {227, 55, 27, 13, 6};
        CHECK(spatial_trace(spec) == want);
        const auto dims = propagate_shapes(spec);
        // flatten output = 32 * 6 * 6
        for (std::size_t i = 0; i < spec.layers.size(); ++i)
            if (spec.layers[i].kind == "flatten") CHECK(dims[i].features() == 1152);
    }

    SECTION("census: 5 convs + 3 FCs = 8 weighted layers") {
        CHECK(weighted_layer_census(spec) == 8);
    }

    SECTION("zeros input smoke") {
        Model<float> m = Model<float>::build(build_mini_alexnet(64), 3);
        Tensor logits = m.forward(Tensor({1, 3, 64, 64}), false);
        REQUIRE(logits.shape() == Shape{1, 4});
        CHECK(logits.all_finite());
    }
}

TEST_CASE("mini resnet structure") {
    ModelSpec spec = build_mini_resnet(3);

    SECTION("weighted layer census is 18") {
        CHECK(weighted_layer_census(spec) == 18);
    }

    SECTION("spatial trace") {
        const std::vector<std::size_t> want = {224, 112, 56, 28, 14, 7};
        CHECK(spatial_trace(spec) == want);
    }

    SECTION("zeroed stage-1 branches are exact identities on post-pool activations") {
        Model<float> m = Model<float>::build(build_mini_resnet(1, 64), 4);
        // layers: 0 conv, 1 relu, 2 pool, 3-4 stage-1 residual blocks
        Tensor x = Tensor::uniform({1, 1, 64, 64}, 0.0f, 1.0f, 5);
        Tensor cur = x;
        for (std::size_t i = 0; i < 3; ++i) cur = m.layer(i).forward(cur, false);
        for (std::size_t i : {std::size_t{3}, std::size_t{4}}) {
            std::vector<nn::NamedParam<float>> params;
            m.layer(i).collect_params("", params);
            for (auto& p : params)
                std::fill(p.value->flat().begin(), p.value->flat().end(), 0.0f);
            Tensor out = m.layer(i).forward(cur, false);
            CHECK(out.flat() == cur.flat());
            cur = out;
        }
    }
}

TEST_CASE("mini inception structure") {
    ModelSpec spec = build_mini_inception();

    SECTION("block output channels are the branch-width sum") {
        for (const LayerDesc& d : spec.layers)
            if (d.kind == "inception_block") CHECK(d.b1 + d.b3 + d.b5 + d.pp == 36);
        const auto dims = propagate_shapes(spec);
        std::size_t blocks_seen = 0;
        for (std::size_t i = 0; i < spec.layers.size(); ++i)
            if (spec.layers[i].kind == "inception_block") {
                CHECK(dims[i].c == 36);
                ++blocks_seen;
            }
        CHECK(blocks_seen == 2);
    }

    SECTION("zeros input smoke") {
        Model<float> m = Model<float>::build(build_mini_inception(3, 75), 6);
        Tensor logits = m.forward(Tensor({1, 3, 75, 75}), false);
        REQUIRE(logits.shape() == Shape{1, 4});
        CHECK(logits.all_finite());
    }
}

TEST_CASE("every builder validates and ends in K=4 logits") {
    for (const char* name : {"paper-cnn", "mini-alexnet", "mini-resnet", "mini-inception"}) {
        ModelSpec spec = build_model_spec(name, 96);
        const auto dims = propagate_shapes(spec);
        CHECK(dims.back().flat);
        CHECK(dims.back().c == 4);
    }
    CHECK_THROWS_AS(build_model_spec("vgg"), ValueError);
}

TEST_CASE("checkpoint round trip is bit-exact for every builder") {
    TempDir tmp("ckpt");
    for (const char* name : {"paper-cnn", "mini-alexnet", "mini-resnet", "mini-inception"}) {
        Model<float> m = Model<float>::build(build_model_spec(name, 64), 99);
        m.mutable_spec().class_names = {"a", "b", "c", "d"};
        CheckpointMeta meta{3, 123456789, 0.25};
        const auto path = tmp / (std::string(name) + ".ckpt");
        save_checkpoint(m, meta, path);

        LoadedCheckpoint loaded = load_checkpoint(path);
        CHECK(structurally_equal(loaded.spec, m.spec()));
        CHECK(loaded.spec.class_names == m.spec().class_names);
        CHECK(loaded.meta.epochs == 3);
        CHECK(loaded.meta.seed == 123456789);
        CHECK(loaded.meta.final_train_loss == 0.25);

        auto a = m.params();
        auto b = loaded.model.params();
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].name == b[i].name);
            CHECK(a[i].value->flat() == b[i].value->flat()); // bit-exact
        }
    }
}

TEST_CASE("checkpoint corruption errors are distinct") {
    TempDir tmp("ckpt_bad");
    Model<float> m = Model<float>::build(build_paper_cnn(1, 32), 1);
    const auto path = tmp / "good.ckpt";
    save_checkpoint(m, {}, path);

    auto bytes_of = [&]() {
        std::ifstream is(path, std::ios::binary);
        return std::vector<char>((std::istreambuf_iterator<char>(is)),
                                 std::istreambuf_iterator<char>());
    };
    auto write_bytes = [&tmp](const std::vector<char>& bytes, const std::string& name) {
        const auto p = tmp / name;
        std::ofstream os(p, std::ios::binary);
        os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        return p;
    };
    const std::vector<char> good = bytes_of();

    SECTION("corrupt magic") {
        std::vector<char> bad = good;
        bad[0] = 'X';
        const auto p = write_bytes(bad, "magic.ckpt");
        CHECK_THROWS_MATCHES(load_checkpoint(p), CheckpointError,
                             Catch::Matchers::Predicate<CheckpointError>([](const auto& e) {
                                 return e.kind == CheckpointError::Kind::bad_magic;
                             }));
    }

    SECTION("unsupported version") {
        std::vector<char> bad = good;
        bad[4] = 99;
        const auto p = write_bytes(bad, "version.ckpt");
        CHECK_THROWS_MATCHES(load_checkpoint(p), CheckpointError,
                             Catch::Matchers::Predicate<CheckpointError>([](const auto& e) {
                                 return e.kind == CheckpointError::Kind::bad_version;
                             }));
    }

    SECTION("truncated payload") {
        std::vector<char> bad(good.begin(), good.begin() + static_cast<long>(good.size() / 2));
        const auto p = write_bytes(bad, "trunc.ckpt");
        CHECK_THROWS_MATCHES(load_checkpoint(p), CheckpointError,
                             Catch::Matchers::Predicate<CheckpointError>([](const auto& e) {
                                 return e.kind == CheckpointError::Kind::truncated;
                             }));
    }

    SECTION("trailing garbage") {
        std::vector<char> bad = good;
        bad.push_back('\0');
        const auto p = write_bytes(bad, "trailing.ckpt");
        CHECK_THROWS_MATCHES(load_checkpoint(p), CheckpointError,
                             Catch::Matchers::Predicate<CheckpointError>([](const auto& e) {
                                 return e.kind == CheckpointError::Kind::malformed;
                             }));
    }

    SECTION("missing file") {
        CHECK_THROWS_MATCHES(load_checkpoint(tmp / "nope.ckpt"), CheckpointError,
                             Catch::Matchers::Predicate<CheckpointError>([](const auto& e) {
                                 return e.kind == CheckpointError::Kind::open_failed;
                             }));
    }

    SECTION("spec mismatch on load-for") {
        CHECK_THROWS_MATCHES(load_checkpoint_for(build_mini_resnet(3, 64), path), CheckpointError,
                             Catch::Matchers::Predicate<CheckpointError>([](const auto& e) {
                                 return e.kind == CheckpointError::Kind::spec_mismatch;
                             }));
    }
}

TEST_CASE("fine-tune freeze") {
    Model<float> m = Model<float>::build(build_paper_cnn(1, 32), 7);

    SECTION("freeze leaves exactly the final FC trainable") {
        fine_tune_setup(m, FineTuneMode::freeze_all_but_final_fc);
        std::size_t trainable = 0;
        for (const auto& p : m.params())
            if (!p.frozen) ++trainable;
        CHECK(trainable == 2); // final weight + bias
    }

    SECTION("mode none keeps everything trainable") {
        fine_tune_setup(m, FineTuneMode::freeze_all_but_final_fc);
        fine_tune_setup(m, FineTuneMode::none);
        for (const auto& p : m.params()) CHECK_FALSE(p.frozen);
    }

    SECTION("an optimizer step after freezing changes only the head") {
        fine_tune_setup(m, FineTuneMode::freeze_all_but_final_fc);
        auto params = m.params();
        std::vector<std::vector<float>> before;
        for (const auto& p : params) before.push_back(p.value->flat());

        for (auto& p : params)
            std::fill(p.grad->flat().begin(), p.grad->flat().end(), 1.0f);
        nn::Sgd<float> sgd({0.01, 0.0});
        sgd.step(params);

        for (std::size_t i = 0; i < params.size(); ++i) {
            const bool changed = params[i].value->flat() != before[i];
            CHECK(changed == !params[i].frozen);
        }
    }
}
