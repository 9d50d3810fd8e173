#include <catch2/catch_amalgamated.hpp>

#include <fstream>
#include <set>

#include "chestnet/data/augment.hpp"
#include "chestnet/data/dataset.hpp"
#include "chestnet/data/synthetic.hpp"
#include "support/oracles.hpp"
#include "support/tempdir.hpp"

using namespace chestnet;
using namespace chestnet::data;

TEST_CASE("png and pnm round trips") {
    TempDir tmp("img");
    ImageU8 img;
    img.width = 7;
    img.height = 5;

    SECTION("grayscale png") {
        img.channels = 1;
        img.pixels.resize(35);
        for (std::size_t i = 0; i < 35; ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 7);
        write_png(tmp / "g.png", img);
        ImageU8 back = read_png(tmp / "g.png");
        CHECK(back.width == 7);
        CHECK(back.height == 5);
        CHECK(back.channels == 1);
        CHECK(back.pixels == img.pixels);
    }

    SECTION("rgb png") {
        img.channels = 3;
        img.pixels.resize(105);
        for (std::size_t i = 0; i < 105; ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 2);
        write_png(tmp / "c.png", img);
        ImageU8 back = read_image(tmp / "c.png"); // via the magic sniffer
        CHECK(back.channels == 3);
        CHECK(back.pixels == img.pixels);
    }

    SECTION("pgm and ppm") {
        img.channels = 1;
        img.pixels.assign(35, 128);
        write_pnm(tmp / "g.pgm", img);
        CHECK(read_image(tmp / "g.pgm").pixels == img.pixels);

        img.channels = 3;
        img.pixels.assign(105, 9);
        write_pnm(tmp / "c.ppm", img);
        CHECK(read_pnm(tmp / "c.ppm").pixels == img.pixels);
    }

    SECTION("undecodable input") {
        std::ofstream(tmp / "junk.png") << "this is not an image";
        CHECK_THROWS_AS(read_image(tmp / "junk.png"), DataError);
        CHECK_FALSE(looks_like_image(tmp / "junk.png"));
        CHECK_THROWS_AS(read_image(tmp / "missing.png"), DataError);
    }

    SECTION("truncated pnm payload") {
        std::ofstream(tmp / "short.pgm", std::ios::binary) << "P5\n4 4\n255\nab";
        CHECK_THROWS_AS(read_pnm(tmp / "short.pgm"), DataError);
    }
}

TEST_CASE("load_image contract") {
    TempDir tmp("load");

    SECTION("constant gray image at any size") {
        ImageU8 img;
        img.width = img.height = 2;
        img.channels = 1;
        img.pixels.assign(4, 128);
        write_pnm(tmp / "c.pgm", img);
        Tensor t = load_image(tmp / "c.pgm", 1, 4, 4);
        REQUIRE(t.shape() == Shape{1, 4, 4});
        for (float v : t.flat()) CHECK(v == 128.0f / 255.0f);
    }

    SECTION("identity-size load equals source / 255") {
        ImageU8 img;
        img.width = 6;
        img.height = 4;
        img.channels = 1;
        img.pixels.resize(24);
        for (std::size_t i = 0; i < 24; ++i) img.pixels[i] = static_cast<std::uint8_t>(i * 10);
        write_pnm(tmp / "id.pgm", img);
        Tensor t = load_image(tmp / "id.pgm", 1, 4, 6);
        for (std::size_t i = 0; i < 24; ++i)
            CHECK(t[i] == static_cast<float>(img.pixels[i]) / 255.0f);
    }

    SECTION("checkerboard downsize matches the bilinear oracle") {
        ImageU8 img;
        img.width = img.height = 299;
        img.channels = 1;
        img.pixels.resize(299 * 299);
        for (std::size_t y = 0; y < 299; ++y)
            for (std::size_t x = 0; x < 299; ++x)
                img.pixels[y * 299 + x] = ((x / 13 + y / 13) % 2) ? 255 : 0;
        write_pnm(tmp / "cb.pgm", img);
        Tensor got = load_image(tmp / "cb.pgm", 1, 4, 4);

        Tensor planes = to_planes<float>(img);
        Tensor want = oracle::bilinear(planes, 4, 4);
        for (auto& v : want.flat()) v /= 255.0f;
        CHECK(oracle::max_rel_err(got, want) <= 1e-6);
    }

    SECTION("channel adaptation") {
        ImageU8 rgb;
        rgb.width = rgb.height = 3;
        rgb.channels = 3;
        rgb.pixels.resize(27);
        for (std::size_t i = 0; i < 27; ++i) rgb.pixels[i] = static_cast<std::uint8_t>(i * 9);
        write_pnm(tmp / "rgb.ppm", rgb);

        Tensor gray = load_image(tmp / "rgb.ppm", 1, 3, 3);
        REQUIRE(gray.shape() == Shape{1, 3, 3});
        // rec.601 luma of the first interleaved pixel (r,g,b = 0,9,18)
        const float want = (0.299f * 0.0f + 0.587f * 9.0f + 0.114f * 18.0f) / 255.0f;
        CHECK_THAT(gray[0], Catch::Matchers::WithinRel(want, 1e-5f));

        ImageU8 g;
        g.width = g.height = 2;
        g.channels = 1;
        g.pixels = {10, 20, 30, 40};
        write_pnm(tmp / "g.pgm", g);
        Tensor three = load_image(tmp / "g.pgm", 3, 2, 2);
        REQUIRE(three.shape() == Shape{3, 2, 2});
        for (std::size_t c = 0; c < 3; ++c)
            for (std::size_t i = 0; i < 4; ++i)
                CHECK(three[c * 4 + i] == static_cast<float>(g.pixels[i]) / 255.0f);
    }

    SECTION("loading the same file twice is bit-identical") {
        write_toy_corpus(tmp.path / "corpus", 1, 32, 5);
        const auto p = tmp.path / "corpus" / "circle" / "img_0.pgm";
        Tensor a = load_image(p, 1, 24, 24);
        Tensor b = load_image(p, 1, 24, 24);
        CHECK(a.flat() == b.flat());
    }
}

TEST_CASE("bilinear resize matches the oracle on random instances") {
    rng::Stream seeds(404);
    double worst = 0.0;
    for (int trial = 0; trial < 120; ++trial) {
        const std::size_t c = 1 + seeds.below(3);
        const std::size_t h = 2 + seeds.below(14), w = 2 + seeds.below(14);
        const std::size_t oh = 1 + seeds.below(14), ow = 1 + seeds.below(14);
        Tensor src = Tensor::uniform({c, h, w}, 0.0f, 255.0f, seeds.next_u64());
        worst = std::max(worst, oracle::max_rel_err(resize_planes(src, oh, ow),
                                                    oracle::bilinear(src, oh, ow)));
    }
    CHECK(worst <= 1e-6);

    SECTION("nearest mode exists for oracle work") {
        Tensor src = Tensor::uniform({1, 6, 6}, 0.0f, 1.0f, 1);
        Tensor same = resize_planes(src, 6, 6, Interp::nearest);
        CHECK(same.flat() == src.flat());
    }
}

TEST_CASE("scan_dataset") {
    TempDir tmp("scan");

    SECTION("toy corpus layout") {
        write_toy_corpus(tmp.path, 3, 24, 7);
        std::ofstream(tmp.path / "circle" / "notes.txt") << "not an image";
        Dataset ds = scan_dataset(tmp.path);
        CHECK(ds.class_names == std::vector<std::string>{"checker", "circle", "hstripes", "vstripes"});
        CHECK(ds.samples.size() == 12);
        CHECK(ds.per_class_counts() == std::vector<std::size_t>{3, 3, 3, 3});
        CHECK(ds.skipped_files == 1);
        // ids are ordered class-major, files sorted
        CHECK(ds.samples[0].path == "checker/img_0.pgm");
        CHECK(ds.samples[0].class_id == 0);
    }

    SECTION("minimal two-class corpus") {
        for (const char* cls : {"a", "b"}) {
            std::filesystem::create_directories(tmp.path / "mini" / cls);
            ImageU8 img;
            img.width = img.height = 4;
            img.channels = 1;
            img.pixels.assign(16, 100);
            write_pnm(tmp.path / "mini" / cls / "x.pgm", img);
        }
        Dataset ds = scan_dataset(tmp.path / "mini");
        CHECK(ds.samples.size() == 2);
    }

    SECTION("error paths") {
        CHECK_THROWS_AS(scan_dataset(tmp.path / "missing"), DataError);

        std::filesystem::create_directories(tmp.path / "one" / "solo");
        ImageU8 img;
        img.width = img.height = 4;
        img.channels = 1;
        img.pixels.assign(16, 1);
        write_pnm(tmp.path / "one" / "solo" / "x.pgm", img);
        CHECK_THROWS_AS(scan_dataset(tmp.path / "one"), DataError); // < 2 classes

        std::filesystem::create_directories(tmp.path / "empty" / "a");
        std::filesystem::create_directories(tmp.path / "empty" / "b");
        write_pnm(tmp.path / "empty" / "a" / "x.pgm", img);
        CHECK_THROWS_AS(scan_dataset(tmp.path / "empty"), DataError); // empty class
    }
}

namespace {
// in-memory dataset with the given per-class sizes; no files needed
Dataset fabricate(const std::vector<std::size_t>& counts) {
    Dataset ds;
    ds.root = "/fabricated";
    for (std::size_t c = 0; c < counts.size(); ++c) {
        ds.class_names.push_back("class_" + std::to_string(c));
        for (std::size_t i = 0; i < counts[c]; ++i)
            ds.samples.push_back({"class_" + std::to_string(c) + "/" + std::to_string(i) + ".png",
                                  static_cast<int>(c)});
    }
    return ds;
}
} // namespace

TEST_CASE("split") {
    SECTION("even 50/50 on 10 per class") {
        Dataset ds = fabricate({10, 10});
        SplitManifest m = split(ds, 0.5, 1);
        CHECK(m.train_ids.size() == 10);
        CHECK(m.test_ids.size() == 10);
        std::vector<std::size_t> per_class(2, 0);
        for (auto id : m.train_ids) per_class[static_cast<std::size_t>(ds.samples[id].class_id)]++;
        CHECK(per_class == std::vector<std::size_t>{5, 5});
    }

    SECTION("chest corpus class counts at 0.8") {
        Dataset ds = fabricate({3616, 6012, 10192, 1345});
        SplitManifest m = split(ds, 0.8, 42);
        std::vector<std::size_t> per_class(4, 0);
        for (auto id : m.train_ids) per_class[static_cast<std::size_t>(ds.samples[id].class_id)]++;
        CHECK(per_class == std::vector<std::size_t>{2892, 4809, 8153, 1076});
        CHECK(m.train_ids.size() == 16930);
        CHECK(m.test_ids.size() == 21165 - 16930);
    }

    SECTION("determinism") {
        Dataset ds = fabricate({50, 30});
        SplitManifest a = split(ds, 0.8, 9);
        SplitManifest b = split(ds, 0.8, 9);
        CHECK(a.train_ids == b.train_ids);
        CHECK(a.test_ids == b.test_ids);
        SplitManifest c = split(ds, 0.8, 10);
        CHECK(a.train_ids != c.train_ids);
    }

    SECTION("partition property over random ratios and seeds") {
        rng::Stream seeds(88);
        for (int trial = 0; trial < 30; ++trial) {
            std::vector<std::size_t> counts = {4 + seeds.below(40), 4 + seeds.below(40),
                                               4 + seeds.below(40)};
            Dataset ds = fabricate(counts);
            const double ratio = 0.3 + 0.4 * seeds.next_unit();
            SplitManifest m = split(ds, ratio, seeds.next_u64());

            std::set<std::uint32_t> train(m.train_ids.begin(), m.train_ids.end());
            std::set<std::uint32_t> test(m.test_ids.begin(), m.test_ids.end());
            CHECK(train.size() + test.size() == ds.samples.size()); // disjoint + exhaustive
            for (auto id : test) CHECK_FALSE(train.count(id));

            std::vector<std::size_t> per_class(3, 0);
            for (auto id : m.train_ids)
                per_class[static_cast<std::size_t>(ds.samples[id].class_id)]++;
            for (std::size_t c = 0; c < 3; ++c)
                CHECK(per_class[c] ==
                      static_cast<std::size_t>(std::floor(ratio * static_cast<double>(counts[c]) + 1e-9)));
        }
    }

    SECTION("degenerate classes are rejected") {
        Dataset ds = fabricate({1, 10});
        CHECK_THROWS_AS(split(ds, 0.8, 0), DataError);
        CHECK_THROWS_AS(split(fabricate({10, 10}), 0.0, 0), ValueError);
        CHECK_THROWS_AS(split(fabricate({10, 10}), 1.0, 0), ValueError);
    }
}

TEST_CASE("manifest file round trip") {
    TempDir tmp("manifest");
    write_toy_corpus(tmp.path, 5, 16, 3);
    Dataset ds = scan_dataset(tmp.path);
    SplitManifest m = split(ds, 0.6, 77);
    save_manifest(m, ds, tmp / "m.json");

    SplitManifest back = load_manifest(tmp / "m.json", ds);
    CHECK(back.seed == m.seed);
    CHECK(back.ratio == m.ratio);
    CHECK(back.class_names == m.class_names);
    CHECK(back.train_ids == m.train_ids);
    CHECK(back.test_ids == m.test_ids);

    SECTION("unknown path is rejected") {
        nlohmann::json j;
        {
            std::ifstream is(tmp / "m.json");
            is >> j;
        }
        j["train"][0] = "checker/ghost.pgm";
        std::ofstream(tmp / "bad.json") << j.dump();
        CHECK_THROWS_AS(load_manifest(tmp / "bad.json", ds), DataError);
    }

    SECTION("malformed json is rejected") {
        std::ofstream(tmp / "junk.json") << "{not json";
        CHECK_THROWS_AS(load_manifest(tmp / "junk.json", ds), DataError);
    }
}

TEST_CASE("augment") {
    Tensor img = Tensor::uniform({3, 16, 16}, 0.0f, 1.0f, 10);

    SECTION("disabled transforms give the bit-exact identity") {
        AugmentConfig cfg;
        cfg.crop = 16;
        cfg.flip_prob = 0.0;
        cfg.jitter = 0.0;
        cfg.seed = 5;
        auto [out, label] = augment(img, 3, cfg, 0, 0);
        CHECK(label == 3);
        CHECK(out.flat() == img.flat());
    }

    SECTION("flip is an involution") {
        CHECK(hflip(hflip(img)).flat() == img.flat());
    }

    SECTION("crop matches a window of the source") {
        Tensor big = Tensor::uniform({1, 32, 32}, 0.0f, 1.0f, 11);
        AugmentConfig cfg;
        cfg.crop = 24;
        cfg.flip_prob = 0.0;
        cfg.jitter = 0.0;
        cfg.seed = 6;
        auto [out, label] = augment(big, 0, cfg, 4, 2);
        REQUIRE(out.shape() == Shape{1, 24, 24});
        bool found = false;
        for (std::size_t oy = 0; oy <= 8 && !found; ++oy)
            for (std::size_t ox = 0; ox <= 8 && !found; ++ox)
                if (crop_window(big, oy, ox, 24).flat() == out.flat()) found = true;
        CHECK(found);
    }

    SECTION("values stay in [0,1] and labels never change") {
        AugmentConfig cfg;
        cfg.crop = 12;
        cfg.jitter = 0.5;
        cfg.seed = 7;
        for (std::uint64_t idx = 0; idx < 25; ++idx) {
            auto [out, label] = augment(img, static_cast<int>(idx % 4), cfg, idx, 1);
            CHECK(label == static_cast<int>(idx % 4));
            for (float v : out.flat()) {
                CHECK(v >= 0.0f);
                CHECK(v <= 1.0f);
            }
        }
    }

    SECTION("same (seed, sample, epoch) replays exactly") {
        AugmentConfig cfg;
        cfg.crop = 12;
        cfg.seed = 8;
        auto a = augment(img, 0, cfg, 3, 5).first;
        auto b = augment(img, 0, cfg, 3, 5).first;
        CHECK(a.flat() == b.flat());
        auto c = augment(img, 0, cfg, 3, 6).first;
        CHECK(a.flat() != c.flat());
    }

    SECTION("oversized crop is rejected") {
        AugmentConfig cfg;
        cfg.crop = 32;
        CHECK_THROWS_AS(augment(img, 0, cfg, 0, 0), ValueError);
    }

    SECTION("center crop takes the middle window") {
        Tensor big({1, 4, 4});
        for (std::size_t i = 0; i < 16; ++i) big[i] = static_cast<float>(i);
        Tensor mid = center_crop(big, 2);
        CHECK(mid.flat() == std::vector<float>{5, 6, 9, 10});
    }
}

TEST_CASE("batch plan") {
    std::vector<std::uint32_t> ids(130);
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<std::uint32_t>(i);

    SECTION("batch sizes 64/64/2") {
        auto plan = batch_plan(ids, 64, 0, 1, true);
        REQUIRE(plan.size() == 3);
        CHECK(plan[0].size() == 64);
        CHECK(plan[1].size() == 64);
        CHECK(plan[2].size() == 2);
    }

    SECTION("shuffle off preserves manifest order") {
        auto plan = batch_plan(ids, 50, 9, 1, false);
        std::vector<std::uint32_t> flat;
        for (const auto& b : plan) flat.insert(flat.end(), b.begin(), b.end());
        CHECK(flat == ids);
    }

    SECTION("each epoch touches every sample exactly once") {
        for (std::uint64_t epoch : {1, 2, 3}) {
            auto plan = batch_plan(ids, 7, 17, epoch, true);
            std::vector<std::uint32_t> flat;
            for (const auto& b : plan) flat.insert(flat.end(), b.begin(), b.end());
            std::sort(flat.begin(), flat.end());
            CHECK(flat == ids); // multiset equality (ids are unique)
        }
    }

    SECTION("different epochs shuffle differently") {
        auto p1 = batch_plan(ids, 130, 3, 1, true);
        auto p2 = batch_plan(ids, 130, 3, 2, true);
        CHECK(p1[0] != p2[0]);
    }

    SECTION("errors") {
        CHECK_THROWS_AS(batch_plan(ids, 0, 0, 0, false), ValueError);
        const std::vector<std::uint32_t> empty;
        CHECK_THROWS_AS(batch_plan(empty, 4, 0, 0, false), DataError);
    }
}
