#include <catch2/catch_amalgamated.hpp>

#include "chestnet/core/tensor.hpp"
#include "support/oracles.hpp"

using namespace chestnet;

TEST_CASE("construction and initializers") {
    Tensor z({2, 2});
    REQUIRE(z.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(z[i] == 0.0f);

    Tensor e({3}, {1.0f, 2.0f, 3.0f});
    CHECK(e[0] == 1.0f);
    CHECK(e[1] == 2.0f);
    CHECK(e[2] == 3.0f);

    SECTION("seeded uniform is reproducible") {
        Tensor a = Tensor::uniform({2, 2}, -1.0f, 1.0f, 42);
        Tensor b = Tensor::uniform({2, 2}, -1.0f, 1.0f, 42);
        REQUIRE(a.flat() == b.flat());
        for (float v : a.flat()) {
            CHECK(v >= -1.0f);
            CHECK(v < 1.0f);
        }
        Tensor c = Tensor::uniform({2, 2}, -1.0f, 1.0f, 43);
        CHECK(a.flat() != c.flat());
    }

    SECTION("bad construction is rejected") {
        CHECK_THROWS_AS(Tensor({2, 0}), ValueError);
        CHECK_THROWS_AS(Tensor({3}, {1.0f, 2.0f}), ValueError);
    }
}

TEST_CASE("elementwise ops") {
    Tensor a({3}, {-1.0f, 0.0f, 2.5f});
    Tensor r = max0(a);
    CHECK(r[0] == 0.0f);
    CHECK(r[1] == 0.0f);
    CHECK(r[2] == 2.5f);

    Tensor x({2}, {1.0f, 2.0f}), y({2}, {3.0f, 4.0f});
    Tensor s = add(x, y);
    CHECK(s[0] == 4.0f);
    CHECK(s[1] == 6.0f);

    Tensor sc = scale(Tensor({2}, {2.0f, 4.0f}), 0.5f);
    CHECK(sc[0] == 1.0f);
    CHECK(sc[1] == 2.0f);

    CHECK_THROWS_AS(add(x, Tensor({3})), ShapeError);
    CHECK(sub(y, x)[0] == 2.0f);
    CHECK(mul(x, y)[1] == 8.0f);
}

TEST_CASE("matmul basics") {
    Tensor id({2, 2}, {1.0f, 0.0f, 0.0f, 1.0f});
    Tensor m({2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
    CHECK(matmul(id, m).flat() == m.flat());

    Tensor a({1, 2}, {1.0f, 2.0f});
    Tensor b({2, 1}, {3.0f, 4.0f});
    CHECK(matmul(a, b)[0] == 11.0f);

    CHECK_THROWS_AS(matmul(a, Tensor({3, 1})), ShapeError);
    CHECK_THROWS_AS(matmul(Tensor({2}), Tensor({2, 1})), ShapeError);
}

TEST_CASE("matmul matches the triple-loop oracle") {
    rng::Stream seeds(2024);
    double worst = 0.0;
    for (int trial = 0; trial < 120; ++trial) {
        Tensor a = Tensor::uniform({8, 8}, -2.0f, 2.0f, seeds.next_u64());
        Tensor b = Tensor::uniform({8, 8}, -2.0f, 2.0f, seeds.next_u64());
        worst = std::max(worst, oracle::max_rel_err(matmul(a, b), oracle::matmul(a, b)));
    }
    // also a rectangular instance
    Tensor a = Tensor::uniform({5, 7}, -1.0f, 1.0f, 7);
    Tensor b = Tensor::uniform({7, 3}, -1.0f, 1.0f, 8);
    worst = std::max(worst, oracle::max_rel_err(matmul(a, b), oracle::matmul(a, b)));
    CHECK(worst <= 1e-6);
}

TEST_CASE("matmul is associative on small integers") {
    rng::Stream stream(99);
    for (int trial = 0; trial < 20; ++trial) {
        auto randint = [&](Shape shape) {
            Tensor t(shape);
            for (auto& v : t.flat()) v = static_cast<float>(stream.below(9)) - 4.0f;
            return t;
        };
        Tensor a = randint({4, 3}), b = randint({3, 5}), c = randint({5, 2});
        // all intermediate values are small integers, exact in binary32
        CHECK(matmul(matmul(a, b), c).flat() == matmul(a, matmul(b, c)).flat());
    }
}

TEST_CASE("reshape and transpose") {
    Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
    Tensor flat = reshape(t, {6});
    CHECK(flat.flat() == std::vector<float>{1, 2, 3, 4, 5, 6});
    CHECK(reshape(flat, {2, 3}).flat() == t.flat()); // round trip, bit-exact

    Tensor tr = transpose2d(Tensor({2, 2}, {1, 2, 3, 4}));
    CHECK(tr.flat() == std::vector<float>{1, 3, 2, 4});

    SECTION("double transpose is the identity, bit-exactly") {
        Tensor m = Tensor::uniform({5, 9}, -10.0f, 10.0f, 5);
        CHECK(transpose2d(transpose2d(m)).flat() == m.flat());
    }

    CHECK_THROWS_AS(reshape(t, {5}), ShapeError);
    CHECK_THROWS_AS(transpose2d(flat), ShapeError);
}

TEST_CASE("axis reductions") {
    Tensor t({2, 2}, {1, 2, 3, 4});
    Tensor s0 = sum_axis(t, 0);
    CHECK(s0.flat() == std::vector<float>{4, 6});
    Tensor s1 = sum_axis(t, 1);
    CHECK(s1.flat() == std::vector<float>{3, 7});
    Tensor m1 = mean_axis(t, 1);
    CHECK(m1.flat() == std::vector<float>{1.5f, 3.5f});
    CHECK_THROWS_AS(sum_axis(t, 2), ValueError);
}

TEST_CASE("finiteness of primitive results") {
    Tensor a = Tensor::uniform({4, 4}, -100.0f, 100.0f, 11);
    Tensor b = Tensor::uniform({4, 4}, -100.0f, 100.0f, 12);
    CHECK(matmul(a, b).all_finite());
    CHECK(add(a, b).all_finite());
    CHECK(max0(sub(a, b)).all_finite());
}
