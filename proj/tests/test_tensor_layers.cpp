#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "exposnet/adam.hpp"
#include "exposnet/blas.hpp"
#include "exposnet/layers.hpp"
#include "exposnet/tensor.hpp"

using namespace exposnet;

TEST_CASE("tensor shape bookkeeping") {
    Tensor t({2, 3, 4, 5});
    CHECK(t.numel() == 120);
    CHECK(t.ndim() == 4);
    CHECK(t.shape_str() == "(2x3x4x5)");
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<float>{1.0f}),
                    std::invalid_argument);
    t.at4(1, 2, 3, 4) = 7.0f;
    CHECK(t.data.back() == 7.0f);
}

TEST_CASE("conv2d identity kernel passes input through") {
    Conv2d conv(1, 1);
    conv.weight.fill(0.0f);
    conv.weight.data[4] = 1.0f;  // center of the 3x3 kernel
    conv.bias.fill(0.0f);
    Tensor x({1, 1, 1, 1}, {3.25f});
    Tensor y = conv.forward(x, Mode::kEval);
    CHECK(y.shape == std::vector<int>{1, 1, 1, 1});
    CHECK(y[0] == doctest::Approx(3.25f));
}

TEST_CASE("conv2d all-ones 3x3: center 9, corners 4") {
    Conv2d conv(1, 1);
    conv.weight.fill(1.0f);
    conv.bias.fill(0.0f);
    Tensor x({1, 1, 3, 3}, 1.0f);
    Tensor y = conv.forward(x, Mode::kEval);
    CHECK(y.at4(0, 0, 1, 1) == doctest::Approx(9.0f));
    CHECK(y.at4(0, 0, 0, 0) == doctest::Approx(4.0f));
    CHECK(y.at4(0, 0, 2, 2) == doctest::Approx(4.0f));
    CHECK(y.at4(0, 0, 0, 1) == doctest::Approx(6.0f));
}

TEST_CASE("conv2d preserves the 128x128 tile geometry") {
    Conv2d conv(15, 16);
    Tensor x({1, 15, 128, 128}, 0.5f);
    Tensor y = conv.forward(x, Mode::kEval);
    CHECK(y.shape == std::vector<int>{1, 16, 128, 128});
    CHECK(all_finite(y));
}

TEST_CASE("conv2d rejects a channel mismatch") {
    Conv2d conv(3, 4);
    Tensor x({1, 2, 4, 4});
    CHECK_THROWS(conv.forward(x, Mode::kEval));
}

TEST_CASE("batch norm train mode normalizes batch statistics") {
    // One channel, values {3, 7, 3, 7}: mean 5, population variance 4.
    BatchNorm2d bn(1);
    Tensor x({2, 1, 1, 2}, {3.0f, 7.0f, 3.0f, 7.0f});
    Tensor y = bn.forward(x, Mode::kTrain);
    double mean = 0.0, sq = 0.0;
    for (float v : y.data) {
        mean += v;
        sq += static_cast<double>(v) * v;
    }
    mean /= 4.0;
    const double var = sq / 4.0 - mean * mean;
    CHECK(mean == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(var == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("batch norm eval mode with identity stats is the identity") {
    BatchNorm2d bn(2);
    // Defaults: running mean 0, running var 1, gamma 1, beta 0.
    Tensor x({1, 2, 2, 2});
    std::mt19937 rng(11);
    std::uniform_real_distribution<float> u(-2.0f, 2.0f);
    for (float& v : x.data) v = u(rng);
    Tensor y = bn.forward(x, Mode::kEval);
    for (std::size_t i = 0; i < x.numel(); ++i)
        CHECK(y[i] == doctest::Approx(x[i]).epsilon(1e-4));
}

TEST_CASE("batch norm rejects a train-mode batch of one") {
    BatchNorm2d bn(1);
    Tensor x({1, 1, 1, 1}, 1.0f);
    CHECK_THROWS(bn.forward(x, Mode::kTrain));
}

TEST_CASE("batch norm eval calls are bitwise deterministic") {
    BatchNorm2d bn(3);
    Tensor x({2, 3, 4, 4});
    std::mt19937 rng(5);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (float& v : x.data) v = u(rng);
    Tensor a = bn.forward(x, Mode::kEval);
    Tensor b = bn.forward(x, Mode::kEval);
    CHECK(a.data == b.data);
}

TEST_CASE("max pool 2x2") {
    MaxPool2 pool;
    Tensor x({1, 1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
    Tensor y = pool.forward(x, Mode::kEval);
    CHECK(y.shape == std::vector<int>{1, 1, 1, 1});
    CHECK(y[0] == 4.0f);

    Tensor c({1, 2, 4, 4}, 0.75f);
    Tensor yc = pool.forward(c, Mode::kEval);
    CHECK(yc.shape == std::vector<int>{1, 2, 2, 2});
    for (float v : yc.data) CHECK(v == 0.75f);

    Tensor odd({1, 1, 3, 4});
    CHECK_THROWS(pool.forward(odd, Mode::kEval));

    Tensor big({1, 32, 128, 128}, 1.0f);
    CHECK(pool.forward(big, Mode::kEval).shape ==
          std::vector<int>{1, 32, 64, 64});
}

TEST_CASE("bilinear resize") {
    SUBCASE("constant map stays constant") {
        BilinearResize rs(5, 9);
        Tensor x({1, 1, 3, 3}, 2.5f);
        Tensor y = rs.forward(x, Mode::kEval);
        for (float v : y.data) CHECK(v == doctest::Approx(2.5f));
    }
    SUBCASE("2x2 [0,1;0,1] to 2x3 has a 0.5 middle column") {
        BilinearResize rs(2, 3);
        Tensor x({1, 1, 2, 2}, {0.0f, 1.0f, 0.0f, 1.0f});
        Tensor y = rs.forward(x, Mode::kEval);
        CHECK(y.at4(0, 0, 0, 0) == doctest::Approx(0.0f));
        CHECK(y.at4(0, 0, 0, 1) == doctest::Approx(0.5f));
        CHECK(y.at4(0, 0, 0, 2) == doctest::Approx(1.0f));
        CHECK(y.at4(0, 0, 1, 1) == doctest::Approx(0.5f));
    }
    SUBCASE("identity resize returns the input") {
        BilinearResize rs(2, 2);
        Tensor x({1, 1, 2, 2}, {1.0f, 2.0f, 3.0f, 4.0f});
        Tensor y = rs.forward(x, Mode::kEval);
        CHECK(y.data == x.data);
    }
}

TEST_CASE("global average pool") {
    GlobalAvgPool gap;
    Tensor c({1, 1, 3, 3}, 7.0f);
    CHECK(gap.forward(c, Mode::kEval)[0] == doctest::Approx(7.0f));

    Tensor x({1, 1, 2, 2}, {0.0f, 2.0f, 4.0f, 6.0f});
    CHECK(gap.forward(x, Mode::kEval)[0] == doctest::Approx(3.0f));

    Tensor feat({2, 128, 4, 4}, 1.0f);
    CHECK(gap.forward(feat, Mode::kEval).shape == std::vector<int>{2, 128});
}

TEST_CASE("fully connected layer") {
    SUBCASE("identity weights, zero bias") {
        Linear fc(2, 2);
        fc.weight.data = {1.0f, 0.0f, 0.0f, 1.0f};
        fc.bias.fill(0.0f);
        Tensor x({1, 2}, {3.0f, -1.0f});
        Tensor y = fc.forward(x, Mode::kEval);
        CHECK(y.data == x.data);
    }
    SUBCASE("zero weights return the bias") {
        Linear fc(3, 2);
        fc.weight.fill(0.0f);
        fc.bias.data = {4.0f, -2.0f};
        Tensor x({1, 3}, {9.0f, 9.0f, 9.0f});
        Tensor y = fc.forward(x, Mode::kEval);
        CHECK(y[0] == doctest::Approx(4.0f));
        CHECK(y[1] == doctest::Approx(-2.0f));
    }
    SUBCASE("hand matrix product [1,2] -> [3,2]") {
        Linear fc(2, 2);
        fc.weight.data = {1.0f, 1.0f, 0.0f, 1.0f};  // rows: [1,1], [0,1]
        fc.bias.fill(0.0f);
        Tensor x({1, 2}, {1.0f, 2.0f});
        Tensor y = fc.forward(x, Mode::kEval);
        CHECK(y[0] == doctest::Approx(3.0f));
        CHECK(y[1] == doctest::Approx(2.0f));
    }
}

TEST_CASE("scalar activations") {
    CHECK(relu(-1.0f) == 0.0f);
    CHECK(relu(2.0f) == 2.0f);
    CHECK(sigmoid(0.0f) == doctest::Approx(0.5f));
}

TEST_CASE("dropout") {
    Dropout drop(0.3f, 99);
    Tensor x({1, 100}, 1.0f);
    SUBCASE("eval mode is the identity") {
        Tensor y = drop.forward(x, Mode::kEval);
        CHECK(y.data == x.data);
    }
    SUBCASE("train-mode mean matches the input within 2%") {
        double sum = 0.0;
        const int trials = 200;  // 200 x 100 elements = 2e4 draws
        for (int t = 0; t < trials; ++t) {
            Tensor y = drop.forward(x, Mode::kTrain);
            for (float v : y.data) sum += v;
        }
        const double mean = sum / (trials * 100.0);
        CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
    }
}

TEST_CASE("adam zero gradient leaves parameters unchanged") {
    Tensor w({1, 3}, {1.0f, -2.0f, 0.5f});
    Tensor g({1, 3}, 0.0f);
    Adam opt({{"w", &w, &g}}, AdamConfig{});
    opt.step();
    opt.step();
    CHECK(w.data == std::vector<float>{1.0f, -2.0f, 0.5f});
}

TEST_CASE("adam first step on a unit gradient moves by about lr") {
    Tensor w({1, 1}, {0.0f});
    Tensor g({1, 1}, {1.0f});
    AdamConfig cfg;
    cfg.lr = 1e-4f;
    Adam opt({{"w", &w, &g}}, cfg);
    opt.step();
    // Bias-corrected moments give mhat = 1, vhat = 1: step = lr/(1 + eps).
    CHECK(w[0] == doctest::Approx(-1e-4).epsilon(1e-3));
}

TEST_CASE("adam rejects non-finite gradients") {
    Tensor w({1, 1}, {0.0f});
    Tensor g({1, 1}, {std::numeric_limits<float>::quiet_NaN()});
    Adam opt({{"w", &w, &g}}, AdamConfig{});
    CHECK_THROWS_AS(opt.step(), std::runtime_error);
}

namespace {
// Reference triple-loop gemm for validating the optimized path.
void naive_gemm(bool ta, bool tb, int m, int n, int k, const float* a,
                const float* b, double* c) {
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) {
            double acc = 0.0;
            for (int p = 0; p < k; ++p) {
                const float av = ta ? a[p * m + i] : a[i * k + p];
                const float bv = tb ? b[j * k + p] : b[p * n + j];
                acc += static_cast<double>(av) * bv;
            }
            c[i * n + j] = acc;
        }
}
}  // namespace

TEST_CASE("sgemm matches a naive reference in all transpose modes") {
    std::mt19937 rng(321);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    const int m = 7, n = 11, k = 13;
    std::vector<float> a(m * k), b(k * n), c(m * n, 0.0f);
    std::vector<double> ref(m * n);
    for (bool ta : {false, true})
        for (bool tb : {false, true}) {
            for (float& v : a) v = u(rng);
            for (float& v : b) v = u(rng);
            naive_gemm(ta, tb, m, n, k, a.data(), b.data(), ref.data());
            sgemm(ta, tb, m, n, k, a.data(), b.data(), c.data());
            for (int i = 0; i < m * n; ++i)
                CHECK(c[i] == doctest::Approx(ref[i]).epsilon(1e-4));
            // Accumulate mode adds on top of the existing C.
            sgemm(ta, tb, m, n, k, a.data(), b.data(), c.data(), true);
            for (int i = 0; i < m * n; ++i)
                CHECK(c[i] == doctest::Approx(2.0 * ref[i]).epsilon(1e-4));
        }
}

TEST_CASE("he-uniform init stays inside its bound and is non-degenerate") {
    Tensor w({16, 8, 3, 3});
    std::mt19937 rng(7);
    const int fan_in = 8 * 3 * 3;
    he_uniform_init(w, fan_in, rng);
    const float bound = std::sqrt(6.0f / fan_in);
    float lo = w[0], hi = w[0];
    for (float v : w.data) {
        CHECK(std::abs(v) <= bound);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    CHECK(hi - lo > 0.5f * bound);  // not collapsed to a constant
}
