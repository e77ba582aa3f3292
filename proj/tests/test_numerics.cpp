#include <gtest/gtest.h>

#include <cmath>

#include "avse/numerics/activation.hpp"
#include "avse/numerics/conv.hpp"
#include "avse/numerics/fastmath.hpp"
#include "avse/numerics/gemm.hpp"
#include "avse/numerics/group_norm.hpp"
#include "avse/numerics/layout.hpp"
#include "avse/numerics/linear.hpp"
#include "avse/numerics/lstm.hpp"
#include "avse/numerics/resize.hpp"
#include "support.hpp"

using namespace avse;
using namespace avse::numerics;
using avse::test::fd_max_error;
using avse::test::random_tensor;

namespace {

ConvSpec spec1d(std::size_t in, std::size_t out, std::size_t k, std::size_t s, std::size_t p = 0,
                bool bias = true) {
  return {in, out, {k}, {s}, {p}, bias};
}

double inner(const Tensor<double>& a, const Tensor<double>& b) { return dot(a, b); }

}  // namespace

TEST(Conv1d, IdentityKernel) {
  Tensor<double> x({1, 4}, {1, 2, 3, 4});
  Tensor<double> w({1, 1, 1}, {1});
  Tensor<double> b({1}, {0});
  auto y = conv1d(x, w, b, spec1d(1, 1, 1, 1));
  EXPECT_EQ(y, Tensor<double>({1, 4}, {1, 2, 3, 4}));
}

TEST(Conv1d, PairSumStrideTwo) {
  Tensor<double> x({1, 4}, {1, 2, 3, 4});
  Tensor<double> w({1, 1, 2}, {1, 1});
  Tensor<double> b({1}, {0});
  EXPECT_EQ(conv1d(x, w, b, spec1d(1, 1, 2, 2)), Tensor<double>({1, 2}, {3, 7}));
}

TEST(Conv1d, CodecShape) {
  Tensor<float> x({1, 16000}, 0.25f);
  Tensor<float> w({256, 1, 16}, 0.01f);
  Tensor<float> b({256}, 0.0f);
  auto y = conv1d(x, w, b, spec1d(1, 256, 16, 8));
  EXPECT_EQ(y.dims(), (Shape{256, 1999}));
  EXPECT_EQ(conv_output_extent(16000, 16, 8, 0), 1999u);
}

TEST(Conv1d, ShortInputThrows) {
  Tensor<double> x({1, 3}, 1.0);
  Tensor<double> w({1, 1, 4}, 1.0);
  EXPECT_THROW(conv1d(x, w, Tensor<double>({1}, 0.0), spec1d(1, 1, 4, 1)), InputTooShortError);
}

TEST(Conv1d, ChannelMismatchThrows) {
  Tensor<double> x({2, 8}, 1.0);
  Tensor<double> w({1, 1, 2}, 1.0);
  EXPECT_THROW(conv1d(x, w, Tensor<double>({1}, 0.0), spec1d(1, 1, 2, 1)), ShapeError);
}

TEST(ConvTranspose1d, ScatterAdd) {
  Tensor<double> x({1, 2}, {1, 1});
  Tensor<double> w({1, 1, 2}, {1, 1});
  auto y = conv_transpose1d(x, w, Tensor<double>({1}, 0.0), spec1d(1, 1, 2, 2));
  EXPECT_EQ(y, Tensor<double>({1, 4}, {1, 1, 1, 1}));
}

TEST(ConvTranspose1d, SingleFrameLength) {
  Tensor<double> x({1, 1}, {5});
  Tensor<double> w({1, 1, 16}, 1.0);
  auto y = conv_transpose1d(x, w, Tensor<double>({1}, 0.0), spec1d(1, 1, 16, 8));
  EXPECT_EQ(y.dims(), (Shape{1, 16}));
  EXPECT_EQ(conv_transpose_output_extent(1999, 16, 8), 16000u);
}

TEST(ConvTranspose1d, AdjointOfConv1dOverRandomShapes) {
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t cin = 1 + rng.below(4), cout = 1 + rng.below(4);
    const std::size_t k = 1 + rng.below(9), s = 1 + rng.below(k);
    const std::size_t t_out = 1 + rng.below(20);
    const std::size_t t_in = (t_out - 1) * s + k + rng.below(s);
    auto x = random_tensor(rng, {cin, t_in});
    auto w = random_tensor(rng, {cout, cin, k});
    auto y = random_tensor(rng, {cout, t_out});
    const auto spec = spec1d(cin, cout, k, s, 0, false);
    const auto tspec = spec1d(cout, cin, k, s, 0, false);
    const double lhs = inner(conv1d(x, w, Tensor<double>(), spec), y);
    auto back = conv_transpose1d(y, w, Tensor<double>(), tspec);
    // conv_transpose covers (t_out - 1) * s + k samples; the rest of x sees no tap.
    double rhs = 0.0;
    for (std::size_t c = 0; c < cin; ++c)
      for (std::size_t t = 0; t < back.dim(1); ++t) rhs += x.at(c, t) * back.at(c, t);
    worst = std::max(worst, test::rel_error(lhs, rhs, 1e-12));
  }
  EXPECT_LT(worst, 1e-10);
}

TEST(Conv3d, UnitKernelIsIdentity) {
  Rng rng(1);
  auto x = random_tensor(rng, {1, 3, 4, 5});
  ConvSpec s{1, 1, {1, 1, 1}, {1, 1, 1}, {0, 0, 0}, true};
  auto y = conv3d(x, Tensor<double>({1, 1, 1, 1, 1}, 1.0), Tensor<double>({1}, 0.0), s);
  EXPECT_EQ(y, x);
}

TEST(Conv3d, OnesCubeSumsToEight) {
  ConvSpec s{1, 1, {2, 2, 2}, {1, 1, 1}, {0, 0, 0}, true};
  auto y = conv3d(Tensor<double>({1, 2, 2, 2}, 1.0), Tensor<double>({1, 1, 2, 2, 2}, 1.0),
                  Tensor<double>({1}, 0.0), s);
  ASSERT_EQ(y.dims(), (Shape{1, 1, 1, 1}));
  EXPECT_EQ(y[0], 8.0);
}

TEST(Conv3d, FrontendShape) {
  ConvSpec s{1, 16, {5, 7, 7}, {1, 2, 2}, {2, 3, 3}, true};
  auto y = conv3d(Tensor<float>({1, 16, 32, 32}, 0.5f), Tensor<float>(s.weight_shape(), 0.01f),
                  Tensor<float>({16}, 0.0f), s);
  EXPECT_EQ(y.dims(), (Shape{16, 16, 16, 16}));
}

TEST(Conv3d, TooSmallThrows) {
  ConvSpec s{1, 1, {3, 3, 3}, {1, 1, 1}, {0, 0, 0}, false};
  EXPECT_THROW(conv3d(Tensor<double>({1, 2, 4, 4}, 1.0), Tensor<double>({1, 1, 3, 3, 3}, 1.0),
                      Tensor<double>(), s),
               InputTooShortError);
}

TEST(Linear, Examples) {
  auto y = linear(Tensor<double>({2}, {1, 2}), Tensor<double>({1, 2}, {1, 1}), Tensor<double>({1}, {3}));
  EXPECT_EQ(y, Tensor<double>({1}, {6}));

  Rng rng(3);
  auto x = random_tensor(rng, {7, 4, 3});
  Tensor<double> eye({3, 3}, 0.0);
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0;
  EXPECT_EQ(linear(x, eye, Tensor<double>({3}, 0.0)), x);
  EXPECT_EQ(linear(x, random_tensor(rng, {5, 3}), Tensor<double>()).dims(), (Shape{7, 4, 5}));
  EXPECT_THROW(linear(x, random_tensor(rng, {5, 4}), Tensor<double>()), ShapeError);
}

TEST(Linear, IdentityCotangentPassesThrough) {
  Rng rng(4);
  auto x = random_tensor(rng, {3, 2});
  Tensor<double> eye({2, 2}, {1, 0, 0, 1});
  auto gy = random_tensor(rng, {3, 2});
  EXPECT_EQ(linear_vjp(x, eye, true, gy).input, gy);
}

TEST(Activation, Values) {
  auto r = activation(Activation::kRelu, Tensor<double>({2}, {-1, 2}));
  EXPECT_EQ(r, Tensor<double>({2}, {0, 2}));
  EXPECT_EQ(activation(Activation::kSigmoid, Tensor<double>({1}, 0.0))[0], 0.5);
  EXPECT_EQ(activation(Activation::kTanh, Tensor<double>({1}, 0.0))[0], 0.0);
  auto big = activation(Activation::kSigmoid, Tensor<double>({2}, {-800, 800}));
  EXPECT_TRUE(big.all_finite());
  EXPECT_EQ(big[1], 1.0);
}

TEST(FastMath, ExpMatchesLibrary) {
  double worst = 0.0;
  for (int i = -8000; i <= 8000; ++i) {
    const float x = float(i) * 0.01f;
    worst = std::max(worst, test::rel_error(numerics::exp_vec(x), std::exp(double(x))));
  }
  EXPECT_LT(worst, 1e-6);
  EXPECT_EQ(numerics::tanh_gate(0.0f), 0.0f);
}

TEST(GroupNorm, ConstantInputGivesBeta) {
  GroupNormParams<double> p{2, Tensor<double>({4}, {1, 2, 3, 4}), Tensor<double>({4}, {5, 6, 7, 8}), 1e-5};
  auto y = group_norm(Tensor<double>({4, 3}, 2.5), p);
  for (std::size_t c = 0; c < 4; ++c)
    for (std::size_t t = 0; t < 3; ++t) EXPECT_EQ(y.at(c, t), p.beta[c]);
}

TEST(GroupNorm, TwoSampleExample) {
  GroupNormParams<double> p{1, Tensor<double>({1}, 1.0), Tensor<double>({1}, 0.0), 1e-5};
  auto y = group_norm(Tensor<double>({1, 2}, {1, 3}), p);
  const double expect = 1.0 / std::sqrt(1.0 + 1e-5);
  EXPECT_NEAR(y[0], -expect, 1e-12);
  EXPECT_NEAR(y[1], expect, 1e-12);
}

TEST(GroupNorm, GroupsMustDivideChannels) {
  GroupNormParams<double> p{3, Tensor<double>({4}, 1.0), Tensor<double>({4}, 0.0), 1e-5};
  EXPECT_THROW(group_norm(Tensor<double>({4, 2}, 1.0), p), ConfigError);
}

TEST(GroupNorm, ChannelLastMatchesChannelFirst) {
  Rng rng(5);
  auto x = random_tensor(rng, {6, 10});
  GroupNormParams<double> p{3, random_tensor(rng, {6}), random_tensor(rng, {6}), 1e-5};
  auto first = group_norm(x, p, ChannelAxis::kFirst);
  auto last = group_norm(transpose2d(x), p, ChannelAxis::kLast);
  auto back = transpose2d(last);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(first[i], back[i], 1e-12);
}

TEST(GroupNorm, ScaleInvariantWhenVarianceDominatesEps) {
  Rng rng(6);
  auto x = random_tensor(rng, {4, 32});
  GroupNormParams<double> p{2, Tensor<double>({4}, 1.0), Tensor<double>({4}, 0.0), 1e-5};
  auto base = group_norm(x, p);
  for (double a : {0.5, 1.3, 2.0}) {
    Tensor<double> xs = x;
    for (auto& v : xs.data()) v *= a;
    auto y = group_norm(xs, p);
    for (std::size_t i = 0; i < y.size(); ++i) EXPECT_LT(test::rel_error(y[i], base[i], 1e-6), 1e-3);
  }
}

TEST(Resize, AlignCorners) {
  auto y = resize_linear_time(Tensor<double>({2, 1}, {0, 2}), 3);
  EXPECT_EQ(y, Tensor<double>({3, 1}, {0, 1, 2}));
  Rng rng(7);
  auto x = random_tensor(rng, {5, 3});
  EXPECT_EQ(resize_linear_time(x, 5), x);
  auto row = random_tensor(rng, {1, 4});
  auto b = resize_linear_time(row, 6);
  for (std::size_t t = 0; t < 6; ++t)
    for (std::size_t d = 0; d < 4; ++d) EXPECT_EQ(b.at(t, d), row.at(0, d));
  EXPECT_THROW(resize_linear_time(x, 0), ConfigError);
}

TEST(Lstm, ZeroParametersGiveZeroOutput) {
  Rng rng(8);
  LstmParams<float> p{{Tensor<float>({8, 5}, 0.0f), Tensor<float>({8}, 0.0f)},
                      {Tensor<float>({8, 5}, 0.0f), Tensor<float>({8}, 0.0f)}};
  auto y = bilstm_layer(random_tensor<float>(rng, {6, 3}), p);
  ASSERT_EQ(y.dims(), (Shape{6, 4}));
  for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Lstm, SingleStepMatchesCellEquations) {
  // D = 1, H = 1: rows i, f, g, o; columns [x, h].
  LstmParams<double> p{{Tensor<double>({4, 2}, {0.3, 0.1, -0.2, 0.4, 0.7, -0.5, 0.25, 0.9}),
                        Tensor<double>({4}, {0.05, 1.0, -0.1, 0.2})},
                       {Tensor<double>({4, 2}, {-0.6, 0.2, 0.1, 0.3, -0.4, 0.8, 0.5, -0.7}),
                        Tensor<double>({4}, {0.1, 1.0, 0.3, -0.2})}};
  const double x = 0.5;
  auto cell = [x](const LstmDirection<double>& d) {
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };
    const double i = sig(d.weight.at(0, 0) * x + d.bias[0]);
    const double g = std::tanh(d.weight.at(2, 0) * x + d.bias[2]);
    const double o = sig(d.weight.at(3, 0) * x + d.bias[3]);
    return o * std::tanh(i * g);
  };
  auto y = bilstm_layer(Tensor<double>({1, 1}, {x}), p);
  EXPECT_NEAR(y.at(0, 0), cell(p.forward), 1e-15);
  EXPECT_NEAR(y.at(0, 1), cell(p.backward), 1e-15);
}

TEST(Lstm, DirectionSymmetry) {
  Rng rng(9);
  const std::size_t t = 7, d = 3, h = 2;
  LstmParams<double> p{{random_tensor(rng, {4 * h, d + h}, 0.5), random_tensor(rng, {4 * h}, 0.5)},
                       {random_tensor(rng, {4 * h, d + h}, 0.5), random_tensor(rng, {4 * h}, 0.5)}};
  auto x = random_tensor(rng, {t, d});
  Tensor<double> xr(x.dims());
  for (std::size_t s = 0; s < t; ++s)
    for (std::size_t j = 0; j < d; ++j) xr.at(s, j) = x.at(t - 1 - s, j);
  LstmParams<double> swapped{p.backward, p.forward};
  auto y = bilstm_layer(x, p);
  auto yr = bilstm_layer(xr, swapped);
  for (std::size_t s = 0; s < t; ++s)
    for (std::size_t j = 0; j < h; ++j) {
      EXPECT_NEAR(yr.at(s, j), y.at(t - 1 - s, h + j), 1e-14);
      EXPECT_NEAR(yr.at(s, h + j), y.at(t - 1 - s, j), 1e-14);
    }
}

TEST(Lstm, BatchingDoesNotChangeBits) {
  Rng rng(10);
  const std::size_t b = 9, t = 11, d = 70, h = 16;
  LstmParams<float> p{{random_tensor<float>(rng, {4 * h, d + h}, 0.2), random_tensor<float>(rng, {4 * h}, 0.2)},
                      {random_tensor<float>(rng, {4 * h, d + h}, 0.2), random_tensor<float>(rng, {4 * h}, 0.2)}};
  auto x = random_tensor<float>(rng, {b, t, d});
  auto batched = bilstm(x, p);
  for (std::size_t i = 0; i < b; ++i) {
    std::vector<float> row(x.ptr() + i * t * d, x.ptr() + (i + 1) * t * d);
    auto single = bilstm_layer(Tensor<float>({t, d}, row), p);
    for (std::size_t k = 0; k < single.size(); ++k) ASSERT_EQ(single[k], batched[i * single.size() + k]);
  }
}

TEST(Gemm, RowResultsIndependentOfBatch) {
  Rng rng(12);
  const std::size_t m = 13, k = 37, n = 150;
  auto a = random_tensor<float>(rng, {m, k});
  auto b = random_tensor<float>(rng, {k, n});
  std::vector<float> all(m * n, 0.0f);
  gemm_acc(m, k, n, a.ptr(), k, b.ptr(), n, all.data(), n);
  for (std::size_t r = 0; r < m; ++r) {
    std::vector<float> one(n, 0.0f);
    gemm_acc(std::size_t{1}, k, n, a.ptr() + r * k, k, b.ptr(), n, one.data(), n);
    for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(one[j], all[r * n + j]);
  }
}

TEST(Layout, SegmentOverlapAddRoundTrip) {
  Rng rng(13);
  double worst = 0.0;
  for (std::size_t t = 1; t <= 300; ++t) {
    auto x = random_tensor(rng, {3, t});
    const auto plan = ChunkPlan::make(t, 100, 50);
    auto y = overlap_add(segment(x, plan), plan);
    ASSERT_EQ(y.dims(), x.dims());
    for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(y[i] - x[i]));
  }
  EXPECT_LT(worst, 1e-12);
}

// ---------------------------------------------------------------------------
// Every vector-Jacobian product against central differences, 64-bit.

namespace {

constexpr double kOpTolerance = 1e-4;

/// L = <u, f()> for a fixed random upstream u.
struct Probe {
  Tensor<double> upstream;
  std::function<Tensor<double>()> f;
  double operator()() const { return dot(upstream, f()); }
};

}  // namespace

TEST(Vjp, Conv1d) {
  Rng rng(20);
  auto spec = spec1d(2, 3, 4, 2, 1);
  auto x = random_tensor(rng, {2, 11}), w = random_tensor(rng, spec.weight_shape()), b = random_tensor(rng, {3});
  Probe L{{}, [&] { return conv1d(x, w, b, spec); }};
  L.upstream = random_tensor(rng, L.f().dims());
  auto g = conv1d_vjp(x, w, spec, L.upstream);
  EXPECT_LT(fd_max_error(x, g.input, L), kOpTolerance);
  EXPECT_LT(fd_max_error(w, g.weight, L), kOpTolerance);
  EXPECT_LT(fd_max_error(b, g.bias, L), kOpTolerance);
}

TEST(Vjp, ConvTranspose1d) {
  Rng rng(21);
  auto spec = spec1d(3, 2, 5, 3);
  auto x = random_tensor(rng, {3, 6}), w = random_tensor(rng, spec.transposed_weight_shape()),
       b = random_tensor(rng, {2});
  Probe L{{}, [&] { return conv_transpose1d(x, w, b, spec); }};
  L.upstream = random_tensor(rng, L.f().dims());
  auto g = conv_transpose1d_vjp(x, w, spec, L.upstream);
  EXPECT_LT(fd_max_error(x, g.input, L), kOpTolerance);
  EXPECT_LT(fd_max_error(w, g.weight, L), kOpTolerance);
  EXPECT_LT(fd_max_error(b, g.bias, L), kOpTolerance);
}

TEST(Vjp, Conv3d) {
  Rng rng(22);
  ConvSpec spec{2, 3, {3, 3, 2}, {1, 2, 1}, {1, 1, 0}, true};
  auto x = random_tensor(rng, {2, 3, 5, 4}), w = random_tensor(rng, spec.weight_shape()),
       b = random_tensor(rng, {3});
  Probe L{{}, [&] { return conv3d(x, w, b, spec); }};
  L.upstream = random_tensor(rng, L.f().dims());
  auto g = conv3d_vjp(x, w, spec, L.upstream);
  EXPECT_LT(fd_max_error(x, g.input, L), kOpTolerance);
  EXPECT_LT(fd_max_error(w, g.weight, L), kOpTolerance);
  EXPECT_LT(fd_max_error(b, g.bias, L), kOpTolerance);
}

TEST(Vjp, Linear) {
  Rng rng(23);
  auto x = random_tensor(rng, {2, 3, 4}), w = random_tensor(rng, {5, 4}), b = random_tensor(rng, {5});
  Probe L{{}, [&] { return linear(x, w, b); }};
  L.upstream = random_tensor(rng, {2, 3, 5});
  auto g = linear_vjp(x, w, true, L.upstream);
  EXPECT_LT(fd_max_error(x, g.input, L), kOpTolerance);
  EXPECT_LT(fd_max_error(w, g.weight, L), kOpTolerance);
  EXPECT_LT(fd_max_error(b, g.bias, L), kOpTolerance);
}

TEST(Vjp, Activations) {
  for (auto kind : {Activation::kRelu, Activation::kSigmoid, Activation::kTanh}) {
    Rng rng(24);
    auto x = random_tensor(rng, {3, 5});
    for (auto& v : x.data())
      if (std::abs(v) < 0.05) v += 0.1;  // keep clear of the ReLU kink
    Probe L{random_tensor(rng, {3, 5}), [&] { return activation(kind, x); }};
    auto gx = activation_vjp(kind, activation(kind, x), L.upstream);
    EXPECT_LT(fd_max_error(x, gx, L), kOpTolerance) << to_string(kind);
  }
}

TEST(Vjp, BiLstm) {
  Rng rng(25);
  const std::size_t b = 2, t = 5, d = 3, h = 4;
  LstmParams<double> p{{random_tensor(rng, {4 * h, d + h}, 0.5), random_tensor(rng, {4 * h}, 0.5)},
                       {random_tensor(rng, {4 * h, d + h}, 0.5), random_tensor(rng, {4 * h}, 0.5)}};
  auto x = random_tensor(rng, {b, t, d});
  Probe L{random_tensor(rng, {b, t, 2 * h}), [&] { return bilstm(x, p); }};
  BiLstmCache<double> cache;
  auto y = bilstm(x, p, &cache);
  auto g = bilstm_vjp(x, p, cache, y, L.upstream);
  EXPECT_LT(fd_max_error(x, g.input, L), kOpTolerance);
  EXPECT_LT(fd_max_error(p.forward.weight, g.params.forward.weight, L), kOpTolerance);
  EXPECT_LT(fd_max_error(p.forward.bias, g.params.forward.bias, L), kOpTolerance);
  EXPECT_LT(fd_max_error(p.backward.weight, g.params.backward.weight, L), kOpTolerance);
  EXPECT_LT(fd_max_error(p.backward.bias, g.params.backward.bias, L), kOpTolerance);
}

TEST(Vjp, GroupNormBothLayouts) {
  for (auto axis : {ChannelAxis::kFirst, ChannelAxis::kLast}) {
    Rng rng(26);
    auto x = random_tensor(rng, axis == ChannelAxis::kFirst ? Shape{4, 2, 3} : Shape{2, 3, 4});
    GroupNormParams<double> p{2, random_tensor(rng, {4}), random_tensor(rng, {4}), 1e-5};
    Probe L{random_tensor(rng, x.dims()), [&] { return group_norm(x, p, axis); }};
    GroupNormCache<double> cache;
    group_norm(x, p, axis, &cache);
    auto g = group_norm_vjp(p, cache, L.upstream, axis);
    EXPECT_LT(fd_max_error(x, g.input, L), kOpTolerance);
    EXPECT_LT(fd_max_error(p.gamma, g.gamma, L), kOpTolerance);
    EXPECT_LT(fd_max_error(p.beta, g.beta, L), kOpTolerance);
  }
}

TEST(Vjp, ResizeAndLayout) {
  Rng rng(27);
  auto x = random_tensor(rng, {4, 3});
  Probe resize{random_tensor(rng, {9, 3}), [&] { return resize_linear_time(x, 9); }};
  EXPECT_LT(fd_max_error(x, resize_linear_time_vjp(x.dims(), resize.upstream), resize), kOpTolerance);

  auto s = random_tensor(rng, {3, 23});
  const auto plan = ChunkPlan::make(23, 8, 4);
  Probe seg{random_tensor(rng, {plan.count, 8, 3}), [&] { return segment(s, plan); }};
  EXPECT_LT(fd_max_error(s, segment_vjp(seg.upstream, plan), seg), kOpTolerance);

  auto c = random_tensor(rng, {plan.count, 8, 3});
  Probe ola{random_tensor(rng, {3, 23}), [&] { return overlap_add(c, plan); }};
  EXPECT_LT(fd_max_error(c, overlap_add_vjp(ola.upstream, plan), ola), kOpTolerance);

  auto v = random_tensor(rng, {2, 3, 4, 5});
  Probe pool{random_tensor(rng, {3, 2}), [&] { return spatial_mean(v); }};
  EXPECT_LT(fd_max_error(v, spatial_mean_vjp(v.dims(), pool.upstream), pool), kOpTolerance);
}

TEST(Vjp, ZeroUpstreamGivesZeroCotangents) {
  Rng rng(28);
  auto spec = spec1d(2, 2, 3, 1);
  auto x = random_tensor(rng, {2, 6}), w = random_tensor(rng, spec.weight_shape());
  auto g = conv1d_vjp(x, w, spec, Tensor<double>({2, 4}, 0.0));
  for (double v : g.input.data()) EXPECT_EQ(v, 0.0);
  for (double v : g.weight.data()) EXPECT_EQ(v, 0.0);
}
