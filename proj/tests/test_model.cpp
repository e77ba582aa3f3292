#include <gtest/gtest.h>

#include <cmath>

#include "avse/model/network.hpp"
#include "support.hpp"

using namespace avse;
using namespace avse::model;
using avse::test::random_tensor;

namespace {

Tensor<float> frames_for(const ModelConfig& c, std::size_t f, std::uint64_t seed) {
  Rng rng(seed);
  Tensor<float> t({f, 1, c.frame_height, c.frame_width});
  for (auto& v : t.data()) v = float(rng.uniform());
  return t;
}

Tensor<float> wave_for(std::size_t t, std::uint64_t seed) {
  Rng rng(seed);
  return random_tensor<float>(rng, {t}, 0.3);
}

void zero_separator(ModelParams<float>& p) {
  for (auto& [name, t] : p.tensors)
    if (name.rfind("sep.", 0) == 0 || name.rfind("mask.", 0) == 0) t.fill(0.0f);
}

}  // namespace

TEST(ParameterCount, DefaultConfigGolden) {
  const auto c = ModelConfig::full();
  EXPECT_EQ(count_parameters(c), 4626881u);
  EXPECT_GE(count_parameters(c), 4500000u);
  EXPECT_LE(count_parameters(c), 5700000u);
}

TEST(ParameterCount, EncoderAlone) {
  const auto s = encoder_spec(ModelConfig::full());
  EXPECT_EQ(s.parameter_count(), 4352u);
}

TEST(ParameterCount, AdditiveOverNamedTensors) {
  const auto c = ModelConfig::full();
  std::size_t sum = 0;
  for (const auto& spec : parameter_table(c)) sum += shape_size(spec.shape);
  EXPECT_EQ(sum, count_parameters(c));
  EXPECT_EQ(init_parameters<float>(ModelConfig::tiny(), 0).count(), count_parameters(ModelConfig::tiny()));
}

TEST(Init, DeterministicPerSeed) {
  const auto c = ModelConfig::tiny();
  EXPECT_EQ(init_parameters<float>(c, 5), init_parameters<float>(c, 5));
  EXPECT_FALSE(init_parameters<float>(c, 5) == init_parameters<float>(c, 6));
}

TEST(Config, JsonRoundTripAndValidation) {
  auto c = ModelConfig::small();
  nlohmann::json j = c;
  ModelConfig back = j.get<ModelConfig>();
  EXPECT_EQ(nlohmann::json(back), j);
  EXPECT_THROW(nlohmann::json({{"bogus", 1}}).get<ModelConfig>(), SchemaError);
  c.chunk_hop = 3;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(init_parameters<float>(c, 0), ConfigError);
}

TEST(Encoder, ShapesAndBoundary) {
  const auto c = ModelConfig::full();
  auto p = init_parameters<float>(c, 1);
  auto a = encode_audio(wave_for(16000, 1), p, c);
  EXPECT_EQ(a.dims(), (Shape{256, 1999}));
  for (float v : a.data()) ASSERT_GE(v, 0.0f);
  EXPECT_EQ(encode_audio(wave_for(16, 2), p, c).dims(), (Shape{256, 1}));
  EXPECT_THROW(encode_audio(wave_for(15, 2), p, c), InputTooShortError);
}

TEST(Encoder, ZeroWaveZeroBiasGivesZeroMap) {
  const auto c = ModelConfig::tiny();
  auto p = init_parameters<float>(c, 1);
  p.at("encoder.bias").fill(0.0f);
  auto a = encode_audio(Tensor<float>({64}, 0.0f), p, c);
  for (float v : a.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Decoder, ShapesAndZeroMap) {
  const auto c = ModelConfig::full();
  auto p = init_parameters<float>(c, 1);
  EXPECT_EQ(decode_audio(Tensor<float>({256, 1999}, 0.1f), p, c).dims(), (Shape{16000}));
  EXPECT_EQ(decode_audio(Tensor<float>({256, 1}, 0.1f), p, c).dims(), (Shape{16}));
  p.at("decoder.bias").fill(0.0f);
  auto y = decode_audio(Tensor<float>({256, 3}, 0.0f), p, c);
  for (float v : y.data()) EXPECT_EQ(v, 0.0f);
}

TEST(Visual, FramesInEqualsRowsOut) {
  const auto c = ModelConfig::full();
  auto p = init_parameters<float>(c, 2);
  auto e = visual_forward(frames_for(c, 3, 1), p, c);
  EXPECT_EQ(e.dims(), (Shape{3, 256}));
  EXPECT_THROW(visual_forward(Tensor<float>({2, 2, 32, 32}, 0.0f), p, c), ShapeError);
}

TEST(Visual, ConstantInTimeGivesEqualInteriorRows) {
  const auto c = ModelConfig::tiny();
  auto p = init_parameters<float>(c, 3);
  auto one = frames_for(c, 1, 4);
  const std::size_t f = 9, hw = c.frame_height * c.frame_width;
  Tensor<float> frames({f, 1, c.frame_height, c.frame_width});
  for (std::size_t t = 0; t < f; ++t)
    for (std::size_t i = 0; i < hw; ++i) frames[t * hw + i] = one[i];
  auto e = visual_forward(frames, p, c);
  const std::size_t pad = c.frontend_padding[0];
  for (std::size_t t = pad + 1; t + pad < f; ++t)
    for (std::size_t d = 0; d < c.visual_embed; ++d) EXPECT_EQ(e.at(t, d), e.at(pad, d));
}

TEST(Fusion, ShapeAndIdentityResize) {
  const auto c = ModelConfig::full();
  auto p = init_parameters<float>(c, 4);
  Rng rng(5);
  auto fused = fuse(random_tensor<float>(rng, {256, 1999}), random_tensor<float>(rng, {25, 256}), p, c);
  EXPECT_EQ(fused.dims(), (Shape{256, 1999}));

  // With F == T_a the visual rows enter the bottleneck unchanged: a bottleneck
  // that only reads visual channel N + d returns row d of the embedding.
  const auto t = ModelConfig::tiny();
  auto q = init_parameters<float>(t, 6);
  q.at("fusion.weight").fill(0.0f);
  q.at("fusion.bias").fill(0.0f);
  for (std::size_t d = 0; d < t.visual_embed; ++d) q.at("fusion.weight").at(d, t.enc_channels + d, 0) = 1.0f;
  auto audio = random_tensor<float>(rng, {t.enc_channels, 5});
  Tensor<float> embed({5, t.visual_embed});
  for (auto& v : embed.data()) v = float(rng.uniform());
  auto y = fuse(audio, embed, q, t);
  for (std::size_t d = 0; d < t.visual_embed; ++d)
    for (std::size_t s = 0; s < 5; ++s) EXPECT_EQ(y.at(d, s), embed.at(s, d));
}

TEST(Separator, MaskBoundedAndZeroNetworkNeutral) {
  const auto c = ModelConfig::full();
  auto p = init_parameters<float>(c, 7);
  Rng rng(8);
  auto fused = random_tensor<float>(rng, {256, 321}, 3.0);
  auto m = separator_forward(fused, p, c);
  EXPECT_EQ(m.dims(), fused.dims());
  for (float v : m.data()) {
    ASSERT_GE(v, 0.0f);
    ASSERT_LE(v, 1.0f);
  }
  zero_separator(p);
  auto neutral = separator_forward(fused, p, c);
  for (float v : neutral.data()) ASSERT_EQ(v, 0.5f);
}

TEST(ApplyMask, Identities) {
  Rng rng(9);
  auto a = random_tensor<float>(rng, {4, 6});
  EXPECT_EQ(apply_mask(a, Tensor<float>({4, 6}, 1.0f)), a);
  auto zero = apply_mask(a, Tensor<float>({4, 6}, 0.0f));
  for (float v : zero.data()) EXPECT_EQ(std::abs(v), 0.0f);
  EXPECT_THROW(apply_mask(a, Tensor<float>({6, 4}, 1.0f)), ShapeError);
}

TEST(Enhance, PreservesLengthDefaultConfig) {
  const auto c = ModelConfig::full();
  auto p = init_parameters<float>(c, 10);
  for (std::size_t t : {16u, 1000u, 16000u, 16007u}) {
    auto y = enhance(wave_for(t, t), frames_for(c, 3, t), p, c);
    EXPECT_EQ(y.dims(), (Shape{t})) << t;
    EXPECT_TRUE(y.all_finite());
  }
}

TEST(Enhance, PreservesLengthForEveryShortInput) {
  const auto c = ModelConfig::tiny();
  auto p = init_parameters<float>(c, 11);
  for (std::size_t t = 16; t <= 200; ++t)
    ASSERT_EQ(enhance(wave_for(t, t), frames_for(c, 2, t), p, c).size(), t);
  EXPECT_THROW(enhance(wave_for(15, 1), frames_for(c, 2, 1), p, c), InputTooShortError);
}

TEST(Enhance, Deterministic) {
  const auto c = ModelConfig::small();
  auto p = init_parameters<float>(c, 12);
  auto w = wave_for(4000, 1);
  auto f = frames_for(c, 6, 2);
  EXPECT_EQ(enhance(w, f, p, c), enhance(w, f, p, c));
}

TEST(Enhance, OpenMaskWithAdjointDecoderCorrelatesWithInput) {
  const auto c = ModelConfig::tiny();
  auto p = init_parameters<float>(c, 13);
  p.at("mask.weight").fill(0.0f);
  p.at("mask.bias").fill(20.0f);
  p.at("encoder.bias").fill(0.0f);
  p.at("decoder.bias").fill(0.0f);
  p.at("decoder.weight") = p.at("encoder.weight");
  auto w = wave_for(2000, 14);
  auto y = enhance(w, frames_for(c, 3, 15), p, c);
  EXPECT_GT(dot(w, y), 0.0);
}

TEST(Network, RecordingAndValueForwardAgree) {
  const auto c = ModelConfig::tiny();
  auto p = init_parameters<float>(c, 16);
  auto w = wave_for(300, 17);
  auto f = frames_for(c, 2, 18);
  ad::Graph<float> g(true);
  Network<float> net(g, c, p);
  auto y = net.enhance(g.constant(w), g.constant(f));
  EXPECT_EQ(y->value, enhance(w, f, p, c));
  EXPECT_GT(g.tape_size(), 0u);
}
