#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "dialect/encoder.hpp"
#include "dialect/error.hpp"
#include "dialect/recognizers.hpp"
#include "gradient_check.hpp"

namespace dialect {
namespace {

Vocabulary small_vocab() {
  Vocabulary v;
  v.add_all(tokenize("chair is black the"));
  return v;
}

TEST(Vocabulary, ControlTokensComeFirst) {
  const Vocabulary v = small_vocab();
  EXPECT_EQ(v.token(Vocabulary::kSummary), "[SUMMARY]");
  EXPECT_EQ(v.token(Vocabulary::kSeparator), "[SEP]");
  EXPECT_EQ(v.token(Vocabulary::kUnknown), "[UNK]");
  EXPECT_EQ(v.size(), 7u);
  EXPECT_EQ(v.lookup("chair", UnknownPolicy::strict), 3u);
  EXPECT_EQ(v.lookup("table", UnknownPolicy::fallback), Vocabulary::kUnknown);
  EXPECT_THROW(v.lookup("table", UnknownPolicy::strict), VocabularyError);
}

TEST(Vocabulary, HashDependsOnOrder) {
  Vocabulary a, b;
  a.add_all(tokenize("x y"));
  b.add_all(tokenize("y x"));
  Vocabulary c;
  c.add_all(tokenize("x y"));
  EXPECT_NE(a.hash(), b.hash());
  EXPECT_EQ(a.hash(), c.hash());
}

TEST(BuildInput, SingleSegmentLayout) {
  const Vocabulary v = small_vocab();
  const auto text = tokenize("Chair is black.");
  const EncodedInput in = build_input(v, UnknownPolicy::strict, text, 16);
  EXPECT_EQ(render(v, in), "[SUMMARY] chair is black [SEP]");
  EXPECT_EQ(in.text_length, 3u);
  EXPECT_EQ(in.truncated, 0u);
}

TEST(BuildInput, PrefixLayoutAndTruncation) {
  const Vocabulary v = small_vocab();
  const auto text = tokenize("the chair is black");
  const auto prefix = tokenize("black");
  const EncodedInput in = build_input(v, UnknownPolicy::strict, text, prefix, 16);
  EXPECT_EQ(render(v, in), "[SUMMARY] black [SEP] the chair is black [SEP]");

  // Text is cut before the prefix.
  const EncodedInput cut = build_input(v, UnknownPolicy::strict, text, prefix, 5);
  EXPECT_EQ(render(v, cut), "[SUMMARY] black [SEP] the [SEP]");
  EXPECT_EQ(cut.truncated, 3u);

  const EncodedInput single = build_input(v, UnknownPolicy::strict, text, 4);
  EXPECT_EQ(render(v, single), "[SUMMARY] the chair [SEP]");
  EXPECT_EQ(single.truncated, 2u);
  EXPECT_THROW(build_input(v, UnknownPolicy::strict, text, 1), ConfigError);
}

TEST(TinyEncoder, OutputIsBoundedAndDeterministic) {
  EncoderSpec spec;
  spec.dimension = 16;
  const TinyEncoder a(spec, small_vocab(), 9);
  const TinyEncoder b(spec, small_vocab(), 9);
  const EncodedInput in = a.prepare("the chair is black");
  const auto ha = a.encode(in);
  ASSERT_EQ(ha.size(), 16u);
  for (double x : ha) EXPECT_LT(std::abs(x), 1.0);
  EXPECT_EQ(ha, b.encode(in));
  EXPECT_EQ(a.parameters(), b.parameters());
}

TEST(TinyEncoder, PoolingIgnoresControlTokens) {
  EncoderSpec spec;
  spec.dimension = 8;
  const TinyEncoder enc(spec, small_vocab(), 1);
  const Vocabulary& v = enc.vocabulary();
  const auto text = tokenize("chair is black");
  const auto plain = enc.encode(build_input(v, UnknownPolicy::strict, text, 16));
  EncodedInput padded = build_input(v, UnknownPolicy::strict, text, 16);
  padded.ids.push_back(Vocabulary::kSeparator);
  EXPECT_EQ(plain, enc.encode(padded));
}

TEST(TinyEncoder, FiniteDifferenceGradientCheck) {
  const testing::GradientCheck g = testing::check_tiny_encoder_gradients();
  EXPECT_GT(g.checked, 0u);
  EXPECT_LE(g.relative_error, 1e-4) << "max abs diff " << g.max_abs_diff;
}

TEST(Parameters, BinaryRoundTrip) {
  EncoderSpec spec;
  spec.dimension = 5;
  const TinyEncoder enc(spec, small_vocab(), 2);
  std::stringstream buf;
  write_parameters(buf, enc.parameters());
  EXPECT_EQ(read_parameters(buf), enc.parameters());

  std::stringstream garbage("not a parameter file");
  EXPECT_THROW(read_parameters(garbage), ArtifactError);
}

TEST(Encoder, SaveAndLoad) {
  const auto dir = std::filesystem::temp_directory_path() / "dialect_encoder_roundtrip";
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  EncoderSpec spec;
  spec.dimension = 7;
  const TinyEncoder enc(spec, small_vocab(), 4);
  enc.save(dir);
  const auto back = load_encoder(dir);
  const EncodedInput in = enc.prepare("the black chair");
  EXPECT_EQ(back->encode(in), enc.encode(in));
  EXPECT_EQ(back->vocabulary().hash(), enc.vocabulary().hash());
  std::filesystem::remove_all(dir);
}

TEST(Encoder, ExternalRegistry) {
  EncoderSpec spec;
  spec.kind = EncoderKind::external;
  spec.locator = "testscheme:whatever";
  spec.dimension = 4;
  EXPECT_THROW(make_encoder(spec, small_vocab(), 0), EncoderUnavailableError);

  register_external_encoder("testscheme", [](const EncoderSpec& s, const Vocabulary& v,
                                             std::uint64_t seed) {
    EncoderSpec tiny = s;
    tiny.kind = EncoderKind::tiny;
    return std::make_unique<TinyEncoder>(tiny, v, seed);
  });
  const auto enc = make_encoder(spec, small_vocab(), 0);
  EXPECT_EQ(enc->dimension(), 4u);
  unregister_external_encoder("testscheme");
  EXPECT_THROW(make_encoder(spec, small_vocab(), 0), EncoderUnavailableError);
}

TEST(EncoderSpec, Validation) {
  EncoderSpec spec;
  spec.dimension = 0;
  EXPECT_THROW(spec.validate(), ConfigError);
  spec = EncoderSpec{};
  spec.max_length = 1;
  EXPECT_THROW(spec.validate(), ConfigError);
}

}  // namespace
}  // namespace dialect
