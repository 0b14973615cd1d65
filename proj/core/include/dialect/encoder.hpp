#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace dialect {

enum class EncoderKind { tiny, external };
enum class UnknownPolicy { fallback, strict };

std::string_view to_string(EncoderKind kind);
EncoderKind encoder_kind_from_string(std::string_view name);
std::string_view to_string(UnknownPolicy policy);
UnknownPolicy unknown_policy_from_string(std::string_view name);

struct EncoderSpec {
  EncoderKind kind = EncoderKind::tiny;
  std::size_t dimension = 64;
  UnknownPolicy unknown_policy = UnknownPolicy::fallback;
  std::size_t max_length = 256;
  // For external encoders: "<scheme>:<location>", resolved through
  // register_external_encoder().
  std::string locator;

  // Throws ConfigError unless dimension >= 1 and max_length >= 2.
  void validate() const;
};

using TokenId = std::uint32_t;

// Token <-> id map. Ids 0..2 are the control tokens.
class Vocabulary {
 public:
  static constexpr TokenId kSummary = 0;
  static constexpr TokenId kSeparator = 1;
  static constexpr TokenId kUnknown = 2;
  static constexpr std::size_t kControlCount = 3;

  Vocabulary();

  // Returns the existing id when the token is already present.
  TokenId add(std::string_view token);
  void add_all(std::span<const std::string> tokens);

  bool contains(std::string_view token) const;
  // Unknown tokens map to kUnknown under the fallback policy and raise
  // VocabularyError under the strict policy.
  TokenId lookup(std::string_view token, UnknownPolicy policy) const;
  const std::string& token(TokenId id) const { return tokens_.at(id); }
  std::size_t size() const noexcept { return tokens_.size(); }
  static bool is_control(TokenId id) noexcept { return id < kControlCount; }

  // Order-sensitive FNV-1a fingerprint of the token list.
  std::uint64_t hash() const;
  std::span<const std::string> tokens() const noexcept { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

// Token ids for one model input. The first id is always the summary token.
struct EncodedInput {
  std::vector<TokenId> ids;
  std::size_t prefix_length = 0;  // tokens of the prefix segment kept
  std::size_t text_length = 0;    // tokens of the text segment kept
  std::size_t truncated = 0;      // text (then prefix) tokens dropped

  std::size_t length() const noexcept { return ids.size(); }
};

// [SUMMARY] text [SEP]
EncodedInput build_input(const Vocabulary& vocab, UnknownPolicy policy,
                         std::span<const std::string> text,
                         std::size_t max_length);
// [SUMMARY] prefix [SEP] text [SEP]
EncodedInput build_input(const Vocabulary& vocab, UnknownPolicy policy,
                         std::span<const std::string> text,
                         std::span<const std::string> prefix,
                         std::size_t max_length);

// Space-joined token strings, for inspection.
std::string render(const Vocabulary& vocab, const EncodedInput& input);

// A named dense block (rows x cols, row-major).
struct ParameterBlock {
  std::string name;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

class ParameterSet {
 public:
  std::size_t add(std::string name, std::size_t rows, std::size_t cols);
  std::vector<ParameterBlock>& blocks() noexcept { return blocks_; }
  const std::vector<ParameterBlock>& blocks() const noexcept { return blocks_; }
  ParameterBlock& operator[](std::size_t i) { return blocks_[i]; }
  const ParameterBlock& operator[](std::size_t i) const { return blocks_[i]; }
  std::size_t scalar_count() const;
  ParameterSet zeros_like() const;
  void set_zero();

  friend bool operator==(const ParameterSet& a, const ParameterSet& b);

 private:
  std::vector<ParameterBlock> blocks_;
};

// Versioned little-endian binary format for parameter sets.
void write_parameters(std::ostream& out, const ParameterSet& params);
ParameterSet read_parameters(std::istream& in);

// Activations retained by forward() for the matching backward() call.
class EncoderTrace {
 public:
  virtual ~EncoderTrace() = default;
};

// Maps an EncodedInput to a summary vector of spec().dimension values.
// Inference (encode) is const and safe to call concurrently; training goes
// through forward/backward and mutable parameters().
class SequenceEncoder {
 public:
  virtual ~SequenceEncoder() = default;

  virtual const EncoderSpec& spec() const = 0;
  virtual const Vocabulary& vocabulary() const = 0;
  std::size_t dimension() const { return spec().dimension; }

  virtual std::vector<double> encode(const EncodedInput& input) const = 0;
  virtual std::vector<double> forward(const EncodedInput& input,
                                      std::unique_ptr<EncoderTrace>& trace) const = 0;
  // Accumulates d(loss)/d(parameters) into grads, given d(loss)/d(summary).
  virtual void backward(const EncoderTrace& trace,
                        std::span<const double> grad_summary,
                        ParameterSet& grads) const = 0;

  virtual ParameterSet& parameters() = 0;
  virtual const ParameterSet& parameters() const = 0;

  virtual std::unique_ptr<SequenceEncoder> clone() const = 0;

  // Writes encoder.bin (vocabulary + parameters) and encoder.manifest.
  virtual void save(const std::filesystem::path& dir) const;

  // Tokenizes text and builds an input sized for this encoder.
  EncodedInput prepare(std::string_view text) const;
  EncodedInput prepare(std::string_view text, std::string_view prefix) const;
};

// Learned embeddings, mean pooling over non-control positions, then two
// tanh feed-forward layers.
class TinyEncoder final : public SequenceEncoder {
 public:
  enum Block : std::size_t { kEmbedding = 0, kW1, kB1, kW2, kB2 };

  TinyEncoder(EncoderSpec spec, Vocabulary vocab, std::uint64_t seed);
  TinyEncoder(EncoderSpec spec, Vocabulary vocab, ParameterSet params);

  const EncoderSpec& spec() const override { return spec_; }
  const Vocabulary& vocabulary() const override { return vocab_; }
  std::vector<double> encode(const EncodedInput& input) const override;
  std::vector<double> forward(const EncodedInput& input,
                              std::unique_ptr<EncoderTrace>& trace) const override;
  void backward(const EncoderTrace& trace, std::span<const double> grad_summary,
                ParameterSet& grads) const override;
  ParameterSet& parameters() override { return params_; }
  const ParameterSet& parameters() const override { return params_; }
  std::unique_ptr<SequenceEncoder> clone() const override;

 private:
  EncoderSpec spec_;
  Vocabulary vocab_;
  ParameterSet params_;
};

using ExternalEncoderFactory = std::function<std::unique_ptr<SequenceEncoder>(
    const EncoderSpec& spec, const Vocabulary& vocab, std::uint64_t seed)>;

// Adapter point for user-supplied encoders (e.g. a pretrained transformer).
// The scheme is the locator text before the first ':'.
void register_external_encoder(std::string scheme, ExternalEncoderFactory factory);
void unregister_external_encoder(const std::string& scheme);

// Constructs the encoder described by spec; external kinds go through the
// registry and raise EncoderUnavailableError when no factory matches.
std::unique_ptr<SequenceEncoder> make_encoder(const EncoderSpec& spec,
                                              const Vocabulary& vocab,
                                              std::uint64_t seed);
std::unique_ptr<SequenceEncoder> load_encoder(const std::filesystem::path& dir);

// Key/value lines (kind, dimension, vocabulary hash, max length, ...).
std::string encoder_manifest(const SequenceEncoder& encoder);

}  // namespace dialect
