#include <cmath>

#include "dialect/encoder.hpp"
#include "dialect/error.hpp"
#include "dialect/rng.hpp"

namespace dialect {

namespace {

struct TinyTrace final : EncoderTrace {
  std::vector<TokenId> pooled_ids;  // non-control positions
  std::vector<double> pooled;       // mean embedding
  std::vector<double> hidden;       // tanh(W1 pooled + b1)
  std::vector<double> output;       // tanh(W2 hidden + b2)
};

// y = tanh(W x + b) for a square W stored row-major.
void dense_tanh(const ParameterBlock& w, const ParameterBlock& b,
                const std::vector<double>& x, std::vector<double>& y) {
  const std::size_t d = w.rows;
  y.assign(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    double acc = b.values[r];
    const double* row = w.values.data() + r * w.cols;
    for (std::size_t c = 0; c < w.cols; ++c) acc += row[c] * x[c];
    y[r] = std::tanh(acc);
  }
}

void check_shapes(const ParameterSet& params, std::size_t d, std::size_t vocab) {
  const auto& b = params.blocks();
  const bool ok = b.size() == 5 && b[TinyEncoder::kEmbedding].rows == vocab &&
                  b[TinyEncoder::kEmbedding].cols == d &&
                  b[TinyEncoder::kW1].rows == d && b[TinyEncoder::kW1].cols == d &&
                  b[TinyEncoder::kB1].rows == d && b[TinyEncoder::kW2].rows == d &&
                  b[TinyEncoder::kW2].cols == d && b[TinyEncoder::kB2].rows == d;
  if (!ok) throw ArtifactError("tiny encoder parameters have the wrong shapes");
}

}  // namespace

TinyEncoder::TinyEncoder(EncoderSpec spec, Vocabulary vocab, std::uint64_t seed)
    : spec_(std::move(spec)), vocab_(std::move(vocab)) {
  spec_.validate();
  const std::size_t d = spec_.dimension;
  params_.add("embedding", vocab_.size(), d);
  params_.add("ff1.weight", d, d);
  params_.add("ff1.bias", d, 1);
  params_.add("ff2.weight", d, d);
  params_.add("ff2.bias", d, 1);

  Rng rng(seed);
  for (double& v : params_[kEmbedding].values) v = rng.normal();
  // Glorot-uniform for the square layers.
  const double limit = std::sqrt(6.0 / static_cast<double>(2 * d));
  for (std::size_t block : {kW1, kW2}) {
    for (double& v : params_[block].values) v = rng.uniform(-limit, limit);
  }
}

TinyEncoder::TinyEncoder(EncoderSpec spec, Vocabulary vocab, ParameterSet params)
    : spec_(std::move(spec)), vocab_(std::move(vocab)), params_(std::move(params)) {
  spec_.validate();
  check_shapes(params_, spec_.dimension, vocab_.size());
}

std::vector<double> TinyEncoder::encode(const EncodedInput& input) const {
  std::unique_ptr<EncoderTrace> trace;
  return forward(input, trace);
}

std::vector<double> TinyEncoder::forward(const EncodedInput& input,
                                         std::unique_ptr<EncoderTrace>& trace) const {
  if (input.ids.empty() || input.ids.front() != Vocabulary::kSummary) {
    throw ConfigError("encoded input must start with the summary token");
  }
  const std::size_t d = spec_.dimension;
  auto t = std::make_unique<TinyTrace>();
  t->pooled.assign(d, 0.0);
  const ParameterBlock& emb = params_[kEmbedding];
  for (TokenId id : input.ids) {
    if (Vocabulary::is_control(id)) continue;
    if (id >= emb.rows) {
      throw VocabularyError("token id " + std::to_string(id) +
                            " is outside the embedding table");
    }
    t->pooled_ids.push_back(id);
    const double* row = emb.values.data() + static_cast<std::size_t>(id) * d;
    for (std::size_t c = 0; c < d; ++c) t->pooled[c] += row[c];
  }
  if (!t->pooled_ids.empty()) {
    const double inv = 1.0 / static_cast<double>(t->pooled_ids.size());
    for (double& v : t->pooled) v *= inv;
  }
  dense_tanh(params_[kW1], params_[kB1], t->pooled, t->hidden);
  dense_tanh(params_[kW2], params_[kB2], t->hidden, t->output);
  std::vector<double> out = t->output;
  trace = std::move(t);
  return out;
}

void TinyEncoder::backward(const EncoderTrace& trace_base,
                           std::span<const double> grad_summary,
                           ParameterSet& grads) const {
  const auto& t = dynamic_cast<const TinyTrace&>(trace_base);
  const std::size_t d = spec_.dimension;
  const ParameterBlock& w1 = params_[kW1];
  const ParameterBlock& w2 = params_[kW2];

  std::vector<double> g_a2(d);
  for (std::size_t i = 0; i < d; ++i) {
    g_a2[i] = grad_summary[i] * (1.0 - t.output[i] * t.output[i]);
  }
  ParameterBlock& g_w2 = grads[kW2];
  ParameterBlock& g_b2 = grads[kB2];
  std::vector<double> g_hidden(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    const double g = g_a2[r];
    if (g == 0.0) continue;
    g_b2.values[r] += g;
    double* grow = g_w2.values.data() + r * d;
    const double* wrow = w2.values.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) {
      grow[c] += g * t.hidden[c];
      g_hidden[c] += g * wrow[c];
    }
  }

  std::vector<double> g_a1(d);
  for (std::size_t i = 0; i < d; ++i) {
    g_a1[i] = g_hidden[i] * (1.0 - t.hidden[i] * t.hidden[i]);
  }
  ParameterBlock& g_w1 = grads[kW1];
  ParameterBlock& g_b1 = grads[kB1];
  std::vector<double> g_pooled(d, 0.0);
  for (std::size_t r = 0; r < d; ++r) {
    const double g = g_a1[r];
    if (g == 0.0) continue;
    g_b1.values[r] += g;
    double* grow = g_w1.values.data() + r * d;
    const double* wrow = w1.values.data() + r * d;
    for (std::size_t c = 0; c < d; ++c) {
      grow[c] += g * t.pooled[c];
      g_pooled[c] += g * wrow[c];
    }
  }

  if (t.pooled_ids.empty()) return;
  const double inv = 1.0 / static_cast<double>(t.pooled_ids.size());
  ParameterBlock& g_emb = grads[kEmbedding];
  for (TokenId id : t.pooled_ids) {
    double* row = g_emb.values.data() + static_cast<std::size_t>(id) * d;
    for (std::size_t c = 0; c < d; ++c) row[c] += g_pooled[c] * inv;
  }
}

std::unique_ptr<SequenceEncoder> TinyEncoder::clone() const {
  return std::make_unique<TinyEncoder>(spec_, vocab_, params_);
}

}  // namespace dialect
