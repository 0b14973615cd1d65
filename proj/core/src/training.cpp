#include <cmath>
#include <numeric>

#include "dialect/error.hpp"
#include "dialect/recognizers.hpp"
#include "dialect/rng.hpp"

namespace dialect {

void HyperParams::validate() const {
  if (batch_size < 1) throw HyperParamError("batch size must be >= 1");
  if (epochs < 1) throw HyperParamError("epochs must be >= 1");
  if (!(learning_rate > 0.0)) throw HyperParamError("learning rate must be > 0");
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw HyperParamError("Adam betas must lie in [0, 1)");
  }
  if (!(epsilon > 0.0)) throw HyperParamError("Adam epsilon must be > 0");
}

HyperParams HyperParams::defaults_for(EncoderKind kind) {
  HyperParams hp;
  hp.learning_rate = kind == EncoderKind::tiny ? 1e-3 : 1e-5;
  return hp;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void Adam::step(std::span<ParameterSet* const> params,
                std::span<const ParameterSet* const> grads) {
  if (m_.empty()) {
    for (ParameterSet* p : params) {
      m_.push_back(p->zeros_like());
      v_.push_back(p->zeros_like());
    }
  }
  ++t_;
  const double t = static_cast<double>(t_);
  const double correction1 = 1.0 - std::pow(hp_.beta1, t);
  const double correction2 = 1.0 - std::pow(hp_.beta2, t);
  for (std::size_t s = 0; s < params.size(); ++s) {
    auto& pblocks = params[s]->blocks();
    const auto& gblocks = grads[s]->blocks();
    for (std::size_t b = 0; b < pblocks.size(); ++b) {
      double* p = pblocks[b].values.data();
      const double* g = gblocks[b].values.data();
      double* m = m_[s][b].values.data();
      double* v = v_[s][b].values.data();
      const std::size_t n = pblocks[b].values.size();
      for (std::size_t i = 0; i < n; ++i) {
        m[i] = hp_.beta1 * m[i] + (1.0 - hp_.beta1) * g[i];
        v[i] = hp_.beta2 * v[i] + (1.0 - hp_.beta2) * g[i] * g[i];
        const double m_hat = m[i] / correction1;
        const double v_hat = v[i] / correction2;
        p[i] -= hp_.learning_rate * m_hat / (std::sqrt(v_hat) + hp_.epsilon);
      }
    }
  }
}

ParameterSet make_heads(std::size_t count, std::size_t dimension,
                        std::uint64_t seed) {
  ParameterSet heads;
  heads.add("heads.weight", count, dimension);
  heads.add("heads.bias", count, 1);
  Rng rng(seed);
  const double limit = 1.0 / std::sqrt(static_cast<double>(dimension));
  for (double& w : heads[0].values) w = rng.uniform(-limit, limit);
  return heads;
}

namespace {

// Binary cross-entropy on logit z, written to avoid overflow.
double bce_with_logit(double z, double y) {
  return std::max(z, 0.0) - y * z + std::log1p(std::exp(-std::abs(z)));
}

// Summed loss over the item's targets. When grads are given, accumulates the
// gradient of (scale * summed loss).
double item_pass(const SequenceEncoder& encoder, const ParameterSet& heads,
                 const TrainingItem& item, double scale,
                 ParameterSet* encoder_grads, ParameterSet* head_grads) {
  std::unique_ptr<EncoderTrace> trace;
  const std::vector<double> h = encoder.forward(item.input, trace);
  const std::size_t d = h.size();
  const ParameterBlock& weights = heads[0];
  const ParameterBlock& bias = heads[1];
  std::vector<double> g_h;
  if (encoder_grads) g_h.assign(d, 0.0);

  double loss = 0.0;
  for (const auto& [k, y] : item.targets) {
    const double* w = weights.values.data() + k * d;
    const double z = bias.values[k] + std::inner_product(w, w + d, h.data(), 0.0);
    loss += bce_with_logit(z, y);
    if (!encoder_grads) continue;
    const double dz = (sigmoid(z) - y) * scale;
    double* gw = (*head_grads)[0].values.data() + k * d;
    for (std::size_t i = 0; i < d; ++i) {
      gw[i] += dz * h[i];
      g_h[i] += dz * w[i];
    }
    (*head_grads)[1].values[k] += dz;
  }
  if (encoder_grads) encoder.backward(*trace, g_h, *encoder_grads);
  return loss;
}

std::size_t target_count(std::span<const TrainingItem> items) {
  std::size_t n = 0;
  for (const TrainingItem& item : items) n += item.targets.size();
  return n;
}

}  // namespace

double evaluate_loss(const SequenceEncoder& encoder, const ParameterSet& heads,
                     std::span<const TrainingItem> items) {
  const std::size_t n = target_count(items);
  if (n == 0) throw EmptyDatasetError("no training targets");
  double loss = 0.0;
  for (const TrainingItem& item : items) {
    loss += item_pass(encoder, heads, item, 0.0, nullptr, nullptr);
  }
  return loss / static_cast<double>(n);
}

void accumulate_gradients(const SequenceEncoder& encoder, const ParameterSet& heads,
                          std::span<const TrainingItem> items,
                          ParameterSet& encoder_grads, ParameterSet& head_grads) {
  const std::size_t n = target_count(items);
  if (n == 0) throw EmptyDatasetError("no training targets");
  const double scale = 1.0 / static_cast<double>(n);
  for (const TrainingItem& item : items) {
    item_pass(encoder, heads, item, scale, &encoder_grads, &head_grads);
  }
}

TrainingTrace fit(SequenceEncoder& encoder, ParameterSet& heads,
                  std::span<const TrainingItem> items, const HyperParams& hp) {
  hp.validate();
  if (items.empty() || target_count(items) == 0) {
    throw EmptyDatasetError("cannot train on an empty dataset");
  }
  ParameterSet& encoder_params = encoder.parameters();
  ParameterSet encoder_grads = encoder_params.zeros_like();
  ParameterSet head_grads = heads.zeros_like();
  ParameterSet* const params[] = {&encoder_params, &heads};
  const ParameterSet* const grads[] = {&encoder_grads, &head_grads};

  Adam adam(hp);
  Rng rng(mix_seed(hp.seed, 3));
  std::vector<std::size_t> order(items.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainingTrace trace;
  trace.epoch_loss.reserve(hp.epochs);
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    std::size_t epoch_targets = 0;
    for (std::size_t start = 0; start < order.size(); start += hp.batch_size) {
      const std::size_t end = std::min(order.size(), start + hp.batch_size);
      std::size_t batch_targets = 0;
      for (std::size_t i = start; i < end; ++i) {
        batch_targets += items[order[i]].targets.size();
      }
      if (batch_targets == 0) continue;
      encoder_grads.set_zero();
      head_grads.set_zero();
      const double scale = 1.0 / static_cast<double>(batch_targets);
      for (std::size_t i = start; i < end; ++i) {
        epoch_loss += item_pass(encoder, heads, items[order[i]], scale,
                                &encoder_grads, &head_grads);
      }
      epoch_targets += batch_targets;
      adam.step(params, grads);
    }
    trace.epoch_loss.push_back(epoch_loss / static_cast<double>(epoch_targets));
  }
  return trace;
}

}  // namespace dialect
