#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "dialect/corpus.hpp"
#include "dialect/encoder.hpp"
#include "dialect/recognizers.hpp"

namespace dialect::testing {

struct GradientCheck {
  double relative_error = 0.0;  // ||analytic - numeric|| / (||analytic|| + ||numeric||)
  double max_abs_diff = 0.0;
  std::size_t checked = 0;
};

// Central differences over every encoder and head parameter on a small
// multihead problem with a five-token input.
inline GradientCheck check_tiny_encoder_gradients(std::size_t dimension = 6,
                                                  std::uint64_t seed = 3) {
  Vocabulary vocab;
  const std::vector<std::string> text = tokenize("my parents from gujarat only");
  const std::vector<std::string> other = tokenize("the road is very narrow");
  vocab.add_all(text);
  vocab.add_all(other);

  EncoderSpec spec;
  spec.dimension = dimension;
  TinyEncoder encoder(spec, vocab, seed);
  ParameterSet heads = make_heads(2, dimension, seed + 1);

  std::vector<TrainingItem> items(2);
  items[0].input = build_input(vocab, UnknownPolicy::strict, text, 16);
  items[0].targets = {{0, 1.0}, {1, 0.0}};
  items[1].input = build_input(vocab, UnknownPolicy::strict, other, 16);
  items[1].targets = {{0, 0.0}, {1, 1.0}};

  ParameterSet enc_grads = encoder.parameters().zeros_like();
  ParameterSet head_grads = heads.zeros_like();
  accumulate_gradients(encoder, heads, items, enc_grads, head_grads);

  const double h = 1e-5;
  double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
  GradientCheck out;
  auto probe = [&](ParameterSet& params, const ParameterSet& grads) {
    for (std::size_t b = 0; b < params.blocks().size(); ++b) {
      auto& values = params[b].values;
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double saved = values[i];
        values[i] = saved + h;
        const double up = evaluate_loss(encoder, heads, items);
        values[i] = saved - h;
        const double down = evaluate_loss(encoder, heads, items);
        values[i] = saved;
        const double numeric = (up - down) / (2.0 * h);
        const double analytic = grads[b].values[i];
        diff2 += (analytic - numeric) * (analytic - numeric);
        a2 += analytic * analytic;
        n2 += numeric * numeric;
        out.max_abs_diff = std::max(out.max_abs_diff, std::abs(analytic - numeric));
        ++out.checked;
      }
    }
  };
  probe(encoder.parameters(), enc_grads);
  probe(heads, head_grads);
  out.relative_error = std::sqrt(diff2) / (std::sqrt(a2) + std::sqrt(n2));
  return out;
}

}  // namespace dialect::testing
