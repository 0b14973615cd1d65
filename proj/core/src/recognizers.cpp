#include "dialect/recognizers.hpp"

#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <unordered_map>

#include "dialect/error.hpp"
#include "dialect/io.hpp"
#include "dialect/rng.hpp"
#include "json.hpp"

namespace dialect {

namespace {

using Json = nlohmann::ordered_json;

double head_score(const ParameterSet& heads, std::size_t k,
                  const std::vector<double>& h) {
  const ParameterBlock& w = heads[0];
  const double* row = w.values.data() + k * w.cols;
  return sigmoid(heads[1].values[k] +
                 std::inner_product(row, row + w.cols, h.data(), 0.0));
}

Json hyperparams_json(const HyperParams& hp) {
  Json j;
  j["batch_size"] = hp.batch_size;
  j["epochs"] = hp.epochs;
  j["learning_rate"] = hp.learning_rate;
  j["beta1"] = hp.beta1;
  j["beta2"] = hp.beta2;
  j["epsilon"] = hp.epsilon;
  j["seed"] = hp.seed;
  return j;
}

HyperParams hyperparams_from_json(const Json& j) {
  HyperParams hp;
  hp.batch_size = j.at("batch_size").get<std::size_t>();
  hp.epochs = j.at("epochs").get<std::size_t>();
  hp.learning_rate = j.at("learning_rate").get<double>();
  hp.beta1 = j.at("beta1").get<double>();
  hp.beta2 = j.at("beta2").get<double>();
  hp.epsilon = j.at("epsilon").get<double>();
  hp.seed = j.at("seed").get<std::uint64_t>();
  return hp;
}

Json feature_json(const Feature& f) {
  Json j;
  j["feature_id"] = f.id;
  j["name"] = f.name;
  j["description"] = f.description;
  j["canonical_examples"] = f.canonical_examples;
  return j;
}

Feature feature_from_json(const Json& j) {
  Feature f;
  f.id = j.at("feature_id").get<std::string>();
  f.name = j.at("name").get<std::string>();
  f.description = j.at("description").get<std::string>();
  f.canonical_examples = j.at("canonical_examples").get<std::vector<std::string>>();
  return f;
}

// Writes the encoder, head parameters, and model.json into dir.
void save_model(const std::filesystem::path& dir, const SequenceEncoder& encoder,
                const ParameterSet& heads, Json manifest, const HyperParams& hp,
                const TrainingTrace& trace) {
  std::filesystem::create_directories(dir);
  encoder.save(dir);
  std::ostringstream bin;
  write_parameters(bin, heads);
  write_text_file(dir / "heads.bin", bin.str());
  manifest["hyperparams"] = hyperparams_json(hp);
  manifest["seed"] = hp.seed;
  manifest["epoch_loss"] = trace.epoch_loss;
  write_text_file(dir / "model.json", manifest.dump(2) + "\n");
}

Json read_manifest(const std::filesystem::path& dir) {
  try {
    return Json::parse(read_text_file(dir / "model.json"));
  } catch (const Json::exception& e) {
    throw ArtifactError("model.json: " + std::string(e.what()));
  }
}

ParameterSet read_heads(const std::filesystem::path& dir) {
  std::ifstream in = open_input(dir / "heads.bin");
  return read_parameters(in);
}

void expect_architecture(const Json& manifest, std::string_view want) {
  const std::string got = manifest.value("architecture", "");
  if (got != want) {
    throw ArtifactError("expected a " + std::string(want) + " model, found '" +
                        got + "'");
  }
}

template <typename Fn>
auto guarded(const std::filesystem::path& dir, Fn fn) {
  try {
    return fn();
  } catch (const Json::exception& e) {
    throw ArtifactError(dir.string() + "/model.json: " + e.what());
  }
}

}  // namespace

// --- Multihead ---------------------------------------------------------------

MultiheadModel::MultiheadModel(std::unique_ptr<SequenceEncoder> encoder,
                               std::vector<std::string> features,
                               ParameterSet heads, HyperParams hp,
                               TrainingTrace trace)
    : encoder_(std::move(encoder)),
      features_(std::move(features)),
      heads_(std::move(heads)),
      hp_(hp),
      trace_(std::move(trace)) {
  for (std::size_t k = 0; k < features_.size(); ++k) head_index_[features_[k]] = k;
  if (heads_.blocks().size() != 2 || heads_[0].rows != features_.size() ||
      heads_[0].cols != encoder_->dimension() || heads_[1].rows != features_.size()) {
    throw ArtifactError("head parameters do not match the feature list");
  }
}

FeatureScores MultiheadModel::score(std::string_view text) const {
  const std::vector<double> h = encoder_->encode(encoder_->prepare(text));
  FeatureScores out;
  for (std::size_t k = 0; k < features_.size(); ++k) {
    out[features_[k]] = head_score(heads_, k, h);
  }
  return out;
}

FeatureScores MultiheadModel::score(std::string_view text,
                                    std::span<const std::string> features) const {
  std::vector<std::size_t> idx;
  for (const std::string& f : features) {
    auto it = head_index_.find(f);
    if (it == head_index_.end()) {
      throw UnknownFeatureError("no trained head for feature '" + f + "'");
    }
    idx.push_back(it->second);
  }
  const std::vector<double> h = encoder_->encode(encoder_->prepare(text));
  FeatureScores out;
  for (std::size_t k : idx) out[features_[k]] = head_score(heads_, k, h);
  return out;
}

std::size_t MultiheadModel::parameter_count() const {
  return encoder_->parameters().scalar_count() + heads_.scalar_count();
}

void MultiheadModel::save(const std::filesystem::path& dir) const {
  Json m;
  m["architecture"] = "multihead";
  m["features"] = features_;
  save_model(dir, *encoder_, heads_, std::move(m), hp_, trace_);
}

MultiheadModel MultiheadModel::load(const std::filesystem::path& dir) {
  const Json m = read_manifest(dir);
  return guarded(dir, [&] {
    expect_architecture(m, "multihead");
    TrainingTrace trace{m.at("epoch_loss").get<std::vector<double>>()};
    return MultiheadModel(load_encoder(dir),
                          m.at("features").get<std::vector<std::string>>(),
                          read_heads(dir), hyperparams_from_json(m.at("hyperparams")),
                          std::move(trace));
  });
}

MultiheadModel train_multihead(const MultitaskDataset& dataset,
                               const EncoderSpec& spec, const HyperParams& hp) {
  hp.validate();
  spec.validate();
  if (dataset.empty()) throw EmptyDatasetError("multihead training set is empty");
  const std::vector<std::string>& features = dataset.features();
  std::unordered_map<std::string, std::size_t> head_of;
  for (std::size_t k = 0; k < features.size(); ++k) head_of[features[k]] = k;

  // One item per distinct text, carrying all of its feature targets.
  Vocabulary vocab;
  std::unordered_map<std::string, std::size_t> item_of;
  std::vector<std::string> texts;
  std::vector<std::vector<std::pair<std::size_t, double>>> targets;
  for (const LabeledInstance& inst : dataset.instances()) {
    auto [it, inserted] = item_of.emplace(inst.text, texts.size());
    if (inserted) {
      texts.push_back(inst.text);
      targets.emplace_back();
      vocab.add_all(tokenize(inst.text));
    }
    targets[it->second].emplace_back(head_of.at(inst.feature_id),
                                     static_cast<double>(inst.y));
  }

  auto encoder = make_encoder(spec, vocab, mix_seed(hp.seed, 1));
  std::vector<TrainingItem> items(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    items[i].input = encoder->prepare(texts[i]);
    items[i].targets = std::move(targets[i]);
  }
  ParameterSet heads =
      make_heads(features.size(), encoder->dimension(), mix_seed(hp.seed, 2));
  TrainingTrace trace = fit(*encoder, heads, items, hp);
  return MultiheadModel(std::move(encoder), features, std::move(heads), hp,
                        std::move(trace));
}

// --- DAML --------------------------------------------------------------------

std::string_view to_string(PrefixPolicy policy) {
  return policy == PrefixPolicy::name ? "name" : "name_description";
}

PrefixPolicy prefix_policy_from_string(std::string_view name) {
  if (name == "name") return PrefixPolicy::name;
  if (name == "name_description" || name == "name+description") {
    return PrefixPolicy::name_description;
  }
  throw ConfigError("unknown prefix policy '" + std::string(name) + "'");
}

std::string feature_prefix(const Feature& feature, PrefixPolicy policy) {
  if (policy == PrefixPolicy::name || feature.description.empty()) return feature.name;
  return feature.name + " " + feature.description;
}

DamlModel::DamlModel(std::unique_ptr<SequenceEncoder> encoder, ParameterSet head,
                     FeatureCatalog catalog, PrefixPolicy policy, HyperParams hp,
                     TrainingTrace trace)
    : encoder_(std::move(encoder)),
      head_(std::move(head)),
      catalog_(std::move(catalog)),
      policy_(policy),
      hp_(hp),
      trace_(std::move(trace)) {
  if (head_.blocks().size() != 2 || head_[0].rows != 1 ||
      head_[0].cols != encoder_->dimension()) {
    throw ArtifactError("DAML head must be a single vector of encoder width");
  }
}

double DamlModel::score(std::string_view text, std::string_view feature_text) const {
  return head_score(head_, 0, encoder_->encode(encoder_->prepare(text, feature_text)));
}

FeatureScores DamlModel::score(std::string_view text) const {
  return score(text, catalog_.features());
}

FeatureScores DamlModel::score(std::string_view text,
                               std::span<const Feature> features) const {
  FeatureScores out;
  for (const Feature& f : features) out[f.id] = score(text, feature_prefix(f, policy_));
  return out;
}

std::size_t DamlModel::parameter_count() const {
  return encoder_->parameters().scalar_count() + head_.scalar_count();
}

void DamlModel::save(const std::filesystem::path& dir) const {
  Json m;
  m["architecture"] = "daml";
  m["prefix_policy"] = to_string(policy_);
  Json catalog = Json::array();
  for (const Feature& f : catalog_.features()) catalog.push_back(feature_json(f));
  m["catalog"] = std::move(catalog);
  save_model(dir, *encoder_, head_, std::move(m), hp_, trace_);
}

DamlModel DamlModel::load(const std::filesystem::path& dir) {
  const Json m = read_manifest(dir);
  return guarded(dir, [&] {
    expect_architecture(m, "daml");
    std::vector<Feature> features;
    for (const Json& f : m.at("catalog")) features.push_back(feature_from_json(f));
    TrainingTrace trace{m.at("epoch_loss").get<std::vector<double>>()};
    return DamlModel(load_encoder(dir), read_heads(dir),
                     FeatureCatalog(std::move(features)),
                     prefix_policy_from_string(m.at("prefix_policy").get<std::string>()),
                     hyperparams_from_json(m.at("hyperparams")), std::move(trace));
  });
}

DamlModel train_daml(const MultitaskDataset& dataset, const FeatureCatalog& catalog,
                     const EncoderSpec& spec, const HyperParams& hp,
                     PrefixPolicy policy) {
  hp.validate();
  spec.validate();
  if (dataset.empty()) throw EmptyDatasetError("DAML training set is empty");

  Vocabulary vocab;
  std::map<std::string, std::string, std::less<>> prefix_of;
  for (const std::string& id : dataset.features()) {
    const std::string prefix = feature_prefix(catalog.at(id), policy);
    vocab.add_all(tokenize(prefix));
    prefix_of.emplace(id, prefix);
  }
  for (const LabeledInstance& inst : dataset.instances()) {
    vocab.add_all(tokenize(inst.text));
  }

  auto encoder = make_encoder(spec, vocab, mix_seed(hp.seed, 1));
  std::vector<TrainingItem> items;
  items.reserve(dataset.size());
  for (const LabeledInstance& inst : dataset.instances()) {
    TrainingItem item;
    item.input = encoder->prepare(inst.text, prefix_of.at(inst.feature_id));
    item.targets.emplace_back(0, static_cast<double>(inst.y));
    items.push_back(std::move(item));
  }
  ParameterSet head = make_heads(1, encoder->dimension(), mix_seed(hp.seed, 2));
  TrainingTrace trace = fit(*encoder, head, items, hp);
  return DamlModel(std::move(encoder), std::move(head), catalog, policy, hp,
                   std::move(trace));
}

// --- Document classifier -----------------------------------------------------

DocClassifier::DocClassifier(std::unique_ptr<SequenceEncoder> encoder,
                             ParameterSet head, std::string positive_locale,
                             std::string negative_locale, HyperParams hp,
                             TrainingTrace trace)
    : encoder_(std::move(encoder)),
      head_(std::move(head)),
      positive_locale_(std::move(positive_locale)),
      negative_locale_(std::move(negative_locale)),
      hp_(hp),
      trace_(std::move(trace)) {
  if (head_.blocks().size() != 2 || head_[0].rows != 1 ||
      head_[0].cols != encoder_->dimension()) {
    throw ArtifactError("classifier head must be a single vector of encoder width");
  }
}

double DocClassifier::probability(std::string_view text) const {
  return head_score(head_, 0, encoder_->encode(encoder_->prepare(text)));
}

void DocClassifier::save(const std::filesystem::path& dir) const {
  Json m;
  m["architecture"] = "docclf";
  m["positive_locale"] = positive_locale_;
  m["negative_locale"] = negative_locale_;
  save_model(dir, *encoder_, head_, std::move(m), hp_, trace_);
}

DocClassifier DocClassifier::load(const std::filesystem::path& dir) {
  const Json m = read_manifest(dir);
  return guarded(dir, [&] {
    expect_architecture(m, "docclf");
    TrainingTrace trace{m.at("epoch_loss").get<std::vector<double>>()};
    return DocClassifier(load_encoder(dir), read_heads(dir),
                         m.at("positive_locale").get<std::string>(),
                         m.at("negative_locale").get<std::string>(),
                         hyperparams_from_json(m.at("hyperparams")), std::move(trace));
  });
}

namespace {

std::string locale_label(const std::set<std::string>& locales, const char* fallback) {
  if (locales.empty()) return fallback;
  std::string out;
  for (const std::string& l : locales) {
    if (!out.empty()) out += '+';
    out += l;
  }
  return out;
}

}  // namespace

DocClassifier train_docclf(const Corpus& corpus_a, const Corpus& corpus_b,
                           const EncoderSpec& spec, const HyperParams& hp) {
  hp.validate();
  spec.validate();
  if (corpus_a.empty() || corpus_b.empty()) {
    throw EmptyDatasetError("document classifier needs two non-empty corpora");
  }
  const std::set<std::string> la = corpus_a.locales();
  const std::set<std::string> lb = corpus_b.locales();
  for (const std::string& l : la) {
    if (lb.contains(l)) {
      throw LocaleOverlapError("locale '" + l + "' appears in both corpora");
    }
  }

  Vocabulary vocab;
  for (const Corpus* c : {&corpus_a, &corpus_b}) {
    for (const Example& ex : c->examples()) vocab.add_all(ex.tokens);
  }
  auto encoder = make_encoder(spec, vocab, mix_seed(hp.seed, 1));
  std::vector<TrainingItem> items;
  items.reserve(corpus_a.size() + corpus_b.size());
  for (const Corpus* c : {&corpus_a, &corpus_b}) {
    const double y = c == &corpus_a ? 1.0 : 0.0;
    for (const Example& ex : c->examples()) {
      TrainingItem item;
      item.input = encoder->prepare(ex.text);
      item.targets.emplace_back(0, y);
      items.push_back(std::move(item));
    }
  }
  ParameterSet head = make_heads(1, encoder->dimension(), mix_seed(hp.seed, 2));
  TrainingTrace trace = fit(*encoder, head, items, hp);
  return DocClassifier(std::move(encoder), std::move(head), locale_label(la, "A"),
                       locale_label(lb, "B"), hp, std::move(trace));
}

// --- Shared entry points -----------------------------------------------------

FeatureScores score_features(const MultiheadModel& model, std::string_view text,
                             std::span<const std::string> features) {
  return model.score(text, features);
}

FeatureScores score_features(const DamlModel& model, std::string_view text,
                             std::span<const Feature> features) {
  return model.score(text, features);
}

std::string model_architecture(const std::filesystem::path& dir) {
  const Json m = read_manifest(dir);
  if (!m.is_object() || !m.contains("architecture") || !m["architecture"].is_string()) {
    throw ArtifactError(dir.string() + "/model.json has no architecture");
  }
  return m["architecture"].get<std::string>();
}

std::unique_ptr<FeatureDetector> load_detector(const std::filesystem::path& dir) {
  const std::string arch = model_architecture(dir);
  if (arch == "multihead") {
    return std::make_unique<MultiheadModel>(MultiheadModel::load(dir));
  }
  if (arch == "daml") return std::make_unique<DamlModel>(DamlModel::load(dir));
  throw ArtifactError("'" + arch + "' models do not detect features");
}

}  // namespace dialect
