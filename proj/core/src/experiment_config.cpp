#include <algorithm>
#include <charconv>
#include <istream>
#include <sstream>

#include "dialect/error.hpp"
#include "dialect/experiments.hpp"
#include "dialect/io.hpp"

namespace dialect {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ' ' || c == '\t' || c == ',') {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, std::size_t line) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError("line " + std::to_string(line) + ": '" + key +
                      "' expects a number, got '" + value + "'");
  }
  return out;
}

template <typename T>
std::vector<T> parse_numbers(const std::string& key, const std::string& value,
                             std::size_t line) {
  std::vector<T> out;
  for (const std::string& w : words(value)) out.push_back(parse_number<T>(key, w, line));
  return out;
}

bool parse_bool_data(const std::string& value, std::size_t line) {
  if (value == "synthetic") return true;
  if (value == "files") return false;
  throw ConfigError("line " + std::to_string(line) +
                    ": data must be 'synthetic' or 'files'");
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::ostringstream out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ' ';
    if constexpr (std::is_floating_point_v<T>) {
      out << format_double(values[i]);
    } else {
      out << values[i];
    }
  }
  return out.str();
}

void check_members(const std::vector<std::string>& values,
                   std::initializer_list<std::string_view> allowed, const char* key) {
  if (values.empty()) throw ConfigError(std::string(key) + " must not be empty");
  for (const std::string& v : values) {
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end()) {
      throw ConfigError(std::string(key) + ": unknown value '" + v + "'");
    }
  }
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::grid: return "grid";
    case ExperimentKind::learning_curve: return "learning_curve";
    case ExperimentKind::stratified: return "stratified";
    case ExperimentKind::ddm_rank: return "ddm_rank";
    case ExperimentKind::dialect_classify: return "dialect_classify";
  }
  return "grid";
}

ExperimentKind experiment_kind_from_string(std::string_view name) {
  if (name == "grid") return ExperimentKind::grid;
  if (name == "learning_curve" || name == "curve") return ExperimentKind::learning_curve;
  if (name == "stratified") return ExperimentKind::stratified;
  if (name == "ddm_rank" || name == "ddm-rank") return ExperimentKind::ddm_rank;
  if (name == "dialect_classify" || name == "dialect-classify") {
    return ExperimentKind::dialect_classify;
  }
  throw ConfigError("unknown experiment kind '" + std::string(name) + "'");
}

void ExperimentConfig::validate() const {
  if (seed_count < 1) throw ConfigError("seeds must be >= 1");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw ConfigError("train_fraction must lie strictly between 0 and 1");
  }
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] == 0) throw ConfigError("sizes must be positive");
    if (i > 0 && sizes[i] <= sizes[i - 1]) {
      throw ConfigError("sizes must be strictly increasing");
    }
  }
  if (kind == ExperimentKind::learning_curve && sizes.empty()) {
    throw ConfigError("a learning curve needs sizes");
  }
  check_members(supervision, {"corpus", "pairs"}, "supervision");
  check_members(architectures, {"multihead", "daml"}, "architectures");
  check_members(methods, {"oracle", "regex", "multihead", "daml", "docclf"}, "methods");
  if (detector_supervision != "corpus" && detector_supervision != "pairs") {
    throw ConfigError("detector_supervision must be 'corpus' or 'pairs'");
  }
  encoder.validate();
  hp.validate();
  if (data.synthetic) {
    data.synth.validate();
  } else if (data.catalog.empty() || data.corpus.empty()) {
    throw ConfigError("file data needs at least 'catalog' and 'corpus'");
  }
}

std::vector<std::uint64_t> ExperimentConfig::seeds() const {
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < seed_count; ++i) out.push_back(seed + i);
  return out;
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream out;
  out << "kind = " << (kind ? to_string(*kind) : std::string_view("unset")) << '\n'
      << "seed = " << seed << '\n'
      << "seeds = " << seed_count << '\n'
      << "sizes = " << join(sizes) << '\n'
      << "repetitions = " << repetitions << '\n'
      << "train_fraction = " << format_double(train_fraction) << '\n'
      << "supervision = " << join(supervision) << '\n'
      << "architectures = " << join(architectures) << '\n'
      << "methods = " << join(methods) << '\n'
      << "detector_supervision = " << detector_supervision << '\n'
      << "positive_locale = " << positive_locale << '\n'
      << "prefix_policy = " << to_string(prefix_policy) << '\n'
      << "encoder.kind = " << to_string(encoder.kind) << '\n'
      << "encoder.dimension = " << encoder.dimension << '\n'
      << "encoder.max_length = " << encoder.max_length << '\n'
      << "encoder.unknown_policy = " << to_string(encoder.unknown_policy) << '\n'
      << "encoder.locator = " << encoder.locator << '\n'
      << "train.batch_size = " << hp.batch_size << '\n'
      << "train.epochs = " << hp.epochs << '\n'
      << "train.learning_rate = " << format_double(hp.learning_rate) << '\n'
      << "train.beta1 = " << format_double(hp.beta1) << '\n'
      << "train.beta2 = " << format_double(hp.beta2) << '\n'
      << "train.epsilon = " << format_double(hp.epsilon) << '\n'
      << "data = " << (data.synthetic ? "synthetic" : "files") << '\n';
  if (data.synthetic) {
    const SynthConfig& s = data.synth;
    out << "synth.num_features = " << s.num_features << '\n'
        << "synth.vocabulary_size = " << s.vocabulary_size << '\n'
        << "synth.examples_per_transcript = " << s.examples_per_transcript << '\n'
        << "synth.transcripts_per_locale = " << s.transcripts_per_locale << '\n'
        << "synth.min_words = " << s.min_words << '\n'
        << "synth.max_words = " << s.max_words << '\n'
        << "synth.rate_a = " << join(s.rate_a) << '\n'
        << "synth.rate_b = " << join(s.rate_b) << '\n'
        << "synth.locale_a = " << s.locale_a << '\n'
        << "synth.locale_b = " << s.locale_b << '\n'
        << "synth.pairs_per_feature = " << s.pairs_per_feature << '\n'
        << "synth.transcript_variation = " << format_double(s.transcript_variation) << '\n'
        << "synth.cooccurrence = " << format_double(s.cooccurrence) << '\n';
  } else {
    out << "catalog = " << data.catalog.generic_string() << '\n'
        << "corpus = " << data.corpus.generic_string() << '\n'
        << "annotations = " << data.annotations.generic_string() << '\n'
        << "pairs = " << data.pairs.generic_string() << '\n'
        << "corpus_b = " << data.corpus_b.generic_string() << '\n'
        << "annotations_b = " << data.annotations_b.generic_string() << '\n';
  }
  return out.str();
}

std::string ExperimentConfig::hash() const { return hex64(fnv1a64(canonical())); }

ExperimentConfig parse_experiment_config(std::istream& in,
                                         const std::filesystem::path& base_dir) {
  ExperimentConfig c;
  std::optional<bool> data_mode;
  bool lr_set = false;
  auto resolve = [&](const std::string& v) {
    std::filesystem::path p(v);
    return p.is_absolute() ? p : (base_dir / p).lexically_normal();
  };

  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string text = trim(std::string_view(raw).substr(0, hash));
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'");
    }
    const std::string key = trim(std::string_view(text).substr(0, eq));
    const std::string value = trim(std::string_view(text).substr(eq + 1));
    SynthConfig& s = c.data.synth;

    if (key == "kind") c.kind = experiment_kind_from_string(value);
    else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, value, line);
    else if (key == "seeds") c.seed_count = parse_number<std::size_t>(key, value, line);
    else if (key == "sizes") c.sizes = parse_numbers<std::size_t>(key, value, line);
    else if (key == "repetitions") c.repetitions = parse_number<std::size_t>(key, value, line);
    else if (key == "train_fraction") c.train_fraction = parse_number<double>(key, value, line);
    else if (key == "supervision") c.supervision = words(value);
    else if (key == "architectures") c.architectures = words(value);
    else if (key == "methods") c.methods = words(value);
    else if (key == "detector_supervision") c.detector_supervision = value;
    else if (key == "positive_locale") c.positive_locale = value;
    else if (key == "prefix_policy") c.prefix_policy = prefix_policy_from_string(value);
    else if (key == "data") data_mode = parse_bool_data(value, line);
    else if (key == "catalog") c.data.catalog = resolve(value);
    else if (key == "corpus") c.data.corpus = resolve(value);
    else if (key == "annotations") c.data.annotations = resolve(value);
    else if (key == "pairs") c.data.pairs = resolve(value);
    else if (key == "corpus_b") c.data.corpus_b = resolve(value);
    else if (key == "annotations_b") c.data.annotations_b = resolve(value);
    else if (key == "encoder.kind") c.encoder.kind = encoder_kind_from_string(value);
    else if (key == "encoder.dimension") c.encoder.dimension = parse_number<std::size_t>(key, value, line);
    else if (key == "encoder.max_length") c.encoder.max_length = parse_number<std::size_t>(key, value, line);
    else if (key == "encoder.unknown_policy") c.encoder.unknown_policy = unknown_policy_from_string(value);
    else if (key == "encoder.locator") c.encoder.locator = value;
    else if (key == "train.batch_size") c.hp.batch_size = parse_number<std::size_t>(key, value, line);
    else if (key == "train.epochs") c.hp.epochs = parse_number<std::size_t>(key, value, line);
    else if (key == "train.learning_rate") {
      c.hp.learning_rate = parse_number<double>(key, value, line);
      lr_set = true;
    }
    else if (key == "train.beta1") c.hp.beta1 = parse_number<double>(key, value, line);
    else if (key == "train.beta2") c.hp.beta2 = parse_number<double>(key, value, line);
    else if (key == "train.epsilon") c.hp.epsilon = parse_number<double>(key, value, line);
    else if (key == "synth.num_features") s.num_features = parse_number<std::size_t>(key, value, line);
    else if (key == "synth.vocabulary_size") s.vocabulary_size = parse_number<std::size_t>(key, value, line);
    else if (key == "synth.examples_per_transcript") s.examples_per_transcript = parse_number<std::size_t>(key, value, line);
    else if (key == "synth.transcripts_per_locale") s.transcripts_per_locale = parse_number<std::size_t>(key, value, line);
    else if (key == "synth.min_words") s.min_words = parse_number<std::size_t>(key, value, line);
    else if (key == "synth.max_words") s.max_words = parse_number<std::size_t>(key, value, line);
    else if (key == "synth.rate_a") s.rate_a = parse_numbers<double>(key, value, line);
    else if (key == "synth.rate_b") s.rate_b = parse_numbers<double>(key, value, line);
    else if (key == "synth.locale_a") s.locale_a = value;
    else if (key == "synth.locale_b") s.locale_b = value;
    else if (key == "synth.pairs_per_feature") s.pairs_per_feature = parse_number<std::size_t>(key, value, line);
    else if (key == "synth.transcript_variation") s.transcript_variation = parse_number<double>(key, value, line);
    else if (key == "synth.cooccurrence") s.cooccurrence = parse_number<double>(key, value, line);
    else throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
  }

  c.data.synthetic = data_mode.value_or(c.data.catalog.empty() && c.data.corpus.empty());
  if (!lr_set) c.hp.learning_rate = HyperParams::defaults_for(c.encoder.kind).learning_rate;
  if (c.positive_locale.empty() && c.data.synthetic) c.positive_locale = c.data.synth.locale_a;
  c.validate();
  return c;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  return parse_experiment_config(in, path.parent_path());
}

}  // namespace dialect
