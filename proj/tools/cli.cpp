#include "cli.hpp"

#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "dialect/corpus.hpp"
#include "dialect/density.hpp"
#include "dialect/error.hpp"
#include "dialect/experiments.hpp"
#include "dialect/io.hpp"
#include "dialect/metrics.hpp"
#include "dialect/pairgen.hpp"
#include "dialect/recognizers.hpp"
#include "json.hpp"

namespace dialect::cli {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

// Relative inputs that do not exist here are looked up under DIALECT_DATA_DIR.
fs::path resolve_input(const std::string& name) {
  fs::path p(name);
  if (p.empty() || p.is_absolute() || fs::exists(p)) return p;
  if (const char* dir = std::getenv("DIALECT_DATA_DIR"); dir && *dir) {
    fs::path candidate = fs::path(dir) / p;
    if (fs::exists(candidate)) return candidate;
  }
  return p;
}

struct Session {
  std::vector<std::string> args;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;  // resolved path -> hash
  std::ostream& out;

  fs::path input(const std::string& name) {
    fs::path p = resolve_input(name);
    if (fs::is_regular_file(p)) inputs[p.generic_string()] = hash_file(p);
    return p;
  }

  // The manifest goes next to a file output or inside a directory output, and
  // is written before the output itself.
  void manifest(const fs::path& target, bool directory) {
    RunManifest m;
    std::string command;
    for (const std::string& a : args) command += (command.empty() ? "" : " ") + a;
    m.command = command;
    m.config_hash = hex64(fnv1a64(command));
    m.input_hashes = inputs;
    m.seeds = {seed};
    m.started_at = utc_timestamp();
    const fs::path path = directory ? target / "manifest.json"
                                    : fs::path(target.string() + ".manifest.json");
    write_text_file(path, m.to_json());
  }
};

std::string jsonl(const std::vector<Json>& records) {
  std::string text;
  for (const Json& r : records) text += r.dump() + "\n";
  return text;
}

struct EncoderOptions {
  std::string kind = "tiny";
  std::size_t dimension = 64;
  std::size_t max_length = 256;
  std::string unknown_policy = "fallback";
  std::string locator;
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::optional<double> learning_rate;

  void attach(CLI::App* cmd) {
    cmd->add_option("--encoder", kind, "tiny or external")->capture_default_str();
    cmd->add_option("--dimension", dimension, "Encoder width")->capture_default_str();
    cmd->add_option("--max-length", max_length, "Maximum input tokens")->capture_default_str();
    cmd->add_option("--unknown-policy", unknown_policy, "fallback or strict")
        ->capture_default_str();
    cmd->add_option("--locator", locator, "External encoder locator (scheme:location)");
    cmd->add_option("--epochs", epochs)->capture_default_str();
    cmd->add_option("--batch-size", batch_size)->capture_default_str();
    cmd->add_option("--lr", learning_rate, "Default: 1e-3 tiny, 1e-5 external");
  }

  EncoderSpec spec() const {
    EncoderSpec s;
    s.kind = encoder_kind_from_string(kind);
    s.dimension = dimension;
    s.max_length = max_length;
    s.unknown_policy = unknown_policy_from_string(unknown_policy);
    s.locator = locator;
    return s;
  }

  HyperParams hyperparams(std::uint64_t seed) const {
    HyperParams hp = HyperParams::defaults_for(spec().kind);
    hp.epochs = epochs;
    hp.batch_size = batch_size;
    if (learning_rate) hp.learning_rate = *learning_rate;
    hp.seed = seed;
    return hp;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// (example_id, feature_id) -> score
std::map<std::pair<std::string, std::string>, double> read_scores(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::map<std::pair<std::string, std::string>, double> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const Json j = Json::parse(line);
      out[{j.at("example_id").get<std::string>(), j.at("feature_id").get<std::string>()}] =
          j.at("score").get<double>();
    } catch (const Json::exception& e) {
      throw SchemaError(e.what(), n);
    }
  }
  return out;
}

std::vector<DensityScore> read_densities(const fs::path& path) {
  std::ifstream in = open_input(path);
  return parse_densities(in);
}

// Reads the non-comment lines of a CSV written by the experiments.
std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    std::vector<std::string> cells;
    std::stringstream s(line);
    std::string cell;
    while (std::getline(s, cell, ',')) cells.push_back(cell);
    rows.push_back(std::move(cells));
  }
  return rows;
}

std::vector<Json> read_jsonl(const fs::path& path) {
  std::ifstream in = open_input(path);
  std::vector<Json> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    Json j = Json::parse(line);
    if (!j.contains("provenance")) out.push_back(std::move(j));
  }
  return out;
}

int exit_code_for(const Error& e) { return e.is_validation() ? 1 : 2; }

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Session session{args, 0, {}, out};
  std::function<void()> action;

  CLI::App app{"Dialect feature detection, density measures, and evaluation", "dialect"};
  app.require_subcommand(1);
  app.fallthrough();
  app.failure_message(CLI::FailureMessage::help);
  app.set_version_flag("--version", toolkit_version());
  auto* seed_opt = app.add_option("--seed", session.seed, "Seed for every random choice");

  // data ----------------------------------------------------------------------
  auto* data = app.add_subcommand("data", "Validate, expand, and sample datasets");
  data->require_subcommand(1);

  std::string catalog, corpus, annotations, pairs, out_path, in_path;
  auto* validate = data->add_subcommand("validate", "Check data files against their schemas");
  validate->add_option("--catalog", catalog);
  validate->add_option("--corpus", corpus);
  validate->add_option("--annotations", annotations)->needs(validate->get_option("--corpus"));
  validate->add_option("--pairs", pairs);
  validate->callback([&] {
    action = [&] {
      if (catalog.empty() && corpus.empty() && pairs.empty()) {
        throw UsageError("nothing to validate; pass --catalog, --corpus, or --pairs");
      }
      std::optional<FeatureCatalog> cat;
      if (!catalog.empty()) {
        cat = load_catalog(session.input(catalog));
        out << "catalog: " << cat->size() << " features\n";
      }
      if (!corpus.empty()) {
        Corpus c = load_corpus(session.input(corpus));
        out << "corpus: " << c.size() << " examples in " << c.transcript_ids().size()
            << " transcripts\n";
        if (!annotations.empty()) {
          if (!cat) throw UsageError("--annotations needs --catalog");
          const AnnotationSet a = load_annotations(session.input(annotations), c, *cat);
          out << "annotations: " << a.size() << " labels\n";
        }
      }
      if (!pairs.empty()) {
        if (!cat) throw UsageError("--pairs needs --catalog");
        const MinimalPairSet p = load_pairs(session.input(pairs), *cat);
        out << "pairs: " << p.size() << " minimal pairs\n";
      }
      out << "ok\n";
    };
  });

  auto* expand = data->add_subcommand("expand-pairs", "Turn minimal pairs into training instances");
  expand->add_option("--pairs", pairs)->required();
  expand->add_option("--catalog", catalog)->required();
  expand->add_option("--out", out_path)->required();
  expand->callback([&] {
    action = [&] {
      const FeatureCatalog cat = load_catalog(session.input(catalog));
      const MultitaskDataset ds = expand_pairs(load_pairs(session.input(pairs), cat), cat);
      std::ostringstream text;
      write_instances(text, ds);
      session.manifest(out_path, false);
      write_text_file(out_path, text.str());
      out << ds.size() << " instances (" << ds.texts().size() << " texts x "
          << cat.size() << " features)\n";
    };
  });

  auto* stratify = data->add_subcommand(
      "stratify", "Sample corpus instances whose counts match the expanded pairs");
  stratify->add_option("--corpus", corpus)->required();
  stratify->add_option("--annotations", annotations)->required();
  stratify->add_option("--catalog", catalog)->required();
  stratify->add_option("--pairs", pairs)->required();
  stratify->add_option("--out", out_path)->required();
  stratify->callback([&] {
    action = [&] {
      const FeatureCatalog cat = load_catalog(session.input(catalog));
      Corpus c = load_corpus(session.input(corpus));
      c = c.with_annotations(load_annotations(session.input(annotations), c, cat));
      const auto ids = cat.ids();
      const MultitaskDataset target = expand_pairs(load_pairs(session.input(pairs), cat), cat);
      const MultitaskDataset ds =
          stratified_sample(corpus_dataset(c, ids), target.counts(), session.seed);
      std::ostringstream text;
      write_instances(text, ds);
      session.manifest(out_path, false);
      write_text_file(out_path, text.str());
      out << ds.size() << " instances\n";
    };
  });

  std::size_t subsample_n = 0;
  auto* sub = data->add_subcommand("subsample", "Keep n random texts with all their instances");
  sub->add_option("--in", in_path)->required();
  sub->add_option("--n", subsample_n)->required();
  sub->add_option("--out", out_path)->required();
  sub->callback([&] {
    action = [&] {
      std::ifstream in = open_input(session.input(in_path));
      const MultitaskDataset ds =
          subsample(parse_instances(in, Provenance::corpus), subsample_n, session.seed);
      std::ostringstream text;
      write_instances(text, ds);
      session.manifest(out_path, false);
      write_text_file(out_path, text.str());
      out << ds.size() << " instances\n";
    };
  });

  SynthConfig synth;
  auto* synth_cmd = data->add_subcommand("synth", "Write a synthetic two-locale dataset");
  synth_cmd->add_option("--out", out_path, "Output directory")->required();
  synth_cmd->add_option("--features", synth.num_features)->capture_default_str();
  synth_cmd->add_option("--vocabulary", synth.vocabulary_size)->capture_default_str();
  synth_cmd->add_option("--transcripts", synth.transcripts_per_locale,
                        "Transcripts per locale")->capture_default_str();
  synth_cmd->add_option("--examples", synth.examples_per_transcript,
                        "Examples per transcript")->capture_default_str();
  synth_cmd->add_option("--rate-a", synth.rate_a, "Feature rates for locale A");
  synth_cmd->add_option("--rate-b", synth.rate_b, "Feature rates for locale B");
  synth_cmd->add_option("--locale-a", synth.locale_a)->capture_default_str();
  synth_cmd->add_option("--locale-b", synth.locale_b)->capture_default_str();
  synth_cmd->add_option("--pairs-per-feature", synth.pairs_per_feature)->capture_default_str();
  synth_cmd->add_option("--variation", synth.transcript_variation)->capture_default_str();
  synth_cmd->add_option("--cooccurrence", synth.cooccurrence)->capture_default_str();
  synth_cmd->callback([&] {
    action = [&] {
      const SyntheticData d = generate_synthetic(synth, session.seed);
      const fs::path dir(out_path);
      fs::create_directories(dir);
      session.manifest(dir, true);
      std::ostringstream c, k, a, p;
      write_catalog(k, d.catalog);
      write_corpus(c, d.corpus);
      write_annotations(a, *d.corpus.annotations());
      write_pairs(p, d.pairs);
      write_text_file(dir / "catalog.jsonl", k.str());
      write_text_file(dir / "corpus.jsonl", c.str());
      write_text_file(dir / "annotations.jsonl", a.str());
      write_text_file(dir / "pairs.jsonl", p.str());
      out << d.corpus.size() << " examples, " << d.catalog.size() << " features, "
          << d.pairs.size() << " pairs\n";
    };
  });

  // train ---------------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train feature detectors or a dialect classifier");
  train->require_subcommand(1);
  EncoderOptions enc;
  std::string prefix_policy = "name", corpus_a, corpus_b;

  auto* train_mh = train->add_subcommand("multihead", "Shared encoder, one head per feature");
  train_mh->add_option("--train", in_path, "Instances file")->required();
  train_mh->add_option("--out", out_path, "Model directory")->required();
  enc.attach(train_mh);
  train_mh->callback([&] {
    action = [&] {
      std::ifstream in = open_input(session.input(in_path));
      const MultitaskDataset ds = parse_instances(in, Provenance::corpus);
      fs::create_directories(out_path);
      session.manifest(out_path, true);
      const MultiheadModel m = train_multihead(ds, enc.spec(), enc.hyperparams(session.seed));
      m.save(out_path);
      out << "multihead: " << m.feature_ids().size() << " heads, final loss "
          << format_fixed(m.trace().epoch_loss.back(), 4) << "\n";
    };
  });

  auto* train_daml_cmd = train->add_subcommand("daml", "Feature text prefix, one shared head");
  train_daml_cmd->add_option("--train", in_path, "Instances file")->required();
  train_daml_cmd->add_option("--catalog", catalog)->required();
  train_daml_cmd->add_option("--out", out_path, "Model directory")->required();
  train_daml_cmd->add_option("--prefix-policy", prefix_policy, "name or name_description")
      ->capture_default_str();
  enc.attach(train_daml_cmd);
  train_daml_cmd->callback([&] {
    action = [&] {
      const FeatureCatalog cat = load_catalog(session.input(catalog));
      std::ifstream in = open_input(session.input(in_path));
      const MultitaskDataset ds = parse_instances(in, Provenance::corpus);
      const PrefixPolicy policy = prefix_policy_from_string(prefix_policy);
      fs::create_directories(out_path);
      session.manifest(out_path, true);
      const DamlModel m = train_daml(ds, cat, enc.spec(), enc.hyperparams(session.seed), policy);
      m.save(out_path);
      out << "daml: final loss " << format_fixed(m.trace().epoch_loss.back(), 4) << "\n";
    };
  });

  auto* train_doc = train->add_subcommand("docclf", "Binary locale classifier");
  train_doc->add_option("--corpus-a", corpus_a, "Positive-locale corpus")->required();
  train_doc->add_option("--corpus-b", corpus_b, "Negative-locale corpus")->required();
  train_doc->add_option("--out", out_path, "Model directory")->required();
  enc.attach(train_doc);
  train_doc->callback([&] {
    action = [&] {
      const Corpus a = load_corpus(session.input(corpus_a));
      const Corpus b = load_corpus(session.input(corpus_b));
      fs::create_directories(out_path);
      session.manifest(out_path, true);
      const DocClassifier m = train_docclf(a, b, enc.spec(), enc.hyperparams(session.seed));
      m.save(out_path);
      out << "docclf: " << m.positive_locale() << " vs " << m.negative_locale()
          << ", final loss " << format_fixed(m.trace().epoch_loss.back(), 4) << "\n";
    };
  });

  // detect --------------------------------------------------------------------
  auto* detect = app.add_subcommand("detect", "Score corpus examples for features");
  detect->require_subcommand(1);
  std::string model_dir, features;

  auto* detect_learned = detect->add_subcommand("learned", "Scores from a trained model");
  detect_learned->add_option("--model", model_dir)->required();
  detect_learned->add_option("--in", in_path, "Corpus file")->required();
  detect_learned->add_option("--out", out_path)->required();
  detect_learned->add_option("--features", features, "Comma-separated feature ids");
  detect_learned->callback([&] {
    action = [&] {
      const Corpus c = load_corpus(session.input(in_path));
      const auto detector = load_detector(model_dir);
      std::vector<std::string> ids = features.empty() ? detector->feature_ids()
                                                      : split_list(features);
      const auto* mh = dynamic_cast<const MultiheadModel*>(detector.get());
      std::vector<Json> records;
      for (const Example& ex : c.examples()) {
        const FeatureScores s = mh ? mh->score(ex.text, ids) : detector->score(ex.text);
        for (const std::string& f : ids) {
          const auto it = s.find(f);
          if (it == s.end()) throw UnknownFeatureError("model does not score '" + f + "'");
          records.push_back({{"example_id", ex.example_id}, {"feature_id", f},
                             {"score", it->second}});
        }
      }
      session.manifest(out_path, false);
      write_text_file(out_path, jsonl(records));
      out << records.size() << " scores\n";
    };
  });

  auto* detect_regex = detect->add_subcommand("regex", "Surface-pattern detectors");
  detect_regex->add_option("--in", in_path, "Corpus file")->required();
  detect_regex->add_option("--out", out_path)->required();
  detect_regex->callback([&] {
    action = [&] {
      const Corpus c = load_corpus(session.input(in_path));
      std::vector<Json> records;
      for (const Example& ex : c.examples()) {
        for (const RegexMatch& m : regex_detect(ex.text)) {
          records.push_back({{"example_id", ex.example_id}, {"feature_id", m.feature_id},
                             {"count", m.count}, {"score", m.present ? 1.0 : 0.0}});
        }
      }
      session.manifest(out_path, false);
      write_text_file(out_path, jsonl(records));
      out << records.size() << " scores\n";
    };
  });

  // ddm -----------------------------------------------------------------------
  auto* ddm = app.add_subcommand("ddm", "Dialect density measures");
  ddm->require_subcommand(1);
  std::string method = "learned", level = "transcript";
  auto* ddm_score = ddm->add_subcommand("score", "Density per transcript or utterance");
  ddm_score->add_option("--method", method, "learned, regex, docclf, or gold")
      ->capture_default_str();
  ddm_score->add_option("--in", in_path, "Corpus file")->required();
  ddm_score->add_option("--out", out_path)->required();
  ddm_score->add_option("--model", model_dir, "Model directory (learned, docclf)");
  ddm_score->add_option("--annotations", annotations, "Gold labels (gold)");
  ddm_score->add_option("--catalog", catalog, "Feature catalog (gold)");
  ddm_score->add_option("--level", level, "transcript or utterance")->capture_default_str();
  ddm_score->callback([&] {
    action = [&] {
      const DensityMethod m = density_method_from_string(method);
      if (level != "transcript" && level != "utterance") {
        throw UsageError("--level must be transcript or utterance");
      }
      Corpus c = load_corpus(session.input(in_path));
      std::vector<std::string> ids;
      if (m == DensityMethod::gold) {
        if (annotations.empty() || catalog.empty()) {
          throw UsageError("gold densities need --annotations and --catalog");
        }
        const FeatureCatalog cat = load_catalog(session.input(catalog));
        c = c.with_annotations(load_annotations(session.input(annotations), c, cat));
        ids = cat.ids();
      }
      if ((m == DensityMethod::learned || m == DensityMethod::docclf) && model_dir.empty()) {
        throw UsageError("--method " + method + " needs --model");
      }
      std::unique_ptr<FeatureDetector> detector;
      std::optional<DocClassifier> clf;
      if (m == DensityMethod::learned) detector = load_detector(model_dir);
      if (m == DensityMethod::docclf) clf = DocClassifier::load(model_dir);

      std::vector<DensityScore> scores;
      if (level == "utterance") {
        for (const Example& ex : c.examples()) {
          double d = 0.0;
          switch (m) {
            case DensityMethod::learned:
              d = utterance_density_learned(detector->score(ex.text), ex.tokens.size());
              break;
            case DensityMethod::regex: d = utterance_density_regex(ex.text); break;
            case DensityMethod::docclf: d = clf->probability(ex.text); break;
            case DensityMethod::gold:
              d = utterance_density_learned(oracle_scorer(c, ids)(ex), ex.tokens.size());
              break;
          }
          scores.push_back({ex.example_id, m, d, ex.tokens.size()});
        }
      } else {
        switch (m) {
          case DensityMethod::learned:
            scores = learned_densities(c, detector_scorer(*detector));
            break;
          case DensityMethod::regex: scores = regex_densities(c); break;
          case DensityMethod::docclf: scores = docclf_densities(c, *clf); break;
          case DensityMethod::gold: scores = gold_densities(c, ids); break;
        }
      }
      std::ostringstream text;
      write_densities(text, scores);
      session.manifest(out_path, false);
      write_text_file(out_path, text.str());
      out << scores.size() << " densities\n";
    };
  });

  // eval ----------------------------------------------------------------------
  auto* eval = app.add_subcommand("eval", "Evaluation statistics");
  eval->require_subcommand(1);
  std::string scores_path, gold_path, positive_path, negative_path, a_path, b_path;

  auto* eval_auc = eval->add_subcommand("auc", "Per-feature ROC-AUC and macro-AUC");
  eval_auc->add_option("--scores", scores_path)->required();
  eval_auc->add_option("--corpus", corpus)->required();
  eval_auc->add_option("--annotations", annotations)->required();
  eval_auc->add_option("--catalog", catalog)->required();
  eval_auc->add_option("--out", out_path, "Machine-readable report (one JSON line)");
  eval_auc->callback([&] {
    action = [&] {
      const FeatureCatalog cat = load_catalog(session.input(catalog));
      const Corpus c = load_corpus(session.input(corpus));
      const AnnotationSet gold = load_annotations(session.input(annotations), c, cat);
      std::vector<ScoredInstance> rows;
      for (const auto& [key, score] : read_scores(session.input(scores_path))) {
        const auto label = gold.find(key.first, key.second);
        if (!label) {
          throw MissingAnnotationError("no gold label for (" + key.first + ", " +
                                       key.second + ")");
        }
        rows.push_back({key.second, score, static_cast<std::uint8_t>(*label)});
      }
      const EvalReport report = auc_report(rows);
      if (!out_path.empty()) {
        session.manifest(out_path, false);
        write_text_file(out_path, report_record(report) + "\n");
      }
      out << format_report(report);
    };
  });

  auto* eval_rank = eval->add_subcommand("rank", "Spearman r between two density files");
  eval_rank->add_option("--ddm", in_path, "Predicted densities")->required();
  eval_rank->add_option("--gold", gold_path, "Gold densities")->required();
  eval_rank->callback([&] {
    action = [&] {
      std::map<std::string, double> gold;
      for (const DensityScore& d : read_densities(session.input(gold_path))) {
        gold[d.unit_id] = d.density;
      }
      std::vector<double> x, y;
      for (const DensityScore& d : read_densities(session.input(in_path))) {
        const auto it = gold.find(d.unit_id);
        if (it == gold.end()) {
          throw ReferenceError("unit '" + d.unit_id + "' has no gold density");
        }
        x.push_back(d.density);
        y.push_back(it->second);
      }
      out << "r = " << format_fixed(spearman(x, y), 4) << " over " << x.size() << " units\n";
    };
  });

  auto* eval_cls = eval->add_subcommand("classify", "D' and balanced-threshold accuracy");
  eval_cls->add_option("--positive", positive_path, "Densities of the target dialect")
      ->required();
  eval_cls->add_option("--negative", negative_path, "Densities of the other dialect")
      ->required();
  eval_cls->callback([&] {
    action = [&] {
      std::vector<double> p, n;
      for (const DensityScore& d : read_densities(session.input(positive_path))) {
        p.push_back(d.density);
      }
      for (const DensityScore& d : read_densities(session.input(negative_path))) {
        n.push_back(d.density);
      }
      const double dp = d_prime(PopulationStats::of(p), PopulationStats::of(n));
      const ThresholdResult t = balanced_threshold(p, n);
      out << "D' = " << format_fixed(dp, 4) << "\naccuracy = " << format_fixed(t.accuracy, 4)
          << "\nthreshold = " << format_double(t.threshold) << " (FP " << t.false_positives
          << ", FN " << t.false_negatives << ")\n";
    };
  });

  auto* eval_kappa = eval->add_subcommand("kappa", "Cohen's kappa between two annotators");
  eval_kappa->add_option("--a", a_path, "First annotation file")->required();
  eval_kappa->add_option("--b", b_path, "Second annotation file")->required();
  eval_kappa->add_option("--corpus", corpus)->required();
  eval_kappa->add_option("--catalog", catalog)->required();
  eval_kappa->callback([&] {
    action = [&] {
      const FeatureCatalog cat = load_catalog(session.input(catalog));
      const Corpus c = load_corpus(session.input(corpus));
      const AnnotationSet a = load_annotations(session.input(a_path), c, cat);
      const AnnotationSet b = load_annotations(session.input(b_path), c, cat);
      std::vector<std::uint8_t> la, lb;
      for (const auto& [key, label] : a.entries()) {
        if (const auto other = b.find(key.first, key.second)) {
          la.push_back(static_cast<std::uint8_t>(label));
          lb.push_back(static_cast<std::uint8_t>(*other));
        }
      }
      if (la.empty()) throw MissingAnnotationError("the annotation files share no labels");
      out << "kappa = " << format_fixed(cohen_kappa(la, lb), 4) << " over " << la.size()
          << " labels\n";
    };
  });

  // experiment ----------------------------------------------------------------
  auto* experiment = app.add_subcommand("experiment", "Run an experimental protocol");
  experiment->require_subcommand(1);
  std::string config_path, runs_dir = "runs";
  std::size_t jobs = 1;
  const std::vector<std::pair<std::string, ExperimentKind>> kinds{
      {"grid", ExperimentKind::grid},
      {"curve", ExperimentKind::learning_curve},
      {"stratified", ExperimentKind::stratified},
      {"ddm-rank", ExperimentKind::ddm_rank},
      {"dialect-classify", ExperimentKind::dialect_classify}};
  for (const auto& [name, kind] : kinds) {
    auto* cmd = experiment->add_subcommand(name, "Run the " + name + " protocol");
    cmd->add_option("--config", config_path)->required();
    cmd->add_option("--out", runs_dir, "Parent of the run directory")->capture_default_str();
    cmd->add_option("--jobs", jobs, "Parallel training jobs")->capture_default_str();
    cmd->callback([&, kind = kind] {
      action = [&, kind] {
        ExperimentConfig config = load_experiment_config(session.input(config_path));
        if (config.kind && *config.kind != kind) {
          throw ConfigError("config describes a " + std::string(to_string(*config.kind)) +
                            " experiment");
        }
        config.kind = kind;
        if (seed_opt->count() > 0) config.seed = session.seed;
        if (jobs < 1) throw UsageError("--jobs must be >= 1");
        std::string command = "dialect";
        for (const std::string& a : args) command += " " + a;
        const ExperimentRun run = run_experiment(config, runs_dir, jobs, command);
        out << run.summary << "results: " << run.directory.generic_string() << "\n";
      };
    });
  }

  // report --------------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Data tables for plotting");
  report->require_subcommand(1);
  std::string run_dir;
  auto* plot = report->add_subcommand("plot-data", "CSV tables from a run directory");
  plot->add_option("--run", run_dir)->required();
  plot->add_option("--out", out_path, "Output directory")->required();
  plot->callback([&] {
    action = [&] {
      const fs::path run(run_dir);
      const fs::path dir(out_path);
      std::vector<std::string> written;
      fs::create_directories(dir);
      session.manifest(dir, true);
      if (fs::exists(run / "curve.csv")) {
        std::map<std::size_t, std::vector<double>> by_n;
        std::string points = "n,repetition,macro_auc\n";
        for (const auto& row : read_csv(run / "curve.csv")) {
          if (row.size() != 3) throw SchemaError("curve.csv rows need 3 cells");
          by_n[std::stoul(row[0])].push_back(std::stod(row[2]));
          points += row[0] + "," + row[1] + "," + row[2] + "\n";
        }
        std::string box = "n,whisker_low,q1,median,q3,whisker_high\n";
        for (const auto& [n, values] : by_n) {
          const BoxStats b = box_stats(values);
          box += std::to_string(n) + "," + format_double(b.whisker_low) + "," +
                 format_double(b.q1) + "," + format_double(b.median) + "," +
                 format_double(b.q3) + "," + format_double(b.whisker_high) + "\n";
        }
        write_text_file(dir / "learning_curve_points.csv", points);
        write_text_file(dir / "learning_curve_box.csv", box);
        written.insert(written.end(), {"learning_curve_points.csv", "learning_curve_box.csv"});
      }
      if (fs::exists(run / "reports.jsonl")) {
        std::string csv = "group,condition,feature_id,auc,sd\n";
        for (const Json& r : read_jsonl(run / "reports.jsonl")) {
          const std::string group =
              r.contains("supervision") ? r["supervision"].get<std::string>()
                                        : r["architecture"].get<std::string>();
          const std::string cond = r.contains("supervision")
                                       ? r["architecture"].get<std::string>()
                                       : r["condition"].get<std::string>();
          const Json& rep = r["report"];
          for (const auto& [id, auc] : rep["feature_auc"].items()) {
            const double sd = rep.contains("feature_auc_sd") ? rep["feature_auc_sd"][id].get<double>() : 0.0;
            csv += group + "," + cond + "," + id + "," + format_double(auc.get<double>()) +
                   "," + format_double(sd) + "\n";
          }
        }
        write_text_file(dir / "feature_auc.csv", csv);
        written.push_back("feature_auc.csv");
      }
      if (fs::exists(run / "densities.jsonl")) {
        std::string csv = "source,unit_id,density,token_count\n";
        for (const Json& r : read_jsonl(run / "densities.jsonl")) {
          csv += r["source"].get<std::string>() + "," + r["unit_id"].get<std::string>() +
                 "," + format_double(r["density"].get<double>()) + "," +
                 std::to_string(r["token_count"].get<std::size_t>()) + "\n";
        }
        write_text_file(dir / "density_points.csv", csv);
        written.push_back("density_points.csv");
      }
      if (written.empty()) {
        throw ConfigError(run.string() + " holds no curve, report, or density tables");
      }
      for (const std::string& w : written) out << (dir / w).generic_string() << "\n";
    };
  });

  std::vector<std::string> argv_store{"dialect"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const std::string& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    if (action) action();
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed JSON: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace dialect::cli
