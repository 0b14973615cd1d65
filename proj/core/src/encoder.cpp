#include "dialect/encoder.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>

#include "dialect/corpus.hpp"
#include "dialect/error.hpp"
#include "dialect/io.hpp"

namespace dialect {

static_assert(std::endian::native == std::endian::little,
              "artifact I/O assumes a little-endian host");

std::string_view to_string(EncoderKind kind) {
  return kind == EncoderKind::tiny ? "tiny" : "external";
}

EncoderKind encoder_kind_from_string(std::string_view name) {
  if (name == "tiny") return EncoderKind::tiny;
  if (name == "external") return EncoderKind::external;
  throw ConfigError("unknown encoder kind '" + std::string(name) + "'");
}

std::string_view to_string(UnknownPolicy policy) {
  return policy == UnknownPolicy::fallback ? "fallback" : "strict";
}

UnknownPolicy unknown_policy_from_string(std::string_view name) {
  if (name == "fallback") return UnknownPolicy::fallback;
  if (name == "strict") return UnknownPolicy::strict;
  throw ConfigError("unknown vocabulary policy '" + std::string(name) + "'");
}

void EncoderSpec::validate() const {
  if (dimension < 1) throw ConfigError("encoder dimension must be >= 1");
  if (max_length < 2) throw ConfigError("encoder max_length must be >= 2");
  if (kind == EncoderKind::external && locator.empty()) {
    throw ConfigError("external encoder needs a locator");
  }
}

// --- Vocabulary -------------------------------------------------------------

Vocabulary::Vocabulary() {
  add("[SUMMARY]");
  add("[SEP]");
  add("[UNK]");
}

TokenId Vocabulary::add(std::string_view token) {
  auto [it, fresh] =
      index_.try_emplace(std::string(token), static_cast<TokenId>(tokens_.size()));
  if (fresh) tokens_.emplace_back(token);
  return it->second;
}

void Vocabulary::add_all(std::span<const std::string> tokens) {
  for (const std::string& t : tokens) add(t);
}

bool Vocabulary::contains(std::string_view token) const {
  return index_.count(std::string(token)) > 0;
}

TokenId Vocabulary::lookup(std::string_view token, UnknownPolicy policy) const {
  auto it = index_.find(std::string(token));
  if (it != index_.end()) return it->second;
  if (policy == UnknownPolicy::strict) {
    throw VocabularyError("token '" + std::string(token) +
                          "' is not in the vocabulary");
  }
  return kUnknown;
}

std::uint64_t Vocabulary::hash() const {
  std::uint64_t h = kFnvOffset;
  for (const std::string& t : tokens_) {
    h = fnv1a64(t, h);
    h = fnv1a64(std::string_view("\n", 1), h);
  }
  return h;
}

// --- Input construction ------------------------------------------------------

EncodedInput build_input(const Vocabulary& vocab, UnknownPolicy policy,
                         std::span<const std::string> text,
                         std::size_t max_length) {
  if (max_length < 2) {
    throw ConfigError("max_length cannot hold the control tokens");
  }
  EncodedInput input;
  const std::size_t keep = std::min(text.size(), max_length - 2);
  input.ids.reserve(keep + 2);
  input.ids.push_back(Vocabulary::kSummary);
  for (std::size_t i = 0; i < keep; ++i) {
    input.ids.push_back(vocab.lookup(text[i], policy));
  }
  input.ids.push_back(Vocabulary::kSeparator);
  input.text_length = keep;
  input.truncated = text.size() - keep;
  return input;
}

EncodedInput build_input(const Vocabulary& vocab, UnknownPolicy policy,
                         std::span<const std::string> text,
                         std::span<const std::string> prefix,
                         std::size_t max_length) {
  if (max_length < 3) {
    throw ConfigError("max_length cannot hold the control tokens");
  }
  const std::size_t room = max_length - 3;
  const std::size_t prefix_keep = std::min(prefix.size(), room);
  const std::size_t text_keep = std::min(text.size(), room - prefix_keep);

  EncodedInput input;
  input.ids.reserve(prefix_keep + text_keep + 3);
  input.ids.push_back(Vocabulary::kSummary);
  for (std::size_t i = 0; i < prefix_keep; ++i) {
    input.ids.push_back(vocab.lookup(prefix[i], policy));
  }
  input.ids.push_back(Vocabulary::kSeparator);
  for (std::size_t i = 0; i < text_keep; ++i) {
    input.ids.push_back(vocab.lookup(text[i], policy));
  }
  input.ids.push_back(Vocabulary::kSeparator);
  input.prefix_length = prefix_keep;
  input.text_length = text_keep;
  input.truncated = (prefix.size() - prefix_keep) + (text.size() - text_keep);
  return input;
}

std::string render(const Vocabulary& vocab, const EncodedInput& input) {
  std::string out;
  for (TokenId id : input.ids) {
    if (!out.empty()) out += ' ';
    out += vocab.token(id);
  }
  return out;
}

EncodedInput SequenceEncoder::prepare(std::string_view text) const {
  const auto tokens = tokenize(text);
  return build_input(vocabulary(), spec().unknown_policy, tokens,
                     spec().max_length);
}

EncodedInput SequenceEncoder::prepare(std::string_view text,
                                      std::string_view prefix) const {
  const auto tokens = tokenize(text);
  const auto prefix_tokens = tokenize(prefix);
  return build_input(vocabulary(), spec().unknown_policy, tokens, prefix_tokens,
                     spec().max_length);
}

// --- Parameters --------------------------------------------------------------

std::size_t ParameterSet::add(std::string name, std::size_t rows,
                              std::size_t cols) {
  blocks_.push_back(
      ParameterBlock{std::move(name), rows, cols, std::vector<double>(rows * cols)});
  return blocks_.size() - 1;
}

std::size_t ParameterSet::scalar_count() const {
  std::size_t n = 0;
  for (const ParameterBlock& b : blocks_) n += b.values.size();
  return n;
}

ParameterSet ParameterSet::zeros_like() const {
  ParameterSet out;
  for (const ParameterBlock& b : blocks_) out.add(b.name, b.rows, b.cols);
  return out;
}

void ParameterSet::set_zero() {
  for (ParameterBlock& b : blocks_) std::fill(b.values.begin(), b.values.end(), 0.0);
}

bool operator==(const ParameterSet& a, const ParameterSet& b) {
  if (a.blocks_.size() != b.blocks_.size()) return false;
  for (std::size_t i = 0; i < a.blocks_.size(); ++i) {
    const ParameterBlock& x = a.blocks_[i];
    const ParameterBlock& y = b.blocks_[i];
    if (x.name != y.name || x.rows != y.rows || x.cols != y.cols ||
        x.values != y.values) {
      return false;
    }
  }
  return true;
}

namespace {

constexpr char kParamMagic[8] = {'D', 'I', 'A', 'L', 'P', 'A', 'R', 'M'};
constexpr char kEncoderMagic[8] = {'D', 'I', 'A', 'L', 'E', 'N', 'C', 'R'};
constexpr std::uint32_t kFormatVersion = 1;

template <typename T>
void put(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw ArtifactError("truncated artifact");
  return value;
}

void put_string(std::ostream& out, std::string_view s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ArtifactError("truncated artifact");
  return s;
}

void check_magic(std::istream& in, const char (&magic)[8]) {
  char buffer[8];
  in.read(buffer, 8);
  if (!in || std::memcmp(buffer, magic, 8) != 0) {
    throw ArtifactError("artifact has the wrong magic header");
  }
  const auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) {
    throw ArtifactError("unsupported artifact version " + std::to_string(version));
  }
}

std::map<std::string, std::string> parse_key_values(const std::string& text) {
  std::map<std::string, std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (line.empty() || line[0] == '#' || eq == std::string::npos) continue;
    out[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return out;
}

std::mutex& registry_mutex() {
  static std::mutex m;
  return m;
}

std::map<std::string, ExternalEncoderFactory>& registry() {
  static std::map<std::string, ExternalEncoderFactory> r;
  return r;
}

}  // namespace

void write_parameters(std::ostream& out, const ParameterSet& params) {
  out.write(kParamMagic, 8);
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.blocks().size()));
  for (const ParameterBlock& b : params.blocks()) {
    put_string(out, b.name);
    put<std::uint64_t>(out, b.rows);
    put<std::uint64_t>(out, b.cols);
    out.write(reinterpret_cast<const char*>(b.values.data()),
              static_cast<std::streamsize>(b.values.size() * sizeof(double)));
  }
}

ParameterSet read_parameters(std::istream& in) {
  check_magic(in, kParamMagic);
  ParameterSet params;
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    std::string name = get_string(in);
    const auto rows = get<std::uint64_t>(in);
    const auto cols = get<std::uint64_t>(in);
    if (rows * cols > (std::uint64_t{1} << 32)) {
      throw ArtifactError("parameter block '" + name + "' is implausibly large");
    }
    const std::size_t idx = params.add(std::move(name), rows, cols);
    auto& values = params[idx].values;
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(double)));
    if (!in) throw ArtifactError("truncated parameter block");
  }
  return params;
}

std::string encoder_manifest(const SequenceEncoder& encoder) {
  const EncoderSpec& spec = encoder.spec();
  std::ostringstream out;
  out << "format_version=" << kFormatVersion << '\n'
      << "kind=" << to_string(spec.kind) << '\n'
      << "dimension=" << spec.dimension << '\n'
      << "max_length=" << spec.max_length << '\n'
      << "unknown_policy=" << to_string(spec.unknown_policy) << '\n'
      << "vocabulary_size=" << encoder.vocabulary().size() << '\n'
      << "vocabulary_hash=" << hex64(encoder.vocabulary().hash()) << '\n'
      << "parameter_count=" << encoder.parameters().scalar_count() << '\n';
  if (spec.kind == EncoderKind::external) out << "locator=" << spec.locator << '\n';
  return out.str();
}

void SequenceEncoder::save(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::ostringstream bin;
  bin.write(kEncoderMagic, 8);
  put<std::uint32_t>(bin, kFormatVersion);
  put<std::uint32_t>(bin, static_cast<std::uint32_t>(vocabulary().size()));
  for (const std::string& t : vocabulary().tokens()) put_string(bin, t);
  write_parameters(bin, parameters());
  write_text_file(dir / "encoder.bin", bin.str());
  write_text_file(dir / "encoder.manifest", encoder_manifest(*this));
}

void register_external_encoder(std::string scheme, ExternalEncoderFactory factory) {
  std::lock_guard lock(registry_mutex());
  registry()[std::move(scheme)] = std::move(factory);
}

void unregister_external_encoder(const std::string& scheme) {
  std::lock_guard lock(registry_mutex());
  registry().erase(scheme);
}

std::unique_ptr<SequenceEncoder> make_encoder(const EncoderSpec& spec,
                                              const Vocabulary& vocab,
                                              std::uint64_t seed) {
  spec.validate();
  if (spec.kind == EncoderKind::tiny) {
    return std::make_unique<TinyEncoder>(spec, vocab, seed);
  }
  const std::string scheme = spec.locator.substr(0, spec.locator.find(':'));
  ExternalEncoderFactory factory;
  {
    std::lock_guard lock(registry_mutex());
    auto it = registry().find(scheme);
    if (it == registry().end()) {
      throw EncoderUnavailableError("no external encoder registered for '" +
                                    scheme + "'");
    }
    factory = it->second;
  }
  auto encoder = factory(spec, vocab, seed);
  if (!encoder || encoder->dimension() != spec.dimension) {
    throw EncoderUnavailableError("external encoder '" + scheme +
                                  "' does not match the requested dimension");
  }
  return encoder;
}

std::unique_ptr<SequenceEncoder> load_encoder(const std::filesystem::path& dir) {
  const auto manifest = parse_key_values(read_text_file(dir / "encoder.manifest"));
  auto field = [&](const char* key) -> const std::string& {
    auto it = manifest.find(key);
    if (it == manifest.end()) {
      throw ArtifactError(std::string("encoder manifest lacks '") + key + "'");
    }
    return it->second;
  };
  EncoderSpec spec;
  spec.kind = encoder_kind_from_string(field("kind"));
  spec.dimension = std::stoul(field("dimension"));
  spec.max_length = std::stoul(field("max_length"));
  spec.unknown_policy = unknown_policy_from_string(field("unknown_policy"));
  if (spec.kind == EncoderKind::external) spec.locator = field("locator");

  std::ifstream in = open_input(dir / "encoder.bin");
  check_magic(in, kEncoderMagic);
  Vocabulary vocab;
  const auto count = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string token = get_string(in);
    if (vocab.add(token) != i) throw ArtifactError("vocabulary is not canonical");
  }
  if (hex64(vocab.hash()) != field("vocabulary_hash")) {
    throw ArtifactError("vocabulary hash does not match the manifest");
  }
  ParameterSet params = read_parameters(in);

  if (spec.kind == EncoderKind::tiny) {
    return std::make_unique<TinyEncoder>(spec, std::move(vocab), std::move(params));
  }
  auto encoder = make_encoder(spec, vocab, 0);
  ParameterSet& target = encoder->parameters();
  if (target.zeros_like() != params.zeros_like()) {
    throw ArtifactError("saved parameters do not fit the external encoder");
  }
  target = std::move(params);
  return encoder;
}

}  // namespace dialect
