#include "codetok/cli.h"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "codetok/analysis.h"
#include "codetok/corpus.h"
#include "codetok/error.h"
#include "codetok/text.h"
#include "json.hpp"

namespace codetok {
namespace {

using Json = nlohmann::ordered_json;

struct Config {
  // shared
  std::vector<std::string> inputs;
  std::string output;
  std::string model;
  std::vector<std::string> models;
  std::string format = "json";
  int threads = 1;
  uint64_t seed = 0;
  // normalize
  std::string lang = "indented";
  std::string manifest;
  bool functions = false;
  bool strip_preprocessor = false;
  // train
  std::string algo = "unigram";
  int level = 0;
  int vocab = 8000;
  double coverage = 0.9999;
  int seed_multiplier = 10;
  double shrink = 0.75;
  int em_iterations = 2;
  // encode
  bool bos = false;
  bool eos = false;
  double alpha = 0.0;
  // stats / align / crosslang / intersect / crop
  std::string baseline;
  std::string model_b;
  size_t sample = 150000;
  std::string input_b;
  double f_hi = 100.0;
  double f_lo = 1.0;
  std::string csv;
  int max_len = 510;
};

// Rethrows with a file:line prefix.
[[noreturn]] void Rethrow(const Error& e, const std::string& path,
                          size_t line) {
  throw Error(e.code(), path + ":" + std::to_string(line) + ": " + e.message());
}

std::vector<NormalizedSeq> ReadInputs(const std::vector<std::string>& paths) {
  std::vector<NormalizedSeq> out;
  for (const auto& p : paths) {
    auto part = ReadCorpus(p);
    out.insert(out.end(), std::make_move_iterator(part.begin()),
               std::make_move_iterator(part.end()));
  }
  return out;
}

std::vector<std::vector<int>> ReadIds(const std::string& path) {
  std::istringstream in(ReadFile(path));
  std::vector<std::vector<int>> out;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream fields(line);
    std::vector<int> ids;
    std::string tok;
    while (fields >> tok) {
      try {
        size_t used = 0;
        ids.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kUnknownId, path + ":" + std::to_string(lineno) +
                                               ": not an id '" + tok + "'");
      }
    }
    out.push_back(std::move(ids));
  }
  return out;
}

std::string IdsLine(const std::vector<int>& ids) {
  std::string s;
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i > 0) s += ' ';
    s += std::to_string(ids[i]);
  }
  return s;
}

void Emit(std::ostream& out, const Config& cfg, const std::string& json,
          const std::string& table) {
  out << (cfg.format == "table" ? table : json + "\n");
}

int RunNormalize(const Config& cfg, std::ostream& out, std::ostream& err) {
  std::vector<std::string> files = cfg.inputs;
  if (!cfg.manifest.empty()) {
    const auto listed = ReadManifest(cfg.manifest);
    files.insert(files.end(), listed.begin(), listed.end());
  }
  if (files.empty()) {
    err << "normalize: no input files (--in or --manifest)\n";
    return kExitUsage;
  }
  NormalizeOptions options{InputLangFromName(cfg.lang), cfg.strip_preprocessor};
  std::vector<NormalizedSeq> corpus;
  Json rejected = Json::array();
  for (const auto& path : files) {
    try {
      NormalizedSeq seq = NormalizeSource(ReadFile(path), options);
      if (cfg.functions) {
        for (auto& f : ExtractFunctions(seq)) corpus.push_back(std::move(f));
      } else if (!seq.empty()) {
        corpus.push_back(std::move(seq));
      }
    } catch (const Error& e) {
      rejected.push_back({{"file", path}, {"error", e.what()}});
      err << path << ": " << e.what() << "\n";
    }
  }
  if (cfg.output.empty()) {
    for (const auto& seq : corpus) out << Serialize(seq) << "\n";
  } else {
    WriteCorpus(cfg.output, corpus);
    Json summary{{"command", "normalize"},
                 {"files", files.size()},
                 {"sequences", corpus.size()},
                 {"rejected", rejected}};
    out << summary.dump(2) << "\n";
  }
  return rejected.size() == files.size() ? kExitData : kExitOk;
}

int RunTrain(const Config& cfg, std::ostream& out) {
  const auto corpus = ReadInputs(cfg.inputs);
  const Level level = LevelFromInt(cfg.level);
  const Algorithm algo = AlgorithmFromName(cfg.algo);
  std::optional<SubwordModel> model;
  Json summary{{"command", "train"}, {"algorithm", cfg.algo},
               {"level", cfg.level}, {"sequences", corpus.size()}};
  if (algo == Algorithm::kBpe) {
    model.emplace(TrainBpe(corpus, {level, cfg.vocab, cfg.coverage}));
  } else {
    UnigramTrainOptions o;
    o.level = level;
    o.vocab_size = cfg.vocab;
    o.coverage = cfg.coverage;
    o.seed_multiplier = cfg.seed_multiplier;
    o.shrink_factor = cfg.shrink;
    o.em_iterations = cfg.em_iterations;
    o.threads = cfg.threads;
    UnigramTrainTrace trace;
    model.emplace(TrainUnigram(corpus, o, &trace));
    summary["seed_pieces"] = trace.seed_pieces;
    if (!trace.em.empty()) {
      summary["final_log_likelihood"] = trace.em.back().log_likelihood;
    }
  }
  SaveModel(*model, cfg.output);
  summary["vocab_size"] = model->vocab_size();
  summary["alphabet_size"] = model->alphabet().size();
  summary["model"] = cfg.output;
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int RunEncode(const Config& cfg, std::ostream& out) {
  const SubwordModel model = LoadModel(cfg.model);
  const auto corpus = ReadInputs(cfg.inputs);
  std::vector<std::vector<int>> encoded;
  if (cfg.alpha > 0.0) {
    std::mt19937_64 rng(cfg.seed);
    for (const auto& seq : corpus) {
      encoded.push_back(SampleEncode(model, seq, cfg.alpha, rng).ids);
    }
  } else {
    encoded = EncodeBatch(model, corpus, cfg.threads);
  }
  std::string data;
  uint64_t tokens = 0;
  for (auto& ids : encoded) {
    if (cfg.bos) ids.insert(ids.begin(), kBosId);
    if (cfg.eos) ids.push_back(kEosId);
    tokens += ids.size();
    data += IdsLine(ids);
    data += '\n';
  }
  WriteFile(cfg.output, data);
  Json summary{{"command", "encode"}, {"sequences", corpus.size()},
               {"tokens", tokens}, {"output", cfg.output}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

int RunDecode(const Config& cfg, std::ostream& out) {
  const SubwordModel model = LoadModel(cfg.model);
  std::string data;
  size_t lines = 0;
  for (const auto& path : cfg.inputs) {
    const auto all = ReadIds(path);
    for (size_t k = 0; k < all.size(); ++k) {
      try {
        data += Serialize(Decode(model, all[k]));
      } catch (const Error& e) {
        Rethrow(e, path, k + 1);
      }
      data += '\n';
      ++lines;
    }
  }
  WriteFile(cfg.output, data);
  Json summary{{"command", "decode"}, {"sequences", lines},
               {"output", cfg.output}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

std::string ModelName(const std::string& path) {
  std::string name = std::filesystem::path(path).filename().string();
  const std::string suffix = ".codetok.json";
  if (name.size() > suffix.size() &&
      name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
    name.resize(name.size() - suffix.size());
  }
  return name;
}

int RunStats(const Config& cfg, std::ostream& out) {
  std::vector<std::string> paths;
  if (!cfg.baseline.empty()) paths.push_back(cfg.baseline);
  paths.insert(paths.end(), cfg.models.begin(), cfg.models.end());
  std::vector<SubwordModel> models;
  for (const auto& p : paths) models.push_back(LoadModel(p));
  std::vector<std::pair<std::string, const SubwordModel*>> named;
  for (size_t i = 0; i < models.size(); ++i) {
    named.emplace_back(ModelName(paths[i]), &models[i]);
  }
  const auto report =
      ComputeLengthReport(named, ReadInputs(cfg.inputs), 0, cfg.threads);
  Emit(out, cfg, ToJson(report), ToTable(report));
  return kExitOk;
}

int RunCompose(const Config& cfg, std::ostream& out) {
  const auto report = VocabComposition(LoadModel(cfg.model));
  Emit(out, cfg, ToJson(report), ToTable(report));
  return kExitOk;
}

int RunAlign(const Config& cfg, std::ostream& out) {
  const SubwordModel a = LoadModel(cfg.model);
  const SubwordModel b = LoadModel(cfg.model_b);
  const auto report =
      ComputeAlignmentReport(ModelName(cfg.model), a, ModelName(cfg.model_b), b,
                             ReadInputs(cfg.inputs), cfg.sample, cfg.seed);
  Emit(out, cfg, ToJson(report), ToTable(report));
  return kExitOk;
}

int RunFreq(const Config& cfg, std::ostream& out) {
  const SubwordModel model = LoadModel(cfg.model);
  const auto profile =
      ComputeFrequencyProfile(model, ReadInputs(cfg.inputs), cfg.threads);
  if (!cfg.csv.empty()) WriteFile(cfg.csv, ToCsv(profile, model));
  Emit(out, cfg, ToJson(profile, model), ToCsv(profile, model));
  return kExitOk;
}

int RunCrossLang(const Config& cfg, std::ostream& out) {
  const SubwordModel model = LoadModel(cfg.model);
  const auto report = ComputeCrossLangReport(
      model, ReadInputs(cfg.inputs), ReadCorpus(cfg.input_b), cfg.f_hi,
      cfg.f_lo, cfg.threads);
  Emit(out, cfg, ToJson(report), ToTable(report));
  return kExitOk;
}

int RunIntersect(const Config& cfg, std::ostream& out) {
  const SubwordModel model = LoadModel(cfg.model);
  const auto inputs = ReadInputs(cfg.inputs);
  const auto outputs = ReadCorpus(cfg.input_b);
  if (inputs.size() != outputs.size()) {
    throw Error(ErrorCode::kInconsistentSources,
                "input and output corpora differ in length (" +
                    std::to_string(inputs.size()) + " vs " +
                    std::to_string(outputs.size()) + ")");
  }
  std::vector<std::pair<NormalizedSeq, NormalizedSeq>> pairs;
  for (size_t i = 0; i < inputs.size(); ++i) {
    pairs.emplace_back(inputs[i], outputs[i]);
  }
  const auto report = ComputeIoIntersection(model, pairs);
  Emit(out, cfg, ToJson(report), ToTable(report));
  return kExitOk;
}

// Writes one output file per model: <out>/<model name>.ids.
int RunCrop(const Config& cfg, std::ostream& out) {
  std::vector<SubwordModel> models;
  for (const auto& p : cfg.models) models.push_back(LoadModel(p));
  const auto corpus = ReadInputs(cfg.inputs);
  std::vector<std::string> data(models.size());
  Json lengths = Json::array();
  for (size_t line = 0; line < corpus.size(); ++line) {
    std::vector<TokenizedSeq> seqs;
    for (const auto& m : models) seqs.push_back(Encode(m, corpus[line]));
    std::vector<TokenizedSeq> cropped;
    try {
      cropped = FairCrop(seqs, cfg.max_len);
    } catch (const Error& e) {
      Rethrow(e, cfg.inputs.front(), line + 1);
    }
    for (size_t m = 0; m < models.size(); ++m) {
      data[m] += IdsLine(cropped[m].ids);
      data[m] += '\n';
    }
  }
  std::filesystem::create_directories(cfg.output);
  Json files = Json::array();
  for (size_t m = 0; m < models.size(); ++m) {
    const std::string path =
        (std::filesystem::path(cfg.output) / (ModelName(cfg.models[m]) + ".ids"))
            .string();
    WriteFile(path, data[m]);
    files.push_back(path);
  }
  Json summary{{"command", "crop"}, {"sequences", corpus.size()},
               {"max_len", cfg.max_len}, {"outputs", files}};
  out << summary.dump(2) << "\n";
  return kExitOk;
}

// Every named option of `cmd` also reads CODETOK_<NAME>.
void BindEnvironment(CLI::App* cmd) {
  for (CLI::Option* opt : cmd->get_options()) {
    std::string name = opt->get_single_name();
    if (name.empty() || name == "help") continue;
    std::string env = "CODETOK_";
    for (char c : name) {
      env += c == '-' ? '_' : static_cast<char>(std::toupper(c));
    }
    opt->envname(env);
  }
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  Config cfg;
  CLI::App app{"Code-aware subword tokenization toolkit", "codetok"};
  app.require_subcommand(1);

  auto common = [&](CLI::App* cmd) {
    cmd->add_option("--threads", cfg.threads, "Worker threads")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", cfg.seed, "Random seed");
  };
  auto format = [&](CLI::App* cmd) {
    cmd->add_option("--format", cfg.format, "Report format")
        ->check(CLI::IsMember({"json", "table"}));
  };
  const auto levels = CLI::Range(0, 4);

  auto* normalize = app.add_subcommand("normalize", "Raw sources to corpus");
  normalize->add_option("--in", cfg.inputs, "Source files");
  normalize->add_option("--manifest", cfg.manifest, "File listing sources");
  normalize->add_option("--lang", cfg.lang, "Source language")
      ->check(CLI::IsMember({"indented", "python", "braced", "java", "c", "text"}));
  normalize->add_flag("--functions", cfg.functions, "One line per function");
  normalize->add_flag("--strip-preprocessor", cfg.strip_preprocessor,
                      "Drop # directive lines (braced)");
  normalize->add_option("--out", cfg.output, "Corpus file (default stdout)");
  common(normalize);

  auto* train = app.add_subcommand("train", "Train a model");
  train->add_option("--algo", cfg.algo, "bpe | unigram")
      ->check(CLI::IsMember({"bpe", "unigram"}));
  train->add_option("--level", cfg.level, "Granularity level")->check(levels);
  train->add_option("--vocab", cfg.vocab, "Vocabulary size")
      ->check(CLI::PositiveNumber);
  train->add_option("--coverage", cfg.coverage, "Character coverage")
      ->check(CLI::Range(0.0, 1.0));
  train->add_option("--seed-multiplier", cfg.seed_multiplier)
      ->check(CLI::Range(2, 1000));
  train->add_option("--shrink", cfg.shrink, "Pruning shrink factor");
  train->add_option("--em-iterations", cfg.em_iterations)
      ->check(CLI::Range(1, 100));
  train->add_option("--in", cfg.inputs, "Corpus files")->required();
  train->add_option("--out", cfg.output, "Model file")->required();
  common(train);

  auto* encode = app.add_subcommand("encode", "Corpus to ID lines");
  encode->add_option("--model", cfg.model)->required();
  encode->add_option("--in", cfg.inputs, "Corpus files")->required();
  encode->add_option("--out", cfg.output, "ID file")->required();
  encode->add_flag("--bos", cfg.bos, "Prepend <s>");
  encode->add_flag("--eos", cfg.eos, "Append </s>");
  encode->add_option("--alpha", cfg.alpha,
                     "Sample segmentations with this smoothing (unigram)");
  common(encode);

  auto* decode = app.add_subcommand("decode", "ID lines to corpus");
  decode->add_option("--model", cfg.model)->required();
  decode->add_option("--in", cfg.inputs, "ID files")->required();
  decode->add_option("--out", cfg.output, "Corpus file")->required();
  common(decode);

  auto* stats = app.add_subcommand("stats", "Average lengths");
  stats->add_option("--baseline", cfg.baseline, "Baseline model")->required();
  stats->add_option("--models", cfg.models, "Compared models");
  stats->add_option("--in", cfg.inputs, "Corpus files")->required();
  format(stats);
  common(stats);

  auto* compose = app.add_subcommand("compose", "Vocabulary composition");
  compose->add_option("--model", cfg.model)->required();
  format(compose);
  common(compose);

  auto* align = app.add_subcommand("align", "Native-split alignment");
  align->add_option("--model", cfg.model, "First model")->required();
  align->add_option("--model-b", cfg.model_b, "Second model")->required();
  align->add_option("--in", cfg.inputs, "Corpus files")->required();
  align->add_option("--sample", cfg.sample, "Identifier sample size");
  format(align);
  common(align);

  auto* freq = app.add_subcommand("freq", "Token frequency profile");
  freq->add_option("--model", cfg.model)->required();
  freq->add_option("--in", cfg.inputs, "Corpus files")->required();
  freq->add_option("--csv", cfg.csv, "Also write rank,frequency CSV");
  format(freq);
  common(freq);

  auto* crosslang = app.add_subcommand("crosslang", "Language-specific tokens");
  crosslang->add_option("--model", cfg.model)->required();
  crosslang->add_option("--in", cfg.inputs, "Language A corpus")->required();
  crosslang->add_option("--in-b", cfg.input_b, "Language B corpus")->required();
  crosslang->add_option("--f-hi", cfg.f_hi, "Frequent, per million");
  crosslang->add_option("--f-lo", cfg.f_lo, "Rare, per million");
  format(crosslang);
  common(crosslang);

  auto* intersect = app.add_subcommand("intersect", "Input/output overlap");
  intersect->add_option("--model", cfg.model)->required();
  intersect->add_option("--in", cfg.inputs, "Input side corpus")->required();
  intersect->add_option("--in-b", cfg.input_b, "Output side corpus")->required();
  format(intersect);
  common(intersect);

  auto* crop = app.add_subcommand("crop", "Fair cropping across models");
  crop->add_option("--models", cfg.models)->required();
  crop->add_option("--in", cfg.inputs, "Corpus files")->required();
  crop->add_option("--max-len", cfg.max_len)->check(CLI::PositiveNumber);
  crop->add_option("--out", cfg.output, "Output directory")->required();
  common(crop);

  for (CLI::App* cmd : app.get_subcommands({})) BindEnvironment(cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*normalize) return RunNormalize(cfg, out, err);
    if (*train) return RunTrain(cfg, out);
    if (*encode) return RunEncode(cfg, out);
    if (*decode) return RunDecode(cfg, out);
    if (*stats) return RunStats(cfg, out);
    if (*compose) return RunCompose(cfg, out);
    if (*align) return RunAlign(cfg, out);
    if (*freq) return RunFreq(cfg, out);
    if (*crosslang) return RunCrossLang(cfg, out);
    if (*intersect) return RunIntersect(cfg, out);
    if (*crop) return RunCrop(cfg, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const bool usage = e.code() == ErrorCode::kInvalidArgument ||
                       e.code() == ErrorCode::kUnsupportedLevel;
    return usage ? kExitUsage : kExitData;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace codetok
