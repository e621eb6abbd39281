// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#include "mmgru/cli.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "mmgru/binary_io.hpp"
#include "mmgru/checkpoint.hpp"
#include "mmgru/dataset.hpp"
#include "mmgru/decoder.hpp"
#include "mmgru/gru.hpp"
#include "mmgru/metrics.hpp"
#include "mmgru/model.hpp"
#include "mmgru/parallel.hpp"
#include "mmgru/retrieval.hpp"

namespace mmgru::cli {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

std::string sha256_hex(const std::filesystem::path& path) {
  const auto bytes = io::read_file(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw IoError("sha256 failed for " + path.string());
  }
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
  }
  return hex.str();
}

json input_record(const std::string& path) {
  return json{{"path", path}, {"sha256", sha256_hex(path)}};
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return s.str();
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

// Flat key=value file; keys are long flag names without the dashes. Values
// only fill options that were not given on the command line.
void apply_config_file(CLI::App& sub, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "config") continue;
    CLI::Option* opt = sub.get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    if (opt->count() > 0) continue;
    try {
      opt->add_result(value);
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw UsageError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<std::size_t> parse_size_list(const std::string& s, const char* flag) {
  std::vector<std::size_t> out;
  for (const auto& item : split_list(s)) {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(item, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != item.size() || v <= 0) {
      throw UsageError(std::string(flag) + ": '" + item + "' is not a positive integer");
    }
    out.push_back(static_cast<std::size_t>(v));
  }
  if (out.empty()) throw UsageError(std::string(flag) + ": empty list");
  return out;
}

std::string join_tokens(const Tokens& t) {
  std::string s;
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) s += ' ';
    s += t[i];
  }
  return s;
}

std::string with_commas(std::uint64_t v) {
  std::string digits = std::to_string(v);
  std::string out;
  const std::size_t n = digits.size();
  for (std::size_t i = 0; i < n; ++i) {
    out += digits[i];
    if ((n - i - 1) % 3 == 0 && i + 1 < n) out += ',';
  }
  return out;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot open " + path + " for writing");
  f << j.dump(2) << '\n';
}

Checkpoint load_model_for(const std::string& ckpt_path, const FeatureFile& features) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  if (!features.vectors.empty()) {
    if (features.dim != ck.params.feature_dim()) {
      throw FormatError("feature dim " + std::to_string(features.dim) +
                        " does not match checkpoint d_img " +
                        std::to_string(ck.params.feature_dim()));
    }
  }
  return ck;
}

// ---------------------------------------------------------------------------
// train

struct TrainFlags {
  std::string features, captions, out, manifest, config;
  std::size_t hidden = 256;
  std::size_t layers = 1;
  std::string stack;
  std::size_t epochs = 10;
  double lr = 1e-2;
  double l2 = 1e-4;
  std::uint64_t seed = 1;
  std::size_t min_count = kDefaultMinCount;
  double max_grad_norm = 0.0;
  double init_scale = 0.08;
};

StackKind resolve_stack(std::size_t layers, const std::string& stack) {
  if (layers == 1) {
    if (!stack.empty() && stack != "single") {
      throw UsageError("--stack " + stack + " requires --layers 2");
    }
    return StackKind::kSingle;
  }
  if (layers != 2) throw UsageError("--layers must be 1 or 2");
  if (stack.empty()) return StackKind::kFeedback;
  if (stack == "single") throw UsageError("--stack single requires --layers 1");
  try {
    return parse_stack_kind(stack);
  } catch (const ConfigError& e) {
    throw UsageError(e.what());
  }
}

int cmd_train(const TrainFlags& f, bool clip_set, std::ostream& out) {
  TrainConfig cfg;
  cfg.learning_rate = f.lr;
  cfg.l2_lambda = f.l2;
  cfg.epochs = f.epochs;
  cfg.seed = f.seed;
  cfg.hidden_size = f.hidden;
  cfg.stack = resolve_stack(f.layers, f.stack);
  cfg.init_scale = f.init_scale;
  if (clip_set) cfg.max_grad_norm = f.max_grad_norm;
  if (f.min_count < 1) throw UsageError("--min-count must be >= 1");
  try {
    cfg.validate();
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }

  const auto started = std::chrono::steady_clock::now();
  const FeatureFile features = load_features(f.features);
  const auto entries = read_caption_file(f.captions);
  const Vocabulary vocab = build_vocab(caption_corpus(entries), f.min_count);
  const CaptionDataset dataset = build_dataset(entries, features, vocab);
  if (dataset.records.empty()) throw DataError("training set is empty");

  double last_loss = 0.0;
  const ModelParams params = train(dataset, cfg, [&](std::size_t epoch, double loss) {
    last_loss = loss;
    out << json{{"epoch", epoch}, {"mean_loss", loss}}.dump() << '\n';
    out.flush();
  });
  save_checkpoint(params, vocab, f.out);
  const double elapsed =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();

  const std::string manifest_path = f.manifest.empty() ? f.out + ".manifest.json" : f.manifest;
  json config{{"features", f.features},   {"captions", f.captions},
              {"out", f.out},             {"hidden", f.hidden},
              {"layers", f.layers},       {"stack", std::string(to_string(cfg.stack))},
              {"epochs", f.epochs},       {"lr", f.lr},
              {"l2", f.l2},               {"seed", f.seed},
              {"min-count", f.min_count}, {"init-scale", f.init_scale},
              {"max-grad-norm", clip_set ? json(f.max_grad_norm) : json(nullptr)}};
  if (!f.config.empty()) config["config"] = f.config;
  const json manifest{
      {"command", "train"},
      {"config", config},
      {"inputs", {{"features", input_record(f.features)}, {"captions", input_record(f.captions)}}},
      {"seed", f.seed},
      {"started_at", utc_timestamp()},
      {"wall_clock_seconds", elapsed},
      {"final_metrics",
       {{"last_epoch_mean_loss", last_loss},
        {"vocab_size", vocab.size()},
        {"pairs", dataset.caption_count()},
        {"trainable_parameters", trainable_count(params)}}}};
  write_json_file(manifest_path, manifest);
  out << json{{"checkpoint", f.out}, {"manifest", manifest_path}}.dump() << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------
// caption

struct CaptionFlags {
  std::string ckpt, features, config;
  std::size_t max_len = kDefaultMaxLen;
  bool allow_unk = false;
};

int cmd_caption(const CaptionFlags& f, std::ostream& out) {
  if (f.max_len < 1) throw UsageError("--max-len must be >= 1");
  const FeatureFile features = load_features(f.features);
  const Checkpoint ck = load_model_for(f.ckpt, features);
  const DecodeConfig dcfg{f.max_len, !f.allow_unk};

  std::vector<const std::pair<const std::string, Vector>*> items;
  for (const auto& kv : features.vectors) items.push_back(&kv);
  std::vector<std::string> captions(items.size());
  parallel_for(items.size(), [&](std::size_t i) {
    captions[i] = join_tokens(generate(ck.params, ck.vocab, items[i]->second, dcfg));
  });
  for (std::size_t i = 0; i < items.size(); ++i) {
    out << json{{"id", items[i]->first}, {"caption", captions[i]}}.dump() << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval / score

struct MetricSelection {
  bool bleu = true, meteor = true, cider = true;
};

MetricSelection parse_metric_list(const std::string& list) {
  if (list.empty()) return {};
  MetricSelection sel{false, false, false};
  for (const auto& m : split_list(list)) {
    if (m == "bleu") {
      sel.bleu = true;
    } else if (m == "meteor") {
      sel.meteor = true;
    } else if (m == "cider") {
      sel.cider = true;
    } else {
      throw UsageError("--metrics: unknown metric '" + m + "' (expected bleu, meteor, cider)");
    }
  }
  return sel;
}

json metric_json(const MetricReport& r, const MetricSelection& sel) {
  json j = json::object();
  if (sel.bleu) {
    for (std::size_t n = 0; n < kMaxNgramOrder; ++n) j["B-" + std::to_string(n + 1)] = r.bleu[n];
  }
  if (sel.meteor) j["METEOR"] = r.meteor;
  if (sel.cider) j["CIDEr"] = r.cider_available ? json(r.cider) : json(nullptr);
  return j;
}

json sentence_json(const SentenceScores& s, const MetricSelection& sel) {
  json j = json::object();
  if (sel.bleu) {
    for (std::size_t n = 0; n < kMaxNgramOrder; ++n) j["B-" + std::to_string(n + 1)] = s.bleu[n];
  }
  if (sel.meteor) j["METEOR"] = s.meteor;
  if (sel.cider) j["CIDEr"] = s.cider;
  return j;
}

json report_json(const MetricReport& r, const MetricSelection& sel,
                 const std::vector<std::string>& ids, const std::vector<Tokens>& hyps) {
  json j;
  j["metrics"] = metric_json(r, sel);
  j["images"] = ids.size();
  j["flags"] = {{"bleu_degenerate_order", r.bleu_degenerate},
                {"meteor_greedy_alignment", r.meteor_heuristic},
                {"meteor_matching", "exact"}};
  json per = json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    json s = sentence_json(r.per_sentence[i], sel);
    s["id"] = ids[i];
    s["caption"] = join_tokens(hyps[i]);
    per.push_back(std::move(s));
  }
  j["per_sentence"] = std::move(per);
  return j;
}

void print_metric_table(const json& metrics, std::ostream& out) {
  for (const auto& [k, v] : metrics.items()) {
    out << std::left << std::setw(8) << k << ' ';
    if (v.is_null()) {
      out << "n/a\n";
    } else {
      out << std::fixed << std::setprecision(4) << v.get<double>() << '\n';
    }
  }
}

struct EvalFlags {
  std::string ckpt, features, captions, metrics, manifest, config;
  std::size_t max_len = kDefaultMaxLen;
  bool allow_unk = false;
  bool table = false;
};

int cmd_eval(const EvalFlags& f, std::ostream& out) {
  const MetricSelection sel = parse_metric_list(f.metrics);
  if (f.max_len < 1) throw UsageError("--max-len must be >= 1");
  const auto started = std::chrono::steady_clock::now();
  const FeatureFile features = load_features(f.features);
  const Checkpoint ck = load_model_for(f.ckpt, features);
  const CaptionDataset ds = build_dataset(read_caption_file(f.captions), features, ck.vocab);
  if (ds.records.empty()) throw DataError("evaluation set is empty");

  const DecodeConfig dcfg{f.max_len, !f.allow_unk};
  std::vector<Tokens> hyps(ds.records.size());
  parallel_for(ds.records.size(), [&](std::size_t i) {
    hyps[i] = generate(ck.params, ck.vocab, ds.records[i].feature, dcfg);
  });
  std::vector<std::vector<Tokens>> refs;
  std::vector<std::string> ids;
  for (const auto& r : ds.records) {
    refs.push_back(r.references);
    ids.push_back(r.image_id);
  }
  const MetricReport report = evaluate_captions(hyps, refs);
  json j = report_json(report, sel, ids, hyps);

  const json manifest{
      {"command", "eval"},
      {"config",
       {{"ckpt", f.ckpt},
        {"features", f.features},
        {"captions", f.captions},
        {"metrics", f.metrics.empty() ? "bleu,meteor,cider" : f.metrics},
        {"max-len", f.max_len},
        {"allow-unk", f.allow_unk}}},
      {"inputs",
       {{"ckpt", input_record(f.ckpt)},
        {"features", input_record(f.features)},
        {"captions", input_record(f.captions)}}},
      {"seed", nullptr},
      {"started_at", utc_timestamp()},
      {"wall_clock_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()},
      {"final_metrics", j["metrics"]}};
  if (!f.manifest.empty()) {
    write_json_file(f.manifest, manifest);
  } else {
    j["manifest"] = manifest;
  }

  if (f.table) {
    print_metric_table(j["metrics"], out);
  } else {
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

struct ScoreFlags {
  std::string input, metrics, config;
  bool table = false;
};

int cmd_score(const ScoreFlags& f, std::ostream& out) {
  const MetricSelection sel = parse_metric_list(f.metrics);
  const auto bytes = io::read_file(f.input);
  const std::string_view text(reinterpret_cast<const char*>(bytes.data()), bytes.size());
  std::vector<std::string> ids;
  std::vector<Tokens> hyps;
  std::vector<std::vector<Tokens>> refs;
  std::size_t line_no = 0, pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string line = trim(std::string(text.substr(pos, end - pos)));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;
    const std::string where = f.input + " line " + std::to_string(line_no) + ": ";
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ParseError(where + e.what());
    }
    if (!obj.is_object() || !obj.contains("hyp") || !obj["hyp"].is_string() ||
        !obj.contains("refs") || !obj["refs"].is_array() || obj["refs"].empty()) {
      throw ParseError(where + "expected {\"id\", \"hyp\": string, \"refs\": [string, ...]}");
    }
    ids.push_back(obj.contains("id") ? (obj["id"].is_string() ? obj["id"].get<std::string>()
                                                              : obj["id"].dump())
                                     : std::to_string(line_no));
    hyps.push_back(normalize_text(obj["hyp"].get<std::string>()));
    std::vector<Tokens> r;
    for (const auto& ref : obj["refs"]) {
      if (!ref.is_string()) throw ParseError(where + "reference is not a string");
      r.push_back(normalize_text(ref.get<std::string>()));
    }
    refs.push_back(std::move(r));
  }
  if (hyps.empty()) throw DataError(f.input + ": no records");
  const json j = report_json(evaluate_captions(hyps, refs), sel, ids, hyps);
  if (f.table) {
    print_metric_table(j["metrics"], out);
  } else {
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// retrieve

struct RetrieveFlags {
  std::string ckpt, features, captions, manifest, config;
  std::string direction = "both";
  std::string ks = "1,5,10";
  std::string medr = "mean-of-medians";
  std::string score = "normalized";
  bool table = false;
};

json retrieval_block(const std::vector<RankResult>& results, const std::vector<std::size_t>& ks,
                     MedianMode mode) {
  json j = json::object();
  for (std::size_t k : ks) j["R@" + std::to_string(k)] = recall_at_k(results, k);
  j["Med-r"] = median_rank(results, mode);
  j["queries"] = results.size();
  return j;
}

int cmd_retrieve(const RetrieveFlags& f, std::ostream& out) {
  const std::vector<std::size_t> ks = parse_size_list(f.ks, "--k");
  MedianMode medr;
  if (f.medr == "mean-of-medians") {
    medr = MedianMode::kMeanOfMedians;
  } else if (f.medr == "conventional" || f.medr == "median-of-best") {
    medr = MedianMode::kMedianOfBest;
  } else {
    throw UsageError("--medr must be mean-of-medians or conventional");
  }
  ScoreMode smode;
  if (f.score == "normalized") {
    smode = ScoreMode::kNormalized;
  } else if (f.score == "raw") {
    smode = ScoreMode::kRaw;
  } else {
    throw UsageError("--score must be normalized or raw");
  }
  const bool want_i2s = f.direction == "both" || f.direction == "i2s";
  const bool want_s2i = f.direction == "both" || f.direction == "s2i";
  if (!want_i2s && !want_s2i) throw UsageError("--direction must be both, i2s or s2i");

  const auto started = std::chrono::steady_clock::now();
  const FeatureFile features = load_features(f.features);
  const Checkpoint ck = load_model_for(f.ckpt, features);
  const CaptionDataset ds = build_dataset(read_caption_file(f.captions), features, ck.vocab);
  if (ds.records.empty()) throw DataError("retrieval pool is empty");

  const ScoreMatrix table = score_matrix(ck.params, ds, smode);
  json j;
  j["medr_mode"] = std::string(to_string(medr));
  j["score_mode"] = std::string(to_string(smode));
  j["k"] = ks;
  if (want_i2s) {
    j["sentence_retrieval"] =
        retrieval_block(rank_from_scores(table, Direction::kImageToSentence), ks, medr);
  }
  if (want_s2i) {
    j["image_retrieval"] =
        retrieval_block(rank_from_scores(table, Direction::kSentenceToImage), ks, medr);
  }

  const json manifest{
      {"command", "retrieve"},
      {"config",
       {{"ckpt", f.ckpt},
        {"features", f.features},
        {"captions", f.captions},
        {"direction", f.direction},
        {"k", f.ks},
        {"medr", f.medr},
        {"score", f.score}}},
      {"inputs",
       {{"ckpt", input_record(f.ckpt)},
        {"features", input_record(f.features)},
        {"captions", input_record(f.captions)}}},
      {"seed", nullptr},
      {"started_at", utc_timestamp()},
      {"wall_clock_seconds",
       std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count()}};
  if (!f.manifest.empty()) {
    json m = manifest;
    m["final_metrics"] = j;
    write_json_file(f.manifest, m);
  }

  if (f.table) {
    out << std::left << std::setw(20) << "";
    for (std::size_t k : ks) out << std::setw(9) << ("R@" + std::to_string(k));
    out << "Med-r\n";
    for (const char* key : {"sentence_retrieval", "image_retrieval"}) {
      if (!j.contains(key)) continue;
      out << std::setw(20) << key;
      for (std::size_t k : ks) {
        out << std::setw(9) << std::fixed << std::setprecision(4)
            << j[key]["R@" + std::to_string(k)].get<double>();
      }
      out << std::setprecision(2) << j[key]["Med-r"].get<double>() << '\n';
    }
  } else {
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// params

struct ParamsFlags {
  std::string hidden = "256,512,1024";
  std::size_t input_dim = 0;  // 0: same as hidden
  bool table = false;
  std::string config;
};

int cmd_params(const ParamsFlags& f, std::ostream& out) {
  const auto hidden = parse_size_list(f.hidden, "--hidden");
  json rows = json::array();
  for (std::size_t h : hidden) {
    const std::size_t d = f.input_dim == 0 ? h : f.input_dim;
    const auto gru = param_count(RecurrentUnit::kGru, d, h);
    const auto lstm = param_count(RecurrentUnit::kLstm, d, h);
    const auto conv = param_count(RecurrentUnit::kGru, d, h, StackKind::kConventional);
    const auto fb = param_count(RecurrentUnit::kGru, d, h, StackKind::kFeedback);
    rows.push_back({{"hidden", h},
                    {"input_dim", d},
                    {"gru", gru},
                    {"lstm", lstm},
                    {"gru_2layer_conventional", conv},
                    {"gru_2layer_feedback", fb},
                    {"feedback_saving", conv - fb},
                    {"feedback_to_conventional_ratio",
                     static_cast<double>(fb) / static_cast<double>(conv)}});
  }
  if (f.table) {
    out << std::left << std::setw(8) << "hidden" << std::right << std::setw(14) << "GRU"
        << std::setw(14) << "LSTM" << std::setw(16) << "GRU-2L-conv" << std::setw(16)
        << "GRU-2L-fb" << '\n';
    for (const auto& r : rows) {
      out << std::left << std::setw(8) << r["hidden"].get<std::size_t>() << std::right
          << std::setw(14) << with_commas(r["gru"]) << std::setw(14) << with_commas(r["lstm"])
          << std::setw(16) << with_commas(r["gru_2layer_conventional"]) << std::setw(16)
          << with_commas(r["gru_2layer_feedback"]) << '\n';
    }
  } else {
    out << json{{"rows", rows}}.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multimodal GRU image captioning: train, caption, evaluate, retrieve"};
  app.name("mmgru");
  app.require_subcommand(1);

  TrainFlags tf;
  auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint");
  train_cmd->add_option("--features", tf.features, "MMFT feature file")->required();
  train_cmd->add_option("--captions", tf.captions, "Caption JSON Lines file")->required();
  train_cmd->add_option("--out", tf.out, "Checkpoint path to write")->required();
  train_cmd->add_option("--manifest", tf.manifest, "Run manifest path (default: <out>.manifest.json)");
  train_cmd->add_option("--hidden", tf.hidden, "Hidden / embedding size")->capture_default_str();
  train_cmd->add_option("--layers", tf.layers, "GRU layers (1 or 2)")->capture_default_str();
  train_cmd->add_option("--stack", tf.stack, "Two-layer strategy: feedback (default) or conventional");
  train_cmd->add_option("--epochs", tf.epochs)->capture_default_str();
  train_cmd->add_option("--lr", tf.lr, "SGD learning rate")->capture_default_str();
  train_cmd->add_option("--l2", tf.l2, "Weight penalty coefficient")->capture_default_str();
  train_cmd->add_option("--seed", tf.seed)->capture_default_str();
  train_cmd->add_option("--min-count", tf.min_count, "Drop words rarer than this")
      ->capture_default_str();
  auto* clip_opt = train_cmd->add_option("--max-grad-norm", tf.max_grad_norm,
                                         "Clip the global gradient norm (off by default)");
  train_cmd->add_option("--init-scale", tf.init_scale)->capture_default_str();
  train_cmd->add_option("--config", tf.config, "key=value file; flags take precedence");

  CaptionFlags cf;
  auto* caption_cmd = app.add_subcommand("caption", "Greedy captions as JSON Lines");
  caption_cmd->add_option("--ckpt", cf.ckpt)->required();
  caption_cmd->add_option("--features", cf.features)->required();
  caption_cmd->add_option("--max-len", cf.max_len)->capture_default_str();
  caption_cmd->add_flag("--allow-unk", cf.allow_unk, "Let the decoder emit <unk>");
  caption_cmd->add_option("--config", cf.config);

  EvalFlags ef;
  auto* eval_cmd = app.add_subcommand("eval", "Generate captions and score them");
  eval_cmd->add_option("--ckpt", ef.ckpt)->required();
  eval_cmd->add_option("--features", ef.features)->required();
  eval_cmd->add_option("--captions", ef.captions, "Reference captions (JSON Lines)")->required();
  eval_cmd->add_option("--metrics", ef.metrics, "Comma list of bleu,meteor,cider");
  eval_cmd->add_option("--max-len", ef.max_len)->capture_default_str();
  eval_cmd->add_flag("--allow-unk", ef.allow_unk);
  eval_cmd->add_option("--manifest", ef.manifest, "Write the run manifest here");
  eval_cmd->add_flag("--table", ef.table, "Human-readable output");
  eval_cmd->add_option("--config", ef.config);

  ScoreFlags sf;
  auto* score_cmd = app.add_subcommand("score", "Score hypotheses against references");
  score_cmd->add_option("--input", sf.input, "JSON Lines of {id, hyp, refs}")->required();
  score_cmd->add_option("--metrics", sf.metrics);
  score_cmd->add_flag("--table", sf.table);
  score_cmd->add_option("--config", sf.config);

  RetrieveFlags rf;
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Bidirectional image/sentence ranking");
  retrieve_cmd->add_option("--ckpt", rf.ckpt)->required();
  retrieve_cmd->add_option("--features", rf.features)->required();
  retrieve_cmd->add_option("--captions", rf.captions)->required();
  retrieve_cmd->add_option("--direction", rf.direction, "both, i2s or s2i")->capture_default_str();
  retrieve_cmd->add_option("--k", rf.ks, "Comma list of K for R@K")->capture_default_str();
  retrieve_cmd->add_option("--medr", rf.medr, "mean-of-medians or conventional")
      ->capture_default_str();
  retrieve_cmd->add_option("--score", rf.score, "normalized or raw log-likelihood")
      ->capture_default_str();
  retrieve_cmd->add_option("--manifest", rf.manifest);
  retrieve_cmd->add_flag("--table", rf.table);
  retrieve_cmd->add_option("--config", rf.config);

  ParamsFlags pf;
  auto* params_cmd = app.add_subcommand("params", "GRU vs LSTM parameter counts");
  params_cmd->add_option("--hidden", pf.hidden, "Comma list of hidden sizes")
      ->capture_default_str();
  params_cmd->add_option("--input-dim", pf.input_dim, "Input size (default: equal to hidden)");
  params_cmd->add_flag("--table", pf.table);
  params_cmd->add_option("--config", pf.config);

  std::vector<const char*> argv{"mmgru"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    auto with_config = [](CLI::App* sub, const std::string& path) {
      if (!path.empty()) apply_config_file(*sub, path);
    };
    if (train_cmd->parsed()) {
      with_config(train_cmd, tf.config);
      return cmd_train(tf, clip_opt->count() > 0, out);
    }
    if (caption_cmd->parsed()) {
      with_config(caption_cmd, cf.config);
      return cmd_caption(cf, out);
    }
    if (eval_cmd->parsed()) {
      with_config(eval_cmd, ef.config);
      return cmd_eval(ef, out);
    }
    if (score_cmd->parsed()) {
      with_config(score_cmd, sf.config);
      return cmd_score(sf, out);
    }
    if (retrieve_cmd->parsed()) {
      with_config(retrieve_cmd, rf.config);
      return cmd_retrieve(rf, out);
    }
    if (params_cmd->parsed()) {
      with_config(params_cmd, pf.config);
      return cmd_params(pf, out);
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitUsage;
}

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mmgru::cli
