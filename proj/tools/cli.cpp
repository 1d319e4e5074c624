#include "cli.hpp"

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "moss/errors.hpp"
#include "moss/metrics.hpp"
#include "moss/model_io.hpp"
#include "moss/rollout.hpp"
#include "moss/synth.hpp"
#include "moss/trainer.hpp"

namespace moss::cli {

namespace fs = std::filesystem;

namespace {

enum class Level { quiet, info, debug };

Level log_level() {
  const char* v = std::getenv("MOSS_LOG");
  if (!v) return Level::info;
  const std::string s(v);
  if (s == "quiet") return Level::quiet;
  if (s == "debug") return Level::debug;
  return Level::info;
}

// Diagnostics go to `err`; MOSS_LOG=quiet silences everything but failures.
struct Log {
  std::ostream& err;
  Level level = log_level();
  void info(const std::string& msg) const {
    if (level != Level::quiet) err << msg << '\n';
  }
  void debug(const std::string& msg) const {
    if (level == Level::debug) err << msg << '\n';
  }
};

std::vector<double> parse_reals(const std::string& csv, const char* what) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw CLI::ValidationError(std::string(what), "not a number: '" + item + "'");
    }
  }
  return out;
}

std::vector<std::string> parse_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ParseError("cannot write " + path.string());
  out << text;
}

// Model config keys plus an optional "train" object.
struct RunConfig {
  FrameworkConfig fw;
  TrainConfig train;
};

RunConfig load_run_config(const std::string& path) {
  RunConfig rc;
  if (path.empty()) return rc;
  const std::string text = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  nlohmann::json model = j;
  model.erase("train");
  rc.fw = FrameworkConfig::from_json(model.dump());
  if (j.contains("train")) rc.train = TrainConfig::from_json(j["train"].dump());
  // The model-level rate is the one the trainer applies unless overridden.
  if (!j.contains("train") || !j["train"].contains("dropout")) rc.train.dropout = rc.fw.dropout;
  return rc;
}

void apply_instance(FrameworkConfig& fw, const std::string& instance) {
  if (instance.empty()) return;
  const FrameworkConfig shape = FrameworkConfig::instance(instance);
  fw.has_nlu = shape.has_nlu;
  fw.has_dpl = shape.has_dpl;
}

struct DataDir {
  Corpus train;
  std::optional<Corpus> valid;
  std::optional<Corpus> test;
  KnowledgeBase kb;
  std::optional<TaskSchema> schema;
};

DataDir load_data_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ParseError("data directory " + dir.string() + " does not exist");
  DataDir d;
  d.train = load_corpus(dir / "train.jsonl");
  if (fs::exists(dir / "valid.jsonl")) d.valid = load_corpus(dir / "valid.jsonl");
  if (fs::exists(dir / "test.jsonl")) d.test = load_corpus(dir / "test.jsonl");
  d.kb = KnowledgeBase::load(dir / "kb.json");
  if (fs::exists(dir / "schema.json")) d.schema = TaskSchema::load(dir / "schema.json");
  return d;
}

// Training corpus after --fraction / --raw-complement.
Corpus training_corpus(const Corpus& full, double fraction, bool raw_complement, std::uint64_t seed) {
  if (fraction >= 1.0 && !raw_complement) return full;
  Subsample s = subsample(full, fraction, seed);
  Corpus out = std::move(s.sample);
  if (raw_complement)
    for (auto& d : s.complement) out.push_back(strip_to_raw(std::move(d)));
  return out;
}

MossNet<float> fit(RunConfig rc, const Corpus& train_set, const Corpus* valid, const KnowledgeBase& kb,
                   std::ostream* log_out, const Log& log) {
  Vocab vocab = Vocab::build(train_set, rc.fw.vocab_size);
  rc.fw.vocab_size = vocab.size();
  log.debug("vocabulary: " + std::to_string(vocab.size()) + " tokens");
  MossNet<float> net(rc.fw, std::move(vocab), kb);
  TrainResult r = train(net, train_set, valid, rc.train, log_out);
  log.info("best epoch " + std::to_string(r.best_epoch));
  return net;
}

std::string resolved(const RunConfig& rc) {
  nlohmann::ordered_json j = nlohmann::ordered_json::parse(rc.fw.to_json());
  j["instance"] = rc.fw.instance_name();
  j["train"] = nlohmann::ordered_json::parse(rc.train.to_json());
  return j.dump();
}

Corpus eval_corpus(const std::string& data) {
  fs::path p(data);
  if (fs::is_directory(p)) p /= "test.jsonl";
  return load_corpus(p);
}

TaskSchema schema_for(const fs::path& model_dir, const std::string& schema_path, const std::string& data) {
  if (!schema_path.empty()) return TaskSchema::load(schema_path);
  if (fs::is_directory(data) && fs::exists(fs::path(data) / "schema.json")) return TaskSchema::load(fs::path(data) / "schema.json");
  if (auto s = load_model_schema(model_dir)) return *s;
  throw ParseError("no schema.json next to the model or the data; pass --schema");
}

std::string csv_cell(const std::optional<double>& v) {
  if (!v) return "";
  std::ostringstream os;
  os << std::setprecision(6) << *v;
  return os.str();
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  Log log{err};
  CLI::App app{"MOSS modular task-oriented dialog framework"};
  app.require_subcommand(1);

  // gen-data
  GenConfig gen;
  std::string gen_out, gen_ratios = "3,1,1", gen_dropout = "0,0,0,0";
  auto* g = app.add_subcommand("gen-data", "generate a synthetic corpus, its KB and schema");
  g->add_option("--task", gen.task, "simple|complex")->check(CLI::IsMember({"simple", "complex"}));
  g->add_option("--n", gen.n_dialogs, "number of dialogs")->check(CLI::PositiveNumber);
  g->add_option("--seed", gen.seed, "generator seed");
  g->add_option("--max-turns", gen.max_turns, "turn cap per dialog")->check(CLI::PositiveNumber);
  g->add_option("--ratios", gen_ratios, "train,valid,test split ratios");
  g->add_option("--dropout", gen_dropout, "masking probabilities nlu,dst,dpl,nlg");
  g->add_flag("--per-turn", gen.per_turn, "draw masks per turn instead of per dialog");
  g->add_option("--out", gen_out, "output directory")->required();

  // train
  std::string cfg_path, data_dir, out_dir, instance;
  std::uint64_t seed = 0;
  double fraction = 1.0;
  bool raw_complement = false;
  int epochs = 0;
  auto* t = app.add_subcommand("train", "train one framework instance");
  t->add_option("--config", cfg_path, "model/train config JSON");
  t->add_option("--data", data_dir, "directory with train.jsonl, kb.json [valid.jsonl, schema.json]")->required();
  t->add_option("--out", out_dir, "model output directory")->required();
  t->add_option("--seed", seed, "overrides model and training seeds");
  t->add_option("--instance", instance, "all|wo_nlu|wo_dpl|wo_nlu_dpl")
      ->check(CLI::IsMember({"all", "wo_nlu", "wo_dpl", "wo_nlu_dpl"}));
  t->add_option("--fraction", fraction, "share of the training dialogs kept")->check(CLI::Range(1e-9, 1.0));
  t->add_flag("--raw-complement", raw_complement, "add the unsampled dialogs with only NLG annotated");
  t->add_option("--epochs", epochs, "overrides max_epochs")->check(CLI::PositiveNumber);

  // eval
  std::string model_dir, eval_data, schema_path, eval_out;
  bool gold_as_pred = false;
  auto* e = app.add_subcommand("eval", "evaluate a model under predicted-state rollout");
  e->add_option("--model", model_dir, "model directory")->required();
  e->add_option("--data", eval_data, "corpus file or data directory (test.jsonl)")->required();
  e->add_option("--schema", schema_path, "task schema JSON");
  e->add_option("--out", eval_out, "directory for metrics.json, metrics.txt, predictions.jsonl");
  e->add_flag("--gold-as-pred", gold_as_pred, "score the gold annotations themselves");

  // sweep
  std::string fractions = "0.2,0.4,0.6,0.8,1.0", instances = "all,wo_nlu,wo_dpl,wo_nlu_dpl", seeds = "1";
  std::string sweep_cfg, sweep_data, sweep_out;
  int sweep_epochs = 0;
  bool sweep_raw = false;
  auto* s = app.add_subcommand("sweep", "train and evaluate instances x data fractions, emit CSV");
  s->add_option("--config", sweep_cfg, "model/train config JSON");
  s->add_option("--data", sweep_data, "data directory")->required();
  s->add_option("--out", sweep_out, "output directory for results.csv")->required();
  s->add_option("--fractions", fractions, "comma-separated fractions");
  s->add_option("--instances", instances, "comma-separated instances");
  s->add_option("--seeds", seeds, "comma-separated seeds");
  s->add_option("--epochs", sweep_epochs, "overrides max_epochs")->check(CLI::PositiveNumber);
  s->add_flag("--raw-complement", sweep_raw, "add the unsampled dialogs with only NLG annotated");

  // error-report
  std::string er_model, er_data, er_out;
  auto* r = app.add_subcommand("error-report", "per-module error records, earliest failing module flagged");
  r->add_option("--model", er_model, "model directory")->required();
  r->add_option("--data", er_data, "corpus file or data directory")->required();
  r->add_option("--out", er_out, "JSON-lines output file (default stdout)");

  // chat
  std::string chat_model;
  auto* c = app.add_subcommand("chat", "interactive session showing every module's output");
  c->add_option("--model", chat_model, "model directory")->required();

  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return ok;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return ok;
  } catch (const CLI::ParseError& pe) {
    err << "usage error: " << pe.what() << '\n';
    return usage;
  }

  try {
    if (g->parsed()) {
      const auto ratios = parse_reals(gen_ratios, "--ratios");
      const auto drop = parse_reals(gen_dropout, "--dropout");
      if (ratios.size() != 3) throw CLI::ValidationError("--ratios", "expected three values");
      if (drop.size() != 4) throw CLI::ValidationError("--dropout", "expected four values");
      for (std::size_t i = 0; i < 4; ++i) gen.annotation_dropout[i] = drop[i];
      nlohmann::ordered_json rc;
      rc["task"] = gen.task;
      rc["n"] = gen.n_dialogs;
      rc["seed"] = gen.seed;
      rc["max_turns"] = gen.max_turns;
      rc["ratios"] = ratios;
      rc["dropout"] = drop;
      rc["per_turn"] = gen.per_turn;
      log.info("gen-data " + rc.dump());
      const TaskSchema schema = TaskSchema::by_name(gen.task);
      const KnowledgeBase kb = make_kb(schema, gen.seed);
      const Corpus corpus = generate(schema, kb, gen);
      const Split sp = split(corpus, {ratios[0], ratios[1], ratios[2]}, gen.seed);
      fs::create_directories(gen_out);
      save_corpus(sp.train, fs::path(gen_out) / "train.jsonl");
      save_corpus(sp.valid, fs::path(gen_out) / "valid.jsonl");
      save_corpus(sp.test, fs::path(gen_out) / "test.jsonl");
      kb.save(fs::path(gen_out) / "kb.json");
      schema.save(fs::path(gen_out) / "schema.json");
      log.info("wrote " + std::to_string(sp.train.size()) + "/" + std::to_string(sp.valid.size()) + "/" +
               std::to_string(sp.test.size()) + " dialogs to " + gen_out);
      return ok;
    }

    if (t->parsed()) {
      RunConfig rc = load_run_config(cfg_path);
      apply_instance(rc.fw, instance);
      if (t->count("--seed")) rc.fw.seed = rc.train.seed = seed;
      if (epochs > 0) rc.train.max_epochs = epochs;
      rc.fw.validate();
      log.info("train " + resolved(rc) + " fraction=" + std::to_string(fraction) +
               (raw_complement ? " raw_complement" : ""));
      const DataDir d = load_data_dir(data_dir);
      const Corpus train_set = training_corpus(d.train, fraction, raw_complement, rc.train.seed);
      fs::create_directories(out_dir);
      std::ofstream train_log(fs::path(out_dir) / "train_log.jsonl", std::ios::trunc);
      const MossNet<float> net = fit(rc, train_set, d.valid ? &*d.valid : nullptr, d.kb, &train_log, log);
      save_model(net, out_dir, d.schema ? &*d.schema : nullptr);
      log.info("model written to " + out_dir);
      return ok;
    }

    if (e->parsed()) {
      const MossNet<float> net = load_model(model_dir);
      const TaskSchema schema = schema_for(model_dir, schema_path, eval_data);
      const Corpus corpus = eval_corpus(eval_data);
      log.info("eval model=" + model_dir + " instance=" + net.config().instance_name() + " data=" + eval_data +
               " dialogs=" + std::to_string(corpus.size()) + (gold_as_pred ? " gold_as_pred" : ""));
      const Predictions preds = gold_as_pred ? gold_predictions(corpus) : predict(net, corpus);
      const MetricReport rep = evaluate(preds, corpus, schema);
      out << rep.to_text();
      if (!eval_out.empty()) {
        fs::create_directories(eval_out);
        write_text(fs::path(eval_out) / "metrics.json", rep.to_json() + "\n");
        write_text(fs::path(eval_out) / "metrics.txt", rep.to_text());
        std::ofstream pf(fs::path(eval_out) / "predictions.jsonl", std::ios::trunc);
        for (const auto& p : preds) {
          nlohmann::ordered_json j;
          j["dialog_id"] = p.dialog_id;
          auto turns = nlohmann::ordered_json::array();
          for (const auto& tp : p.turns) {
            nlohmann::ordered_json tj;
            for (Module m : kAllModules) {
              const auto& v = tp[m];
              tj[std::string(module_key(m))] = v ? nlohmann::ordered_json(join(*v)) : nlohmann::ordered_json(nullptr);
            }
            turns.push_back(tj);
          }
          j["turns"] = turns;
          pf << j.dump() << '\n';
        }
      }
      return ok;
    }

    if (s->parsed()) {
      RunConfig base = load_run_config(sweep_cfg);
      if (sweep_epochs > 0) base.train.max_epochs = sweep_epochs;
      const auto fr = parse_reals(fractions, "--fractions");
      const auto inst = parse_list(instances);
      std::vector<std::uint64_t> sd;
      for (double v : parse_reals(seeds, "--seeds")) sd.push_back(static_cast<std::uint64_t>(v));
      for (double f : fr)
        if (!(f > 0 && f <= 1)) throw CLI::ValidationError("--fractions", "values must lie in (0, 1]");
      for (const auto& i : inst) FrameworkConfig::instance(i);
      const DataDir d = load_data_dir(sweep_data);
      if (!d.test) throw ParseError(sweep_data + " has no test.jsonl");
      if (!d.schema) throw ParseError(sweep_data + " has no schema.json");
      log.info("sweep " + resolved(base) + " fractions=" + fractions + " instances=" + instances + " seeds=" + seeds);
      fs::create_directories(sweep_out);
      std::ofstream csv(fs::path(sweep_out) / "results.csv", std::ios::trunc);
      csv << "instance,fraction,seed,mat,succ_f1,bleu,nlu_acc,dst_acc,dpl_acc,succ_acc\n";
      for (const auto& i : inst) {
        for (double f : fr) {
          for (auto seed_v : sd) {
            RunConfig rc = base;
            apply_instance(rc.fw, i);
            rc.fw.seed = rc.train.seed = seed_v;
            const Corpus train_set = training_corpus(d.train, f, sweep_raw, seed_v);
            const MossNet<float> net = fit(rc, train_set, d.valid ? &*d.valid : nullptr, d.kb, nullptr, log);
            const MetricReport rep = evaluate(predict(net, *d.test), *d.test, *d.schema);
            csv << i << ',' << f << ',' << seed_v << ',' << csv_cell(rep.mat) << ',' << csv_cell(rep.succ_f1) << ','
                << csv_cell(rep.bleu) << ',' << csv_cell(rep.nlu_acc) << ',' << csv_cell(rep.dst_acc) << ','
                << csv_cell(rep.dpl_acc) << ',' << csv_cell(rep.succ_acc) << '\n'
                << std::flush;
            log.info("sweep cell " + i + " fraction=" + std::to_string(f) + " seed=" + std::to_string(seed_v) + " done");
          }
        }
      }
      return ok;
    }

    if (r->parsed()) {
      const MossNet<float> net = load_model(er_model);
      const Corpus corpus = eval_corpus(er_data);
      log.info("error-report model=" + er_model + " data=" + er_data);
      const auto records = error_report(predict(net, corpus), corpus);
      std::ofstream file;
      if (!er_out.empty()) {
        file.open(er_out, std::ios::trunc);
        if (!file) throw ParseError("cannot write " + er_out);
      }
      std::ostream& dst = er_out.empty() ? out : file;
      for (const auto& rec : records) dst << rec.to_json() << '\n';
      log.info(std::to_string(records.size()) + " error records");
      return ok;
    }

    if (c->parsed()) {
      const MossNet<float> net = load_model(chat_model);
      log.info("chat model=" + chat_model + " instance=" + net.config().instance_name() +
               " (type 'reset' to restart, 'quit' to leave)");
      Dialog live;
      live.dialog_id = "chat";
      PredictedTurn prev;
      std::string line;
      while (out << "user> " << std::flush, std::getline(in, line)) {
        if (line == "quit" || line == "exit") break;
        if (line == "reset") {
          live.turns.clear();
          out << "(new dialog)\n";
          continue;
        }
        if (tokenize(line).empty()) continue;
        DialogTurn turn;
        turn.user = tokenize(line);
        turn.mask = AnnotationMask{false, false, false, false};
        live.turns.push_back(turn);
        const int idx = static_cast<int>(live.turns.size());
        const TurnInput input =
            make_turn_input(live, idx, Source::predicted, idx > 1 ? &prev : nullptr, net.config().has_dpl);
        const TurnPrediction p = predict_turn(net, input);
        for (Module m : kAllModules)
          if (p[m]) out << "  " << module_name(m) << ": " << join(*p[m]) << '\n';
        prev = PredictedTurn{p[Module::dst].value_or(Tokens{}), p[Module::dpl].value_or(Tokens{}),
                             p[Module::nlg].value_or(Tokens{})};
      }
      out << '\n';
      return ok;
    }
  } catch (const CLI::ValidationError& ve) {
    err << "usage error: " << ve.what() << '\n';
    return usage;
  } catch (const ParseError& pe) {
    err << "data error: " << pe.what() << '\n';
    return data;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << '\n';
    return runtime;
  }
  return usage;
}

}  // namespace moss::cli
