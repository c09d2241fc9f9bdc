// SPDX-License-Identifier: Apache-2.0
#include "cli.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "smartpaste/dataflow/usegraph.hpp"
#include "smartpaste/eval/metrics.hpp"
#include "smartpaste/infer/infer.hpp"
#include "smartpaste/taskgen/generator.hpp"
#include "smartpaste/train/train.hpp"

namespace smartpaste::cli {

namespace {

using json = nlohmann::json;

/// A failure caused by the inputs rather than the command line.
class DomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DomainError("cannot open " + path + ": file not found");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw DomainError("cannot write " + path);
}

std::vector<taskgen::TaskInstance> read_data(const std::string& path) {
  if (!std::filesystem::exists(path)) throw DomainError("cannot open " + path + ": file not found");
  return taskgen::read_instances_file(path);
}

json split_json(const taskgen::CorpusSplit& s) {
  return {{"train", s.train}, {"valid", s.valid}, {"test", s.test}, {"unseen_test", s.unseen_test}};
}

struct Globals {
  std::uint64_t seed = 1;
  int threads = 1;
};

struct GenerateArgs {
  int projects = 5, files = 4, functions = 3, max_statements = 12;
  std::string profile = "mixed", out;
};

struct ExtractArgs {
  std::string corpus, out, split, part;
  int max_tokens = 80;
};

struct SplitArgs {
  std::string corpus, out;
  double unseen = 0.2;
};

struct TrainArgs {
  std::string data, valid, out, resume, log, variant = "hybrid", encoder = "logbilinear";
  int hidden = 64, window = 3, chain = 14, depth = 15, batch = 16, epochs = 20, patience = 3, min_count = 2;
  double lr = 1e-3;
  bool no_types = false;
};

struct EvalArgs {
  std::string model, data, json_out;
  int restarts = 5, sweeps = 10;
  bool no_full = false;
};

struct PasteArgs {
  std::string model, target, snippet, at, variant, out;
  int restarts = 5, sweeps = 10;
};

struct DumpUsageArgs {
  std::string model, data, out;
};

int do_generate(const GenerateArgs& a, const Globals& g, std::ostream& out) {
  taskgen::GenOptions o;
  o.seed = g.seed;
  o.projects = a.projects;
  o.files_per_project = a.files;
  o.functions_per_file = a.functions;
  o.max_statements = a.max_statements;
  o.profile = taskgen::profile_from_string(a.profile);
  const auto files = taskgen::generate_corpus(o);
  taskgen::write_corpus(a.out, files);
  out << "wrote " << files.size() << " files to " << a.out << '\n';
  return 0;
}

int do_split(const SplitArgs& a, const Globals& g, std::ostream& out) {
  if (!std::filesystem::is_directory(a.corpus)) throw DomainError("corpus directory " + a.corpus + " not found");
  const auto s = taskgen::split_corpus(taskgen::read_corpus(a.corpus), g.seed, a.unseen);
  write_file(a.out, split_json(s).dump(1) + "\n");
  out << "train " << s.train.size() << " valid " << s.valid.size() << " test " << s.test.size() << " unseen "
      << s.unseen_test.size() << '\n';
  return 0;
}

int do_extract(const ExtractArgs& a, std::ostream& out) {
  if (!std::filesystem::is_directory(a.corpus)) throw DomainError("corpus directory " + a.corpus + " not found");
  std::vector<std::string> keep;
  const bool filter = !a.split.empty();
  if (filter) {
    const auto j = json::parse(read_file(a.split));
    if (!j.contains(a.part)) throw DomainError("split file has no partition '" + a.part + "'");
    keep = j.at(a.part).get<std::vector<std::string>>();
  }
  std::vector<taskgen::TaskInstance> all;
  std::size_t files = 0;
  for (const auto& f : taskgen::read_corpus(a.corpus)) {
    if (filter && std::find(keep.begin(), keep.end(), f.id()) == keep.end()) continue;
    ++files;
    for (auto& inst : taskgen::extract_instances(minilang::compile(f.text, f.id()), a.max_tokens))
      all.push_back(std::move(inst));
  }
  taskgen::write_instances_file(a.out, all);
  out << "wrote " << all.size() << " instances from " << files << " files to " << a.out << '\n';
  return 0;
}

int do_train(const TrainArgs& a, const Globals& g, std::ostream& out) {
  train::TrainConfig tc;
  tc.model.variant = models::variant_from_string(a.variant);
  tc.model.encoder = models::encoder_from_string(a.encoder);
  tc.model.hidden = tc.model.embed = a.hidden;
  tc.model.window = a.window;
  tc.model.chain = a.chain;
  tc.model.depth = a.depth;
  tc.model.use_types = !a.no_types;
  tc.model.min_lexeme_count = a.min_count;
  tc.batch_size = a.batch;
  tc.epochs = a.epochs;
  tc.lr = a.lr;
  tc.seed = g.seed;
  tc.patience = a.patience;
  tc.checkpoint = a.out;
  tc.threads = g.threads;
  tc.validate();
  const auto train_set = read_data(a.data);
  std::unique_ptr<models::Model> model;
  int first_epoch = 1;
  if (!a.resume.empty()) {
    auto ck = train::load_checkpoint(a.resume);
    model = std::move(ck.model);
    tc.model = model->config();
    first_epoch = ck.epoch + 1;
  } else {
    model = train::init_model(tc, train_set);
  }
  const bool types = model->config().use_types;
  const models::Dataset train_data(train_set, model->vocab(), types);
  const models::Dataset valid_data(a.valid.empty() ? train_set : read_data(a.valid), model->vocab(), types);
  std::unique_ptr<std::ofstream> log_file;
  std::ostream* log = &out;
  if (!a.log.empty()) {
    log_file = std::make_unique<std::ofstream>(a.log);
    if (!*log_file) throw DomainError("cannot write " + a.log);
    log = log_file.get();
  }
  const auto r = train::fit(tc, *model, train_data, valid_data, log, first_epoch);
  out << "best epoch " << r.best_epoch << " valid accuracy " << r.best_valid_accuracy << "; checkpoint " << a.out << '\n';
  return 0;
}

int do_eval(const EvalArgs& a, const Globals& g, std::ostream& out) {
  const auto data = read_data(a.data);
  if (!std::filesystem::exists(a.model)) throw DomainError("cannot open " + a.model + ": file not found");
  auto ck = train::load_checkpoint(a.model);
  const models::Dataset ds(data, ck.model->vocab(), ck.model->config().use_types);
  infer::IcmOptions icm;
  icm.restarts = a.restarts;
  icm.max_sweeps = a.sweeps;
  icm.seed = g.seed;
  const auto report = eval::evaluate(*ck.model, ds, icm, !a.no_full, g.threads);
  eval::print_table(out, report);
  if (!a.json_out.empty()) write_file(a.json_out, eval::to_json(report).dump(1) + "\n");
  return 0;
}

std::pair<int, int> parse_at(const std::string& at) {
  const auto colon = at.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument("no colon");
    std::size_t used = 0;
    const int line = std::stoi(at.substr(0, colon), &used);
    if (used != colon) throw std::invalid_argument("line");
    const auto rest = at.substr(colon + 1);
    const int col = std::stoi(rest, &used);
    if (used != rest.size()) throw std::invalid_argument("col");
    return {line, col};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--at", "expected LINE:COL, got '" + at + "'");
  }
}

int do_paste(const PasteArgs& a, const Globals& g, std::ostream& out) {
  const auto [line, col] = parse_at(a.at);
  auto ck = train::load_checkpoint(a.model);
  if (!a.variant.empty() && models::variant_from_string(a.variant) != ck.model->config().variant)
    throw DomainError("checkpoint holds a " + std::string(models::to_string(ck.model->config().variant)) +
                      " model, not " + a.variant);
  infer::IcmOptions icm;
  icm.restarts = a.restarts;
  icm.max_sweeps = a.sweeps;
  icm.seed = g.seed;
  const auto r = infer::paste(*ck.model, read_file(a.target), read_file(a.snippet), line, col, icm);
  if (a.out.empty()) out << r.source;
  else write_file(a.out, r.source);
  for (const auto& p : r.placeholders) {
    out << "# " << p.line << ':' << p.column << " ->";
    for (const auto& [name, prob] : p.ranking) {
      std::ostringstream pct;
      pct.precision(3);
      pct << 100 * prob;
      out << ' ' << name << ": " << pct.str() << '%';
    }
    out << '\n';
  }
  return 0;
}

int do_dump_dataflow(const std::string& file, std::ostream& out) {
  out << dataflow::dump_dataflow(minilang::compile(read_file(file), file));
  return 0;
}

int do_dump_usage(const DumpUsageArgs& a, std::ostream& out) {
  auto ck = train::load_checkpoint(a.model);
  const models::Dataset ds(read_data(a.data), ck.model->vocab(), ck.model->config().use_types);
  std::ostringstream buf;
  const auto variant = std::string(models::to_string(ck.model->config().variant));
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto& inst = ds.instance(i);
    nn::Tape tape;
    models::Encoder enc(*ck.model, ds.view(i), tape, false);
    const auto b = inst.truth_binding();
    for (const auto& ph : inst.placeholders)
      for (auto v : ph.candidates) {
        json rec{{"instance", i},
                 {"program_id", inst.program_id},
                 {"token", ph.token},
                 {"symbol", inst.program->symbol(v).name},
                 {"symbol_id", v},
                 {"truth", v == ph.truth},
                 {"variant", variant},
                 {"values", enc.usage_value(ph.token, v, b)}};
        buf << rec.dump() << '\n';
      }
  }
  if (a.out.empty()) out << buf.str();
  else write_file(a.out, buf.str());
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Variable-name inference for pasted code snippets", "smartpaste"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "Read flags from a TOML/INI file ([subcommand] sections)");
  Globals g;
  app.add_option("--seed", g.seed, "Seed for all randomness")->envname("SMARTPASTE_SEED");
  app.add_option("--threads", g.threads, "Worker threads for evaluation")->check(CLI::PositiveNumber);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "Write a synthetic corpus");
  gen->add_option("--projects", ga.projects)->check(CLI::PositiveNumber);
  gen->add_option("--files-per-project", ga.files)->check(CLI::PositiveNumber);
  gen->add_option("--functions-per-file", ga.functions)->check(CLI::PositiveNumber);
  gen->add_option("--max-statements", ga.max_statements, "Statement budget (stress/straight profiles)")
      ->check(CLI::PositiveNumber);
  gen->add_option("--profile", ga.profile)->check(CLI::IsMember({"mixed", "typesep", "loops", "stress", "straight"}));
  gen->add_option("--out", ga.out, "Output directory")->required();

  ExtractArgs ea;
  auto* ext = app.add_subcommand("extract", "Extract task instances from a corpus");
  ext->add_option("--corpus", ea.corpus)->required();
  ext->add_option("--out", ea.out, "Instance file (JSON lines)")->required();
  ext->add_option("--max-tokens", ea.max_tokens)->check(CLI::PositiveNumber);
  auto* split_opt = ext->add_option("--split", ea.split, "Split file from `split`");
  ext->add_option("--part", ea.part, "Partition to extract: train|valid|test|unseen_test")
      ->needs(split_opt)
      ->check(CLI::IsMember({"train", "valid", "test", "unseen_test"}));

  SplitArgs sa;
  auto* spl = app.add_subcommand("split", "Split a corpus by file and project");
  spl->add_option("--corpus", sa.corpus)->required();
  spl->add_option("--out", sa.out, "Split file (JSON)")->required();
  spl->add_option("--unseen-fraction", sa.unseen, "Fraction of whole projects held out")->check(CLI::Range(0.0, 1.0));

  TrainArgs ta;
  auto* trn = app.add_subcommand("train", "Train a usage model");
  trn->add_option("--data", ta.data, "Training instances")->required();
  trn->add_option("--valid", ta.valid, "Validation instances (default: the training set)");
  trn->add_option("--out", ta.out, "Checkpoint path")->required();
  trn->add_option("--resume", ta.resume, "Continue from a checkpoint");
  trn->add_option("--log", ta.log, "Epoch log file (default: stdout)");
  trn->add_option("--variant", ta.variant)->check(CLI::IsMember({"loc", "avgg", "grug", "grud", "hybrid"}));
  trn->add_option("--context-encoder", ta.encoder)->check(CLI::IsMember({"logbilinear", "gru"}));
  trn->add_option("--hidden", ta.hidden, "Hidden and embedding size")->check(CLI::PositiveNumber);
  trn->add_option("--window", ta.window, "Context window C")->check(CLI::PositiveNumber);
  trn->add_option("--chain", ta.chain, "Lexical chain length L")->check(CLI::NonNegativeNumber);
  trn->add_option("--depth", ta.depth, "Data-flow tree depth D")->check(CLI::NonNegativeNumber);
  trn->add_option("--min-lexeme-count", ta.min_count)->check(CLI::PositiveNumber);
  trn->add_flag("--no-types", ta.no_types, "Map every variable to UnkType");
  trn->add_option("--batch-size", ta.batch)->check(CLI::PositiveNumber);
  trn->add_option("--epochs", ta.epochs)->check(CLI::NonNegativeNumber);
  trn->add_option("--lr", ta.lr)->check(CLI::PositiveNumber);
  trn->add_option("--patience", ta.patience)->check(CLI::NonNegativeNumber);

  EvalArgs va;
  auto* evl = app.add_subcommand("eval", "Evaluate a checkpoint");
  evl->add_option("--model", va.model)->required();
  evl->add_option("--data", va.data)->required();
  evl->add_option("--json", va.json_out, "Also write the report as JSON");
  evl->add_option("--restarts", va.restarts)->check(CLI::PositiveNumber);
  evl->add_option("--max-sweeps", va.sweeps)->check(CLI::PositiveNumber);
  evl->add_flag("--no-full-snippet", va.no_full, "Skip structured (ICM) evaluation");

  PasteArgs pa;
  auto* pst = app.add_subcommand("paste", "Paste a snippet and rename its variables");
  pst->add_option("--model", pa.model)->required();
  pst->add_option("--target", pa.target)->required();
  pst->add_option("--snippet", pa.snippet)->required();
  pst->add_option("--at", pa.at, "Insertion point LINE:COL (1-based)")->required();
  pst->add_option("--variant", pa.variant, "Expected model variant")
      ->check(CLI::IsMember({"loc", "avgg", "grug", "grud", "hybrid"}));
  pst->add_option("--restarts", pa.restarts)->check(CLI::PositiveNumber);
  pst->add_option("--max-sweeps", pa.sweeps)->check(CLI::PositiveNumber);
  pst->add_option("--out", pa.out, "Write the program here instead of stdout");

  std::string df_file;
  auto* ddf = app.add_subcommand("dump-dataflow", "Print lexical and data-flow relations of a file");
  ddf->add_option("file", df_file)->required();

  DumpUsageArgs da;
  auto* duv = app.add_subcommand("dump-usage-vectors", "Write usage vectors of every candidate as JSON lines");
  duv->add_option("--model", da.model)->required();
  duv->add_option("--data", da.data)->required();
  duv->add_option("--out", da.out);

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*gen) return do_generate(ga, g, out);
    if (*ext) return do_extract(ea, out);
    if (*spl) return do_split(sa, g, out);
    if (*trn) return do_train(ta, g, out);
    if (*evl) return do_eval(va, g, out);
    if (*pst) return do_paste(pa, g, out);
    if (*ddf) return do_dump_dataflow(df_file, out);
    if (*duv) return do_dump_usage(da, out);
  } catch (const CLI::ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace smartpaste::cli
