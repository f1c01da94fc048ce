// recnet command-line entry point.
//
// Exit codes: 0 ok, 2 usage/config/input, 3 numerical failure, 4 corrupt
// artifact. Payloads (JSON, CSV, captions) go to stdout, logs to stderr.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "recnet/checkpoint.hpp"
#include "recnet/config.hpp"
#include "recnet/corpus.hpp"
#include "recnet/synthetic.hpp"
#include "recnet/trainer.hpp"

namespace fs = std::filesystem;
using namespace recnet;

namespace {

enum Exit { kOk = 0, kUsage = 2, kNumerical = 3, kCorrupt = 4 };

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainFlags {
  std::string config;
  std::optional<std::string> stage, reconstructor, output_dir, init_checkpoint;
  std::optional<double> lambda;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> max_epochs, patience, batch_size;
  std::vector<std::string> overrides;  // key=value
};

// Relative paths in a config file are taken relative to the file.
void anchor_paths(train::TrainConfig& cfg, const fs::path& base) {
  for (auto* p : {&cfg.features_dir, &cfg.captions, &cfg.train_split, &cfg.val_split, &cfg.test_split,
                  &cfg.output_dir, &cfg.init_checkpoint}) {
    if (!p->empty() && fs::path(*p).is_relative()) *p = fs::absolute(base / *p).lexically_normal().string();
  }
}

train::TrainConfig resolve_config(const TrainFlags& f) {
  train::TrainConfig cfg;
  if (!f.config.empty()) {
    cfg = train::load_config(f.config);
    anchor_paths(cfg, fs::path(f.config).parent_path());
  }
  for (const auto& kv : f.overrides) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (f.stage) cfg.stage = train::parse_stage(*f.stage);
  if (f.reconstructor) cfg.set("reconstructor", *f.reconstructor);
  if (f.lambda) cfg.lambda = *f.lambda;
  if (f.seed) cfg.seed = *f.seed;
  if (f.max_epochs) cfg.max_epochs = *f.max_epochs;
  if (f.patience) cfg.patience = *f.patience;
  if (f.batch_size) cfg.batch_size = *f.batch_size;
  if (f.output_dir) cfg.output_dir = *f.output_dir;
  if (f.init_checkpoint) cfg.init_checkpoint = *f.init_checkpoint;
  cfg.validate();
  return cfg;
}

void add_train_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--config", f.config, "key = value configuration file");
  cmd->add_option("--stage", f.stage, "xe | joint | rl | rl-joint");
  cmd->add_option("--reconstructor", f.reconstructor, "none | global | local | joint");
  cmd->add_option("--lambda", f.lambda, "reconstruction weight (default 0.2 global, 0.1 local/joint)");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--max-epochs", f.max_epochs, "epoch cap per phase");
  cmd->add_option("--patience", f.patience, "early-stopping patience");
  cmd->add_option("--batch-size", f.batch_size, "batch size");
  cmd->add_option("--output-dir", f.output_dir, "where checkpoints and logs go");
  cmd->add_option("--init-checkpoint", f.init_checkpoint, "skip stage 1 and start from this checkpoint");
  cmd->add_option("--set", f.overrides, "extra key=value settings")->take_all();
}

fs::path prepare_output_dir(const train::TrainConfig& cfg) {
  if (cfg.output_dir.empty()) throw train::ConfigError("missing required setting 'output_dir'");
  fs::path dir(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw train::ConfigError("cannot create output_dir " + cfg.output_dir);
  return dir;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
  if (!out) throw UsageError("write failed for " + path.string());
}

std::string phase_label(train::Phase p) { return train::to_string(p); }

int cmd_gen_synthetic(const std::string& out, std::size_t num_videos, std::size_t dim, std::uint64_t seed) {
  if (num_videos == 0) throw UsageError("--num-videos must be >= 1");
  data::SyntheticOptions opts;
  opts.num_videos = num_videos;
  opts.dim = dim;
  opts.seed = seed;
  const auto corpus = data::gen_synthetic(opts);
  data::write_synthetic_corpus(corpus, out);
  const auto sizes = data::split_sizes(num_videos);
  std::cerr << "wrote " << num_videos << " videos to " << out << " (train " << sizes.train << ", val " << sizes.val
            << ", test " << sizes.test << ")\n";
  return kOk;
}

int cmd_train(const TrainFlags& flags) {
  const auto cfg = resolve_config(flags);
  const auto dir = prepare_output_dir(cfg);
  const auto data = train::load_training_data(cfg);
  std::cerr << "vocabulary " << data.vocab.size() << " tokens, " << data.train.size() << " train / "
            << data.val.size() << " val videos\n";
  write_text(dir / "config.txt", cfg.to_text());

  std::ofstream csv(dir / "epochs.csv", std::ios::trunc);
  if (!csv) throw UsageError("cannot write " + (dir / "epochs.csv").string());
  csv << train::kEpochCsvHeader << '\n';
  std::cout << train::kEpochCsvHeader << '\n';

  train::TrainHooks hooks;
  hooks.on_epoch = [&](const train::EpochRecord& r) {
    const auto row = train::epoch_csv_row(r);
    csv << row << '\n' << std::flush;
    std::cout << row << '\n' << std::flush;
    std::fprintf(stderr, "[%s] epoch %zu  xe %.6f  recon %.6f  total %.6f  val_cider %.6f\n",
                 phase_label(r.phase).c_str(), r.epoch, r.xe_loss, r.recon_loss, r.total_loss, r.val_cider);
  };
  std::size_t epochs_so_far = 0;
  hooks.on_phase_end = [&](train::Phase phase, const train::CaptionModel& model, const train::PhaseResult& res) {
    epochs_so_far += res.epochs.size();
    const auto path = dir / (phase_label(phase) + ".ckpt");
    train::save_checkpoint(train::make_checkpoint(model, cfg, epochs_so_far, res.best_cider), path);
    std::cerr << phase_label(phase) << " phase done: best val CIDEr " << res.best_cider << " at phase epoch "
              << res.best_epoch << " -> " << path.string() << '\n';
  };

  const auto result = train::train(cfg, data, hooks);
  const auto path = dir / "model.ckpt";
  train::save_checkpoint(train::make_checkpoint(result.model, cfg, result.epochs, result.best_cider), path);
  std::cerr << "saved " << path.string() << '\n';
  return kOk;
}

std::vector<double> parse_lambdas(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" ", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError("bad lambda list entry '" + item + "'");
    }
  }
  if (out.empty()) throw UsageError("empty lambda list");
  return out;
}

int cmd_sweep(const TrainFlags& flags, const std::string& lambdas_text) {
  const auto cfg = resolve_config(flags);
  const auto lambdas = parse_lambdas(lambdas_text);
  const auto data = train::load_training_data(cfg);
  train::TrainHooks hooks;
  hooks.on_epoch = [](const train::EpochRecord& r) {
    std::fprintf(stderr, "[%s] epoch %zu  xe %.6f  recon %.6f  val_cider %.6f\n", phase_label(r.phase).c_str(),
                 r.epoch, r.xe_loss, r.recon_loss, r.val_cider);
  };
  const auto rows = train::lambda_sweep(cfg, data, lambdas, hooks);
  std::ostringstream os;
  os << "lambda,bleu4,rougeL,cider\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", r.lambda, r.val.bleu4, r.val.rouge_l, r.val.cider);
    os << buf;
  }
  if (!cfg.output_dir.empty()) write_text(prepare_output_dir(cfg) / "sweep.csv", os.str());
  std::cout << os.str();
  return kOk;
}

struct SplitFlags {
  std::string checkpoint;
  std::string split = "test";
  std::optional<std::string> features_dir, captions;
};

void add_split_flags(CLI::App* cmd, SplitFlags& f) {
  cmd->add_option("--checkpoint", f.checkpoint, "model checkpoint")->required();
  cmd->add_option("--split", f.split, "split file, or train/val/test for the paths stored in the checkpoint");
  cmd->add_option("--features-dir", f.features_dir, "override the feature directory");
  cmd->add_option("--captions", f.captions, "override the caption file");
}

struct LoadedSplit {
  train::CaptionModel model;
  train::TrainConfig config;
  std::vector<train::VideoItem> items;
};

LoadedSplit load_split(const SplitFlags& f) {
  auto ckpt = train::read_checkpoint(f.checkpoint);
  auto model = train::load_model(ckpt);
  const auto& cfg = ckpt.config;

  std::string split_path = f.split;
  if (f.split == "train") split_path = cfg.train_split;
  else if (f.split == "val") split_path = cfg.val_split;
  else if (f.split == "test") split_path = cfg.test_split;
  if (split_path.empty()) throw UsageError("checkpoint stores no path for split '" + f.split + "'");
  if (!fs::exists(split_path)) throw UsageError("split file not found: " + split_path);
  const std::string features_dir = f.features_dir.value_or(cfg.features_dir);
  const std::string captions = f.captions.value_or(cfg.captions);
  if (!fs::is_directory(features_dir)) throw UsageError("features directory not found: " + features_dir);
  if (!fs::exists(captions)) throw UsageError("caption file not found: " + captions);

  const auto ids = data::read_split(split_path);
  if (ids.empty()) throw UsageError("split is empty: " + split_path);
  const auto ds = data::load_dataset(features_dir, captions, ids, /*skip_missing=*/true);
  for (const auto& id : ds.missing) std::cerr << "warning: skipping unknown video " << id << '\n';
  for (const auto& why : ds.rejected) std::cerr << "warning: rejected caption: " << why << '\n';
  for (const auto& [id, feats] : ds.features) {
    if (feats.dim != model.spec().dims.feature) {
      throw UsageError("video " + id + " has feature dimension " + std::to_string(feats.dim) + ", model expects " +
                       std::to_string(model.spec().dims.feature));
    }
  }
  train::ScoringEncoder encoder(model.vocab());
  auto items = train::make_items(ids, ds.features, ds.captions, model.vocab(), encoder);
  if (items.empty()) throw UsageError("no usable videos in split " + split_path);
  return {std::move(model), cfg, std::move(items)};
}

int cmd_eval(const SplitFlags& f, std::size_t beam) {
  if (beam == 0) throw UsageError("--beam must be >= 1");
  const auto loaded = load_split(f);
  const auto result = train::evaluate(loaded.model, loaded.items, beam, {loaded.config.cider_d});
  std::cout << train::report_json(result) << '\n';
  return kOk;
}

int cmd_caption(const std::string& checkpoint, const std::string& features, std::size_t beam) {
  if (beam == 0) throw UsageError("--beam must be >= 1");
  const auto model = train::load_model(train::read_checkpoint(checkpoint));
  const auto sampled = data::sample_frames(data::read_features(features));
  if (sampled.dim != model.spec().dims.feature) {
    throw UsageError("feature dimension " + std::to_string(sampled.dim) + " does not match model (" +
                     std::to_string(model.spec().dims.feature) + ")");
  }
  std::cout << model.vocab().render(model.decoder().beam_search(sampled, beam)) << '\n';
  return kOk;
}

int cmd_diagnose(const SplitFlags& f, const std::string& out) {
  const auto loaded = load_split(f);
  const auto diag = train::hidden_diagnostic(loaded.model, loaded.items);
  write_text(out, train::diagnostic_csv(diag));
  std::cerr << "wrote " << diag.rows.size() << " states to " << out << '\n';
  std::printf("%.17g\n", diag.discrepancy);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RecNet video captioning: synthetic corpora, training, evaluation, diagnostics"};
  app.require_subcommand(1);

  std::string gen_out;
  std::size_t gen_n = 20, gen_dim = 32;
  std::uint64_t gen_seed = 7;
  auto* gen = app.add_subcommand("gen-synthetic", "write a synthetic corpus");
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--num-videos", gen_n, "number of videos");
  gen->add_option("--dim", gen_dim, "feature dimension");
  gen->add_option("--seed", gen_seed, "random seed");

  TrainFlags train_flags;
  auto* tr = app.add_subcommand("train", "train a captioning model");
  add_train_flags(tr, train_flags);

  TrainFlags sweep_flags;
  std::string lambdas = "0,0.1,0.2,0.5,1.0";
  auto* sw = app.add_subcommand("sweep", "stage-2 runs over a list of lambdas; CSV of validation metrics");
  add_train_flags(sw, sweep_flags);
  sw->add_option("--lambdas", lambdas, "comma-separated lambda values");

  SplitFlags eval_flags;
  std::size_t eval_beam = 5;
  auto* ev = app.add_subcommand("eval", "beam-search a split and print metrics as JSON");
  add_split_flags(ev, eval_flags);
  ev->add_option("--beam", eval_beam, "beam width");

  std::string cap_ckpt, cap_features;
  std::size_t cap_beam = 5;
  auto* cap = app.add_subcommand("caption", "caption one feature file");
  cap->add_option("--checkpoint", cap_ckpt, "model checkpoint")->required();
  cap->add_option("--features", cap_features, "feature file")->required();
  cap->add_option("--beam", cap_beam, "beam width");

  SplitFlags diag_flags;
  std::string diag_out;
  auto* dg = app.add_subcommand("diagnose", "export last hidden states, teacher-forced vs greedy");
  add_split_flags(dg, diag_flags);
  dg->add_option("--out", diag_out, "CSV output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen_synthetic(gen_out, gen_n, gen_dim, gen_seed);
    if (tr->parsed()) return cmd_train(train_flags);
    if (sw->parsed()) return cmd_sweep(sweep_flags, lambdas);
    if (ev->parsed()) return cmd_eval(eval_flags, eval_beam);
    if (cap->parsed()) return cmd_caption(cap_ckpt, cap_features, cap_beam);
    if (dg->parsed()) return cmd_diagnose(diag_flags, diag_out);
  } catch (const train::NumericalError& e) {
    std::cerr << "error: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const train::CheckpointError& e) {
    std::cerr << "error: corrupt checkpoint: " << e.what() << '\n';
    return kCorrupt;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
