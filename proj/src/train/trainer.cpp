#include "recnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>

#include "recnet/checkpoint.hpp"
#include "recnet/ops.hpp"

namespace recnet::train {

using ad::Tensor;

metrics::Sentence ScoringEncoder::encode(const std::vector<std::string>& words) {
  metrics::Sentence out;
  out.reserve(words.size());
  for (const auto& w : words) {
    auto id = vocab_->find(w);
    if (id && !data::Vocabulary::is_reserved(*id)) {
      out.push_back(*id);
      continue;
    }
    auto [it, inserted] = extra_.try_emplace(w, 0);
    if (inserted) it->second = static_cast<metrics::Token>(vocab_->size() + extra_.size() - 1);
    out.push_back(it->second);
  }
  return out;
}

std::vector<VideoItem> make_items(const std::vector<std::string>& ids,
                                  const std::map<std::string, data::SampledFeatures>& features,
                                  const std::map<std::string, std::vector<std::vector<std::string>>>& captions,
                                  const data::Vocabulary& vocab, ScoringEncoder& encoder) {
  std::vector<VideoItem> items;
  for (const auto& id : ids) {
    auto f = features.find(id);
    auto c = captions.find(id);
    if (f == features.end() || c == captions.end() || c->second.empty()) continue;
    VideoItem item;
    item.id = id;
    item.features = f->second;
    for (const auto& words : c->second) {
      item.captions.push_back(vocab.encode(words));
      item.references.push_back(encoder.encode(words));
    }
    items.push_back(std::move(item));
  }
  return items;
}

TrainingData make_training_data(const std::vector<std::string>& train_ids, const std::vector<std::string>& val_ids,
                                const std::map<std::string, data::SampledFeatures>& features,
                                const std::map<std::string, std::vector<std::vector<std::string>>>& captions,
                                int min_count) {
  std::vector<std::vector<std::string>> train_captions;
  for (const auto& id : train_ids) {
    auto it = captions.find(id);
    if (it != captions.end()) train_captions.insert(train_captions.end(), it->second.begin(), it->second.end());
  }
  if (train_captions.empty()) throw ConfigError("training split has no captions");

  TrainingData out;
  try {
    out.vocab = data::Vocabulary::build(train_captions, min_count);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("cannot build vocabulary: ") + e.what());
  }
  if (out.vocab.word_count() == 0) throw ConfigError("empty vocabulary");
  ScoringEncoder encoder(out.vocab);
  out.train = make_items(train_ids, features, captions, out.vocab, encoder);
  out.val = make_items(val_ids, features, captions, out.vocab, encoder);
  if (out.train.empty()) throw ConfigError("training split is empty");
  if (out.val.empty()) throw ConfigError("validation split is empty");
  const auto dim = out.train.front().features.dim;
  for (const auto* split : {&out.train, &out.val}) {
    for (const auto& item : *split) {
      if (item.features.dim != dim) {
        throw ConfigError("video " + item.id + " has feature dimension " + std::to_string(item.features.dim) +
                          ", expected " + std::to_string(dim));
      }
    }
  }
  return out;
}

namespace {

std::filesystem::path require_path(const std::string& value, const char* key) {
  if (value.empty()) throw ConfigError(std::string("missing required setting '") + key + "'");
  std::filesystem::path p(value);
  if (!std::filesystem::exists(p)) throw ConfigError(std::string(key) + ": no such file or directory: " + value);
  return p;
}

}  // namespace

TrainingData load_training_data(const TrainConfig& config) {
  const auto features_dir = require_path(config.features_dir, "features_dir");
  const auto captions = require_path(config.captions, "captions");
  const auto train_ids = data::read_split(require_path(config.train_split, "train_split"));
  const auto val_ids = data::read_split(require_path(config.val_split, "val_split"));
  if (train_ids.empty()) throw ConfigError("training split file lists no videos: " + config.train_split);
  if (val_ids.empty()) throw ConfigError("validation split file lists no videos: " + config.val_split);
  auto ids = train_ids;
  ids.insert(ids.end(), val_ids.begin(), val_ids.end());
  const auto ds = data::load_dataset(features_dir, captions, ids);
  return make_training_data(train_ids, val_ids, ds.features, ds.captions, config.min_count);
}

TrainingData synthetic_training_data(const data::SyntheticCorpus& corpus, int min_count) {
  std::map<std::string, data::SampledFeatures> features;
  std::map<std::string, std::vector<std::vector<std::string>>> captions;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < corpus.videos.size(); ++i) {
    const auto& id = corpus.videos[i].video_id;
    ids.push_back(id);
    features.emplace(id, data::sample_frames(corpus.videos[i]));
    captions[id].push_back(corpus.vocab.decode(corpus.captions[i].tokens));
  }
  const auto sizes = data::split_sizes(ids.size());
  std::vector<std::string> train(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(sizes.train));
  std::vector<std::string> val(ids.begin() + static_cast<std::ptrdiff_t>(sizes.train),
                               ids.begin() + static_cast<std::ptrdiff_t>(sizes.train + sizes.val));
  return make_training_data(train, val, features, captions, min_count);
}

std::vector<Example> make_examples(const std::vector<VideoItem>& items) {
  std::vector<Example> out;
  for (const auto& item : items) {
    for (const auto& c : item.captions) out.push_back({&item, &c});
  }
  return out;
}

namespace {

void check_finite(const StepStats& s, const char* what) {
  if (!std::isfinite(s.ed) || !std::isfinite(s.recon) || !std::isfinite(s.total)) {
    throw NumericalError(std::string("non-finite ") + what + " loss");
  }
}

StepStats supervised_step(CaptionModel& model, std::span<const Example> batch, double lambda, bool with_recon,
                          Optimizer* optimizer) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  model.params().zero_grad();
  const auto& dec = model.decoder();
  const auto& rec = model.reconstructor();
  const bool recon_on = with_recon && rec.enabled();

  std::vector<Tensor> nlls, recons;
  nlls.reserve(batch.size());
  for (const auto& ex : batch) {
    auto tf = dec.teacher_forced(ex.video->features, *ex.caption);
    if (recon_on) recons.push_back(rec.run(tf.trace.hidden, ex.video->features).loss);
    nlls.push_back(std::move(tf.nll));
  }
  const double inv = 1.0 / static_cast<double>(batch.size());
  StepStats st;
  Tensor ed = ad::scale(ad::add_n(nlls), inv);
  Tensor total = ed;
  if (recon_on) {
    Tensor r = ad::scale(ad::add_n(recons), inv);
    st.recon = r.item();
    total = ad::add(ed, ad::scale(r, lambda));
  }
  st.ed = ed.item();
  st.total = total.item();
  check_finite(st, "training");
  ad::backward(total);
  if (optimizer) optimizer->step(model.params());
  return st;
}

}  // namespace

StepStats xe_step(CaptionModel& model, std::span<const Example> batch, Optimizer* optimizer) {
  return supervised_step(model, batch, 0.0, false, optimizer);
}

StepStats joint_step(CaptionModel& model, std::span<const Example> batch, double lambda, Optimizer* optimizer) {
  return supervised_step(model, batch, lambda, true, optimizer);
}

ScstStepResult scst_step(CaptionModel& model, std::span<const VideoItem* const> batch, const metrics::DocFreq& df,
                         const metrics::CiderOptions& cider, double lambda, Rng& rng, Optimizer* optimizer) {
  if (batch.empty()) throw std::invalid_argument("empty batch");
  model.params().zero_grad();
  const auto& dec = model.decoder();
  const auto& rec = model.reconstructor();
  const bool recon_on = rec.enabled() && lambda > 0.0;

  ScstStepResult out;
  std::vector<Tensor> terms, recons;
  for (const auto* video : batch) {
    auto sampled = dec.sample(video->features, rng.next_u64());
    const auto greedy = dec.greedy(video->features);
    RewardStats r;
    r.sampled = metrics::sentence_cider(sampled.tokens, video->references, df, cider);
    r.baseline = metrics::sentence_cider(greedy, video->references, df, cider);
    r.advantage = r.sampled - r.baseline;
    out.rewards.push_back(r);
    if (r.advantage != 0.0 || recon_on) {
      auto tf = dec.teacher_forced(video->features, sampled.tokens, sampled.terminated);
      if (r.advantage != 0.0) terms.push_back(ad::scale(tf.nll, r.advantage));
      if (recon_on) recons.push_back(rec.run(tf.trace.hidden, video->features).loss);
    }
    out.samples.push_back(std::move(sampled.tokens));
  }
  if (terms.empty() && !recon_on) return out;

  const double inv = 1.0 / static_cast<double>(batch.size());
  Tensor ed = terms.empty() ? Tensor::scalar(0.0) : ad::scale(ad::add_n(terms), inv);
  Tensor total = ed;
  if (recon_on) {
    Tensor r = ad::scale(ad::add_n(recons), inv);
    out.stats.recon = r.item();
    total = ad::add(ed, ad::scale(r, lambda));
  }
  out.stats.ed = ed.item();
  out.stats.total = total.item();
  check_finite(out.stats, "self-critical");
  ad::backward(total);
  if (optimizer) {
    optimizer->step(model.params());
    out.updated = true;
  }
  return out;
}

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::xe: return "xe";
    case Phase::joint: return "joint";
    case Phase::scst: return "scst";
  }
  return "xe";
}

std::string epoch_csv_row(const EpochRecord& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g,%.17g", r.epoch, r.xe_loss, r.recon_loss, r.total_loss,
                r.val_cider);
  return buf;
}

EarlyStopping::EarlyStopping(std::size_t patience)
    : patience_(patience), best_(-std::numeric_limits<double>::infinity()) {
  if (patience == 0) throw std::invalid_argument("patience must be >= 1");
}

bool EarlyStopping::update(double score) {
  ++updates_;
  if (score > best_) {
    best_ = score;
    best_index_ = updates_;
    since_best_ = 0;
    return true;
  }
  ++since_best_;
  return false;
}

PhaseSettings phase_settings(const TrainConfig& config, Phase phase) {
  PhaseSettings s;
  s.phase = phase;
  s.lambda = phase == Phase::xe ? 0.0 : config.effective_lambda();
  s.optimizer = phase == Phase::scst ? config.rl_optimizer : config.xe_optimizer;
  s.max_epochs = config.max_epochs;
  s.patience = config.patience;
  return s;
}

namespace {

Rng phase_rng(std::uint64_t seed, Phase phase) {
  std::uint64_t state = seed ^ (0xA24BAED4963EE407ULL * (static_cast<std::uint64_t>(phase) + 1));
  return Rng(splitmix64(state));
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

PhaseResult run_phase(CaptionModel& model, const TrainingData& data, const TrainConfig& config,
                      const PhaseSettings& settings, std::size_t epoch_offset, const EpochCallback& on_epoch) {
  if (settings.max_epochs == 0) throw ConfigError("max_epochs must be >= 1");
  if (config.batch_size == 0) throw ConfigError("batch_size must be >= 1");
  Rng rng = phase_rng(config.seed, settings.phase);
  auto optimizer = make_optimizer(settings.optimizer, config.adadelta, config.adam);
  EarlyStopping stopper(settings.patience);
  const metrics::CiderOptions cider{config.cider_d};

  auto examples = make_examples(data.train);
  std::vector<const VideoItem*> videos;
  for (const auto& item : data.train) videos.push_back(&item);
  metrics::DocFreq df;
  if (settings.phase == Phase::scst) {
    std::vector<metrics::ReferenceSet> refs;
    for (const auto& item : data.train) refs.push_back(item.references);
    df = metrics::build_docfreq(refs);
  }

  PhaseResult result;
  auto best = model.snapshot();
  const std::size_t bs = config.batch_size;
  for (std::size_t epoch = 1; epoch <= settings.max_epochs; ++epoch) {
    EpochRecord rec;
    rec.phase = settings.phase;
    rec.epoch = epoch_offset + epoch;
    double ed = 0.0, recon = 0.0, total = 0.0;
    std::size_t count = 0;
    try {
      if (settings.phase == Phase::scst) {
        shuffle(videos, rng);
        for (std::size_t b = 0; b < videos.size(); b += bs) {
          const std::span<const VideoItem* const> batch(videos.data() + b, std::min(bs, videos.size() - b));
          auto res = scst_step(model, batch, df, cider, settings.lambda, rng, optimizer.get());
          const double n = static_cast<double>(batch.size());
          ed += res.stats.ed * n;
          recon += res.stats.recon * n;
          total += res.stats.total * n;
          count += batch.size();
        }
      } else {
        shuffle(examples, rng);
        for (std::size_t b = 0; b < examples.size(); b += bs) {
          const std::span<const Example> batch(examples.data() + b, std::min(bs, examples.size() - b));
          const auto st = settings.phase == Phase::xe
                              ? xe_step(model, batch, optimizer.get())
                              : joint_step(model, batch, settings.lambda, optimizer.get());
          const double n = static_cast<double>(batch.size());
          ed += st.ed * n;
          recon += st.recon * n;
          total += st.total * n;
          count += batch.size();
        }
      }
    } catch (const NumericalError& e) {
      throw NumericalError(std::string(e.what()) + " in " + to_string(settings.phase) + " epoch " +
                           std::to_string(rec.epoch));
    }
    rec.xe_loss = ed / static_cast<double>(count);
    rec.recon_loss = recon / static_cast<double>(count);
    rec.total_loss = total / static_cast<double>(count);
    rec.val_cider = validation_cider(model, data.val, config.beam_size, cider);
    if (stopper.update(rec.val_cider)) best = model.snapshot();
    result.epochs.push_back(rec);
    if (on_epoch) on_epoch(rec);
    if (stopper.should_stop()) break;
  }
  result.best_cider = stopper.best();
  result.best_epoch = stopper.best_index();
  if (settings.restore_best) model.restore(best);
  return result;
}

std::vector<Phase> stage_phases(Stage stage) {
  switch (stage) {
    case Stage::xe: return {Phase::xe};
    case Stage::joint: return {Phase::xe, Phase::joint};
    case Stage::rl: return {Phase::xe, Phase::scst};
    case Stage::rl_joint: return {Phase::xe, Phase::joint, Phase::scst};
  }
  return {Phase::xe};
}

namespace {

std::size_t feature_dim(const TrainingData& data) {
  if (data.train.empty()) throw ConfigError("training split is empty");
  return data.train.front().features.dim;
}

CaptionModel initial_model(const TrainConfig& config, const TrainingData& data) {
  if (config.init_checkpoint.empty()) {
    return CaptionModel(data.vocab, model_spec(config, data.vocab.size(), feature_dim(data)), config.seed);
  }
  const auto ckpt = read_checkpoint(config.init_checkpoint);
  if (ckpt.vocab.words() != data.vocab.words()) {
    throw ConfigError("init_checkpoint vocabulary differs from the training-split vocabulary");
  }
  if (ckpt.feature_dim != feature_dim(data)) throw ConfigError("init_checkpoint feature dimension differs from corpus");
  // Architecture from the checkpoint, everything else from this run.
  auto arch = config;
  arch.embed_dim = ckpt.config.embed_dim;
  arch.hidden_dim = ckpt.config.hidden_dim;
  arch.attn_dim = ckpt.config.attn_dim;
  arch.recon_attn_dim = ckpt.config.recon_attn_dim;
  CaptionModel model(ckpt.vocab, model_spec(arch, ckpt.vocab.size(), ckpt.feature_dim), config.seed);
  model.attach_reconstructor(ckpt.reconstructor);
  load_parameters(model, ckpt.params);
  return model;
}

void attach_for_joint(CaptionModel& model, recon::ReconKind kind) {
  if (model.recon_kind() == recon::ReconKind::none) {
    model.attach_reconstructor(kind);
  } else if (kind != recon::ReconKind::none && model.recon_kind() != kind) {
    throw ConfigError("model already carries a " + recon::to_string(model.recon_kind()) + " reconstructor");
  }
}

}  // namespace

TrainResult train(const TrainConfig& config, const TrainingData& data, const TrainHooks& hooks) {
  config.validate();
  CaptionModel model = initial_model(config, data);
  auto phases = stage_phases(config.stage);
  if (!config.init_checkpoint.empty()) phases.erase(phases.begin());

  std::vector<EpochRecord> log;
  double best = 0.0;
  for (Phase phase : phases) {
    if (phase == Phase::joint) attach_for_joint(model, config.reconstructor);
    const auto settings = phase_settings(config, phase);
    auto res = run_phase(model, data, config, settings, log.size(), hooks.on_epoch);
    log.insert(log.end(), res.epochs.begin(), res.epochs.end());
    best = res.best_cider;
    if (hooks.on_phase_end) hooks.on_phase_end(phase, model, res);
  }
  const auto epochs = log.size();
  return TrainResult{std::move(model), std::move(log), best, epochs};
}

std::vector<SweepRow> lambda_sweep(const TrainConfig& config, const TrainingData& data,
                                   const std::vector<double>& lambdas, const TrainHooks& hooks) {
  config.validate();
  if (config.reconstructor == recon::ReconKind::none) throw ConfigError("lambda sweep needs a reconstructor");
  if (lambdas.empty()) throw ConfigError("lambda sweep needs at least one lambda");
  for (double l : lambdas) {
    if (!(l >= 0.0)) throw ConfigError("lambda values must be >= 0");
  }

  CaptionModel base = initial_model(config, data);
  std::size_t offset = 0;
  if (config.init_checkpoint.empty()) {
    auto res = run_phase(base, data, config, phase_settings(config, Phase::xe), 0, hooks.on_epoch);
    offset = res.epochs.size();
    if (hooks.on_phase_end) hooks.on_phase_end(Phase::xe, base, res);
  }
  if (base.recon_kind() != recon::ReconKind::none) throw ConfigError("sweep must start from a model without a reconstructor");
  const auto stage1 = base.snapshot();
  const metrics::CiderOptions cider{config.cider_d};

  std::vector<SweepRow> rows;
  for (double lambda : lambdas) {
    CaptionModel model(base.vocab(), base.spec(), config.seed);
    model.restore(stage1);
    model.attach_reconstructor(config.reconstructor);
    auto cfg = config;
    cfg.lambda = lambda;
    auto res = run_phase(model, data, cfg, phase_settings(cfg, Phase::joint), offset, hooks.on_epoch);
    if (hooks.on_phase_end) hooks.on_phase_end(Phase::joint, model, res);
    rows.push_back({lambda, evaluate(model, data.val, config.beam_size, cider).report});
  }
  return rows;
}

double teacher_forced_accuracy(const CaptionModel& model, const std::vector<VideoItem>& items) {
  ad::NoGradGuard no_grad;
  std::size_t correct = 0, total = 0;
  for (const auto& item : items) {
    for (const auto& caption : item.captions) {
      const auto tf = model.decoder().teacher_forced(item.features, caption);
      for (std::size_t i = 0; i < tf.trace.tokens.size(); ++i) {
        const auto& logits = tf.trace.logits[i];
        const auto best = std::max_element(logits.begin(), logits.end()) - logits.begin();
        correct += static_cast<data::TokenId>(best) == tf.trace.tokens[i];
        ++total;
      }
    }
  }
  return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

double validation_cider(const CaptionModel& model, const std::vector<VideoItem>& items, std::size_t beam,
                        const metrics::CiderOptions& cider) {
  if (items.empty()) return 0.0;
  std::vector<metrics::Sentence> cands;
  std::vector<metrics::ReferenceSet> refs;
  for (const auto& item : items) {
    cands.push_back(model.decoder().beam_search(item.features, beam));
    refs.push_back(item.references);
  }
  return metrics::cider(cands, refs, metrics::build_docfreq(refs), cider).corpus;
}

}  // namespace recnet::train
