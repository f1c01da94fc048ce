#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "recnet/config.hpp"
#include "recnet/corpus.hpp"
#include "recnet/metrics.hpp"
#include "recnet/model.hpp"
#include "recnet/optimizer.hpp"
#include "recnet/synthetic.hpp"

namespace recnet::train {

// A loss went non-finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Word -> id for metric scoring. In-vocabulary words keep their model ids;
// any other word (including reserved surface forms) gets a fresh id past the
// vocabulary, so a decoded UNK never matches a reference word.
class ScoringEncoder {
 public:
  explicit ScoringEncoder(const data::Vocabulary& vocab) : vocab_(&vocab) {}
  metrics::Sentence encode(const std::vector<std::string>& words);

 private:
  const data::Vocabulary* vocab_;
  std::map<std::string, metrics::Token> extra_;
};

struct VideoItem {
  std::string id;
  data::SampledFeatures features;
  std::vector<data::Sentence> captions;  // model ids, UNK for out-of-vocabulary words
  metrics::ReferenceSet references;      // scoring ids
};

struct TrainingData {
  data::Vocabulary vocab;
  std::vector<VideoItem> train;
  std::vector<VideoItem> val;
};

// Items for `ids` in the given order; ids absent from either map are skipped.
std::vector<VideoItem> make_items(const std::vector<std::string>& ids,
                                  const std::map<std::string, data::SampledFeatures>& features,
                                  const std::map<std::string, std::vector<std::vector<std::string>>>& captions,
                                  const data::Vocabulary& vocab, ScoringEncoder& encoder);

// Vocabulary from the training captions, then items for both splits. Throws
// ConfigError when either split ends up empty.
TrainingData make_training_data(const std::vector<std::string>& train_ids, const std::vector<std::string>& val_ids,
                                const std::map<std::string, data::SampledFeatures>& features,
                                const std::map<std::string, std::vector<std::vector<std::string>>>& captions,
                                int min_count = 1);

// Reads the corpus named by the config paths.
TrainingData load_training_data(const TrainConfig& config);

// The synthetic corpus split 70/10/20 by id order (test split dropped).
TrainingData synthetic_training_data(const data::SyntheticCorpus& corpus, int min_count = 1);

struct Example {
  const VideoItem* video = nullptr;
  const data::Sentence* caption = nullptr;
};

// Every (video, caption) pair in item order.
std::vector<Example> make_examples(const std::vector<VideoItem>& items);

struct StepStats {
  double ed = 0.0;     // XE loss or SCST surrogate, batch mean
  double recon = 0.0;  // reconstruction loss, batch mean (unweighted)
  double total = 0.0;  // ed + lambda * recon, as computed in the graph
};

struct RewardStats {
  double sampled = 0.0;   // r(S)
  double baseline = 0.0;  // r(S_greedy)
  double advantage = 0.0;
};

struct ScstStepResult {
  StepStats stats;
  std::vector<RewardStats> rewards;
  std::vector<data::Sentence> samples;  // without EOS
  bool updated = false;
};

// Each step clears gradients, runs one backward pass and, when `optimizer`
// is non-null, applies one update. Gradients stay on the parameters
// afterwards.
//
// Mean per-sentence NLL.
StepStats xe_step(CaptionModel& model, std::span<const Example> batch, Optimizer* optimizer);
// XE plus lambda times the attached reconstructor's loss on the teacher-forced
// hidden states.
StepStats joint_step(CaptionModel& model, std::span<const Example> batch, double lambda, Optimizer* optimizer);
// Self-critical step: for each video a sampled caption S (seeded from `rng`)
// and the greedy caption, both rewarded by CIDEr against the video's
// references. Surrogate per video: (r(S) - r(greedy)) * NLL(S). With a
// reconstructor attached and lambda > 0, its loss on the hidden states of S is
// added. When every advantage is zero and no reconstruction term is active
// the optimizer is not stepped.
ScstStepResult scst_step(CaptionModel& model, std::span<const VideoItem* const> batch, const metrics::DocFreq& df,
                         const metrics::CiderOptions& cider, double lambda, Rng& rng, Optimizer* optimizer);

enum class Phase { xe, joint, scst };
std::string to_string(Phase phase);

struct EpochRecord {
  Phase phase = Phase::xe;
  std::size_t epoch = 0;  // 1-based, running across phases
  double xe_loss = 0.0;   // ED term (SCST surrogate in the scst phase)
  double recon_loss = 0.0;
  double total_loss = 0.0;
  double val_cider = 0.0;
};

inline constexpr const char* kEpochCsvHeader = "epoch,xe_loss,recon_loss,total_loss,val_cider";
std::string epoch_csv_row(const EpochRecord& record);

// Patience counter over a score that should increase. Equal scores do not
// count as improvement.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);
  // Returns true when `score` is a new best.
  bool update(double score);
  bool should_stop() const { return since_best_ >= patience_; }
  double best() const { return best_; }
  std::size_t best_index() const { return best_index_; }  // 1-based, 0 before any update
  std::size_t updates() const { return updates_; }

 private:
  std::size_t patience_;
  double best_;
  std::size_t best_index_ = 0;
  std::size_t since_best_ = 0;
  std::size_t updates_ = 0;
};

struct PhaseSettings {
  Phase phase = Phase::xe;
  double lambda = 0.0;
  OptimizerKind optimizer = OptimizerKind::adadelta;
  std::size_t max_epochs = 200;
  std::size_t patience = 20;
  bool restore_best = true;  // leave the best-validation parameters in the model
};

struct PhaseResult {
  std::vector<EpochRecord> epochs;
  double best_cider = 0.0;
  std::size_t best_epoch = 0;  // index into `epochs`, 1-based
};

using EpochCallback = std::function<void(const EpochRecord&)>;

PhaseSettings phase_settings(const TrainConfig& config, Phase phase);

// Runs epochs until `max_epochs` or until validation CIDEr has not improved
// for `patience` epochs. Shuffling and sampling draw from a stream derived
// from (config.seed, phase).
PhaseResult run_phase(CaptionModel& model, const TrainingData& data, const TrainConfig& config,
                      const PhaseSettings& settings, std::size_t epoch_offset = 0,
                      const EpochCallback& on_epoch = {});

// Phases the stage runs, in order.
std::vector<Phase> stage_phases(Stage stage);

struct TrainHooks {
  EpochCallback on_epoch;
  std::function<void(Phase, const CaptionModel&, const PhaseResult&)> on_phase_end;
};

struct TrainResult {
  CaptionModel model;
  std::vector<EpochRecord> log;
  double best_cider = 0.0;
  std::size_t epochs = 0;
};

// Stage 1 XE, then (joint, rl-joint) the reconstructor is attached and the
// combined loss optimised, then (rl, rl-joint) self-critical training from
// the best parameters so far.
TrainResult train(const TrainConfig& config, const TrainingData& data, const TrainHooks& hooks = {});

struct SweepRow {
  double lambda = 0.0;
  metrics::MetricReport val;
};

// One stage-1 run, then for each lambda a stage-2 run from the same stage-1
// parameters and a fresh reconstructor; validation metrics by beam search.
std::vector<SweepRow> lambda_sweep(const TrainConfig& config, const TrainingData& data,
                                   const std::vector<double>& lambdas, const TrainHooks& hooks = {});

// Greedy next-token accuracy under teacher forcing, EOS step included.
double teacher_forced_accuracy(const CaptionModel& model, const std::vector<VideoItem>& items);

// Corpus CIDEr of beam-decoded captions, document frequencies from the items'
// references.
double validation_cider(const CaptionModel& model, const std::vector<VideoItem>& items, std::size_t beam,
                        const metrics::CiderOptions& cider);

struct CaptionResult {
  std::string video_id;
  data::Sentence tokens;
  std::string text;
  double cider = 0.0;
};

struct EvalResult {
  metrics::MetricReport report;
  std::vector<CaptionResult> captions;
};

EvalResult evaluate(const CaptionModel& model, const std::vector<VideoItem>& items, std::size_t beam,
                    const metrics::CiderOptions& cider);
// {"bleu4": r, "rougeL": r, "cider": r, "per_sentence": [{"video_id", "caption", "cider"}, ...]}
std::string report_json(const EvalResult& result);

struct DiagnosticRow {
  std::string mode;  // "teacher_forced" or "greedy"
  std::string video_id;
  std::vector<double> state;
};

struct HiddenDiagnostic {
  std::vector<DiagnosticRow> rows;
  double discrepancy = 0.0;  // distance between the two mode centroids
};

// Last decoder hidden state per (video, caption) pair under teacher forcing
// and under free-running greedy decoding. Throws on an empty item list.
HiddenDiagnostic hidden_diagnostic(const CaptionModel& model, const std::vector<VideoItem>& items);
std::string diagnostic_csv(const HiddenDiagnostic& diag);

}  // namespace recnet::train
