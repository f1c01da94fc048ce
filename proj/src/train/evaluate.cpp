#include <json.hpp>

#include "recnet/trainer.hpp"

namespace recnet::train {

EvalResult evaluate(const CaptionModel& model, const std::vector<VideoItem>& items, std::size_t beam,
                    const metrics::CiderOptions& cider) {
  if (items.empty()) throw std::invalid_argument("nothing to evaluate: no videos with features and captions");
  EvalResult out;
  std::vector<metrics::Sentence> cands;
  std::vector<metrics::ReferenceSet> refs;
  for (const auto& item : items) {
    auto tokens = model.decoder().beam_search(item.features, beam);
    out.captions.push_back({item.id, tokens, model.vocab().render(tokens), 0.0});
    cands.push_back(std::move(tokens));
    refs.push_back(item.references);
  }
  out.report = metrics::score_corpus(cands, refs, cider);
  for (std::size_t i = 0; i < out.captions.size(); ++i) out.captions[i].cider = out.report.per_sentence_cider[i];
  return out;
}

std::string report_json(const EvalResult& result) {
  nlohmann::ordered_json j;
  j["bleu4"] = result.report.bleu4;
  j["rougeL"] = result.report.rouge_l;
  j["cider"] = result.report.cider;
  auto per = nlohmann::ordered_json::array();
  for (const auto& c : result.captions) {
    nlohmann::ordered_json row;
    row["video_id"] = c.video_id;
    row["caption"] = c.text;
    row["cider"] = c.cider;
    per.push_back(std::move(row));
  }
  j["per_sentence"] = std::move(per);
  return j.dump(2);
}

}  // namespace recnet::train
