#include <cmath>
#include <cstdio>
#include <sstream>

#include "recnet/trainer.hpp"

namespace recnet::train {

HiddenDiagnostic hidden_diagnostic(const CaptionModel& model, const std::vector<VideoItem>& items) {
  if (items.empty()) throw std::invalid_argument("hidden diagnostic needs a nonempty split");
  ad::NoGradGuard no_grad;
  const auto& dec = model.decoder();
  const std::size_t h = dec.dims().hidden;
  HiddenDiagnostic out;
  std::vector<double> teacher_sum(h, 0.0), greedy_sum(h, 0.0);
  std::size_t pairs = 0;
  for (const auto& item : items) {
    decoder::DecoderTrace trace;
    dec.greedy(item.features, &trace);
    const auto free_state = trace.hidden.back().values();
    for (const auto& caption : item.captions) {
      const auto tf = dec.teacher_forced(item.features, caption);
      const auto forced = tf.trace.hidden.back().values();
      out.rows.push_back({"teacher_forced", item.id, {forced.begin(), forced.end()}});
      out.rows.push_back({"greedy", item.id, {free_state.begin(), free_state.end()}});
      for (std::size_t k = 0; k < h; ++k) {
        teacher_sum[k] += forced[k];
        greedy_sum[k] += free_state[k];
      }
      ++pairs;
    }
  }
  if (pairs == 0) throw std::invalid_argument("hidden diagnostic: split has no captions");
  double sq = 0.0;
  for (std::size_t k = 0; k < h; ++k) {
    const double d = (teacher_sum[k] - greedy_sum[k]) / static_cast<double>(pairs);
    sq += d * d;
  }
  out.discrepancy = std::sqrt(sq);
  return out;
}

std::string diagnostic_csv(const HiddenDiagnostic& diag) {
  std::ostringstream os;
  os << "mode,video_id";
  const std::size_t h = diag.rows.empty() ? 0 : diag.rows.front().state.size();
  for (std::size_t k = 0; k < h; ++k) os << ",dim_" << k;
  os << '\n';
  char buf[32];
  for (const auto& row : diag.rows) {
    os << row.mode << ',' << row.video_id;
    for (double v : row.state) {
      std::snprintf(buf, sizeof buf, ",%.17g", v);
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

}  // namespace recnet::train
