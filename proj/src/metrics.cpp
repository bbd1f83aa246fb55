// SPDX-License-Identifier: Apache-2.0
#include "movesort/metrics.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

#include "movesort/assoc.hpp"

namespace movesort {

FilterAccuracy filter_accuracy(std::span<const Box> predictions, std::span<const Box> truth) {
  if (predictions.size() != truth.size()) throw std::invalid_argument("filter_accuracy: length mismatch");
  FilterAccuracy r;
  if (predictions.empty()) return r;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    r.accuracy += iou(predictions[i], truth[i]);
    r.mse += (predictions[i].vec() - truth[i].vec()).squaredNorm() / 4.0;
  }
  const auto n = static_cast<double>(predictions.size());
  r.accuracy /= n;
  r.mse /= n;
  return r;
}

namespace {

std::vector<Box> boxes_of(const std::vector<std::pair<int, Box>>& objs) {
  std::vector<Box> out;
  out.reserve(objs.size());
  for (const auto& o : objs) out.push_back(o.second);
  return out;
}

}  // namespace

MotMetrics mot_metrics(const FrameAnnotations& hypotheses, const FrameAnnotations& truth) {
  MotMetrics m;
  std::map<int, int> last_hyp;                    // gt id -> hypothesis id of its last match
  std::map<std::pair<int, int>, int> overlap;     // (gt id, hyp id) -> frames with IoU >= gate
  std::map<int, int> gt_len, hyp_len;
  static const std::vector<std::pair<int, Box>> kNone;

  std::vector<int> frames;
  for (const auto& [f, _] : truth) frames.push_back(f);
  for (const auto& [f, _] : hypotheses) {
    if (!truth.contains(f)) frames.push_back(f);
  }
  std::sort(frames.begin(), frames.end());
  for (int f : frames) {
    const auto git = truth.find(f);
    const auto hit = hypotheses.find(f);
    const auto& gts = git == truth.end() ? kNone : git->second;
    const auto& hyps = hit == hypotheses.end() ? kNone : hit->second;
    for (const auto& g : gts) ++gt_len[g.first];
    for (const auto& h : hyps) ++hyp_len[h.first];
    m.num_gt += static_cast<int>(gts.size());

    const std::vector<Box> gb = boxes_of(gts);
    const std::vector<Box> hb = boxes_of(hyps);
    for (std::size_t i = 0; i < gts.size(); ++i) {
      for (std::size_t j = 0; j < hyps.size(); ++j) {
        if (iou(gb[i], hb[j]) >= kMotIouGate) ++overlap[{gts[i].first, hyps[j].first}];
      }
    }
    // Correspondences from earlier frames are kept while they pass the gate.
    std::vector<char> gt_done(gts.size(), 0), hyp_done(hyps.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      const auto prev = last_hyp.find(gts[i].first);
      if (prev == last_hyp.end()) continue;
      for (std::size_t j = 0; j < hyps.size(); ++j) {
        if (hyp_done[j] || hyps[j].first != prev->second || iou(gb[i], hb[j]) < kMotIouGate) continue;
        gt_done[i] = hyp_done[j] = 1;
        pairs.emplace_back(i, j);
        break;
      }
    }
    std::vector<std::size_t> gi, hj;
    std::vector<Box> gr, hr;
    for (std::size_t i = 0; i < gts.size(); ++i) {
      if (!gt_done[i]) {
        gi.push_back(i);
        gr.push_back(gb[i]);
      }
    }
    for (std::size_t j = 0; j < hyps.size(); ++j) {
      if (!hyp_done[j]) {
        hj.push_back(j);
        hr.push_back(hb[j]);
      }
    }
    const Assignment a = solve_assignment(build_costs(gr, hr, 0.0, kMotIouGate, CostMode::kIou));
    for (const auto& [r, c] : a.pairs) {
      pairs.emplace_back(gi[static_cast<std::size_t>(r)], hj[static_cast<std::size_t>(c)]);
    }
    m.matches += static_cast<int>(pairs.size());
    m.fn += static_cast<int>(gts.size() - pairs.size());
    m.fp += static_cast<int>(hyps.size() - pairs.size());
    for (const auto& [r, c] : pairs) {
      const int gid = gts[r].first;
      const int hid = hyps[c].first;
      const auto prev = last_hyp.find(gid);
      if (prev != last_hyp.end() && prev->second != hid) ++m.idsw;
      last_hyp[gid] = hid;
    }
  }
  m.mota = m.num_gt == 0 ? 1.0 : 1.0 - static_cast<double>(m.fn + m.fp + m.idsw) / m.num_gt;

  // Identity matching of whole tracks.
  std::vector<int> gids, hids;
  std::map<int, int> gidx, hidx;
  for (const auto& [id, _] : gt_len) {
    gidx[id] = static_cast<int>(gids.size());
    gids.push_back(id);
  }
  for (const auto& [id, _] : hyp_len) {
    hidx[id] = static_cast<int>(hids.size());
    hids.push_back(id);
  }
  Eigen::MatrixXd cost = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gids.size()),
                                               static_cast<Eigen::Index>(hids.size()));
  for (const auto& [key, count] : overlap) cost(gidx[key.first], hidx[key.second]) = -count;
  for (const auto& [r, c] : hungarian(cost)) m.idtp += static_cast<int>(-cost(r, c));
  int total_gt = 0, total_hyp = 0;
  for (const auto& [_, n] : gt_len) total_gt += n;
  for (const auto& [_, n] : hyp_len) total_hyp += n;
  m.idfn = total_gt - m.idtp;
  m.idfp = total_hyp - m.idtp;
  const int denom = 2 * m.idtp + m.idfp + m.idfn;
  m.idf1 = denom == 0 ? 1.0 : 2.0 * m.idtp / denom;
  return m;
}

void write_metrics(std::ostream& os, const MotMetrics& m) {
  os << "mota," << m.mota << "\n"
     << "idf1," << m.idf1 << "\n"
     << "idsw," << m.idsw << "\n"
     << "fp," << m.fp << "\n"
     << "fn," << m.fn << "\n"
     << "num_gt," << m.num_gt << "\n"
     << "idtp," << m.idtp << "\n"
     << "idfp," << m.idfp << "\n"
     << "idfn," << m.idfn << "\n";
}

}  // namespace movesort
