// SPDX-License-Identifier: Apache-2.0
#include "movesort/bench.hpp"

#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>

#include "movesort/io.hpp"
#include "movesort/metrics.hpp"
#include "movesort/synthetic.hpp"

namespace movesort {

std::vector<char> exclusion_mask(const Trajectory& truth, const Trajectory& dets) {
  std::vector<char> mask(truth.obs.size(), 0);
  std::size_t d = 0;
  std::vector<char> seen(truth.obs.size(), 0);
  for (std::size_t i = 0; i < truth.obs.size(); ++i) {
    while (d < dets.obs.size() && dets.obs[d].t < truth.obs[i].t) ++d;
    seen[i] = d < dets.obs.size() && dets.obs[d].t == truth.obs[i].t;
  }
  for (std::size_t i = 0; i < seen.size();) {
    if (seen[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < seen.size() && !seen[j]) ++j;
    if (j - i >= static_cast<std::size_t>(kExclusionRun)) {
      for (std::size_t k = i; k < j; ++k) mask[k] = 1;
    }
    i = j;
  }
  return mask;
}

BenchScore evaluate_filter(const FilterKind& kind, const std::vector<Trajectory>& truth,
                           const std::vector<Trajectory>& dets) {
  if (truth.size() != dets.size()) throw std::invalid_argument("evaluate_filter: size mismatch");
  struct Lane {
    std::optional<Filter> filter;
    std::map<int, Box> det;
    std::vector<char> excluded;
  };
  std::vector<Lane> lanes(truth.size());
  std::map<int, std::vector<std::pair<std::size_t, std::size_t>>> schedule;  // frame -> (lane, gt index)
  for (std::size_t i = 0; i < truth.size(); ++i) {
    for (const auto& o : dets[i].obs) lanes[i].det.emplace(o.t, o.box);
    lanes[i].excluded = exclusion_mask(truth[i], dets[i]);
    for (std::size_t k = 0; k < truth[i].obs.size(); ++k) schedule[truth[i].obs[k].t].emplace_back(i, k);
  }

  std::vector<Box> prior_box, post_box, gt_box;
  for (const auto& [frame, items] : schedule) {
    std::vector<Filter*> active;
    std::vector<int> frames;
    std::vector<std::pair<std::size_t, std::size_t>> who;
    for (const auto& [lane, k] : items) {
      Lane& L = lanes[lane];
      if (!L.filter) {
        const auto it = L.det.find(frame);
        if (it != L.det.end()) {
          L.filter.emplace(kind);
          L.filter->init(Observation{frame, it->second});
        }
        continue;
      }
      active.push_back(&*L.filter);
      frames.push_back(frame);
      who.emplace_back(lane, k);
    }
    const std::vector<GaussianState> priors = predict_many(active, frames);
    for (std::size_t j = 0; j < who.size(); ++j) {
      const auto [lane, k] = who[j];
      Lane& L = lanes[lane];
      const auto it = L.det.find(frame);
      const GaussianState post = it != L.det.end() ? L.filter->update(it->second) : L.filter->missing();
      if (L.excluded[k]) continue;
      prior_box.push_back(priors[j].box());
      post_box.push_back(post.box());
      gt_box.push_back(truth[lane].obs[k].box);
    }
  }
  const FilterAccuracy pa = filter_accuracy(prior_box, gt_box);
  const FilterAccuracy qa = filter_accuracy(post_box, gt_box);
  return {pa.accuracy, qa.accuracy, pa.mse, qa.mse, static_cast<long>(gt_box.size())};
}

namespace {

BenchTable sweep(const std::vector<NamedFilter>& filters, const std::vector<Trajectory>& truth,
                 const BenchConfig& cfg, bool noise_axis) {
  if (cfg.seeds < 1) throw std::invalid_argument("bench: seeds must be positive");
  BenchTable t;
  t.axis = noise_axis ? "sigma" : "fn";
  t.grid = cfg.grid;
  for (const auto& f : filters) t.filters.push_back(f.name);
  const std::size_t F = filters.size(), G = cfg.grid.size();
  const auto S = static_cast<std::size_t>(cfg.seeds);
  t.per_seed.assign(F, std::vector<std::vector<BenchScore>>(G, std::vector<BenchScore>(S)));
  t.mean.assign(F, std::vector<BenchScore>(G));
  for (std::size_t g = 0; g < G; ++g) {
    const double sigma = noise_axis ? cfg.grid[g] : cfg.fixed_sigma;
    const double fn = noise_axis ? cfg.fixed_fn : cfg.grid[g];
    for (std::size_t s = 0; s < S; ++s) {
      nn::Rng rng(cfg.seed + 1000003ULL * s + 7919ULL * g);
      const std::vector<Trajectory> dets = corrupt(truth, sigma, fn, rng);
      for (std::size_t f = 0; f < F; ++f) t.per_seed[f][g][s] = evaluate_filter(filters[f].kind, truth, dets);
    }
    for (std::size_t f = 0; f < F; ++f) {
      BenchScore& m = t.mean[f][g];
      for (const auto& x : t.per_seed[f][g]) {
        m.prior_accuracy += x.prior_accuracy / S;
        m.posterior_accuracy += x.posterior_accuracy / S;
        m.prior_mse += x.prior_mse / S;
        m.posterior_mse += x.posterior_mse / S;
        m.count += x.count;
      }
    }
  }
  return t;
}

}  // namespace

BenchTable bench_noise(const std::vector<NamedFilter>& filters, const std::vector<Trajectory>& truth,
                       const BenchConfig& cfg) {
  return sweep(filters, truth, cfg, true);
}

BenchTable bench_fn(const std::vector<NamedFilter>& filters, const std::vector<Trajectory>& truth,
                    const BenchConfig& cfg) {
  return sweep(filters, truth, cfg, false);
}

void BenchTable::write_csv(std::ostream& os) const {
  os << "filter,metric";
  for (double g : grid) os << ',' << format_number(g);
  os << '\n';
  const std::pair<const char*, double BenchScore::*> metrics[] = {
      {"prior_accuracy", &BenchScore::prior_accuracy},
      {"posterior_accuracy", &BenchScore::posterior_accuracy},
      {"prior_mse", &BenchScore::prior_mse},
      {"posterior_mse", &BenchScore::posterior_mse}};
  for (std::size_t f = 0; f < filters.size(); ++f) {
    for (const auto& [name, field] : metrics) {
      os << filters[f] << ',' << name;
      for (const auto& cell : mean[f]) os << ',' << format_number(cell.*field);
      os << '\n';
    }
  }
}

}  // namespace movesort
