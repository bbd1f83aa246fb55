// SPDX-License-Identifier: Apache-2.0
// Command-line front end: data generation, training, filter benchmarks,
// tracking and evaluation. Every command writes a manifest next to its output.

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "movesort/bench.hpp"
#include "movesort/config.hpp"
#include "movesort/e2e.hpp"
#include "movesort/filters.hpp"
#include "movesort/io.hpp"
#include "movesort/metrics.hpp"
#include "movesort/motion.hpp"
#include "movesort/nn/serialize.hpp"
#include "movesort/synthetic.hpp"
#include "movesort/tracker.hpp"

using namespace movesort;

namespace {

struct Common {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string manifest_path;
};

Config load_config(const Common& c) {
  Config cfg = c.config_path.empty() ? Config{} : Config::load(c.config_path);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("override must look like section.key=value: " + kv);
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  return cfg;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config_path, "INI configuration file")->check(CLI::ExistingFile);
  app->add_option("--set", c.overrides, "Override a configuration entry (section.key=value)");
  app->add_option("--manifest", c.manifest_path, "Manifest path (default: <output>.manifest.json)");
}

void finish(const std::string& command, const Common& common, const Config& cfg,
            const std::vector<std::string>& inputs, const std::vector<std::string>& outputs,
            std::uint64_t seed, std::map<std::string, std::string> extra = {}) {
  Manifest m;
  m.command = command;
  m.config = cfg.flatten();
  for (auto& [k, v] : extra) m.config["cli." + k] = v;
  if (!common.config_path.empty()) m.inputs[common.config_path] = hash_file(common.config_path);
  for (const auto& p : inputs) m.inputs[p] = hash_file(p);
  for (const auto& p : outputs) m.outputs[p] = hash_file(p);
  m.seed = seed;
  const std::string path = !common.manifest_path.empty() ? common.manifest_path
                           : outputs.empty()           ? command + ".manifest.json"
                                                       : outputs.front() + ".manifest.json";
  write_manifest(path, m);
}

FilterKind make_filter(const std::string& kind, const std::string& model_path, const Config& cfg) {
  const FilterFamily family = parse_filter_family(kind);
  FilterKind fk;
  switch (family) {
    case FilterFamily::kKalman: fk = FilterKind::make_kalman(cfg.kalman()); break;
    case FilterFamily::kBayes: {
      if (model_path.empty()) throw std::runtime_error("filter bayes needs --model");
      auto m = std::make_shared<const MotionModel>(MotionModel::from_file(nn::load_model(model_path)));
      fk = FilterKind::make_bayes(std::move(m), cfg.meas_noise_sigma());
      break;
    }
    case FilterFamily::kRnnE2e:
    case FilterFamily::kNodeE2e: {
      if (model_path.empty()) throw std::runtime_error("filter " + kind + " needs --model");
      auto m = std::make_shared<const E2eModel>(E2eModel::from_file(nn::load_model(model_path)));
      fk = FilterKind::make_e2e(std::move(m));
      if (fk.family != family) throw std::runtime_error("model file does not hold a " + kind + " model");
      break;
    }
  }
  const TrackerConfig defaults = cfg.tracker();
  fk.buffer_size = defaults.filter.buffer_size;
  fk.buffer_min = defaults.filter.buffer_min;
  return fk;
}

/// "name" or "name:model_path"
NamedFilter parse_filter_arg(const std::string& arg, const Config& cfg) {
  const auto colon = arg.find(':');
  const std::string kind = arg.substr(0, colon);
  const std::string path = colon == std::string::npos ? "" : arg.substr(colon + 1);
  return {arg, make_filter(kind, path, cfg)};
}

std::vector<MotRow> records_to_rows(const std::vector<TrackRecord>& tracks, const ImageSize& image) {
  std::vector<MotRow> rows;
  for (const auto& t : tracks) {
    for (const auto& e : t.history) {
      MotRow r;
      r.frame = e.frame;
      r.id = t.id;
      r.left = e.box.left * image.width;
      r.top = e.box.top * image.height;
      r.width = e.box.width * image.width;
      r.height = e.box.height * image.height;
      rows.push_back(r);
    }
  }
  std::stable_sort(rows.begin(), rows.end(), [](const MotRow& a, const MotRow& b) {
    return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
  });
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tracking-by-detection with learned probabilistic motion filters"};
  app.require_subcommand(1);

  // gen
  Common gen_c;
  std::string gen_gt, gen_dets, gen_traj, gen_det_traj;
  auto* gen = app.add_subcommand("gen", "Generate a synthetic scene");
  add_common(gen, gen_c);
  gen->add_option("--gt", gen_gt, "Ground truth output (MOT rows)")->required();
  gen->add_option("--dets", gen_dets, "Detections output (MOT rows, id -1)")->required();
  gen->add_option("--trajectories", gen_traj, "Ground-truth trajectory dataset output");
  gen->add_option("--det-trajectories", gen_det_traj, "Per-object detection trajectories output");
  gen->callback([&] {
    const Config cfg = load_config(gen_c);
    const SyntheticSpec spec = cfg.synthetic();
    const ImageSize image = cfg.image();
    const SyntheticScene scene = generate(spec);
    write_mot(gen_gt, to_rows(trajectories_to_annotations(scene.truth), image));
    FrameAnnotations dets;
    for (const auto& [f, boxes] : boxes_by_frame(scene.detections)) {
      for (const auto& b : boxes) dets[f].emplace_back(-1, b);
    }
    write_mot(gen_dets, to_rows(dets, image));
    std::vector<std::string> outs{gen_gt, gen_dets};
    if (!gen_traj.empty()) {
      write_trajectories(gen_traj, scene.truth);
      outs.push_back(gen_traj);
    }
    if (!gen_det_traj.empty()) {
      write_trajectories(gen_det_traj, scene.detections);
      outs.push_back(gen_det_traj);
    }
    finish("gen", gen_c, cfg, {}, outs, spec.seed);
  });

  // train-motion / train-e2e
  Common tm_c, te_c;
  std::string tm_data, tm_out, te_data, te_out;
  auto* tm = app.add_subcommand("train-motion", "Train a motion model");
  add_common(tm, tm_c);
  tm->add_option("--data", tm_data, "Trajectory dataset")->required()->check(CLI::ExistingFile);
  tm->add_option("--out", tm_out, "Model file")->required();
  tm->callback([&] {
    const Config cfg = load_config(tm_c);
    const TrainConfig tc = cfg.train(false);
    TrainReport report;
    const MotionModel model = train_motion(cfg.motion(), read_trajectories(tm_data), tc, &report);
    nn::save_model(tm_out, model.to_file());
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
      std::cout << "epoch " << e + 1 << " loss " << report.epoch_loss[e] << "\n";
    }
    finish("train-motion", tm_c, cfg, {tm_data}, {tm_out}, tc.seed);
  });
  auto* te = app.add_subcommand("train-e2e", "Train an end-to-end filter");
  add_common(te, te_c);
  te->add_option("--data", te_data, "Trajectory dataset")->required()->check(CLI::ExistingFile);
  te->add_option("--out", te_out, "Model file")->required();
  te->callback([&] {
    const Config cfg = load_config(te_c);
    const TrainConfig tc = cfg.train(true);
    TrainReport report;
    const E2eModel model = train_e2e(cfg.e2e(), read_trajectories(te_data), tc, &report);
    nn::save_model(te_out, model.to_file());
    for (std::size_t e = 0; e < report.epoch_loss.size(); ++e) {
      std::cout << "epoch " << e + 1 << " loss " << report.epoch_loss[e] << "\n";
    }
    finish("train-e2e", te_c, cfg, {te_data}, {te_out}, tc.seed);
  });

  // eval-filter
  Common ef_c;
  std::string ef_filter = "kalman", ef_model, ef_truth, ef_dets, ef_out;
  auto* ef = app.add_subcommand("eval-filter", "Score one filter on trajectories");
  add_common(ef, ef_c);
  auto* ef_filter_opt = ef->add_option("--filter", ef_filter, "kalman, bayes, rnn-e2e or node-e2e");
  ef->add_option("--model", ef_model, "Model file for learned filters")->check(CLI::ExistingFile);
  ef->add_option("--truth", ef_truth, "Ground-truth trajectory dataset")->required()->check(CLI::ExistingFile);
  ef->add_option("--dets", ef_dets, "Detection trajectory dataset (same ids)")->required()->check(CLI::ExistingFile);
  ef->add_option("--out", ef_out, "Results file (name,value)")->required();
  ef->callback([&] {
    const Config cfg = load_config(ef_c);
    if (ef_filter_opt->count() == 0) ef_filter = cfg.filter_kind();
    const FilterKind kind = make_filter(ef_filter, ef_model, cfg);
    const auto truth = read_trajectories(ef_truth);
    const auto dets = read_trajectories(ef_dets);
    std::map<int, const Trajectory*> by_id;
    for (const auto& d : dets) by_id[d.id] = &d;
    std::vector<Trajectory> aligned;
    for (const auto& t : truth) {
      const auto it = by_id.find(t.id);
      aligned.push_back(it == by_id.end() ? Trajectory{t.id, {}} : *it->second);
    }
    const BenchScore s = evaluate_filter(kind, truth, aligned);
    std::ofstream os(ef_out, std::ios::binary);
    os << "prior_accuracy," << format_number(s.prior_accuracy) << "\n"
       << "posterior_accuracy," << format_number(s.posterior_accuracy) << "\n"
       << "prior_mse," << format_number(s.prior_mse) << "\n"
       << "posterior_mse," << format_number(s.posterior_mse) << "\n"
       << "count," << s.count << "\n";
    os.close();
    std::vector<std::string> ins{ef_truth, ef_dets};
    if (!ef_model.empty()) ins.push_back(ef_model);
    finish("eval-filter", ef_c, cfg, ins, {ef_out}, 0, {{"filter", ef_filter}});
  });

  // bench-noise / bench-fn
  struct BenchArgs {
    Common c;
    std::string truth, out;
    std::vector<std::string> filters{"kalman"};
    int seeds = 20;
    std::uint64_t seed = 0;
    double fixed = 0.0;
    CLI::Option* seeds_opt = nullptr;
    CLI::Option* fixed_opt = nullptr;
  };
  BenchArgs bn, bf;
  auto add_bench = [&](const char* name, const char* help, BenchArgs& a, bool noise) {
    auto* sc = app.add_subcommand(name, help);
    add_common(sc, a.c);
    sc->add_option("--truth", a.truth, "Ground-truth trajectory dataset")->required()->check(CLI::ExistingFile);
    sc->add_option("--filter", a.filters, "Filter as kind or kind:model (repeatable)");
    a.seeds_opt = sc->add_option("--seeds", a.seeds, "Corruption seeds per grid point");
    sc->add_option("--seed", a.seed, "Base seed");
    a.fixed_opt = sc->add_option(noise ? "--fn" : "--sigma", a.fixed,
                   noise ? "Miss rate held fixed" : "Noise sigma held fixed");
    sc->add_option("--out", a.out, "Table output (CSV)")->required();
    sc->callback([&a, noise, name] {
      const Config cfg = load_config(a.c);
      const BenchDefaults defaults = cfg.bench();
      if (a.seeds_opt->count() == 0) a.seeds = defaults.seeds;
      if (a.fixed_opt->count() == 0) a.fixed = noise ? defaults.noise_fn : defaults.fn_sigma;
      std::vector<NamedFilter> filters;
      std::vector<std::string> ins{a.truth};
      for (const auto& f : a.filters) {
        filters.push_back(parse_filter_arg(f, cfg));
        const auto colon = f.find(':');
        if (colon != std::string::npos) ins.push_back(f.substr(colon + 1));
      }
      BenchConfig bc;
      bc.grid = noise ? kNoiseGrid : kFnGrid;
      bc.seeds = a.seeds;
      bc.seed = a.seed;
      (noise ? bc.fixed_fn : bc.fixed_sigma) = a.fixed;
      const auto truth = read_trajectories(a.truth);
      const BenchTable t = noise ? bench_noise(filters, truth, bc) : bench_fn(filters, truth, bc);
      std::ofstream os(a.out, std::ios::binary);
      t.write_csv(os);
      os.close();
      finish(name, a.c, cfg, ins, {a.out}, a.seed,
             {{"seeds", std::to_string(a.seeds)}, {noise ? "fn" : "sigma", format_number(a.fixed)}});
    });
  };
  add_bench("bench-noise", "Sweep detector noise sigma", bn, true);
  add_bench("bench-fn", "Sweep detector miss rate", bf, false);

  // track
  Common tr_c;
  std::string tr_filter = "kalman", tr_model, tr_dets, tr_out, tr_records;
  auto* tr = app.add_subcommand("track", "Track detections");
  add_common(tr, tr_c);
  auto* tr_filter_opt = tr->add_option("--filter", tr_filter, "kalman, bayes, rnn-e2e or node-e2e");
  tr->add_option("--model", tr_model, "Model file for learned filters")->check(CLI::ExistingFile);
  tr->add_option("--dets", tr_dets, "Detections (MOT rows)")->required()->check(CLI::ExistingFile);
  tr->add_option("--out", tr_out, "Online tracker output (MOT rows)")->required();
  tr->add_option("--records", tr_records, "Track records for postprocess");
  tr->callback([&] {
    const Config cfg = load_config(tr_c);
    TrackerConfig tc = cfg.tracker();
    if (tr_filter_opt->count() == 0) tr_filter = cfg.filter_kind();
    tc.filter = make_filter(tr_filter, tr_model, cfg);
    const ImageSize image = cfg.image();
    const auto dets = detections_by_frame(read_mot(tr_dets), image);
    Tracker tracker(tc);
    FrameAnnotations online;
    if (!dets.empty()) {
      for (int f = dets.begin()->first; f <= dets.rbegin()->first; ++f) {
        const auto it = dets.find(f);
        const std::vector<Box> none;
        for (const auto& o : tracker.step(f, it == dets.end() ? none : it->second)) {
          online[f].emplace_back(o.id, o.box);
        }
      }
    }
    write_mot(tr_out, to_rows(online, image));
    std::vector<std::string> outs{tr_out};
    if (!tr_records.empty()) {
      write_records(tr_records, tracker.finalize());
      outs.push_back(tr_records);
    }
    std::vector<std::string> ins{tr_dets};
    if (!tr_model.empty()) ins.push_back(tr_model);
    finish("track", tr_c, cfg, ins, outs, 0, {{"filter", tr_filter}});
  });

  // postprocess
  Common pp_c;
  std::string pp_records, pp_out;
  auto* pp = app.add_subcommand("postprocess", "Interpolate, back-fill and filter finished tracks");
  add_common(pp, pp_c);
  pp->add_option("--records", pp_records, "Track records from track")->required()->check(CLI::ExistingFile);
  pp->add_option("--out", pp_out, "Output (MOT rows)")->required();
  pp->callback([&] {
    const Config cfg = load_config(pp_c);
    const auto tracks = postprocess(read_records(pp_records), cfg.tracker());
    write_mot(pp_out, records_to_rows(tracks, cfg.image()));
    finish("postprocess", pp_c, cfg, {pp_records}, {pp_out}, 0);
  });

  // eval-mot
  Common em_c;
  std::string em_gt, em_hyp, em_out;
  auto* em = app.add_subcommand("eval-mot", "MOTA, IDF1 and ID switches");
  add_common(em, em_c);
  em->add_option("--gt", em_gt, "Ground truth (MOT rows)")->required()->check(CLI::ExistingFile);
  em->add_option("--hyp", em_hyp, "Tracker output (MOT rows)")->required()->check(CLI::ExistingFile);
  em->add_option("--out", em_out, "Metrics output (name,value)")->required();
  em->callback([&] {
    const Config cfg = load_config(em_c);
    const ImageSize image = cfg.image();
    const MotMetrics m = mot_metrics(to_annotations(read_mot(em_hyp), image), to_annotations(read_mot(em_gt), image));
    std::ofstream os(em_out, std::ios::binary);
    write_metrics(os, m);
    os.close();
    finish("eval-mot", em_c, cfg, {em_gt, em_hyp}, {em_out}, 0);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "movesort: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
