#include "nucseg/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include "nucseg/config.hpp"
#include "nucseg/decode.hpp"
#include "nucseg/evaluate.hpp"
#include "nucseg/stats.hpp"
#include "nucseg/synth.hpp"
#include "nucseg/targets.hpp"
#include "nucseg/volume_io.hpp"

namespace nucseg {
namespace fs = std::filesystem;

namespace {

std::string fmt_double(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

void ensure_parent(const fs::path& p) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// `<prefix>.fg.json`, `<prefix>.ct.json`, `<prefix>.dt.json`.
fs::path channel_path(const std::string& prefix, const char* channel) {
  return fs::path(prefix + "." + channel + ".json");
}

PipelineConfig load_config(const std::string& path) {
  PipelineConfig cfg;
  if (!path.empty()) merge_json(load_json_file(path), cfg);
  return cfg;
}

void emit_report(const json& report, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << report.dump(2) << '\n';
  } else {
    ensure_parent(path);
    write_json_file(report, path);
  }
}

json histogram_json(const Histogram& h) {
  json j = {{"bin_edges", h.bin_edges},
            {"counts", h.counts},
            {"normalized", h.normalized},
            {"total", h.total}};
  if (h.normalized) j["density"] = h.density;
  return j;
}

void write_histogram_csv(const Histogram& h, const std::string& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::unwritable, path);
  out << "bin_lo,bin_hi,count" << (h.normalized ? ",density" : "") << '\n';
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    out << fmt_double(h.bin_edges[i]) << ',' << fmt_double(h.bin_edges[i + 1]) << ','
        << h.counts[i];
    if (h.normalized) out << ',' << fmt_double(h.density[i], 9);
    out << '\n';
  }
}

json ap_report_json(const APReport& r) {
  json per = json::array();
  for (const auto& t : r.per_threshold) {
    per.push_back({{"threshold", t.threshold},
                   {"ap", t.ap},
                   {"tp", t.tp},
                   {"fp", t.fp},
                   {"fn", t.fn}});
  }
  json j = {{"per_threshold", per},
            {"mean", r.mean},
            {"gt_instances", r.gt_instances},
            {"pred_instances", r.pred_instances}};
  for (const auto& t : r.per_threshold) {
    if (std::abs(t.threshold - 0.5) < 1e-12) j["ap50"] = t.ap;
    if (std::abs(t.threshold - 0.75) < 1e-12) j["ap75"] = t.ap;
  }
  return j;
}

std::vector<double> parse_thresholds(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !(v > 0.0 && v < 1.0)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::bad_config, "invalid IoU threshold '" + item + "'");
    }
  }
  if (out.empty()) throw Error(ErrorCode::bad_config, "empty threshold list");
  return out;
}

// "start:stop:step", stop inclusive.
std::vector<double> parse_range(const std::string& text) {
  double start = 0, stop = 0, step = 0;
  char c1 = 0, c2 = 0;
  std::stringstream ss(text);
  if (!(ss >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0) ||
      stop < start || !ss.eof()) {
    throw Error(ErrorCode::bad_config, "range must be start:stop:step with step > 0");
  }
  const auto n = static_cast<std::int64_t>(std::floor((stop - start) / step + 1e-9)) + 1;
  std::vector<double> values;
  for (std::int64_t i = 0; i < n; ++i) {
    // Round away accumulated binary error so 0.1-steps print and compare cleanly.
    values.push_back(std::round((start + static_cast<double>(i) * step) * 1e9) / 1e9);
  }
  return values;
}

PredictionTriple read_triple(const std::string& prefix, const std::string& fg,
                             const std::string& ct, const std::string& dt) {
  const fs::path fg_path = fg.empty() ? channel_path(prefix, "fg") : fs::path(fg);
  const fs::path ct_path = ct.empty() ? channel_path(prefix, "ct") : fs::path(ct);
  const fs::path dt_path = dt.empty() ? channel_path(prefix, "dt") : fs::path(dt);
  PredictionTriple t{read_volume_as<float>(fg_path), read_volume_as<float>(ct_path),
                     read_volume_as<float>(dt_path)};
  t.validate();
  return t;
}

void set_tau(DecodeParams& p, const std::string& name, double value) {
  if (name == "tau1") p.tau1 = value;
  else if (name == "tau2") p.tau2 = value;
  else if (name == "tau3") p.tau3 = value;
  else if (name == "tau4") p.tau4 = value;
  else if (name == "tau5") p.tau5 = value;
  else throw Error(ErrorCode::bad_config, "unknown sweep parameter '" + name + "'");
}

struct TauOverrides {
  std::optional<double> tau[5];
  std::optional<std::uint64_t> min_size;

  void add_to(CLI::App* app) {
    for (int i = 0; i < 5; ++i) {
      app->add_option("--tau" + std::to_string(i + 1), tau[i],
                      "override decode.tau" + std::to_string(i + 1));
    }
    app->add_option("--min-size", min_size, "override decode.min_instance_size");
  }
  void apply(DecodeParams& p) const {
    for (int i = 0; i < 5; ++i) {
      if (tau[i]) set_tau(p, "tau" + std::to_string(i + 1), *tau[i]);
    }
    if (min_size) p.min_instance_size = *min_size;
    try {
      p.validate();
    } catch (const Error& e) {
      throw Error(ErrorCode::bad_config, e.what());
    }
  }
};

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"nucseg: volumetric nuclei instance segmentation toolkit"};
  app.require_subcommand(1);
  std::string config_path;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log progress to stderr");
  auto log = [&](const std::string& msg) {
    if (verbose) err << "[nucseg] " << msg << '\n';
  };

  // synth
  auto* synth = app.add_subcommand("synth", "generate a synthetic label volume and image");
  std::string synth_preset = "em-like";
  std::optional<std::uint64_t> synth_seed;
  std::string synth_out, synth_report;
  synth->add_option("--preset", synth_preset, "em-like | uct-like")
      ->check(CLI::IsMember({"em-like", "uct-like"}));
  synth->add_option("--seed", synth_seed, "override synth.rng_seed (also seeds rendering)");
  synth->add_option("-c,--config", config_path, "JSON config (synth, intensity blocks)");
  synth->add_option("-o,--out", synth_out, "output directory")->required();
  synth->add_option("--report", synth_report, "also write the manifest here");

  // targets
  auto* targets = app.add_subcommand("targets", "compute foreground/contour/distance targets");
  std::string tgt_labels, tgt_out, tgt_report;
  std::optional<double> tgt_noise_std;
  std::optional<int> tgt_blur;
  std::optional<std::uint64_t> tgt_noise_seed;
  targets->add_option("--labels", tgt_labels, "uint32 label volume header")->required();
  targets->add_option("-o,--out", tgt_out, "output prefix (<prefix>.fg/.ct/.dt.json)")
      ->required();
  targets->add_option("-c,--config", config_path, "JSON config (distance, contour, noise)");
  targets->add_option("--noise-std", tgt_noise_std, "corrupt: gaussian std on all channels");
  targets->add_option("--blur", tgt_blur, "corrupt: box blur radius");
  targets->add_option("--noise-seed", tgt_noise_seed, "corrupt: noise seed");
  targets->add_option("--report", tgt_report, "JSON report path");

  // decode
  auto* dec = app.add_subcommand("decode", "decode a prediction triple into instances");
  std::string dec_pred, dec_fg, dec_ct, dec_dt, dec_out, dec_report;
  TauOverrides dec_over;
  dec->add_option("--pred", dec_pred, "prediction prefix (<prefix>.fg/.ct/.dt.json)");
  dec->add_option("--fg", dec_fg, "foreground probability volume");
  dec->add_option("--ct", dec_ct, "contour probability volume");
  dec->add_option("--dt", dec_dt, "signed distance volume");
  dec->add_option("-o,--out", dec_out, "output label volume header")->required();
  dec->add_option("-c,--config", config_path, "JSON config (decode block)");
  dec->add_option("--report", dec_report, "JSON report path");
  dec_over.add_to(dec);

  // eval
  auto* ev = app.add_subcommand("eval", "average precision of a segmentation");
  std::string ev_gt, ev_pred, ev_roi, ev_dist, ev_thresholds, ev_report;
  ev->add_option("--gt", ev_gt, "ground-truth label volume")->required();
  ev->add_option("--pred", ev_pred, "predicted label volume")->required();
  ev->add_option("--roi", ev_roi, "uint8 ROI mask");
  ev->add_option("--distance", ev_dist, "signed distance volume used for scoring");
  ev->add_option("--thresholds", ev_thresholds, "comma-separated IoU thresholds (0.5,0.75)");
  ev->add_option("-c,--config", config_path, "JSON config (eval block)");
  ev->add_option("--report", ev_report, "JSON report path");

  // stats
  auto* st = app.add_subcommand("stats", "dataset statistics");
  st->require_subcommand(1);
  std::string st_labels, st_image, st_roi, st_csv, st_report;
  int st_bins = 50;
  int kl_bins = 256;
  double kl_eps = 1e-9;
  bool st_raw = false;
  auto* st_sizes = st->add_subcommand("sizes", "instance size histogram (voxels)");
  auto* st_nn = st->add_subcommand("nn", "nearest-neighbor center distance histogram (um)");
  auto* st_kl = st->add_subcommand("kl", "foreground/background intensity KL divergence");
  for (auto* sub : {st_sizes, st_nn}) {
    sub->add_option("--labels", st_labels, "label volume")->required();
    sub->add_option("--bins", st_bins, "number of equal-width bins")
        ->check(CLI::PositiveNumber);
    sub->add_flag("--counts", st_raw, "report raw counts without density");
    sub->add_option("--csv", st_csv, "also write the histogram as CSV");
    sub->add_option("--report", st_report, "JSON output path (default stdout)");
  }
  st_kl->add_option("--image", st_image, "intensity volume")->required();
  st_kl->add_option("--labels", st_labels, "label volume")->required();
  st_kl->add_option("--roi", st_roi, "uint8 ROI mask");
  st_kl->add_option("--bins", kl_bins, "number of bins")->check(CLI::PositiveNumber);
  st_kl->add_option("--epsilon", kl_eps, "additive smoothing per bin");
  st_kl->add_option("--report", st_report, "JSON output path (default stdout)");

  // sweep
  auto* sw = app.add_subcommand("sweep", "AP of decode over a grid of one threshold");
  std::string sw_pred, sw_gt, sw_roi, sw_param, sw_range, sw_out, sw_report;
  sw->add_option("--pred", sw_pred, "prediction prefix")->required();
  sw->add_option("--gt", sw_gt, "ground-truth label volume")->required();
  sw->add_option("--roi", sw_roi, "uint8 ROI mask");
  sw->add_option("--param", sw_param, "tau1..tau5")
      ->required()
      ->check(CLI::IsMember({"tau1", "tau2", "tau3", "tau4", "tau5"}));
  sw->add_option("--range", sw_range, "start:stop:step (inclusive)")->required();
  sw->add_option("-c,--config", config_path, "JSON config (decode, eval blocks)");
  sw->add_option("-o,--out", sw_out, "CSV output path (default stdout)");
  sw->add_option("--report", sw_report, "JSON report path");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return 0;
    }
    err << "nucseg: " << e.what() << '\n';
    return 2;
  }

  try {
    if (synth->parsed()) {
      Preset p = preset(synth_preset);
      PipelineConfig cfg;
      cfg.synth = p.config;
      cfg.intensity = p.intensity;
      if (!config_path.empty()) merge_json(load_json_file(config_path), cfg);
      if (synth_seed) cfg.synth.rng_seed = *synth_seed;
      log("generating labels");
      const SynthLabels gen = generate_labels(cfg.synth);
      const IntensityModel model =
          calibrate_intensity(gen.labels, cfg.intensity, cfg.synth.rng_seed);
      log("rendering image");
      const Volume<float> image = render_image(gen.labels, model, cfg.synth.rng_seed);
      fs::create_directories(synth_out);
      write_volume(gen.labels, fs::path(synth_out) / "labels.json");
      write_volume(image, fs::path(synth_out) / "image.json");
      json manifest = {{"command", "synth"},
                       {"preset", synth_preset},
                       {"seed", cfg.synth.rng_seed},
                       {"requested_count", cfg.synth.instance_count},
                       {"achieved_count", gen.achieved_count},
                       {"touching_pairs", gen.touching_pairs},
                       {"intensity_used", to_json(model)},
                       {"labels", "labels.json"},
                       {"image", "image.json"},
                       {"config", to_json(cfg)}};
      write_json_file(manifest, fs::path(synth_out) / "manifest.json");
      if (!synth_report.empty()) emit_report(manifest, synth_report, out);
      return 0;
    }

    if (targets->parsed()) {
      PipelineConfig cfg = load_config(config_path);
      if (tgt_noise_std || tgt_blur || tgt_noise_seed) {
        NoiseSpec n = cfg.noise.value_or(NoiseSpec{});
        if (tgt_noise_std) n.gaussian_std = {*tgt_noise_std, *tgt_noise_std, *tgt_noise_std};
        if (tgt_blur) n.blur_radius = *tgt_blur;
        if (tgt_noise_seed) n.rng_seed = *tgt_noise_seed;
        try {
          n.validate();
        } catch (const Error& e) {
          throw Error(ErrorCode::bad_config, e.what());
        }
        cfg.noise = n;
      }
      const LabelVolume labels = read_volume_as<std::uint32_t>(tgt_labels);
      log("computing targets");
      TargetTriple t = make_targets(labels, cfg.distance, cfg.contour);
      if (cfg.noise) t = corrupt_predictions(t, *cfg.noise);
      ensure_parent(tgt_out);
      write_volume(t.foreground, channel_path(tgt_out, "fg"));
      write_volume(t.contour, channel_path(tgt_out, "ct"));
      write_volume(t.distance, channel_path(tgt_out, "dt"));
      if (!tgt_report.empty()) {
        json report = {{"command", "targets"},
                       {"labels", tgt_labels},
                       {"out_prefix", tgt_out},
                       {"corrupted", cfg.noise.has_value()},
                       {"config", to_json(cfg)}};
        emit_report(report, tgt_report, out);
      }
      return 0;
    }

    if (dec->parsed()) {
      if (dec_pred.empty() && (dec_fg.empty() || dec_ct.empty() || dec_dt.empty())) {
        throw Error(ErrorCode::bad_config, "decode needs --pred or all of --fg --ct --dt");
      }
      PipelineConfig cfg = load_config(config_path);
      dec_over.apply(cfg.decode);
      const PredictionTriple pred = read_triple(dec_pred, dec_fg, dec_ct, dec_dt);
      log("decoding");
      const DecodeResult r = decode(pred, cfg.decode);
      ensure_parent(dec_out);
      write_volume(r.labels, dec_out);
      json report = {{"command", "decode"},
                     {"seed_count", r.seed_count},
                     {"dropped_marker_voxels", r.dropped_marker_voxels},
                     {"instance_count", r.instance_count},
                     {"params", to_json(cfg.decode)},
                     {"config", to_json(cfg)}};
      if (!dec_report.empty()) emit_report(report, dec_report, out);
      if (r.dropped_marker_voxels > 0) {
        err << "nucseg: warning: dropped " << r.dropped_marker_voxels
            << " marker voxels outside the foreground region\n";
      }
      return 0;
    }

    if (ev->parsed()) {
      PipelineConfig cfg = load_config(config_path);
      if (!ev_thresholds.empty()) cfg.eval.thresholds = parse_thresholds(ev_thresholds);
      const LabelVolume gt = read_volume_as<std::uint32_t>(ev_gt);
      const LabelVolume pred = read_volume_as<std::uint32_t>(ev_pred);
      std::optional<RoiMask> roi;
      if (!ev_roi.empty()) roi = read_volume_as<std::uint8_t>(ev_roi);
      std::optional<SignedDistVolume> dist;
      if (!ev_dist.empty()) dist = read_volume_as<float>(ev_dist);
      const APReport r = average_precision(gt, pred, roi ? &*roi : nullptr, cfg.eval.thresholds,
                                           dist ? &*dist : nullptr);
      json report = ap_report_json(r);
      report["command"] = "eval";
      report["config"] = to_json(cfg);
      if (!ev_report.empty()) emit_report(report, ev_report, out);

      out << "threshold        AP    TP    FP    FN\n";
      for (const auto& t : r.per_threshold) {
        out << std::setw(9) << fmt_double(t.threshold, 2) << std::setw(10)
            << fmt_double(t.ap, 4) << std::setw(6) << t.tp << std::setw(6) << t.fp
            << std::setw(6) << t.fn << '\n';
      }
      out << "mean AP " << fmt_double(r.mean, 4) << "  (gt " << r.gt_instances << ", pred "
          << r.pred_instances << ")\n";
      return 0;
    }

    if (st->parsed()) {
      json report;
      if (st_sizes->parsed() || st_nn->parsed()) {
        const LabelVolume labels = read_volume_as<std::uint32_t>(st_labels);
        const bool sizes = st_sizes->parsed();
        const Histogram h = sizes ? size_distribution(labels, st_bins, !st_raw)
                                  : nn_center_distance(labels, st_bins, !st_raw);
        report = {{"command", sizes ? "stats sizes" : "stats nn"},
                  {"unit", sizes ? "voxels" : "um"},
                  {"instances", h.total},
                  {"histogram", histogram_json(h)}};
        if (!st_csv.empty()) write_histogram_csv(h, st_csv);
      } else {
        const AnyVolume image = read_volume(st_image);
        const LabelVolume labels = read_volume_as<std::uint32_t>(st_labels);
        std::optional<RoiMask> roi;
        if (!st_roi.empty()) roi = read_volume_as<std::uint8_t>(st_roi);
        const KlOptions opt{kl_bins, kl_eps};
        const double kl = intensity_kl(image, labels, roi ? &*roi : nullptr, opt);
        report = {{"command", "stats kl"}, {"kl", kl}, {"bins", kl_bins}, {"epsilon", kl_eps}};
      }
      emit_report(report, st_report, out);
      return 0;
    }

    if (sw->parsed()) {
      PipelineConfig cfg = load_config(config_path);
      const std::vector<double> values = parse_range(sw_range);
      const PredictionTriple pred = read_triple(sw_pred, "", "", "");
      const LabelVolume gt = read_volume_as<std::uint32_t>(sw_gt);
      std::optional<RoiMask> roi;
      if (!sw_roi.empty()) roi = read_volume_as<std::uint8_t>(sw_roi);
      std::vector<double> thresholds = cfg.eval.thresholds;
      for (double t : {0.5, 0.75}) {
        if (std::none_of(thresholds.begin(), thresholds.end(),
                         [&](double x) { return std::abs(x - t) < 1e-12; })) {
          thresholds.push_back(t);
        }
      }
      std::ostringstream csv;
      csv << "param,value,ap50,ap75,mean,instances\n";
      json rows = json::array();
      for (const double v : values) {
        DecodeParams p = cfg.decode;
        set_tau(p, sw_param, v);
        try {
          p.validate();
        } catch (const Error& e) {
          throw Error(ErrorCode::bad_config, e.what());
        }
        log("sweep " + sw_param + "=" + fmt_double(v, 4));
        const DecodeResult d = decode(pred, p);
        const APReport r =
            average_precision(gt, d.labels, roi ? &*roi : nullptr, thresholds, &pred.distance);
        const double ap50 = r.ap50(), ap75 = r.ap75();
        const double mean = 0.5 * (ap50 + ap75);
        csv << sw_param << ',' << fmt_double(v, 4) << ',' << fmt_double(ap50) << ','
            << fmt_double(ap75) << ',' << fmt_double(mean) << ',' << d.instance_count << '\n';
        rows.push_back({{"value", v},
                        {"ap50", ap50},
                        {"ap75", ap75},
                        {"mean", mean},
                        {"instances", d.instance_count}});
      }
      if (sw_out.empty()) {
        out << csv.str();
      } else {
        ensure_parent(sw_out);
        std::ofstream f(sw_out, std::ios::trunc);
        if (!f) throw Error(ErrorCode::unwritable, sw_out);
        f << csv.str();
      }
      if (!sw_report.empty()) {
        json report = {{"command", "sweep"},
                       {"param", sw_param},
                       {"range", sw_range},
                       {"rows", rows},
                       {"config", to_json(cfg)}};
        emit_report(report, sw_report, out);
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "nucseg: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "nucseg: filesystem: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace nucseg
