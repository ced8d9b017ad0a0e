// hacl: pseudo-label generation, evaluation and inspection.
//
// Exit codes: 0 ok, 1 fatal, 2 partial (some images skipped).

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hacl/dataset_json.hpp"
#include "hacl/error.hpp"
#include "hacl/eval.hpp"
#include "hacl/pipeline.hpp"
#include "hacl/schedule.hpp"
#include "hacl/visualize.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kFatal = 1;
constexpr int kPartial = 2;

const std::vector<std::string> kPipelineKeys = {
    "thresholds", "connectivity", "cover_percent", "crf", "crf_iterations", "crf_spatial_sigma",
    "crf_spatial_weight", "crf_bilateral_sigma_xy", "crf_bilateral_sigma_rgb", "crf_bilateral_weight",
    "crf_unary_confidence", "min_crf_iou", "min_area_px", "max_corner_count", "dedup_iou", "npy_patch_size"};

const std::vector<std::string> kScheduleKeys = {
    "total_iters", "burn_in_iters", "lr_start", "lr_end", "label_weight_start", "label_weight_end",
    "teacher_weight_start", "teacher_weight_end", "ema_momentum"};

std::string flag_name(std::string key) {
  for (auto& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

// One string option per config key; applied on top of --config in key order.
struct KeyOverrides {
  std::vector<std::pair<std::string, std::string>> values;

  void add(CLI::App* app, const std::vector<std::string>& keys, const std::string& group) {
    values.reserve(keys.size());
    for (const auto& key : keys) values.emplace_back(key, "");
    for (auto& [key, value] : values) app->add_option(flag_name(key), value, "Overrides config key " + key)->group(group);
  }

  template <typename Apply>
  void apply(Apply&& fn) const {
    for (const auto& [key, value] : values) {
      if (!value.empty()) fn(key, value);
    }
  }
};

std::vector<double> parse_iou_set(const std::string& text) {
  if (text == "standard" || text.empty()) return hacl::standard_iou_thresholds();
  if (text == "50") return {0.5};
  if (text == "75") return {0.75};
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.empty()) {
      throw hacl::Error(hacl::Errc::InvalidConfig, "bad --iou-set entry '" + item + "'");
    }
    out.push_back(v);
  }
  return out;
}

std::string fmt_metric(double v) {
  if (v < 0) return "   n/a";
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << v;
  return os.str();
}

void print_metrics(std::ostream& os, const std::string& name, const hacl::MetricSet& m) {
  os << name << "\n";
  for (std::size_t i = 0; i < m.max_dets.size(); ++i) {
    os << "  AR@" << std::left << std::setw(6) << m.max_dets[i] << std::right << fmt_metric(m.ar[i]) << "\n";
  }
  os << "  AR_S    " << fmt_metric(m.ar_small) << "\n"
     << "  AR_M    " << fmt_metric(m.ar_medium) << "\n"
     << "  AR_L    " << fmt_metric(m.ar_large) << "\n"
     << "  AP      " << fmt_metric(m.ap) << "\n"
     << "  AP50    " << fmt_metric(m.ap50) << "\n"
     << "  AP75    " << fmt_metric(m.ap75) << "\n"
     << "  AP_S    " << fmt_metric(m.ap_small) << "\n"
     << "  AP_M    " << fmt_metric(m.ap_medium) << "\n"
     << "  AP_L    " << fmt_metric(m.ap_large) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical pseudo-label generation and class-agnostic evaluation"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Cluster feature maps into hierarchical pseudo-labels");
  std::string gen_features, gen_images, gen_config, gen_out = "pseudo_labels.json", gen_stats;
  unsigned gen_workers = 0;
  bool gen_quiet = false;
  KeyOverrides gen_keys;
  gen->add_option("features", gen_features, "Directory of .fmap / .npy feature files")->required();
  gen->add_option("--images", gen_images, "Image directory (enables CRF refinement)");
  gen->add_option("--config", gen_config, "key = value config file");
  gen->add_option("--workers", gen_workers, "Worker threads (overrides config)");
  gen->add_option("--out", gen_out, "Annotation JSON output")->capture_default_str();
  gen->add_option("--stats", gen_stats, "Per-image statistics JSON output");
  gen->add_flag("--quiet", gen_quiet, "Do not log skipped images");
  gen_keys.add(gen, kPipelineKeys, "Pipeline");

  // eval
  auto* ev = app.add_subcommand("eval", "Class-agnostic AR/AP of results against ground truth");
  std::string ev_gt, ev_res, ev_out, ev_iou = "standard";
  std::vector<std::size_t> ev_max_dets{10, 100, 1000};
  ev->add_option("gt", ev_gt, "Ground-truth JSON")->required();
  ev->add_option("results", ev_res, "Results JSON (array or annotation file)")->required();
  ev->add_option("--max-dets", ev_max_dets, "Detections per image, ascending")->capture_default_str();
  ev->add_option("--iou-set", ev_iou, "standard | 50 | 75 | comma-separated thresholds")->capture_default_str();
  ev->add_option("--out", ev_out, "Write metrics JSON here");

  // viz
  auto* viz = app.add_subcommand("viz", "Render masks over images as PNG");
  std::string viz_ann, viz_images, viz_out = "viz", viz_level;
  viz->add_option("annotations", viz_ann, "Annotation JSON")->required();
  viz->add_option("--images", viz_images, "Image directory")->required();
  viz->add_option("--out", viz_out, "Output directory")->capture_default_str();
  viz->add_option("--level", viz_level, "Only draw whole | part | subpart");

  // schedule-dump
  auto* sched = app.add_subcommand("schedule-dump", "CSV of lr and branch weights per iteration");
  std::string sched_config, sched_out;
  KeyOverrides sched_keys;
  sched->add_option("--config", sched_config, "key = value schedule config");
  sched->add_option("--out", sched_out, "CSV path (default stdout)");
  sched_keys.add(sched, kScheduleKeys, "Schedule");

  // stats
  auto* st = app.add_subcommand("stats", "Summarize an annotation file");
  std::string st_ann, st_out;
  st->add_option("annotations", st_ann, "Annotation JSON")->required();
  st->add_option("--out", st_out, "Write JSON here instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      hacl::GenerateOptions opts;
      opts.feature_dir = gen_features;
      if (!gen_images.empty()) opts.image_dir = gen_images;
      opts.out_path = gen_out;
      if (!gen_stats.empty()) opts.stats_path = gen_stats;
      if (!gen_config.empty()) opts.config = hacl::load_pipeline_config(gen_config);
      gen_keys.apply([&](const std::string& k, const std::string& v) { hacl::apply_pipeline_setting(opts.config, k, v); });
      if (gen_workers > 0) opts.config.workers = gen_workers;
      if (gen_quiet) opts.log = [](const std::string&) {};
      const auto summary = hacl::run_generate(opts);
      std::cerr << summary.images_ok << "/" << summary.images_total << " images, " << summary.annotations
                << " annotations\n";
      if (summary.images_ok == 0) return kFatal;
      return summary.failures.empty() ? kOk : kPartial;
    }

    if (*ev) {
      hacl::EvalParams params;
      params.iou_thresholds = parse_iou_set(ev_iou);
      params.max_dets = ev_max_dets;
      const auto ds = hacl::load_dataset(ev_gt);
      const auto dets = hacl::load_detections(ev_res);
      params.image_ids = ds.image_ids();
      const auto result = hacl::evaluate(ds.annotations, dets, params);
      print_metrics(std::cout, "box", result.box);
      if (result.mask) print_metrics(std::cout, "mask", *result.mask);
      for (const auto& [level, ar] : result.per_level_ar) {
        std::cout << "  AR[" << hacl::to_string(level) << "] " << fmt_metric(ar) << "\n";
      }
      if (!ev_out.empty()) {
        std::ofstream out(ev_out, std::ios::binary);
        out << hacl::eval_result_to_json(result);
        if (!out) throw hacl::Error(hacl::Errc::Io, "cannot write " + ev_out);
      }
      return kOk;
    }

    if (*viz) {
      hacl::VizOptions opts;
      opts.annotations = viz_ann;
      opts.image_dir = viz_images;
      opts.out_dir = viz_out;
      if (!viz_level.empty()) {
        opts.level_filter = hacl::parse_level(viz_level);
        if (!opts.level_filter) throw hacl::Error(hacl::Errc::InvalidConfig, "unknown level '" + viz_level + "'");
      }
      const auto summary = hacl::run_viz(opts);
      if (summary.images_total > 0 && summary.written == 0) return kFatal;
      return summary.failures.empty() ? kOk : kPartial;
    }

    if (*sched) {
      hacl::ScheduleConfig cfg;
      if (!sched_config.empty()) cfg = hacl::load_schedule_config(sched_config);
      sched_keys.apply([&](const std::string& k, const std::string& v) { hacl::apply_schedule_setting(cfg, k, v); });
      cfg.validate();
      if (sched_out.empty()) {
        hacl::write_schedule_csv(std::cout, cfg);
      } else {
        std::ofstream out(sched_out, std::ios::binary);
        hacl::write_schedule_csv(out, cfg);
        if (!out) throw hacl::Error(hacl::Errc::Io, "cannot write " + sched_out);
      }
      return kOk;
    }

    if (*st) {
      const std::string text = hacl::annotation_stats_to_json(st_ann);
      if (st_out.empty()) {
        std::cout << text;
      } else {
        std::ofstream out(st_out, std::ios::binary);
        out << text;
        if (!out) throw hacl::Error(hacl::Errc::Io, "cannot write " + st_out);
      }
      return kOk;
    }
  } catch (const std::exception& e) {
    std::cerr << "hacl: " << e.what() << "\n";
    return kFatal;
  }
  return kOk;
}
