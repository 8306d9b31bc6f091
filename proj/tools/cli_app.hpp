#pragma once

// The `lmcca` command line. Kept in a header so the tests can drive it
// in-process through run().

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lmcca/lmcca.hpp"

namespace lmcca::cli {

namespace fs = std::filesystem;

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kMissingFile = 2,
  kBadFormat = 3,
  kVariantMismatch = 4,
  kDegenerate = 5,
  kPropertyViolation = 6,
};

struct RegularizationOptions {
  double rel_scale = 1e-4;
  double abs_floor = 1e-12;
  double pos_tol = 1e-10;
  std::string prior = "empirical";
  std::string diagonal = "default";
  bool scale_by_n = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--prior", prior, "Class priors: empirical or uniform")->capture_default_str();
    cmd->add_option("--rel-scale", rel_scale, "Ridge scale relative to trace/dim")->capture_default_str();
    cmd->add_option("--abs-floor", abs_floor, "Smallest ridge")->capture_default_str();
    cmd->add_option("--pos-tol", pos_tol, "Keep eigenvalues above pos_tol * max|lambda|")
        ->capture_default_str();
    cmd->add_option("--diagonal", diagonal, "Diagonal blocks: default, scatter or autocorrelation")
        ->capture_default_str();
    cmd->add_flag("--scale-by-n", scale_by_n, "Divide every correlation block by N");
  }

  [[nodiscard]] FitConfig to_fit_config() const {
    FitConfig cfg;
    cfg.prior = parse_prior_mode(prior);
    cfg.regularization.rel_scale = rel_scale;
    cfg.regularization.abs_floor = abs_floor;
    cfg.pos_tol = pos_tol;
    cfg.scale_by_n = scale_by_n;
    if (diagonal == "default") {
      cfg.diagonal = DiagonalBlocks::kVariantDefault;
    } else if (diagonal == "scatter") {
      cfg.diagonal = DiagonalBlocks::kScatter;
    } else if (diagonal == "autocorrelation") {
      cfg.diagonal = DiagonalBlocks::kAutocorrelation;
    } else {
      throw InvalidInput("unknown diagonal mode '" + diagonal + "'");
    }
    return cfg;
  }
};

struct ExtractOptions {
  std::string images;
  std::string labels;
  std::string out;
  std::vector<std::string> views{"gabor-mean", "gabor-std", "zernike"};
  int per_class = 0;
  std::optional<std::uint64_t> subset_seed;
  unsigned threads = 0;
  FeatureConfig features;
};

struct FuseOptions {
  std::string features;
  std::string out;
  std::string split_out;
  std::string variant = "lmcca";
  std::vector<std::size_t> views;
  double train_fraction = 0.5;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  RegularizationOptions reg;
};

struct ProjectOptions {
  std::string model;
  std::string features;
  std::string split;
  std::string subset = "all";
  Eigen::Index d = 0;
  std::string out;
};

struct EvalOptions {
  std::string model;
  std::string features;
  std::string split;
  std::string select = "validation";
  std::string distance = "rowsum";
  std::string d_range;
  std::string out;
};

struct SynthcheckCmdOptions {
  int trials = 20;
  std::uint64_t seed = 0;
  std::string out;
};

struct ReportOptions {
  std::string features;
  std::vector<std::string> view_names;
  double train_fraction = 0.5;
  double validation_fraction = 0.2;
  std::uint64_t seed = 0;
  std::string select = "validation";
  std::string distance = "rowsum";
  std::string out;
  std::string curves_dir;
  RegularizationOptions reg;
};

inline void require_file(const std::string& path, const char* what) {
  if (path.empty()) throw InvalidInput(std::string(what) + " path is required");
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw IoError(std::string(what) + " not found: " + path);
}

inline void require_output_dir(const std::string& path) {
  if (path.empty()) return;
  const fs::path parent = fs::path(path).parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec)) {
    throw IoError("output directory does not exist: " + parent.string());
  }
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::trunc);
  if (!f) throw IoError("cannot write " + path);
  f << text;
  if (!f) throw IoError("write failed for " + path);
}

inline DistanceMode parse_distance(const std::string& s) {
  if (s == "rowsum") return DistanceMode::kRowSum;
  if (s == "flattened") return DistanceMode::kFlattened;
  throw InvalidInput("unknown distance '" + s + "' (rowsum or flattened)");
}

/// "a:b" (inclusive), a comma list, or empty for 1..d_max.
inline std::vector<Eigen::Index> parse_d_range(const std::string& spec, Eigen::Index d_max) {
  if (spec.empty()) return all_dims(d_max);
  std::vector<Eigen::Index> out;
  auto number = [&](const std::string& tok) {
    std::size_t used = 0;
    long long v = 0;
    try {
      v = std::stoll(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tok.size()) throw InvalidInput("bad d range '" + spec + "'");
    return static_cast<Eigen::Index>(v);
  };
  if (const auto colon = spec.find(':'); colon != std::string::npos) {
    const Eigen::Index lo = number(spec.substr(0, colon));
    const Eigen::Index hi = number(spec.substr(colon + 1));
    if (lo > hi) throw InvalidInput("bad d range '" + spec + "'");
    for (Eigen::Index d = lo; d <= hi; ++d) out.push_back(d);
    return out;
  }
  std::stringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(number(tok));
  return out;
}

inline LabeledMultiviewDataset select_views(const LabeledMultiviewDataset& ds,
                                            const std::vector<std::size_t>& views) {
  if (views.empty()) return ds;
  std::vector<ViewMatrix> picked;
  for (std::size_t v : views) {
    if (v >= ds.view_count()) {
      throw InvalidInput("view index " + std::to_string(v) + " out of range (P=" +
                         std::to_string(ds.view_count()) + ")");
    }
    picked.push_back(ds.view(v));
  }
  return {std::move(picked), ds.labels(), ds.class_count()};
}

inline void check_manifest_matches(const SplitManifest& m, const LabeledMultiviewDataset& ds) {
  if (m.samples != static_cast<std::size_t>(ds.samples())) {
    throw FormatError("split manifest covers " + std::to_string(m.samples) +
                      " samples but the feature set has " + std::to_string(ds.samples()));
  }
}

inline void check_model_matches(const FusionModel& model, const LabeledMultiviewDataset& ds) {
  const auto dims = ds.view_dims();
  bool ok = dims.size() == model.view_count();
  for (std::size_t t = 0; ok && t < dims.size(); ++t) ok = dims[t] == model.blocks[t].rows();
  if (!ok) throw InvalidInput("feature views do not match the model's view dimensions");
}

// ---------------------------------------------------------------------------

inline int cmd_extract(const ExtractOptions& o, std::ostream& out) {
  require_file(o.images, "image file");
  require_file(o.labels, "label file");
  if (o.out.empty()) throw InvalidInput("--out is required");
  require_output_dir(o.out);
  if (o.per_class < 0) throw InvalidInput("--per-class must be >= 0");
  std::vector<FeatureKind> kinds;
  for (const auto& v : o.views) kinds.push_back(parse_feature_kind(v));
  if (kinds.size() < 2) throw InvalidInput("at least two views are required");

  auto images = load_idx_images(o.images);
  auto labels = load_idx_labels(o.labels);
  if (images.size() != labels.size()) {
    throw FormatError("image and label files disagree on the sample count");
  }
  if (o.subset_seed && o.per_class == 0) throw InvalidInput("--subset-seed needs --per-class");
  if (o.per_class > 0) {
    std::vector<GrayImage> kept_images;
    std::vector<int> kept_labels;
    for (std::size_t i : per_class_subset(labels, o.per_class, o.subset_seed)) {
      kept_images.push_back(std::move(images[i]));
      kept_labels.push_back(labels[i]);
    }
    images = std::move(kept_images);
    labels = std::move(kept_labels);
  }
  int class_count = 0;
  for (int y : labels) class_count = std::max(class_count, y + 1);

  auto mats = extract_views(images, kinds, o.features, o.threads);
  std::vector<ViewMatrix> views;
  for (auto& m : mats) views.emplace_back(std::move(m));
  const LabeledMultiviewDataset ds(std::move(views), std::move(labels), class_count);
  save_feature_set(o.out, ds);

  out << "wrote " << o.out << ": N=" << ds.samples() << " classes=" << ds.class_count() << " views";
  for (std::size_t t = 0; t < ds.view_count(); ++t) {
    out << ' ' << o.views[t] << '(' << ds.view(t).dim() << ')';
  }
  out << '\n';
  return kOk;
}

inline int cmd_fuse(const FuseOptions& o, std::ostream& out) {
  require_file(o.features, "feature file");
  if (o.out.empty()) throw InvalidInput("--out is required");
  require_output_dir(o.out);
  const Variant variant = parse_variant(o.variant);
  const FitConfig cfg = o.reg.to_fit_config();

  const auto full = load_feature_set(o.features);
  const auto ds = select_views(full, o.views);
  check_variant_views(variant, ds.view_count());

  SplitManifest manifest =
      make_split_manifest(ds.labels(), o.train_fraction, o.validation_fraction, o.seed);
  manifest.views = o.views;
  const FusionModel model = fit(ds.select(manifest.train), variant, cfg);

  const std::string split_path = o.split_out.empty() ? o.out + ".split" : o.split_out;
  save_model(o.out, model);
  save_split_manifest(split_path, manifest);

  nlohmann::json meta;
  meta["variant"] = std::string(to_string(model.variant));
  meta["prior"] = std::string(to_string(model.prior));
  meta["d"] = model.d();
  meta["Q"] = model.q;
  meta["P"] = model.view_count();
  meta["view_dims"] = ds.view_dims();
  meta["eigenvalues"] = std::vector<double>(model.eigenvalues.begin(), model.eigenvalues.end());
  meta["train_samples"] = manifest.train.size();
  meta["seed"] = o.seed;
  meta["split"] = split_path;
  write_text(o.out + ".json", meta.dump(2) + "\n");

  out << "fitted " << to_string(variant) << " on " << manifest.train.size()
      << " samples: d=" << model.d() << " Q=" << model.q << " lambda_1=" << model.eigenvalues(0)
      << "\nwrote " << o.out << ", " << o.out << ".json, " << split_path << '\n';
  return kOk;
}

inline int cmd_project(const ProjectOptions& o, std::ostream& out) {
  require_file(o.model, "model file");
  require_file(o.features, "feature file");
  if (!o.split.empty()) require_file(o.split, "split manifest");
  if (o.out.empty()) throw InvalidInput("--out is required");
  require_output_dir(o.out);

  const FusionModel model = load_model(o.model);
  const auto full = load_feature_set(o.features);
  std::vector<std::size_t> rows;
  std::vector<std::size_t> views;
  if (!o.split.empty()) {
    const SplitManifest m = load_split_manifest(o.split);
    check_manifest_matches(m, full);
    views = m.views;
    if (o.subset == "train") {
      rows = m.train;
    } else if (o.subset == "validation") {
      rows = m.validation;
    } else if (o.subset == "test") {
      rows = m.test;
    } else if (o.subset != "all") {
      throw InvalidInput("unknown subset '" + o.subset + "'");
    }
  } else if (o.subset != "all") {
    throw InvalidInput("--subset needs --split");
  }
  if (rows.empty()) {
    rows.resize(static_cast<std::size_t>(full.samples()));
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  }
  const auto ds = select_views(full, views).select(rows);
  check_model_matches(model, ds);
  const Eigen::Index d = o.d == 0 ? model.d() : o.d;
  const auto reps = project_all(model, ds.views(), d);

  std::ostringstream csv;
  csv << "index,label";
  for (Eigen::Index t = 0; t < static_cast<Eigen::Index>(model.view_count()); ++t) {
    for (Eigen::Index j = 0; j < d; ++j) csv << ",v" << t << "_" << j;
  }
  csv << '\n' << std::setprecision(17);
  for (std::size_t k = 0; k < reps.size(); ++k) {
    csv << rows[k] << ',' << ds.labels()[k];
    const Matrix& z = reps[k].values();
    for (Eigen::Index t = 0; t < z.cols(); ++t) {
      for (Eigen::Index j = 0; j < d; ++j) csv << ',' << z(j, t);
    }
    csv << '\n';
  }
  write_text(o.out, csv.str());
  out << "projected " << reps.size() << " samples to d=" << d << " x P=" << model.view_count()
      << "\nwrote " << o.out << '\n';
  return kOk;
}

inline int cmd_eval(const EvalOptions& o, std::ostream& out) {
  require_file(o.model, "model file");
  require_file(o.features, "feature file");
  const std::string split_path = o.split.empty() ? o.model + ".split" : o.split;
  require_file(split_path, "split manifest");
  if (o.out.empty()) throw InvalidInput("--out is required");
  require_output_dir(o.out);
  if (o.select != "validation" && o.select != "test") {
    throw InvalidInput("--select must be validation or test");
  }
  const DistanceMode mode = parse_distance(o.distance);

  const FusionModel model = load_model(o.model);
  const auto full = load_feature_set(o.features);
  const SplitManifest m = load_split_manifest(split_path);
  check_manifest_matches(m, full);
  const auto ds = select_views(full, m.views);
  check_model_matches(model, ds);
  const auto range = parse_d_range(o.d_range, model.d());
  const auto train = ds.select(m.train);
  const auto test = ds.select(m.test);

  Eigen::Index reported_d = 0;
  double reported_acc = 0.0;
  SweepCurve curve;
  if (o.select == "validation") {
    if (m.validation.empty()) {
      throw InvalidInput("split has no validation part; refit with --validation-fraction > 0 or use --select test");
    }
    ValidatedSweep vs = validated_sweep(model, train, ds.select(m.validation), test, range, mode);
    reported_d = vs.chosen_d;
    reported_acc = vs.test_accuracy;
    curve = std::move(vs.test);
    out << "d chosen on validation: " << reported_d << " (validation accuracy "
        << vs.validation.best_accuracy << ")\n";
  } else {
    curve = dimension_sweep(model, train, test, range, mode);
    reported_d = curve.best_d;
    reported_acc = curve.best_accuracy;
    out << "d chosen on test (reproduction mode): " << reported_d << '\n';
  }
  write_text(o.out, curve.to_csv(reported_d, reported_acc));
  out << std::fixed << std::setprecision(2) << "test accuracy " << 100.0 * reported_acc
      << "% at d=" << reported_d << " (model d=" << model.d() << ", Q=" << model.q
      << ")\nwrote " << o.out << '\n';
  return kOk;
}

inline int cmd_synthcheck(const SynthcheckCmdOptions& o, std::ostream& out) {
  if (o.trials < 1) throw InvalidInput("--trials must be >= 1");
  require_output_dir(o.out);
  SynthcheckOptions opt;
  opt.trials = o.trials;
  opt.seed = o.seed;
  const auto results = run_synthcheck(opt);
  const std::string report = format_report(results);
  bool ok = true;
  for (const auto& r : results) ok = ok && r.passed;
  std::ostringstream text;
  text << "synthcheck: " << o.trials << " random datasets, seed " << o.seed << '\n'
       << report << (ok ? "all invariants passed\n" : "invariant violations found\n");
  out << text.str();
  if (!o.out.empty()) write_text(o.out, text.str());
  return ok ? kOk : kPropertyViolation;
}

inline int cmd_report(const ReportOptions& o, std::ostream& out) {
  require_file(o.features, "feature file");
  require_output_dir(o.out);
  if (!o.curves_dir.empty()) {
    std::error_code ec;
    if (!fs::is_directory(o.curves_dir, ec)) throw IoError("curves directory does not exist: " + o.curves_dir);
  }
  if (o.select != "validation" && o.select != "test") {
    throw InvalidInput("--select must be validation or test");
  }
  const DistanceMode mode = parse_distance(o.distance);
  const FitConfig cfg = o.reg.to_fit_config();
  const auto ds = load_feature_set(o.features);
  const bool use_validation = o.select == "validation";
  const SplitManifest m = make_split_manifest(ds.labels(), o.train_fraction,
                                              use_validation ? o.validation_fraction : 0.0, o.seed);
  if (use_validation && m.validation.empty()) {
    throw InvalidInput("--select validation needs --validation-fraction > 0");
  }
  std::vector<std::string> names = o.view_names;
  for (std::size_t t = names.size(); t < ds.view_count(); ++t) names.push_back("view" + std::to_string(t));

  const auto train = ds.select(m.train);
  const auto test = ds.select(m.test);
  std::optional<LabeledMultiviewDataset> validation;
  if (use_validation) validation.emplace(ds.select(m.validation));
  const ComparisonReport rep =
      compare_methods(train, test, names, cfg, mode, validation ? &*validation : nullptr);

  std::ostringstream text;
  text << "feature set " << o.features << ": N=" << ds.samples() << " classes=" << ds.class_count()
       << " Q=" << ds.total_dim() << "\nsplit: train " << m.train.size() << ", validation "
       << m.validation.size() << ", test " << m.test.size() << " (seed " << o.seed << ")\n"
       << rep.to_text();
  out << text.str();
  if (!o.out.empty()) write_text(o.out, text.str());
  if (!o.curves_dir.empty()) {
    for (const auto& r : rep.fused) {
      if (!r.curve) continue;
      write_text((fs::path(o.curves_dir) / (r.name + ".csv")).string(),
                 r.curve->to_csv(r.best_d, r.best_accuracy));
    }
  }
  return kOk;
}

// ---------------------------------------------------------------------------

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Labeled multiview canonical correlation fusion"};
  app.name("lmcca");
  app.set_config("--config", "", "Config file with one [section] per command");
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();

  ExtractOptions ex;
  auto* c_extract = app.add_subcommand("extract", "Compute descriptor views from IDX images into an MVFS file");
  c_extract->add_option("--images", ex.images, "IDX image file");
  c_extract->add_option("--labels", ex.labels, "IDX label file");
  c_extract->add_option("--out", ex.out, "Output MVFS file");
  c_extract->add_option("--views", ex.views, "Descriptors, one view each")->delimiter(',');
  c_extract->add_option("--per-class", ex.per_class, "Keep the first k images of each class (0 = all)");
  c_extract->add_option("--subset-seed", ex.subset_seed, "Draw the k images per class at random with this seed");
  c_extract->add_option("--threads", ex.threads, "Worker threads (0 = hardware)");
  c_extract->add_option("--gabor-scales", ex.features.gabor.scales);
  c_extract->add_option("--gabor-orientations", ex.features.gabor.orientations);
  c_extract->add_option("--gabor-wavelength", ex.features.gabor.base_wavelength, "Wavelength at scale 0 (px)");
  c_extract->add_option("--gabor-step", ex.features.gabor.wavelength_step, "Wavelength ratio between scales");
  c_extract->add_option("--gabor-bandwidth", ex.features.gabor.bandwidth, "Envelope sigma / wavelength");
  c_extract->add_option("--zernike-order", ex.features.zernike_order);
  c_extract->add_option("--hog-cells-y", ex.features.hog.cells_y);
  c_extract->add_option("--hog-cells-x", ex.features.hog.cells_x);
  c_extract->add_option("--hog-bins", ex.features.hog.bins);
  c_extract->add_option("--lbp-dims", ex.features.lbp.dims, "Leading uniform-LBP bins kept");

  FuseOptions fu;
  auto* c_fuse = app.add_subcommand("fuse", "Fit a fusion model on the training part of a split");
  c_fuse->add_option("--features", fu.features, "MVFS feature file");
  c_fuse->add_option("--out", fu.out, "Output model file (sidecars: .json, .split)");
  c_fuse->add_option("--split-out", fu.split_out, "Split manifest path (default <out>.split)");
  c_fuse->add_option("--variant", fu.variant, "lmcca, mcca, gcca or cca");
  c_fuse->add_option("--views", fu.views, "Subset of view indices (default all)")->delimiter(',');
  c_fuse->add_option("--train-fraction", fu.train_fraction, "Per-class share not held out for test");
  c_fuse->add_option("--validation-fraction", fu.validation_fraction, "Share of the training part kept for choosing d");
  c_fuse->add_option("--seed", fu.seed);
  fu.reg.attach(c_fuse);

  ProjectOptions pr;
  auto* c_project = app.add_subcommand("project", "Write fused representations as CSV");
  c_project->add_option("--model", pr.model);
  c_project->add_option("--features", pr.features);
  c_project->add_option("--split", pr.split, "Split manifest (for --subset and the view subset)");
  c_project->add_option("--subset", pr.subset, "all, train, validation or test");
  c_project->add_option("--d", pr.d, "Leading directions to use (0 = all)");
  c_project->add_option("--out", pr.out);

  EvalOptions ev;
  auto* c_eval = app.add_subcommand("eval", "Nearest-neighbour accuracy against projected dimension");
  c_eval->add_option("--model", ev.model);
  c_eval->add_option("--features", ev.features);
  c_eval->add_option("--split", ev.split, "Split manifest (default <model>.split)");
  c_eval->add_option("--select", ev.select, "Choose d on validation or test");
  c_eval->add_option("--distance", ev.distance, "rowsum or flattened");
  c_eval->add_option("--d-range", ev.d_range, "a:b or a,b,c (default 1..d)");
  c_eval->add_option("--out", ev.out, "Output CSV");

  SynthcheckCmdOptions sc;
  auto* c_synth = app.add_subcommand("synthcheck", "Run the structural invariants on random synthetic data");
  c_synth->add_option("--trials", sc.trials);
  c_synth->add_option("--seed", sc.seed);
  c_synth->add_option("--out", sc.out, "Also write the report here");

  ReportOptions rp;
  auto* c_report = app.add_subcommand("report", "Compare single views, serial and all fusion variants");
  c_report->add_option("--features", rp.features);
  c_report->add_option("--view-names", rp.view_names)->delimiter(',');
  c_report->add_option("--train-fraction", rp.train_fraction);
  c_report->add_option("--validation-fraction", rp.validation_fraction);
  c_report->add_option("--seed", rp.seed);
  c_report->add_option("--select", rp.select, "Choose d on validation or test");
  c_report->add_option("--distance", rp.distance, "rowsum or flattened");
  c_report->add_option("--out", rp.out, "Also write the report here");
  c_report->add_option("--curves-dir", rp.curves_dir, "Write one accuracy curve CSV per variant");
  rp.reg.attach(c_report);

  for (auto* sub : app.get_subcommands({})) sub->allow_config_extras(CLI::config_extras_mode::error);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*c_extract) return cmd_extract(ex, out);
    if (*c_fuse) return cmd_fuse(fu, out);
    if (*c_project) return cmd_project(pr, out);
    if (*c_eval) return cmd_eval(ev, out);
    if (*c_synth) return cmd_synthcheck(sc, out);
    if (*c_report) return cmd_report(rp, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kMissingFile;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << '\n';
    return kBadFormat;
  } catch (const VariantMismatch& e) {
    err << "error: " << e.what() << '\n';
    return kVariantMismatch;
  } catch (const DegenerateFit& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const NotPositiveDefinite& e) {
    err << "error: " << e.what() << '\n';
    return kDegenerate;
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace lmcca::cli
