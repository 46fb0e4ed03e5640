#include "anomspec/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <optional>

#include "anomspec/analysis.hpp"
#include "anomspec/cutoff.hpp"
#include "anomspec/datagen.hpp"
#include "anomspec/errors.hpp"
#include "anomspec/io.hpp"
#include "anomspec/knn.hpp"
#include "anomspec/pipeline.hpp"
#include "anomspec/spec_model.hpp"

namespace anomspec::cli {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Manifest {
 public:
  explicit Manifest(std::string subcommand) { doc_["subcommand"] = std::move(subcommand); }

  void record_options(const CLI::App& sub) {
    Json params = Json::object();
    for (const CLI::Option* opt : sub.get_options()) {
      if (opt == sub.get_help_ptr()) continue;
      const std::string name = opt->get_name(false, true).substr(2);
      if (opt->get_expected_max() == 0) {
        params[name] = opt->count() > 0;
      } else if (opt->count() > 0) {
        const auto& results = opt->results();
        if (results.size() == 1) params[name] = results.front();
        else params[name] = results;
      } else if (!opt->get_default_str().empty()) {
        params[name] = opt->get_default_str();
      }
    }
    doc_["params"] = std::move(params);
  }
  void seed(std::uint64_t s) { doc_["seed"] = s; }
  void input(const std::string& role, const std::string& path) { doc_["inputs"][role] = path; }
  void output(const std::string& role, const std::string& path) { doc_["outputs"][role] = path; }

  template <typename F>
  auto time(const std::string& stage, F&& f) {
    const auto start = std::chrono::steady_clock::now();
    struct Record {
      Manifest& m;
      const std::string& stage;
      std::chrono::steady_clock::time_point start;
      ~Record() {
        const std::chrono::duration<double> s = std::chrono::steady_clock::now() - start;
        m.doc_["timings_sec"][stage] = s.count();
      }
    } record{*this, stage, start};
    return f();
  }

  std::string dump() const { return doc_.dump(2) + "\n"; }

 private:
  Json doc_;
};

LabeledDataset load_points(const std::string& path) {
  if (std::filesystem::path(path).extension() == ".ppm") return ingest_ppm(path);
  return parse_csv(read_file(path));
}

Forest load_forest(const std::string& path) { return parse_forest(read_file(path)); }

std::string hex(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return s;
}

std::string bool_str(bool b) { return b ? "1" : "0"; }

struct CutoffResolution {
  std::string source;
  Depth cutoff = 0;
  std::size_t anomaly_count = 0;
  std::size_t single_run_count = 0;
  std::size_t runs = 1;
  bool low_confidence = false;
};

// The data-point route repeats the estimate over `runs` forests and places the
// cutoff at the combined count within the model's own depth profile.
CutoffResolution resolve_from_points(const Forest& forest, const Dataset& data, std::size_t runs) {
  const DepthProfile profile = profile_from_points(forest, data);
  const CutoffEstimate single = greedy_gap_cutoff(profile);
  CutoffResolution r;
  r.source = "data";
  r.runs = runs;
  r.single_run_count = single.anomaly_count;
  r.low_confidence = single.low_confidence;
  if (runs <= 1) {
    r.anomaly_count = single.anomaly_count;
    r.cutoff = single.cutoff_depth;
    return r;
  }
  r.anomaly_count = estimate_anomaly_count_repeated(data, forest.config(), runs);
  r.cutoff = cutoff_for_count(profile, r.anomaly_count);
  return r;
}

CutoffResolution resolve_from_ranges(const Forest& forest) {
  const CutoffEstimate est = greedy_gap_cutoff(profile_from_ranges(forest));
  CutoffResolution r;
  r.source = "ranges";
  r.cutoff = est.cutoff_depth;
  r.anomaly_count = est.anomaly_count;
  r.single_run_count = est.anomaly_count;
  r.low_confidence = est.low_confidence;
  return r;
}

std::size_t count_flagged(std::span<const std::uint8_t> labels) {
  return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), std::uint8_t{1}));
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Isolation forest anomaly detection compiled to explicit anomalous regions", "anomspec"};
  app.require_subcommand(1, 1);
  std::string manifest_path;
  app.add_option("--manifest", manifest_path, "Write the run manifest (JSON) here instead of stderr");

  // gen
  int exp_id = 1;
  std::size_t n = 0;
  double rate = 0.01;
  std::uint64_t seed = 0;
  std::string out_path;
  auto* gen = app.add_subcommand("gen", "Generate a labelled synthetic experiment dataset");
  gen->add_option("--exp", exp_id, "Experiment id")->required()->check(CLI::Range(1, 9));
  gen->add_option("--n", n, "Point count")->required()->check(CLI::PositiveNumber);
  gen->add_option("--rate", rate, "Per-point anomaly probability")->capture_default_str();
  gen->add_option("--seed", seed, "Random seed")->capture_default_str();
  gen->add_option("--out", out_path, "Output CSV")->required();

  // train
  std::string in_path, model_path;
  std::size_t trees = 100, sample = 256;
  bool integer_keys = false;
  auto* train = app.add_subcommand("train", "Build an isolation forest");
  train->add_option("--in", in_path, "Input CSV or PPM")->required();
  train->add_option("--trees", trees, "Tree count")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--sample", sample, "Sample size per tree")->capture_default_str()->check(CLI::PositiveNumber);
  train->add_option("--seed", seed, "Random seed")->capture_default_str();
  train->add_flag("--integer-keys", integer_keys, "Data is integral; snap split keys to half-integers");
  train->add_option("--model", model_path, "Output model")->required();

  // estimate
  std::size_t runs = 5;
  std::string source = "data";
  auto* estimate = app.add_subcommand("estimate", "Estimate the anomaly count and cutoff depth");
  estimate->add_option("--model", model_path, "Model file")->required();
  estimate->add_option("--in", in_path, "Input CSV or PPM (required for --source data)");
  estimate->add_option("--runs", runs, "Independent runs combined for the data estimate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  estimate->add_option("--source", source, "Depth profile to estimate from")
      ->capture_default_str()
      ->check(CLI::IsMember({"data", "ranges"}));

  // specify
  std::optional<Depth> cutoff;
  std::vector<double> min_cell;
  bool prune = false, force = false;
  std::optional<Depth> prune_bound;
  auto* specify = app.add_subcommand("specify", "Compile the model into anomalous regions");
  specify->add_option("--model", model_path, "Model file")->required();
  specify->add_option("--cutoff", cutoff, "Cutoff depth; estimated when omitted");
  specify->add_option("--in", in_path, "Data used to estimate the cutoff when --cutoff is omitted");
  specify->add_option("--runs", runs, "Independent runs combined for the cutoff estimate")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  specify->add_option("--min-cell", min_cell, "Thin-cell width, one value or one per dimension")
      ->delimiter(',');
  specify->add_flag("--prune", prune, "Collapse subtrees that cannot reach the cutoff");
  specify->add_option("--prune-bound", prune_bound, "Pruning depth bound (raised to the cutoff)");
  specify->add_flag("--force", force, "Allow more than three dimensions");
  specify->add_option("--out", out_path, "Output spec")->required();

  // detect
  std::string spec_path;
  auto* detect = app.add_subcommand("detect", "Label points with a compiled spec");
  detect->add_option("--spec", spec_path, "Spec file")->required();
  detect->add_option("--in", in_path, "Input CSV or PPM")->required();
  detect->add_option("--out", out_path, "Output labels")->required();

  // score
  std::string labels_path;
  auto* score = app.add_subcommand("score", "Cumulative depth of every point, straight from the forest");
  score->add_option("--model", model_path, "Model file")->required();
  score->add_option("--in", in_path, "Input CSV or PPM")->required();
  score->add_option("--out", out_path, "Output depths")->required();
  score->add_option("--cutoff", cutoff, "Also label points at or below this depth");
  score->add_option("--labels", labels_path, "Output labels for --cutoff");

  // eval
  std::string pred_path, truth_path;
  auto* eval = app.add_subcommand("eval", "Compare predicted labels with ground truth");
  eval->add_option("--pred", pred_path, "Predicted labels")->required();
  eval->add_option("--truth", truth_path, "Truth labels or labelled CSV")->required();

  // contour
  std::size_t width = 450, height = 250;
  auto* contour = app.add_subcommand("contour", "Depth percentile map of a 2-D model");
  contour->set_help_flag("--help", "Print this help message and exit");  // frees -h for --h
  contour->add_option("--model", model_path, "Model file")->required();
  contour->add_option("--in", in_path, "Observed data")->required();
  contour->add_option("--w", width, "Width in cells")->capture_default_str()->check(CLI::PositiveNumber);
  contour->add_option("--h", height, "Height in cells")->capture_default_str()->check(CLI::PositiveNumber);
  contour->add_option("--out", out_path, "Output .csv or .pgm")->required();

  // knn
  std::size_t max_k = 200;
  auto* knn = app.add_subcommand("knn", "Nearest-neighbour outlier scores");
  knn->add_option("--in", in_path, "Input CSV (2-D)")->required();
  knn->add_option("--max-k", max_k, "Largest neighbour rank")->capture_default_str()->check(CLI::PositiveNumber);
  knn->add_option("--out", out_path, "Output CSV of score,best_k")->required();
  knn->add_option("--model", model_path, "Compare against this forest's ranking");

  // selfcheck
  std::vector<std::uint64_t> seeds;
  auto* selfcheck = app.add_subcommand("selfcheck", "Score one detection run against another");
  selfcheck->add_option("--in", in_path, "Input CSV or PPM")->required();
  selfcheck->add_option("--seeds", seeds, "Two seeds a,b")->required()->expected(2)->delimiter(',');
  selfcheck->add_option("--trees", trees, "Tree count")->capture_default_str()->check(CLI::PositiveNumber);
  selfcheck->add_option("--sample", sample, "Sample size per tree")->capture_default_str()->check(CLI::PositiveNumber);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  Manifest manifest(sub->get_name());
  manifest.record_options(*sub);

  auto finish = [&]() {
    if (manifest_path.empty()) err << manifest.dump();
    else write_file(manifest_path, manifest.dump());
  };

  try {
    if (sub == gen) {
      manifest.seed(seed);
      const LabeledDataset data =
          manifest.time("generate", [&] { return generate_experiment(exp_id, n, rate, seed); });
      manifest.time("write", [&] { write_file(out_path, write_csv(data.points, data.labels)); });
      manifest.output("data", out_path);
      out << "points=" << data.points.size() << "\n";
      out << "anomalies=" << count_flagged(data.labels) << "\n";
    } else if (sub == train) {
      manifest.seed(seed);
      manifest.input("data", in_path);
      const LabeledDataset data = manifest.time("read", [&] { return load_points(in_path); });
      ForestConfig config{trees, sample, seed, integer_keys};
      const Forest forest = manifest.time("build", [&] { return build_forest(data.points, config); });
      manifest.time("write", [&] { write_file(model_path, serialize_forest(forest)); });
      manifest.output("model", model_path);
      out << "trees=" << forest.tree_count() << "\n";
      out << "dims=" << forest.dims() << "\n";
    } else if (sub == estimate) {
      manifest.input("model", model_path);
      const Forest forest = manifest.time("read", [&] { return load_forest(model_path); });
      manifest.seed(forest.config().seed);
      std::optional<LabeledDataset> data;
      if (!in_path.empty()) {
        manifest.input("data", in_path);
        data = manifest.time("read_data", [&] { return load_points(in_path); });
      }
      CutoffResolution r;
      if (source == "ranges") {
        if (forest.dims() != 1) throw UsageError("--source ranges needs a 1-dimensional model");
        r = manifest.time("estimate", [&] { return resolve_from_ranges(forest); });
      } else {
        if (!data) throw UsageError("--source data needs --in");
        r = manifest.time("estimate", [&] { return resolve_from_points(forest, data->points, runs); });
      }
      out << "source=" << r.source << "\n";
      out << "runs=" << r.runs << "\n";
      if (source == "ranges") {
        out << "anomalous_ranges=" << r.anomaly_count << "\n";
        if (data) {
          const auto labels = threshold_depths(forest.cumulative_depths(data->points), r.cutoff);
          out << "anomaly_count=" << count_flagged(labels) << "\n";
        }
      } else {
        out << "anomaly_count=" << r.anomaly_count << "\n";
        out << "single_run_count=" << r.single_run_count << "\n";
      }
      out << "cutoff=" << r.cutoff << "\n";
      out << "low_confidence=" << bool_str(r.low_confidence) << "\n";
    } else if (sub == specify) {
      manifest.input("model", model_path);
      const Forest forest = manifest.time("read", [&] { return load_forest(model_path); });
      manifest.seed(forest.config().seed);
      CompileOptions options;
      std::string cutoff_source = "given";
      if (!in_path.empty()) {
        manifest.input("data", in_path);
        const LabeledDataset data = manifest.time("read_data", [&] { return load_points(in_path); });
        options.source_fingerprint = hex(fingerprint(data.points));
        if (!cutoff) {
          const CutoffResolution r =
              manifest.time("estimate", [&] { return resolve_from_points(forest, data.points, runs); });
          cutoff = r.cutoff;
          cutoff_source = "data";
        }
      }
      if (!cutoff) {
        if (forest.dims() != 1)
          throw UsageError("a model with more than one dimension needs --cutoff or --in");
        cutoff = manifest.time("estimate", [&] { return resolve_from_ranges(forest); }).cutoff;
        cutoff_source = "ranges";
      }
      if (!min_cell.empty() && min_cell.size() != 1 && min_cell.size() != forest.dims())
        throw UsageError("--min-cell takes one value or one per dimension");
      options.min_cell = min_cell;
      options.prune = prune;
      if (prune_bound) options.prune_bound = *prune_bound;
      options.force = force;
      options.params.emplace_back("cutoff_source", cutoff_source);
      if (!min_cell.empty()) {
        std::string joined;
        for (double v : min_cell) joined += (joined.empty() ? "" : ",") + format_double(v);
        options.params.emplace_back("min_cell", joined);
      }
      if (prune) options.params.emplace_back("prune", prune_bound ? std::to_string(*prune_bound) : "cutoff");
      const AnomalySpec spec = manifest.time("specify", [&] { return compile_spec(forest, *cutoff, options); });
      manifest.time("write", [&] { write_file(out_path, serialize_spec(spec)); });
      manifest.output("spec", out_path);
      out << "cutoff=" << spec.cutoff_depth() << "\n";
      out << "regions=" << spec.regions().size() << "\n";
    } else if (sub == detect) {
      manifest.input("spec", spec_path);
      manifest.input("data", in_path);
      const AnomalySpec spec = manifest.time("read", [&] { return parse_spec(read_file(spec_path)); });
      manifest.seed(spec.provenance().seed);
      const LabeledDataset data = manifest.time("read_data", [&] { return load_points(in_path); });
      const auto start = std::chrono::steady_clock::now();
      const auto labels = manifest.time("detect", [&] { return spec.classify_all(data.points); });
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      manifest.time("write", [&] { write_file(out_path, write_labels(labels)); });
      manifest.output("labels", out_path);
      out << "points=" << data.points.size() << "\n";
      out << "anomalies=" << count_flagged(labels) << "\n";
      const double secs = std::max(elapsed.count(), 1e-9);
      out << "points_per_sec=" << static_cast<std::uint64_t>(static_cast<double>(data.points.size()) / secs)
          << "\n";
    } else if (sub == score) {
      if (!labels_path.empty() && !cutoff) throw UsageError("--labels needs --cutoff");
      manifest.input("model", model_path);
      manifest.input("data", in_path);
      const Forest forest = manifest.time("read", [&] { return load_forest(model_path); });
      manifest.seed(forest.config().seed);
      const LabeledDataset data = manifest.time("read_data", [&] { return load_points(in_path); });
      const auto depths = manifest.time("score", [&] { return forest.cumulative_depths(data.points); });
      manifest.time("write", [&] { write_file(out_path, write_depths(depths)); });
      manifest.output("depths", out_path);
      out << "points=" << depths.size() << "\n";
      if (cutoff) {
        const auto labels = threshold_depths(depths, *cutoff);
        out << "anomalies=" << count_flagged(labels) << "\n";
        if (!labels_path.empty()) {
          write_file(labels_path, write_labels(labels));
          manifest.output("labels", labels_path);
        }
      }
    } else if (sub == eval) {
      manifest.input("pred", pred_path);
      manifest.input("truth", truth_path);
      const auto pred = parse_labels(read_file(pred_path));
      const auto truth = parse_labels(read_file(truth_path));
      if (pred.size() != truth.size()) throw FormatError("label files differ in length");
      const EvalReport r = manifest.time("eval", [&] { return eval_labels(pred, truth); });
      out << "precision=" << format_double(r.precision) << "\n";
      out << "recall=" << format_double(r.recall) << "\n";
      out << "f_measure=" << format_double(r.f_measure) << "\n";
      out << "tp=" << r.tp << "\nfp=" << r.fp << "\nfn=" << r.fn << "\ntn=" << r.tn << "\n";
    } else if (sub == contour) {
      manifest.input("model", model_path);
      manifest.input("data", in_path);
      const Forest forest = manifest.time("read", [&] { return load_forest(model_path); });
      manifest.seed(forest.config().seed);
      const LabeledDataset data = manifest.time("read_data", [&] { return load_points(in_path); });
      const auto grid =
          manifest.time("contour", [&] { return contour_grid(forest, data.points, width, height); });
      std::string text;
      if (std::filesystem::path(out_path).extension() == ".pgm") {
        text = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
        for (const auto& row : grid)
          for (double v : row) text += static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0)));
      } else {
        for (const auto& row : grid) {
          for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) text += ',';
            text += format_double(row[c]);
          }
          text += '\n';
        }
      }
      manifest.time("write", [&] { write_file(out_path, text); });
      manifest.output("contour", out_path);
      out << "width=" << width << "\nheight=" << height << "\n";
    } else if (sub == knn) {
      manifest.input("data", in_path);
      const LabeledDataset data = manifest.time("read", [&] { return load_points(in_path); });
      const KnnRanking ranking = manifest.time("knn", [&] { return knn_rank(data.points, max_k); });
      std::string text = "score,best_k\n";
      for (std::size_t i = 0; i < ranking.score.size(); ++i)
        text += format_double(ranking.score[i]) + "," + std::to_string(ranking.best_k[i]) + "\n";
      manifest.time("write", [&] { write_file(out_path, text); });
      manifest.output("scores", out_path);
      out << "points=" << ranking.score.size() << "\n";
      if (!model_path.empty()) {
        manifest.input("model", model_path);
        const Forest forest = load_forest(model_path);
        manifest.seed(forest.config().seed);
        const auto depths = forest.cumulative_depths(data.points);
        const CutoffEstimate est = greedy_gap_cutoff(DepthProfile(depths, ProfileSource::data_points));
        const auto labels = threshold_depths(depths, est.cutoff_depth);
        const RankingComparison cmp =
            manifest.time("compare", [&] { return compare_rankings(depths, labels, ranking); });
        out << "pearson_r=" << format_double(cmp.pearson_r) << "\n";
        out << "best_f_measure=" << format_double(cmp.best_f_measure) << "\n";
        out << "best_m=" << cmp.best_m << "\n";
        out << "matched=" << cmp.matched << "\n";
      }
    } else if (sub == selfcheck) {
      manifest.input("data", in_path);
      manifest.seed(seeds[0]);
      const LabeledDataset data = manifest.time("read", [&] { return load_points(in_path); });
      ForestConfig config;
      config.tree_count = trees;
      config.sample_size = sample;
      const SelfCheckReport r =
          manifest.time("selfcheck", [&] { return self_validate(data.points, config, seeds[0], seeds[1]); });
      out << "precision=" << format_double(r.report.precision) << "\n";
      out << "recall=" << format_double(r.report.recall) << "\n";
      out << "f_measure=" << format_double(r.report.f_measure) << "\n";
      out << "spearman_rho=" << format_double(r.report.spearman_rho) << "\n";
      out << "control_anomalies=" << r.control_anomalies << "\n";
      out << "trial_anomalies=" << r.trial_anomalies << "\n";
      out << "low_confidence=" << bool_str(r.low_confidence) << "\n";
    }
    finish();
    return kSuccess;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const IntractableDimensionality& e) {
    err << "error: " << e.what() << "\n";
    return kIntractable;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

}  // namespace anomspec::cli
