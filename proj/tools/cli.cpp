#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>

#include "biqme/boiem.hpp"
#include "biqme/config.hpp"
#include "biqme/cpcqi.hpp"
#include "biqme/csv.hpp"
#include "biqme/error.hpp"
#include "biqme/eval_stats.hpp"
#include "biqme/features.hpp"
#include "biqme/image_io.hpp"
#include "biqme/parallel.hpp"
#include "biqme/svr.hpp"
#include "biqme/trainset.hpp"

namespace biqme::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

struct Globals {
  std::string config_path;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string model_path;
  std::string out_path;
};

bool is_image_path(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".png" || ext == ".bmp" || ext == ".jpg" || ext == ".jpeg";
}

// Files stay in the given order; directories expand to their images, sorted.
std::vector<std::string> expand_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::string> out;
  for (const auto& in : inputs) {
    const fs::path p(in);
    if (fs::is_directory(p)) {
      std::vector<std::string> found;
      for (const auto& entry : fs::directory_iterator(p))
        if (entry.is_regular_file() && is_image_path(entry.path())) found.push_back(entry.path().string());
      std::sort(found.begin(), found.end());
      out.insert(out.end(), found.begin(), found.end());
    } else if (fs::exists(p)) {
      out.push_back(in);
    } else {
      throw IoError("no such file or directory: " + in);
    }
  }
  if (out.empty()) throw InvalidArgument("no input images");
  return out;
}

std::string read_text(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw IoError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Output sink: a file when a path is given, otherwise the command stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary);
      if (!file_) throw IoError("cannot write " + path);
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }
  void finish(const std::string& path) {
    stream_->flush();
    if (!*stream_) throw IoError("failed writing " + (path.empty() ? std::string("output") : path));
  }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

json config_json(const ToolkitConfig& cfg) {
  json j = json::object();
  for (const auto& [k, v] : cfg.entries()) j[k] = v;
  return j;
}

svr::SvrModel require_model(const Globals& g) {
  if (g.model_path.empty()) throw InvalidArgument("--model is required");
  return svr::load(fs::path(g.model_path));
}

// --- commands ---------------------------------------------------------------

int cmd_features(const Globals& g, const ToolkitConfig& cfg, const std::vector<std::string>& inputs,
                 std::ostream& out) {
  const auto paths = expand_inputs(inputs);
  std::vector<FeatureVector> rows(paths.size());
  parallel_for(paths.size(), g.jobs,
               [&](std::size_t i) { rows[i] = extract_features(read_image(paths[i]), cfg.features); });
  Sink sink(g.out_path, out);
  write_feature_header(*sink);
  for (std::size_t i = 0; i < paths.size(); ++i) write_feature_row(*sink, paths[i], rows[i]);
  sink.finish(g.out_path);
  return kOk;
}

int cmd_score(const Globals& g, const ToolkitConfig& cfg, const std::vector<std::string>& inputs, bool as_csv,
              std::ostream& out) {
  const auto model = require_model(g);
  const auto paths = expand_inputs(inputs);
  std::vector<double> scores(paths.size());
  parallel_for(paths.size(), g.jobs, [&](std::size_t i) {
    scores[i] = boiem::biqme_score(read_image(paths[i]), model, cfg.features);
  });
  Sink sink(g.out_path, out);
  if (as_csv) {
    *sink << "image_path,score\n";
    for (std::size_t i = 0; i < paths.size(); ++i)
      *sink << csv::escape(paths[i]) << ',' << format_feature_value(scores[i]) << '\n';
  } else {
    for (std::size_t i = 0; i < paths.size(); ++i)
      *sink << json{{"image_path", paths[i]}, {"score", scores[i]}}.dump() << '\n';
  }
  sink.finish(g.out_path);
  return kOk;
}

int cmd_cpcqi(const ToolkitConfig& cfg, const std::string& ref, const std::string& dist, std::ostream& out) {
  const double s = cpcqi::cpcqi_score(read_image(ref), read_image(dist), cfg.cpcqi);
  out << format_feature_value(s) << '\n';
  return kOk;
}

int cmd_gen(const Globals& g, ToolkitConfig cfg, const std::vector<std::string>& inputs, int per_op,
            std::ostream& out) {
  if (g.out_path.empty()) throw InvalidArgument("--out directory is required");
  if (per_op > 0) cfg.gen.per_op = per_op;
  cfg.validate();
  const auto sources = expand_inputs(inputs);
  const fs::path dir(g.out_path);
  fs::create_directories(dir);

  std::ofstream csv_out(dir / "train.csv", std::ios::binary);
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::binary);
  if (!csv_out || !manifest) throw IoError("cannot write into " + dir.string());

  csv_out << "image,source";
  for (const auto& name : feature_column_names()) csv_out << ',' << name;
  csv_out << ",label\n";
  manifest << json{{"kind", "config"}, {"seed", g.seed}, {"config", config_json(cfg)}}.dump() << '\n';

  std::size_t total = 0;
  for (std::size_t s = 0; s < sources.size(); ++s) {
    const RasterImage src = read_image(sources[s]);
    require_feature_size(src);
    const std::string hash = gen::source_hash(src);
    const auto variants = gen::generate_variants(src, cfg.gen, gen::source_seed(g.seed, s));
    const auto rows = gen::label_and_emit(variants, src, sources[s], cfg.features, cfg.cpcqi, g.jobs);
    for (const auto& row : rows) {
      csv_out << csv::escape(row.name) << ',' << hash;
      for (double v : row.features.values) csv_out << ',' << format_feature_value(v);
      csv_out << ',' << format_feature_value(row.label) << '\n';
      manifest << json{{"kind", "row"},
                       {"image", row.name},
                       {"source", sources[s]},
                       {"hash", hash},
                       {"op", gen::op_name(row.op.kind)},
                       {"param", row.op.param},
                       {"draw", row.draw},
                       {"label", row.label}}
                      .dump()
               << '\n';
    }
    total += rows.size();
  }
  csv_out.flush();
  manifest.flush();
  if (!csv_out || !manifest) throw IoError("failed writing into " + dir.string());
  out << json{{"rows", total}, {"sources", sources.size()}, {"csv", (dir / "train.csv").string()},
              {"manifest", (dir / "manifest.jsonl").string()}}
             .dump()
      << '\n';
  return kOk;
}

struct LabeledTable {
  std::vector<std::string> names;
  svr::TrainSet data;
};

LabeledTable read_training_csv(const std::string& path) {
  const auto table = csv::parse(read_text(path));
  const std::size_t image_col = table.require_column("image");
  const auto source_col = table.column("source");
  std::vector<std::size_t> feat_cols;
  for (const auto& name : feature_column_names()) feat_cols.push_back(table.require_column(name));
  const std::size_t label_col = table.require_column("label");

  LabeledTable out;
  std::map<std::string, int> group_ids;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    std::vector<double> x;
    for (std::size_t c : feat_cols) x.push_back(csv::to_double(row[c]));
    int group = -1;
    if (source_col) group = group_ids.emplace(row[*source_col], static_cast<int>(group_ids.size())).first->second;
    out.names.push_back(row[image_col]);
    out.data.add(std::move(x), csv::to_double(row[label_col]), group);
  }
  return out;
}

int cmd_train(const Globals& g, const ToolkitConfig& cfg, const std::string& csv_path, bool grid,
              const std::string& report_path, std::ostream& out) {
  if (g.out_path.empty()) throw InvalidArgument("--out model path is required");
  const auto table = read_training_csv(csv_path);
  table.data.validate(svr::kMinTrainRows);

  json report;
  report["rows"] = table.data.size();
  report["seed"] = g.seed;
  svr::Hyper hyper = cfg.svr;
  if (grid) {
    svr::GridSpec spec = cfg.grid;
    spec.seed = g.seed;
    spec.jobs = g.jobs;
    const auto gr = svr::grid_search(table.data, spec, cfg.solver);
    hyper = gr.best;
    json cv = json::array();
    for (const auto& p : gr.table) cv.push_back({{"t", p.hyper.t}, {"k", p.hyper.k}, {"p", p.hyper.p}, {"cv_rmse", p.cv_rmse}});
    report["cv"] = std::move(cv);
    report["cv_best_rmse"] = gr.best_rmse;
  }
  const auto model = svr::train(table.data, hyper, cfg.solver);
  svr::save(model, fs::path(g.out_path));

  report["hyper"] = {{"t", hyper.t}, {"p", hyper.p}, {"k", hyper.k}};
  report["kkt_residual"] = model.kkt_residual;
  report["iterations"] = model.iterations;
  report["support_vectors"] = model.support_vectors.size();
  report["bias"] = model.bias;
  json self = json::array();
  for (std::size_t i = 0; i < table.data.size(); ++i)
    self.push_back({{"image", table.names[i]},
                    {"label", table.data.labels[i]},
                    {"prediction", model.predict(table.data.features[i])}});
  report["self_predictions"] = std::move(self);
  report["config"] = config_json(cfg);

  Sink sink(report_path, out);
  *sink << report.dump(2) << '\n';
  sink.finish(report_path);
  return kOk;
}

int cmd_enhance(const Globals& g, const ToolkitConfig& cfg, const std::vector<std::string>& inputs,
                std::ostream& out) {
  if (g.out_path.empty()) throw InvalidArgument("--out directory is required");
  const auto model = require_model(g);
  const auto paths = expand_inputs(inputs);
  const fs::path dir(g.out_path);
  fs::create_directories(dir);

  std::set<std::string> stems;
  for (const auto& p : paths)
    if (!stems.insert(fs::path(p).stem().string()).second)
      throw InvalidArgument("two inputs share the output name " + fs::path(p).stem().string());

  std::vector<json> sidecars(paths.size());
  parallel_for(paths.size(), g.jobs, [&](std::size_t i) {
    const RasterImage img = read_image(paths[i]);
    require_feature_size(img);
    const auto res = boiem::enhance(img, cfg.boiem, model, cfg.features);
    const fs::path stem = fs::path(paths[i]).stem();
    const fs::path image_out = dir / (stem.string() + ".png");
    write_image(image_out, res.image);
    json j{{"input", paths[i]},
           {"output", image_out.string()},
           {"lambda_b", res.lambda_b},
           {"lambda_e", res.lambda_e},
           {"lambda_s", res.lambda_s},
           {"scores", res.scores},
           {"agcwd_degenerate", res.agcwd_degenerate},
           {"config", config_json(cfg)}};
    std::ofstream side(dir / (stem.string() + ".json"), std::ios::binary);
    side << j.dump(2) << '\n';
    if (!side) throw IoError("cannot write sidecar for " + paths[i]);
    j.erase("config");
    sidecars[i] = std::move(j);
  });
  for (const auto& j : sidecars) out << j.dump() << '\n';
  return kOk;
}

std::map<std::string, double> read_keyed_scores(const std::string& path, std::string_view value_column) {
  const std::string text = read_text(path);
  const auto table = csv::parse(text);
  const std::size_t key_col = table.require_column("image_path");
  const std::size_t val_col = table.require_column(value_column);
  std::map<std::string, double> out;
  for (const auto& row : table.rows) {
    if (!out.emplace(row[key_col], csv::to_double(row[val_col])).second)
      throw ParseError("duplicate image_path '" + row[key_col] + "' in " + path, 0);
  }
  return out;
}

void check_overlap(const std::string& manifest_path, const std::string& mos_path,
                   const std::map<std::string, double>& mos) {
  std::set<std::string> train_hashes;
  std::set<std::string> train_paths;
  std::istringstream lines(read_text(manifest_path));
  std::string line;
  std::size_t offset = 0;
  while (std::getline(lines, line)) {
    if (!line.empty()) {
      json j;
      try {
        j = json::parse(line);
      } catch (const json::parse_error& e) {
        throw ParseError("bad manifest line: " + std::string(e.what()), offset);
      }
      if (j.value("kind", "") == "row") {
        train_hashes.insert(j.at("hash").get<std::string>());
        train_paths.insert(fs::weakly_canonical(j.at("source").get<std::string>()).string());
      }
    }
    offset += line.size() + 1;
  }
  const fs::path base = fs::path(mos_path).parent_path();
  for (const auto& [image_path, value] : mos) {
    (void)value;
    fs::path p(image_path);
    if (p.is_relative() && !fs::exists(p)) p = base / p;
    if (train_paths.count(fs::weakly_canonical(p).string()))
      throw DataOverlap("evaluation image " + image_path + " is a training source");
    if (fs::is_regular_file(p) && is_image_path(p)) {
      if (train_hashes.count(gen::source_hash(read_image(p))))
        throw DataOverlap("evaluation image " + image_path + " shares content with a training source");
    }
  }
}

int cmd_eval(const Globals& g, const ToolkitConfig& cfg, const std::string& scores_path, const std::string& mos_path,
             const std::string& manifest_path, bool as_json, std::ostream& out) {
  const auto scores = read_keyed_scores(scores_path, "score");
  const auto mos = read_keyed_scores(mos_path, "mos");
  if (!manifest_path.empty()) check_overlap(manifest_path, mos_path, mos);

  eval::ScorePairs pairs;
  for (const auto& [path, m] : mos) {
    const auto it = scores.find(path);
    if (it == scores.end()) throw InvalidArgument("no score for MOS entry " + path);
    pairs.objective.push_back(it->second);
    pairs.mos.push_back(m);
  }
  eval::FitOptions fo;
  fo.restarts = cfg.eval_restarts;
  fo.seed = g.seed;
  const auto r = eval::evaluate(pairs, fo);

  json j{{"n", r.n},
         {"low_confidence", r.low_confidence},
         {"plc", r.plc.value},
         {"srocc", r.srocc.value},
         {"krcc", r.krcc.value},
         {"plc_degenerate", r.plc.degenerate},
         {"srocc_degenerate", r.srocc.degenerate},
         {"krcc_degenerate", r.krcc.degenerate},
         {"logistic", {{"tau", r.fit.tau}, {"rmse", r.fit.rmse}, {"linear_fallback", r.fit.linear_fallback}}}};
  Sink sink(g.out_path, out);
  if (as_json) {
    *sink << j.dump(2) << '\n';
  } else {
    auto row = [&](const char* name, const eval::Statistic& s) {
      *sink << std::left << std::setw(8) << name << std::right << std::setw(12) << std::fixed
            << std::setprecision(6) << s.value << (s.degenerate ? "  (degenerate)" : "") << '\n';
    };
    *sink << std::left << std::setw(8) << "n" << std::right << std::setw(12) << r.n
          << (r.low_confidence ? "  (low confidence)" : "") << '\n';
    row("PLC", r.plc);
    row("SRC", r.srocc);
    row("KRC", r.krcc);
    *sink << "json " << j.dump() << '\n';
  }
  sink.finish(g.out_path);
  return kOk;
}

}  // namespace

int exit_code_for(const char* kind) {
  static const std::map<std::string, int> codes{
      {"usage", kUsage},
      {"io_error", kIo},
      {"dimension_mismatch", kDimension},
      {"config_error", kConfig},
      {"parse_error", kParse},
      {"unsupported_version", kVersion},
      {"convergence_error", kConvergence},
      {"invalid_argument", kInvalidArgument},
      {"data_overlap", kDataOverlap},
  };
  const auto it = codes.find(kind);
  return it == codes.end() ? kInternal : it->second;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Blind quality evaluation and quality-optimized enhancement of images", "biqme"};
  app.require_subcommand(1);
  app.fallthrough();

  Globals g;
  app.add_option("--config", g.config_path, "key = value config file");
  app.add_option("--seed", g.seed, "seed for every random choice");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--model", g.model_path, "trained model file");
  app.add_option("--out", g.out_path, "output file or directory");

  std::vector<std::string> inputs;
  bool as_csv = false, grid = false, as_json = false, show_config = false;
  int per_op = 0;
  std::string ref, dist, csv_path, report_path, scores_path, mos_path, manifest_path;

  auto* features = app.add_subcommand("features", "17-feature CSV rows for images");
  features->add_option("inputs", inputs, "images or directories")->required();
  auto* score = app.add_subcommand("score", "blind quality score per image (JSON lines)");
  score->add_option("inputs", inputs, "images or directories")->required();
  score->add_flag("--csv", as_csv, "emit image_path,score CSV instead");
  auto* cp = app.add_subcommand("cpcqi", "full-reference C-PCQI score");
  cp->add_option("reference", ref)->required();
  cp->add_option("distorted", dist)->required();
  auto* gen_cmd = app.add_subcommand("gen", "labeled training CSV and manifest from source images");
  gen_cmd->add_option("sources", inputs, "source images or directories")->required();
  gen_cmd->add_option("--per-op", per_op, "draws per operator (overrides gen.per_op)");
  auto* train_cmd = app.add_subcommand("train", "train the regression model from a labeled CSV");
  train_cmd->add_option("csv", csv_path)->required();
  train_cmd->add_flag("--grid", grid, "cross-validated grid search over t, k, p");
  train_cmd->add_option("--report", report_path, "write the training report here instead of stdout");
  auto* enhance_cmd = app.add_subcommand("enhance", "quality-optimized enhancement");
  enhance_cmd->add_option("inputs", inputs, "images or directories")->required();
  auto* eval_cmd = app.add_subcommand("eval", "PLC/SRC/KRC of scores against MOS");
  eval_cmd->add_option("scores", scores_path, "CSV with image_path,score")->required();
  eval_cmd->add_option("mos", mos_path, "CSV with image_path,mos")->required();
  eval_cmd->add_option("--manifest", manifest_path, "training manifest; overlapping images are refused");
  eval_cmd->add_flag("--json", as_json, "JSON report instead of the text table");
  auto* config_cmd = app.add_subcommand("config", "print the effective configuration");
  config_cmd->add_flag("--keys", show_config, "list keys only");

  std::vector<std::string> argv_store;
  argv_store.push_back("biqme");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& a : argv_store) argv.push_back(a.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    err << "error: usage: " << msg << '\n';
    return kUsage;
  }

  try {
    const ToolkitConfig cfg = g.config_path.empty() ? ToolkitConfig{} : ToolkitConfig::load(g.config_path);
    if (*features) return cmd_features(g, cfg, inputs, out);
    if (*score) return cmd_score(g, cfg, inputs, as_csv, out);
    if (*cp) return cmd_cpcqi(cfg, ref, dist, out);
    if (*gen_cmd) return cmd_gen(g, cfg, inputs, per_op, out);
    if (*train_cmd) return cmd_train(g, cfg, csv_path, grid, report_path, out);
    if (*enhance_cmd) return cmd_enhance(g, cfg, inputs, out);
    if (*eval_cmd) return cmd_eval(g, cfg, scores_path, mos_path, manifest_path, as_json, out);
    if (*config_cmd) {
      if (show_config)
        for (const auto& k : config_keys()) out << k << '\n';
      else
        out << cfg.echo();
      return kOk;
    }
  } catch (const Error& e) {
    err << "error: " << e.kind() << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const fs::filesystem_error& e) {
    err << "error: io_error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    err << "error: internal: " << e.what() << '\n';
    return kInternal;
  }
  return kUsage;
}

}  // namespace biqme::cli
