// dftrack: synth, train, track, eval and render from the command line.
// Exit codes: 0 success, 1 runtime error, 2 usage error.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "config_json.hpp"
#include "dftrack/dataset.hpp"
#include "dftrack/error.hpp"
#include "dftrack/hash.hpp"
#include "dftrack/metrics.hpp"
#include "dftrack/render.hpp"
#include "dftrack/synth.hpp"
#include "dftrack/tracker.hpp"
#include "dftrack/training.hpp"

namespace fs = std::filesystem;
using dft::cli::Json;

namespace {

std::pair<int, int> parse_range(const std::string& s, const char* what) {
  const auto colon = s.find(':');
  if (colon == std::string::npos) {
    throw dft::ConfigError(std::string(what) + " must look like a:b, got '" + s + "'");
  }
  try {
    std::size_t p1 = 0;
    std::size_t p2 = 0;
    const int a = std::stoi(s.substr(0, colon), &p1);
    const int b = std::stoi(s.substr(colon + 1), &p2);
    if (p1 != colon || p2 != s.size() - colon - 1) throw std::invalid_argument(s);
    return {a, b};
  } catch (const std::logic_error&) {
    throw dft::ConfigError(std::string(what) + " must look like a:b, got '" + s + "'");
  }
}

std::string dataset_hash(const fs::path& root) {
  const std::vector<std::string> skip = {"manifest.json"};
  return dft::sha256_tree(root, skip);
}

std::string model_hash(const fs::path& dir) {
  Json j;
  for (const char* f : {"encoder.bin", "fg.bin", "bg.bin", "patch_spec.json"}) {
    j[f] = dft::sha256_file(dir / f);
  }
  return dft::cli::config_hash(j);
}

void prepare_out_dir(const fs::path& dir) {
  if (fs::exists(dir) && !fs::is_directory(dir)) {
    throw dft::IoError(dir.string() + " exists and is not a directory");
  }
  fs::create_directories(dir);
}

// ---- synth ----------------------------------------------------------------

struct SynthArgs {
  std::string preset;
  std::string config;
  std::string out;
  bool force = false;
  std::optional<std::uint64_t> seed;
};

int run_synth(const SynthArgs& a) {
  dft::SceneConfig cfg;
  if (!a.preset.empty()) cfg = dft::benchmark_preset(a.preset);
  if (!a.config.empty()) dft::cli::apply_json(dft::cli::read_json_file(a.config), cfg);
  if (a.seed) cfg.seed = *a.seed;
  const dft::Scene scene = dft::make_scene(cfg);
  dft::write_scene(scene, a.out, a.force);
  const Json cj = dft::cli::to_json(cfg);
  Json m;
  m["config"] = cj;
  m["config_hash"] = dft::cli::config_hash(cj);
  m["seed"] = cfg.seed;
  m["dataset_hash"] = dataset_hash(a.out);
  dft::cli::write_json_file(fs::path(a.out) / "manifest.json", m);
  std::cerr << "synth: wrote " << cfg.num_frames << " frames, " << cfg.num_targets
            << " tracks to " << a.out << "\n";
  return 0;
}

// ---- train ----------------------------------------------------------------

struct TrainArgs {
  std::string data;
  std::string out;
  std::string config;
  std::string encoder;
  std::optional<int> dim;
  std::optional<std::uint64_t> seed;
  std::string fg_cov;
  std::string bg_cov;
  bool axis_aligned = false;
  std::optional<int> epochs;
  std::optional<double> lambda;
  std::optional<double> lr;
  std::optional<int> batch;
  std::vector<int> hidden;
  std::optional<int> bg_per_frame;
  std::optional<double> bg_overlap_max;
};

int run_train(const TrainArgs& a) {
  dft::TrainConfig cfg;
  if (!a.config.empty()) dft::cli::apply_json(dft::cli::read_json_file(a.config), cfg);
  if (!a.encoder.empty()) cfg.encoder = dft::parse_encoder_kind(a.encoder);
  if (a.dim) cfg.dim = *a.dim;
  if (a.seed) cfg.seed = *a.seed;
  if (!a.fg_cov.empty()) cfg.fg_covariance = dft::parse_covariance_kind(a.fg_cov);
  if (!a.bg_cov.empty()) cfg.bg_covariance = dft::parse_covariance_kind(a.bg_cov);
  if (a.epochs) cfg.rae.epochs = *a.epochs;
  if (a.lambda) cfg.rae.lambda = *a.lambda;
  if (a.lr) cfg.rae.learning_rate = *a.lr;
  if (a.batch) cfg.rae.batch_size = *a.batch;
  if (!a.hidden.empty()) cfg.rae.hidden = a.hidden;
  if (a.bg_per_frame) cfg.bg_per_frame = *a.bg_per_frame;
  if (a.bg_overlap_max) cfg.bg_overlap_max = *a.bg_overlap_max;

  const dft::Dataset data(a.data);
  cfg.spec.box_width = data.info().box_width;
  cfg.spec.box_height = data.info().box_height;
  if (a.axis_aligned) cfg.spec = cfg.spec.axis_aligned();

  const dft::TrainResult r = dft::train_pipeline(data, cfg);
  prepare_out_dir(a.out);
  r.models.save(a.out);

  const Json cj = dft::cli::to_json(cfg);
  Json m;
  m["config"] = cj;
  m["config_hash"] = dft::cli::config_hash(cj);
  m["seed"] = cfg.seed;
  m["num_foreground"] = r.num_foreground;
  m["num_background"] = r.num_background;
  m["dataset_hash"] = dataset_hash(a.data);
  Json files;
  for (const char* f : {"encoder.bin", "fg.bin", "bg.bin", "patch_spec.json"}) {
    files[f] = dft::sha256_file(fs::path(a.out) / f);
  }
  m["files"] = files;
  m["model_hash"] = model_hash(a.out);
  if (!r.rae_epoch_loss.empty()) m["rae_final_loss"] = r.rae_epoch_loss.back();
  dft::cli::write_json_file(fs::path(a.out) / "train_manifest.json", m);
  std::cerr << "train: " << dft::encoder_kind_name(cfg.encoder) << "-" << cfg.dim << " on "
            << r.num_foreground << " fg / " << r.num_background << " bg patches -> " << a.out
            << "\n";
  return 0;
}

// ---- track ----------------------------------------------------------------

struct TrackArgs {
  std::string data;
  std::string models;
  std::vector<int> track_ids;
  bool all = false;
  std::uint64_t seed = 0;
  std::string out;
  std::string config;
  bool oriented = false;
  bool axis_aligned = false;
  bool whole_chain = false;
  std::optional<int> n_samples;
  std::string range;
  int jobs = 0;
};

int run_track(const TrackArgs& a) {
  dft::TrackerConfig cfg;
  if (!a.config.empty()) dft::cli::apply_json(dft::cli::read_json_file(a.config), cfg);
  if (a.n_samples) cfg.n_samples = *a.n_samples;
  if (a.whole_chain) cfg.whole_chain = true;
  cfg.validate();

  const dft::Dataset data(a.data);
  const dft::ModelBundle models = dft::ModelBundle::load(a.models);
  if (a.axis_aligned && models.spec.oriented) {
    throw dft::ConfigError("--axis-aligned requested but the models were trained with oriented boxes");
  }
  if (a.oriented && !models.spec.oriented) {
    throw dft::ConfigError("--oriented requested but the models were trained with axis-aligned boxes");
  }

  dft::FrameRange range = data.info().test_range;
  if (!a.range.empty()) {
    const auto [lo, hi] = parse_range(a.range, "--range");
    range = {lo, hi};
  }
  if (range.size() < 1 || range.begin < 0 || range.end > data.info().num_frames) {
    throw dft::ConfigError("tracking range [" + std::to_string(range.begin) + ", " +
                           std::to_string(range.end) + ") is empty or outside the dataset");
  }

  std::vector<int> ids = a.track_ids;
  if (a.all) {
    ids.clear();
    for (const auto& t : data.tracks()) ids.push_back(t.track_id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

  // Every requested track must start at the first frame of the range.
  std::vector<dft::Pose2> init(ids.size());
  std::vector<int> lengths(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) {
    const dft::Trajectory truth = data.slice(data.track(ids[i]), range);
    if (truth.empty() || truth.entries.front().frame != range.begin) {
      throw dft::ConfigError("track " + std::to_string(ids[i]) + " has no label at frame " +
                             std::to_string(range.begin));
    }
    init[i] = truth.entries.front().pose;
    lengths[i] = truth.entries.back().frame - range.begin + 1;
  }

  std::vector<dft::GrayImage> frames;
  frames.reserve(static_cast<std::size_t>(range.size()));
  for (int k = range.begin; k < range.end; ++k) frames.push_back(data.load_frame(k));

  const dft::LikelihoodFactor likelihood = models.likelihood();
  std::vector<dft::Trajectory> results(ids.size());
  std::atomic<std::size_t> next{0};
  std::mutex err_mu;
  std::exception_ptr err;
  auto worker = [&] {
    for (std::size_t i = next++; i < ids.size(); i = next++) {
      try {
        std::vector<const dft::GrayImage*> ptrs;
        for (int k = 0; k < lengths[i]; ++k) ptrs.push_back(&frames[static_cast<std::size_t>(k)]);
        results[i] = dft::track_sequence(ptrs, range.begin, init[i], likelihood, cfg, a.seed, ids[i]);
      } catch (...) {
        std::lock_guard lock(err_mu);
        if (!err) err = std::current_exception();
      }
    }
  };
  unsigned jobs = a.jobs > 0 ? static_cast<unsigned>(a.jobs) : std::thread::hardware_concurrency();
  jobs = std::clamp<unsigned>(jobs, 1, static_cast<unsigned>(std::max<std::size_t>(1, ids.size())));
  std::vector<std::thread> pool;
  for (unsigned j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);

  prepare_out_dir(a.out);
  Json diag = Json::array();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "track_%04d.csv", ids[i]);
    dft::write_tracks_csv(fs::path(a.out) / name, {results[i]}, data.info().box_width,
                          data.info().box_height);
    Json t;
    t["track_id"] = ids[i];
    Json fr = Json::array();
    for (const auto& e : results[i].entries) {
      fr.push_back({{"frame", e.frame},
                    {"energy", e.energy},
                    {"candidates", e.candidates},
                    {"descent_iterations", e.descent_iterations}});
    }
    t["frames"] = fr;
    diag.push_back(t);
  }
  Json tcj = dft::cli::to_json(cfg);
  tcj["mode"] = models.spec.oriented ? "oriented" : "axis-aligned";
  tcj["range"] = {range.begin, range.end};
  const std::string chash = dft::cli::config_hash(tcj);
  Json d;
  d["config_hash"] = chash;
  d["seed"] = a.seed;
  d["tracks"] = diag;
  dft::cli::write_json_file(fs::path(a.out) / "diagnostics.json", d);
  Json m;
  m["config"] = tcj;
  m["config_hash"] = chash;
  m["seed"] = a.seed;
  m["model_hash"] = model_hash(a.models);
  m["dataset_hash"] = dataset_hash(a.data);
  m["track_ids"] = ids;
  dft::cli::write_json_file(fs::path(a.out) / "track_manifest.json", m);
  std::cerr << "track: " << ids.size() << " tracks over frames [" << range.begin << ", "
            << range.end << ") -> " << a.out << "\n";
  return 0;
}

// ---- eval -----------------------------------------------------------------

std::vector<dft::Trajectory> read_pred(const fs::path& p) {
  if (fs::is_regular_file(p)) return dft::read_tracks_csv(p);
  if (!fs::is_directory(p)) throw dft::IoError("no predictions at " + p.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(p)) {
    const std::string n = e.path().filename().string();
    if (e.is_regular_file() && n.rfind("track_", 0) == 0 && e.path().extension() == ".csv") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<dft::Trajectory> out;
  for (const auto& f : files) {
    for (auto& t : dft::read_tracks_csv(f)) out.push_back(std::move(t));
  }
  if (out.empty()) throw dft::IoError("no track_*.csv files in " + p.string());
  return out;
}

struct TruthSource {
  std::vector<dft::Trajectory> tracks;
  double box_width = 0.0;
  double box_height = 0.0;
};

TruthSource read_truth(const fs::path& p) {
  TruthSource t;
  fs::path csv = p;
  fs::path info = p / "dataset.json";
  if (fs::is_regular_file(p)) info = p.parent_path() / "dataset.json";
  else csv = p / "tracks.csv";
  t.tracks = dft::read_tracks_csv(csv);
  const dft::DatasetInfo di = dft::read_dataset_info(info);
  t.box_width = di.box_width;
  t.box_height = di.box_height;
  return t;
}

struct EvalArgs {
  std::string pred;
  std::string truth;
  std::string interval;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const std::vector<dft::Trajectory> pred = read_pred(a.pred);
  const TruthSource truth = read_truth(a.truth);
  std::map<int, const dft::Trajectory*> by_id;
  for (const auto& t : truth.tracks) by_id[t.track_id] = &t;

  std::vector<dft::SequenceResult> results;
  std::vector<int> bad;
  std::string detail;
  for (const auto& p : pred) {
    const auto it = by_id.find(p.track_id);
    if (it == by_id.end() || p.empty()) {
      bad.push_back(p.track_id);
      continue;
    }
    dft::Trajectory tr;
    tr.track_id = p.track_id;
    for (const auto& e : it->second->entries) {
      if (e.frame >= p.entries.front().frame && e.frame <= p.entries.back().frame) {
        tr.entries.push_back(e);
      }
    }
    try {
      results.push_back(dft::score_sequence(p, tr, truth.box_width, truth.box_height));
    } catch (const dft::EvaluationError& e) {
      bad.push_back(p.track_id);
      if (detail.empty()) detail = std::string(": ") + e.what();
    }
  }
  if (!bad.empty()) {
    std::string ids;
    for (int id : bad) ids += (ids.empty() ? "" : ",") + std::to_string(id);
    throw dft::EvaluationError("misaligned or unknown sequences: " + ids + detail);
  }

  std::size_t shortest = results.front().length();
  for (const auto& r : results) shortest = std::min(shortest, r.length());
  dft::EaoInterval interval = dft::default_eao_interval(static_cast<int>(shortest));
  if (!a.interval.empty()) {
    const auto [lo, hi] = parse_range(a.interval, "--interval");
    interval = {lo, hi};
  }
  const double acc = dft::accuracy(results);
  const double rob = dft::robustness(results);
  const double e = dft::eao(results, interval);

  const fs::path out(a.out);
  if (out.has_parent_path()) fs::create_directories(out.parent_path());
  {
    const fs::path ov = out.parent_path() / "overlaps.csv";
    std::ofstream f(ov, std::ios::binary);
    if (!f) throw dft::IoError("cannot write " + ov.string());
    f << "sequence_id,frame,overlap\n";
    char buf[96];
    for (const auto& r : results) {
      for (std::size_t i = 0; i < r.length(); ++i) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.9g\n", r.sequence_id, r.frames[i], r.overlaps[i]);
        f << buf;
      }
    }
  }
  Json s;
  s["accuracy"] = acc;
  s["robustness"] = rob;
  s["eao"] = e;
  s["interval"] = {interval.lo, interval.hi};
  s["config_hash"] = nullptr;
  s["model_hash"] = nullptr;
  const fs::path pm = (fs::is_directory(a.pred) ? fs::path(a.pred) : fs::path(a.pred).parent_path()) /
                      "track_manifest.json";
  if (fs::exists(pm)) {
    const Json m = dft::cli::read_json_file(pm);
    if (m.contains("config_hash")) s["config_hash"] = m["config_hash"];
    if (m.contains("model_hash")) s["model_hash"] = m["model_hash"];
  }
  dft::cli::write_json_file(out, s);
  std::printf("accuracy %.4f robustness %.4f eao %.4f interval [%d, %d]\n", acc, rob, e,
              interval.lo, interval.hi);
  return 0;
}

// ---- render ---------------------------------------------------------------

// Chart label for a summary file that does not depend on where the run lives:
// the file stem, or the parent directory name for the default summary.json.
std::string summary_label(const fs::path& p) {
  const fs::path abs = fs::absolute(p).lexically_normal();
  if (abs.stem() != "summary" || !abs.has_parent_path()) return abs.stem().string();
  return abs.parent_path().filename().string();
}

struct RenderArgs {
  std::string data;
  std::string pred;
  std::string truth;
  int frame = -1;
  std::string range;
  std::string out;
  std::string chart;
  std::vector<std::string> summaries;
};

int run_render_chart(const RenderArgs& a) {
  if (a.chart != "eao" && a.chart != "ar") throw dft::ConfigError("--chart must be eao or ar");
  if (a.summaries.empty()) throw dft::ConfigError("--chart needs at least one --summary file");
  dft::ChartSeries series;
  series.connect = a.chart == "eao";
  dft::ChartAxes axes;
  std::string csv = "label,x,y\n";
  char buf[64];
  for (std::size_t i = 0; i < a.summaries.size(); ++i) {
    const Json s = dft::cli::read_json_file(a.summaries[i]);
    dft::ChartPoint p;
    try {
      if (a.chart == "eao") {
        p = {static_cast<double>(i), s.at("eao").get<double>()};
      } else {
        p = {s.at("robustness").get<double>(), s.at("accuracy").get<double>()};
      }
    } catch (const nlohmann::json::exception& e) {
      throw dft::IoError(a.summaries[i] + ": " + e.what());
    }
    series.points.push_back(p);
    std::snprintf(buf, sizeof buf, ",%.9g,%.9g\n", p.x, p.y);
    csv += summary_label(a.summaries[i]) + buf;
  }
  if (a.chart == "eao") {
    axes.x_min = -0.5;
    axes.x_max = static_cast<double>(a.summaries.size()) - 0.5;
    axes.x_ticks = static_cast<int>(a.summaries.size()) - 1;
  }
  prepare_out_dir(a.out);
  dft::write_pgm(dft::render_chart({series}, axes), fs::path(a.out) / ("chart_" + a.chart + ".pgm"));
  std::ofstream f(fs::path(a.out) / ("chart_" + a.chart + ".csv"), std::ios::binary);
  f << csv;
  if (!f) throw dft::IoError("cannot write chart points");
  return 0;
}

int run_render(const RenderArgs& a) {
  if (!a.chart.empty()) return run_render_chart(a);
  if (a.data.empty()) throw dft::ConfigError("render needs --data (or --chart)");
  const dft::Dataset data(a.data);
  int lo = a.frame;
  int hi = a.frame + 1;
  if (!a.range.empty()) {
    const auto r = parse_range(a.range, "--range");
    lo = r.first;
    hi = r.second;
  } else if (a.frame < 0) {
    throw dft::ConfigError("render needs --frame or --range");
  }
  if (lo < 0 || hi > data.info().num_frames || lo >= hi) {
    throw dft::EvaluationError("frame range [" + std::to_string(lo) + ", " + std::to_string(hi) +
                               ") outside the dataset's " + std::to_string(data.info().num_frames) +
                               " frames");
  }
  const std::vector<dft::Trajectory> truth =
      a.truth.empty() ? data.tracks() : dft::read_tracks_csv(a.truth);
  std::vector<dft::Trajectory> pred;
  if (!a.pred.empty()) pred = read_pred(a.pred);
  const double bw = data.info().box_width;
  const double bh = data.info().box_height;
  auto boxes_at = [&](const std::vector<dft::Trajectory>& ts, int k) {
    std::vector<dft::OrientedBox> out;
    for (const auto& t : ts) {
      for (const auto& e : t.entries) {
        if (e.frame == k) out.push_back({e.pose, bw, bh});
      }
    }
    return out;
  };
  prepare_out_dir(a.out);
  for (int k = lo; k < hi; ++k) {
    const dft::GrayImage img =
        dft::render_overlay(data.load_frame(k), boxes_at(truth, k), boxes_at(pred, k));
    char name[40];
    std::snprintf(name, sizeof name, "overlay_%06d.pgm", k);
    dft::write_pgm(img, fs::path(a.out) / name);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deep-factor probabilistic tracking toolkit"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic benchmark dataset");
  auto* preset_opt = synth->add_option("--preset", sa.preset, "Named preset (desk20)");
  synth->add_option("--config", sa.config, "Scene config JSON")->excludes(preset_opt);
  synth->add_option("--out", sa.out, "Output dataset directory")->required();
  synth->add_flag("--force", sa.force, "Overwrite a non-empty output directory");
  synth->add_option("--seed", sa.seed, "Override the master seed");

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "Train an encoder and fit fg/bg densities");
  train->add_option("--data", ta.data, "Dataset directory")->required();
  train->add_option("--out", ta.out, "Model output directory")->required();
  train->add_option("--config", ta.config, "Training config JSON");
  train->add_option("--encoder", ta.encoder, "rp | ppca | rae");
  train->add_option("--dim", ta.dim, "Feature dimension d");
  train->add_option("--seed", ta.seed, "Seed");
  train->add_option("--fg-cov", ta.fg_cov, "full | diag");
  train->add_option("--bg-cov", ta.bg_cov, "full | diag");
  train->add_flag("--axis-aligned", ta.axis_aligned, "Square rotation-free patches");
  train->add_option("--epochs", ta.epochs, "RAE epochs");
  train->add_option("--lambda", ta.lambda, "RAE decoder weight penalty");
  train->add_option("--lr", ta.lr, "RAE Adam learning rate");
  train->add_option("--batch", ta.batch, "RAE batch size");
  train->add_option("--hidden", ta.hidden, "RAE hidden layer widths");
  train->add_option("--bg-per-frame", ta.bg_per_frame, "Background patches per training frame");
  train->add_option("--bg-overlap-max", ta.bg_overlap_max, "Background IoU threshold");

  TrackArgs ka;
  auto* track = app.add_subcommand("track", "Track labelled targets through the test split");
  track->add_option("--data", ka.data, "Dataset directory")->required();
  track->add_option("--models", ka.models, "Model directory")->required();
  auto* id_opt = track->add_option("--track-id", ka.track_ids, "Track id (repeatable)");
  auto* all_opt = track->add_flag("--all", ka.all, "Track every labelled target");
  id_opt->excludes(all_opt);
  track->add_option("--seed", ka.seed, "Seed");
  track->add_option("--out", ka.out, "Results directory")->required();
  track->add_option("--config", ka.config, "Tracker config JSON");
  auto* ori = track->add_flag("--oriented", ka.oriented, "Require oriented-box models");
  track->add_flag("--axis-aligned", ka.axis_aligned, "Require axis-aligned models")->excludes(ori);
  track->add_flag("--whole-chain", ka.whole_chain, "Joint descent over the chain afterwards");
  track->add_option("--n-samples", ka.n_samples, "Motion-model draws per frame");
  track->add_option("--range", ka.range, "Frame range a:b (default: test split)");
  track->add_option("--jobs", ka.jobs, "Worker threads for --all (default: all cores)");

  EvalArgs ea;
  auto* eval = app.add_subcommand("eval", "Score predictions against ground truth");
  eval->add_option("--pred", ea.pred, "Prediction directory or CSV")->required();
  eval->add_option("--truth", ea.truth, "Dataset directory or tracks.csv")->required();
  eval->add_option("--interval", ea.interval, "EAO interval lo:hi (default L/4:3L/4)");
  eval->add_option("--out", ea.out, "summary.json path")->required();

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Draw box overlays or summary charts");
  render->add_option("--data", ra.data, "Dataset directory");
  render->add_option("--pred", ra.pred, "Prediction directory or CSV");
  render->add_option("--truth", ra.truth, "Truth CSV (default: dataset tracks.csv)");
  auto* frame_opt = render->add_option("--frame", ra.frame, "Single frame index");
  render->add_option("--range", ra.range, "Frame range a:b")->excludes(frame_opt);
  render->add_option("--out", ra.out, "Output directory")->required();
  render->add_option("--chart", ra.chart, "eao | ar");
  render->add_option("--summary", ra.summaries, "summary.json files for --chart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) {
      if (sa.preset.empty() && sa.config.empty()) {
        std::cerr << "synth: one of --preset or --config is required\n";
        return 2;
      }
      return run_synth(sa);
    }
    if (train->parsed()) return run_train(ta);
    if (track->parsed()) {
      if (!ka.all && ka.track_ids.empty()) {
        std::cerr << "track: one of --track-id or --all is required\n";
        return 2;
      }
      return run_track(ka);
    }
    if (eval->parsed()) return run_eval(ea);
    if (render->parsed()) return run_render(ra);
  } catch (const dft::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
