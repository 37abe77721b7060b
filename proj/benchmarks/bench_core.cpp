#include <benchmark/benchmark.h>

#include <random>

#include "dftrack/density.hpp"
#include "dftrack/encoder.hpp"
#include "dftrack/factors.hpp"
#include "dftrack/lie.hpp"
#include "dftrack/metrics.hpp"
#include "dftrack/rae.hpp"
#include "dftrack/synth.hpp"
#include "dftrack/tracker.hpp"
#include "dftrack/warp.hpp"

using namespace dft;

namespace {

Eigen::VectorXd random_vector(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd;
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = nd(rng);
  return v;
}

GaussianDensity random_density(int d, std::mt19937_64& rng) {
  Eigen::MatrixXd a(d, d);
  for (int j = 0; j < d; ++j) a.col(j) = random_vector(d, rng);
  Eigen::MatrixXd cov = a * a.transpose() / d + Eigen::MatrixXd::Identity(d, d);
  return GaussianDensity(random_vector(d, rng), cov);
}

// One desk20 frame and the pose of its first target.
struct Frame {
  GrayImage image;
  Pose2 pose;
};

const Frame& desk_frame() {
  static const Frame f = [] {
    SceneConfig c = benchmark_preset("desk20");
    Scene s = make_scene(c);
    return Frame{render_frame(s, render_background(c), 0), s.tracks[0].entries[0].pose};
  }();
  return f;
}

std::shared_ptr<const Encoder> make_encoder(const std::string& kind, int dim) {
  const int n = PatchSpec{}.dim();
  if (kind == "rp") return std::make_shared<RandomProjectionEncoder>(n, dim, 1);
  RaeConfig c;
  c.code_dim = dim;
  c.seed = 1;
  return std::make_shared<RaeEncoder>(RaeModel(n, c));
}

}  // namespace

static void BM_ExpLog(benchmark::State& state) {
  Tangent2 xi(3.0, -2.0, 0.4);
  for (auto _ : state) {
    Pose2 g = exp(xi);
    benchmark::DoNotOptimize(xi = log(g));
  }
}
BENCHMARK(BM_ExpLog);

static void BM_Extract(benchmark::State& state) {
  const Frame& f = desk_frame();
  PatchSpec spec;
  for (auto _ : state) benchmark::DoNotOptimize(extract(f.pose, f.image, spec));
}
BENCHMARK(BM_Extract);

static void BM_Pullback(benchmark::State& state) {
  const Frame& f = desk_frame();
  PatchSpec spec;
  std::mt19937_64 rng(2);
  Patch p = extract(f.pose, f.image, spec);
  Eigen::VectorXd w = random_vector(spec.dim(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(pullback_pose_gradient(p, w, f.pose, f.image, spec));
}
BENCHMARK(BM_Pullback);

static void BM_EncodeRp(benchmark::State& state) {
  auto enc = make_encoder("rp", static_cast<int>(state.range(0)));
  std::mt19937_64 rng(3);
  Eigen::VectorXd x = random_vector(enc->input_dim(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(enc->encode(x));
}
BENCHMARK(BM_EncodeRp)->Arg(16)->Arg(64)->Arg(256);

static void BM_EncodeRae(benchmark::State& state) {
  auto enc = make_encoder("rae", static_cast<int>(state.range(0)));
  std::mt19937_64 rng(4);
  Eigen::VectorXd x = random_vector(enc->input_dim(), rng);
  for (auto _ : state) benchmark::DoNotOptimize(enc->encode(x));
}
BENCHMARK(BM_EncodeRae)->Arg(16)->Arg(64)->Arg(256);

static void BM_Nll(benchmark::State& state) {
  const int d = static_cast<int>(state.range(0));
  std::mt19937_64 rng(5);
  GaussianDensity p = random_density(d, rng);
  Eigen::VectorXd c = random_vector(d, rng);
  for (auto _ : state) benchmark::DoNotOptimize(p.nll(c));
}
BENCHMARK(BM_Nll)->Arg(16)->Arg(64)->Arg(256);

static void BM_ObbIou(benchmark::State& state) {
  OrientedBox a{Pose2(100, 80, 0.3), 70, 40}, b{Pose2(110, 86, 0.5), 70, 40};
  for (auto _ : state) benchmark::DoNotOptimize(obb_iou(a, b));
}
BENCHMARK(BM_ObbIou);

static void BM_TrackFrame(benchmark::State& state) {
  const Frame& f = desk_frame();
  auto enc = make_encoder(state.range(0) == 0 ? "rp" : "rae", 256);
  std::mt19937_64 rng(6);
  LikelihoodFactor lik =
      LikelihoodFactor(enc, random_density(256, rng), random_density(256, rng), PatchSpec{}).bind(f.image);
  TrackerConfig config;
  MotionFactor motion(config.q);
  for (auto _ : state) benchmark::DoNotOptimize(track_frame(f.pose, lik, motion, config, rng));
}
BENCHMARK(BM_TrackFrame)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
