#include <benchmark/benchmark.h>

#include <cmath>

#include "anchorkit/assignment.hpp"
#include "anchorkit/augmentation.hpp"
#include "anchorkit/eval.hpp"
#include "anchorkit/random.hpp"

using namespace anchorkit;

namespace {

std::vector<Box> random_faces(Rng& rng, int n, double w, double h) {
  std::vector<Box> out;
  for (int i = 0; i < n; ++i) {
    const double s = std::exp(rng.uniform(std::log(6.0), std::log(300.0)));
    const double x = rng.uniform(0.0, std::max(1.0, w - s));
    const double y = rng.uniform(0.0, std::max(1.0, h - s));
    out.emplace_back(x, y, x + s, y + s);
  }
  return out;
}

std::vector<Detection> random_detections(Rng& rng, std::size_t n) {
  std::vector<Detection> out;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = rng.uniform(0, 600);
    const double y = rng.uniform(0, 600);
    const double s = rng.uniform(8, 80);
    out.push_back({Box(x, y, x + s, y + s), rng.uniform01()});
  }
  return out;
}

void BM_Iou(benchmark::State& state) {
  Rng rng(1);
  const auto boxes = random_faces(rng, 1024, 640, 640);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(iou(boxes[i & 1023], boxes[(i * 7 + 3) & 1023]));
    ++i;
  }
}
BENCHMARK(BM_Iou);

void BM_AnchorGrid(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  for (auto _ : state) {
    const AnchorGrid grid(side, side);
    double sum = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) sum += grid.anchor(i).box.x_min();
    benchmark::DoNotOptimize(sum);
  }
}
BENCHMARK(BM_AnchorGrid)->Arg(640)->Arg(1024);

void BM_StandardMatch(benchmark::State& state) {
  Rng rng(2);
  const AnchorGrid grid(640, 640);
  const auto gts = random_faces(rng, static_cast<int>(state.range(0)), 640, 640);
  for (auto _ : state) benchmark::DoNotOptimize(standard_match(grid, gts));
}
BENCHMARK(BM_StandardMatch)->Arg(1)->Arg(16)->Arg(128);

void BM_StandardMatchSparse(benchmark::State& state) {
  Rng rng(2);
  const AnchorGrid grid(640, 640);
  const auto gts = random_faces(rng, static_cast<int>(state.range(0)), 640, 640);
  for (auto _ : state) benchmark::DoNotOptimize(standard_match_sparse(grid, gts));
}
BENCHMARK(BM_StandardMatchSparse)->Arg(1)->Arg(16)->Arg(128);

void BM_AliAms(benchmark::State& state) {
  Rng rng(3);
  const AnchorGrid grid(640, 640);
  const auto gts = random_faces(rng, static_cast<int>(state.range(0)), 640, 640);
  std::vector<double> s(grid.size());
  for (double& v : s) v = rng.uniform01();
  const ScoreMap scores(s);
  const AssignmentResult base = standard_match(grid, gts);
  for (auto _ : state) benchmark::DoNotOptimize(ali_ams(base, grid, gts, scores));
}
BENCHMARK(BM_AliAms)->Arg(1)->Arg(16)->Arg(128);

void BM_Nms(benchmark::State& state) {
  Rng rng(4);
  const auto dets = random_detections(rng, static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(nms_indices(dets));
}
BENCHMARK(BM_Nms)->Arg(100)->Arg(1000)->Arg(5000);

void BM_Evaluate(benchmark::State& state) {
  Rng rng(5);
  GroundTruthSet gts;
  PredictionSet preds;
  for (int i = 0; i < state.range(0); ++i) {
    ImageAnnotation img;
    img.path = "bench/" + std::to_string(i) + ".jpg";
    ImagePredictions p;
    p.name = std::to_string(i);
    for (const Box& b : random_faces(rng, 12, 640, 640)) {
      FaceAnnotation f;
      f.box = b;
      img.faces.push_back(f);
      p.detections.push_back({b.translated(rng.uniform(-3, 3), rng.uniform(-3, 3)), rng.uniform01()});
    }
    for (const Detection& d : random_detections(rng, 30)) p.detections.push_back(d);
    gts.push_back(img);
    preds.push_back(p);
  }
  for (auto _ : state) benchmark::DoNotOptimize(evaluate(gts, preds));
}
BENCHMARK(BM_Evaluate)->Arg(100)->Arg(1000);

void BM_SsePlan(benchmark::State& state) {
  Rng rng(6);
  const auto faces = random_faces(rng, 8, 1024, 768);
  const SseConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(sse_plan({1024, 768}, faces, cfg, rng));
}
BENCHMARK(BM_SsePlan);

}  // namespace

BENCHMARK_MAIN();
