// Copyright 2026 The vemorph Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include <benchmark/benchmark.h>

#include <filesystem>

#include "vemorph/harness.hpp"
#include "vemorph/image.hpp"
#include "vemorph/synthetic.hpp"

namespace {

namespace fs = std::filesystem;

void BM_RenderScene(benchmark::State& state) {
  const auto scene = vemorph::synthetic::gen_scene(5, vemorph::synthetic::kMaxObjects);
  for (auto _ : state) benchmark::DoNotOptimize(vemorph::synthetic::render(scene));
}
BENCHMARK(BM_RenderScene);

void BM_PngRoundTrip(benchmark::State& state) {
  const auto image = vemorph::synthetic::render(vemorph::synthetic::gen_scene(5, 6));
  for (auto _ : state) {
    benchmark::DoNotOptimize(vemorph::decode_image(vemorph::encode_png(image)));
  }
}
BENCHMARK(BM_PngRoundTrip);

void BM_Pipeline(benchmark::State& state) {
  const fs::path dir = fs::temp_directory_path() / "vemorph-bench-pipeline";
  fs::remove_all(dir);
  vemorph::synthetic::CorpusOptions opt;
  opt.scenes = 20;
  vemorph::synthetic::write_corpus(dir / "corpus", opt);
  vemorph::RunConfig config = vemorph::RunConfig::with_backend("inprocess:synthetic");
  config.dataset = dir / "corpus" / "dataset.jsonl";
  config.image_dir = dir / "corpus";
  config.workers = static_cast<int>(state.range(0));
  const vemorph::Backends backends(config, vemorph::synthetic::standard_registry());
  std::size_t tests = 0;
  for (auto _ : state) {
    state.PauseTiming();
    fs::remove_all(dir / "suite");
    config.output_dir = dir / "suite";
    state.ResumeTiming();
    tests = vemorph::run_pipeline(config, backends).detection.report.generated;
  }
  state.counters["tests"] = static_cast<double>(tests);
  state.SetItemsProcessed(state.iterations() * opt.scenes);
  fs::remove_all(dir);
}
BENCHMARK(BM_Pipeline)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

}  // namespace
