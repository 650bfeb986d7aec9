#include <benchmark/benchmark.h>

#include "msite/engine.hpp"
#include "msite/simulator.hpp"

using namespace msite;

namespace {

const LatLon kBase{34.0689, -118.4452};

std::vector<LatLon> blobs(std::size_t n) {
    Rng rng(1, "bench/points");
    std::vector<LatLon> centres;
    for (int c = 0; c < 8; ++c) centres.push_back(offset_m(kBase, rng.uniform(-5000, 5000), rng.uniform(-5000, 5000)));
    std::vector<LatLon> pts;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = centres[i % centres.size()];
        pts.push_back(offset_m(c, rng.normal(0, 60), rng.normal(0, 60)));
    }
    return pts;
}

std::vector<TimedLocation> two_weeks(const Persona& p) {
    std::vector<TimedLocation> out;
    const auto first = *parse_date("2026-01-05");
    for (int d = 0; d < 14; ++d) {
        const auto date = add_days(first, d);
        Rng tr(1, "truth/" + format_date(date));
        Rng nr(1, "noise/" + format_date(date));
        const auto recs = render_sensor_traces(generate_ground_truth(p, date, 0, tr), p, NoiseParams{}, nr);
        const auto locs = locations_of(recs);
        out.insert(out.end(), locs.begin(), locs.end());
    }
    return out;
}

}  // namespace

static void BM_Dbscan(benchmark::State& state) {
    const auto pts = blobs(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(dbscan_labels(pts, 100.0, 5));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Dbscan)->Arg(1000)->Arg(4032)->Arg(20000);

static void BM_NightlyRefit(benchmark::State& state) {
    const auto p = default_personas().front();
    const auto locs = two_weeks(p);
    for (auto _ : state) benchmark::DoNotOptimize(fit_place_model(locs, PlaceConfig{}, p.offset));
    state.counters["fixes"] = static_cast<double>(locs.size());
}
BENCHMARK(BM_NightlyRefit)->Unit(benchmark::kMillisecond);

static void BM_StudyEightWeeks(benchmark::State& state) {
    StudyConfig sc;
    sc.personas = default_personas();
    for (auto _ : state) {
        sc.seed = static_cast<std::uint64_t>(state.iterations() + 1);
        benchmark::DoNotOptimize(run_study(sc));
    }
}
BENCHMARK(BM_StudyEightWeeks)->Unit(benchmark::kMillisecond)->Iterations(3);
BENCHMARK_MAIN();
