#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "aqmlab/config.hpp"
#include "aqmlab/dumbbell.hpp"
#include "aqmlab/metrics.hpp"

namespace aqmlab {

/// Executes one run to completion. Pure function of (cfg, meta): identical
/// inputs produce identical records.
inline MetricsRecord run_once(const RunConfig& cfg, RunMeta meta) {
    Simulation sim(cfg, std::move(meta));
    sim.run();
    return sim.take_metrics();
}

inline MetricsRecord run_once(const RunConfig& cfg) {
    return run_once(cfg, Simulation::default_meta(cfg));
}

/// One scenario sweep: scenario 1 fixes the FTP flow count and varies VoIP,
/// scenario 2 fixes VoIP and varies FTP. `scale` multiplies flow counts and
/// both bandwidths together, preserving per-flow load ratios for desk-scale
/// runs (RTT-dependent TCP dynamics do not scale perfectly).
struct SweepSpec {
    int scenario = 1;
    std::vector<Scheme> schemes{Scheme::kMsqm, Scheme::kRed, Scheme::kRio, Scheme::kPi};
    std::int64_t flows_start = 0;
    std::int64_t flows_stop = 200;
    std::int64_t flows_step = 25;
    std::int64_t fixed_flows = 100;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double scale = 1.0;
    RunConfig base;  // scheme/seed/flow counts overridden per cell

    void validate() const {
        if (scenario != 1 && scenario != 2) throw ConfigError("sweep scenario must be 1 or 2");
        if (schemes.empty()) throw ConfigError("sweep needs at least one scheme");
        if (seeds.empty()) throw ConfigError("sweep needs at least one seed");
        if (flows_step <= 0) throw ConfigError("sweep flows step must be > 0");
        if (flows_stop < flows_start) throw ConfigError("sweep flows stop must be >= start");
        if (flows_start < 0) throw ConfigError("sweep flows start must be >= 0");
        if (fixed_flows < 0) throw ConfigError("sweep fixed flows must be >= 0");
        if (!(scale > 0.0)) throw ConfigError("sweep scale must be > 0");
    }

    std::vector<std::int64_t> grid() const {
        std::vector<std::int64_t> points;
        for (std::int64_t f = flows_start; f <= flows_stop; f += flows_step) points.push_back(f);
        return points;
    }
};

struct SweepCell {
    Scheme scheme;
    std::int64_t grid_flows;  // pre-scale grid value
    std::uint64_t seed;
};

/// Cells in deterministic (scheme, flows, seed) order; row order in the
/// output is a pure function of the spec, independent of execution order.
inline std::vector<SweepCell> sweep_cells(const SweepSpec& spec) {
    std::vector<SweepCell> cells;
    const auto grid = spec.grid();
    for (Scheme scheme : spec.schemes) {
        for (std::int64_t flows : grid) {
            for (std::uint64_t seed : spec.seeds) {
                cells.push_back(SweepCell{scheme, flows, seed});
            }
        }
    }
    return cells;
}

inline std::int64_t scaled_flows(std::int64_t n, double scale) {
    return std::llround(static_cast<double>(n) * scale);
}

inline RunConfig cell_config(const SweepSpec& spec, const SweepCell& cell) {
    RunConfig cfg = spec.base;
    cfg.scheme = cell.scheme;
    cfg.seed = cell.seed;
    const std::int64_t varied = scaled_flows(cell.grid_flows, spec.scale);
    const std::int64_t fixed = scaled_flows(spec.fixed_flows, spec.scale);
    if (spec.scenario == 1) {
        cfg.n_ftp = fixed;
        cfg.n_voip = varied;
    } else {
        cfg.n_voip = fixed;
        cfg.n_ftp = varied;
    }
    cfg.access_bw_bps = spec.base.access_bw_bps * spec.scale;
    cfg.bottleneck_bw_bps = spec.base.bottleneck_bw_bps * spec.scale;
    return cfg;
}

inline RunMeta cell_meta(const SweepSpec& spec, const SweepCell& cell) {
    RunMeta meta;
    meta.scheme = to_string(cell.scheme);
    meta.scenario = spec.scenario;
    meta.varied_flows = scaled_flows(cell.grid_flows, spec.scale);
    meta.seed = cell.seed;
    meta.duration_s = spec.base.duration_s;
    return meta;
}

/// Runs every sweep cell, up to `jobs` in parallel. Results are assembled in
/// cell order regardless of completion order; a failing cell aborts the sweep
/// with the cell identified.
inline std::vector<MetricsRecord> run_sweep(const SweepSpec& spec, unsigned jobs = 1) {
    spec.validate();
    const std::vector<SweepCell> cells = sweep_cells(spec);
    std::vector<MetricsRecord> results(cells.size());

    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::mutex error_mutex;
    std::string first_error;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            const SweepCell& cell = cells[i];
            try {
                results[i] = run_once(cell_config(spec, cell), cell_meta(spec, cell));
            } catch (const std::exception& e) {
                failed.store(true);
                std::lock_guard lock(error_mutex);
                if (first_error.empty()) {
                    first_error = "sweep cell scheme=" + to_string(cell.scheme) +
                                  " flows=" + std::to_string(cell.grid_flows) +
                                  " seed=" + std::to_string(cell.seed) + ": " + e.what();
                }
                return;
            }
        }
    };

    const unsigned n_workers = std::max(1u, std::min<unsigned>(jobs, cells.size()));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failed.load()) throw std::runtime_error(first_error);
    return results;
}

}  // namespace aqmlab
