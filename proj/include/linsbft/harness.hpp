#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "linsbft/report.hpp"
#include "linsbft/scenario.hpp"
#include "linsbft/sim.hpp"

namespace linsbft {

// One orchestrated run: the simulation plus every property checker, with
// both report renderings. `all_ok` is the CLI exit-code condition.
struct RunReport {
    RunResult result;
    LivenessVerdict liveness;
    SafetyVerdict trace_safety;  // offline re-scan of the emitted trace
    bool all_ok = false;
    std::string jsonl;
    std::string table;
    // When a violation appears and the scenario has scripted adversary
    // actions, a shrunk scenario that still violates is attached.
    bool has_minimized = false;
    Scenario minimized;
};

RunReport run_scenario(const Scenario& sc);

// Merged online (cross-validator finalization map) and offline (trace scan)
// agreement verdict.
SafetyVerdict check_safety(const RunResult& r);

struct ComplexityPoint {
    uint32_t n = 0;
    uint32_t f = 0;
    double msgs_per_height = 0.0;
};

struct ComplexityReport {
    std::vector<ComplexityPoint> points;
    std::vector<double> ratios;  // msgs ratio between consecutive n
    double slope_c = 0.0;        // least-squares fit of msgs = c*n
    double max_dev = 0.0;        // max relative deviation from c*n
    double mean_ratio = 0.0;
    bool linear_ok = false;      // ratios in [1.8, 2.3], each point in [3n, 8n]
    std::string detail;
};

// No-fault sweep over the given committee sizes with a shared seed; when
// `all_to_all` is set the engines broadcast votes (quadratic control mode).
ComplexityReport measure_complexity(const std::vector<uint32_t>& ns,
                                    const Scenario& base, bool all_to_all);

struct ViewChangeStats {
    double p = 0.0;          // probability a round's collector is faulty
    uint64_t heights = 0;    // heights measured (warmup excluded)
    double mean_rounds = 0.0;
    double expected = 0.0;   // geometric mean 1/(1-p)
    double sigma_mean = 0.0; // sqrt(p)/(1-p)/sqrt(heights)
    bool within = false;     // |mean - expected| <= 3*sigma (p=0: exactly 1)
    std::string detail;
};

// Randomly schedules f silent validators per height and measures the mean
// number of proposal rounds needed per finalized height.
ViewChangeStats view_change_stats(const Scenario& base, uint64_t heights);

// Shrinks the scripted adversary schedule (fault entries and message drops)
// by binary-search chunk removal while the violation persists.
Scenario minimize_counterexample(const Scenario& sc);

}  // namespace linsbft
