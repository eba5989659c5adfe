#include "linsbft/harness.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace linsbft {

namespace {

bool run_violates(const Scenario& sc) {
    World w(sc);
    RunResult r = w.run();
    uint64_t locks = r.l1_violations + r.l2_violations + r.l3_violations;
    return !r.safety_ok || locks > 0 || r.deadlocked;
}

double window_msgs_per_height(const RunResult& r) {
    uint64_t last = 0;
    for (const auto& [h, s] : r.heights)
        if (h > 0 && s.finalized) last = std::max(last, h);
    uint64_t from = last >= 3 ? 3 : 1;
    if (last < from) return 0.0;
    return double(r.msgs_between(from, last)) / double(last - from + 1);
}

}  // namespace

SafetyVerdict check_safety(const RunResult& r) {
    SafetyVerdict sv;
    if (!r.safety_ok) {
        sv.ok = false;
        sv.detail = r.safety_detail;
        return sv;
    }
    return scan_trace(r.trace);
}

RunReport run_scenario(const Scenario& sc) {
    sc.validate();

    RunReport rep;
    World w(sc);
    rep.result = w.run();

    rep.trace_safety = scan_trace(rep.result.trace);
    if (!rep.trace_safety.ok && rep.result.safety_ok) {
        rep.result.safety_ok = false;
        rep.result.safety_detail = rep.trace_safety.detail;
    }

    rep.liveness = check_liveness(rep.result, liveness_bound(sc));

    uint64_t locks = rep.result.l1_violations + rep.result.l2_violations +
                     rep.result.l3_violations;
    rep.all_ok = rep.result.safety_ok && locks == 0 && rep.liveness.ok() &&
                 !rep.result.deadlocked;

    rep.jsonl = report_jsonl(rep.result, rep.liveness);
    rep.table = report_table(rep.result, rep.liveness);

    bool violated = !rep.result.safety_ok || locks > 0 || rep.result.deadlocked;
    if (violated && (!sc.faults.empty() || !sc.netdrops.empty())) {
        rep.minimized = minimize_counterexample(sc);
        rep.has_minimized = true;
    }
    return rep;
}

Scenario minimize_counterexample(const Scenario& sc) {
    const size_t nf = sc.faults.size();
    const size_t total = nf + sc.netdrops.size();
    if (total == 0) return sc;

    auto build = [&](const std::vector<size_t>& keep) {
        Scenario s = sc;
        s.faults.clear();
        s.netdrops.clear();
        for (size_t i : keep) {
            if (i < nf)
                s.faults.push_back(sc.faults[i]);
            else
                s.netdrops.push_back(sc.netdrops[i - nf]);
        }
        return s;
    };

    std::vector<size_t> cur(total);
    std::iota(cur.begin(), cur.end(), size_t(0));
    if (!run_violates(sc)) return sc;  // not reproducible; nothing to shrink

    size_t chunks = 2;
    while (!cur.empty() && cur.size() >= 2) {
        const size_t csz = (cur.size() + chunks - 1) / chunks;
        bool reduced = false;
        for (size_t start = 0; start < cur.size(); start += csz) {
            std::vector<size_t> trial;
            trial.reserve(cur.size());
            for (size_t i = 0; i < cur.size(); ++i)
                if (i < start || i >= start + csz) trial.push_back(cur[i]);
            if (trial.size() == cur.size()) continue;
            if (run_violates(build(trial))) {
                cur = std::move(trial);
                chunks = std::max<size_t>(2, chunks - 1);
                reduced = true;
                break;
            }
        }
        if (!reduced) {
            if (chunks >= cur.size()) break;
            chunks = std::min(cur.size(), chunks * 2);
        }
    }
    return build(cur);
}

ComplexityReport measure_complexity(const std::vector<uint32_t>& ns,
                                    const Scenario& base, bool all_to_all) {
    ComplexityReport cr;
    for (uint32_t n : ns) {
        Scenario sc = base;
        sc.name = base.name.empty() ? "sweep" : base.name;
        sc.n = n;
        sc.f = (n - 1) / 4;
        sc.standby = 0;
        sc.stakes.clear();
        sc.faults.clear();
        sc.netdrops.clear();
        sc.joins.clear();
        sc.leaves.clear();
        sc.fault_mode = "scripted";
        sc.gst = 0;
        sc.all_to_all = all_to_all;
        sc.max_ticks = 0;
        // Long enough that one-off sync or state bursts amortize away.
        sc.target = std::max<uint64_t>(sc.target, 60);

        World w(sc);
        RunResult r = w.run();
        cr.points.push_back({n, sc.f, window_msgs_per_height(r)});
    }

    double sxy = 0.0, sxx = 0.0;
    for (const ComplexityPoint& p : cr.points) {
        sxy += double(p.n) * p.msgs_per_height;
        sxx += double(p.n) * double(p.n);
    }
    cr.slope_c = sxx > 0 ? sxy / sxx : 0.0;

    bool band_ok = true;
    for (const ComplexityPoint& p : cr.points) {
        double fit = cr.slope_c * double(p.n);
        if (fit > 0)
            cr.max_dev =
                std::max(cr.max_dev, std::fabs(p.msgs_per_height - fit) / fit);
        // Ordinary-case pattern: one proposal broadcast (n-1) plus one vote
        // per validator (n-1); the certificate rides the next proposal.
        if (p.msgs_per_height < 1.5 * p.n || p.msgs_per_height > 8.0 * p.n)
            band_ok = false;
    }

    bool ratios_ok = true;
    for (size_t i = 1; i < cr.points.size(); ++i) {
        double prev = cr.points[i - 1].msgs_per_height;
        double ratio = prev > 0 ? cr.points[i].msgs_per_height / prev : 0.0;
        cr.ratios.push_back(ratio);
        if (ratio < 1.8 || ratio > 2.3) ratios_ok = false;
    }
    if (!cr.ratios.empty())
        cr.mean_ratio =
            std::accumulate(cr.ratios.begin(), cr.ratios.end(), 0.0) /
            double(cr.ratios.size());

    cr.linear_ok = band_ok && ratios_ok && !cr.points.empty();

    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "slope c=%.3f msgs/height per validator, max deviation "
                  "%.1f%%, mean growth ratio %.3f",
                  cr.slope_c, cr.max_dev * 100.0, cr.mean_ratio);
    cr.detail = buf;
    return cr;
}

ViewChangeStats view_change_stats(const Scenario& base, uint64_t heights) {
    Scenario sc = base;
    sc.target = heights + 2;  // heights 1 and 2 are warmup, excluded below
    sc.gst = 0;
    sc.faults.clear();
    sc.netdrops.clear();
    sc.joins.clear();
    sc.leaves.clear();
    sc.epoch_length = 0;
    sc.max_ticks = 0;
    if (sc.f > 0) {
        sc.fault_mode = "random";
        sc.random_kinds = {"silent"};
    } else {
        sc.fault_mode = "scripted";
    }

    World w(sc);
    RunResult r = w.run();

    ViewChangeStats vs;
    vs.p = double(sc.f) / double(sc.n);
    uint64_t counted = 0;
    double sum = 0.0;
    for (const auto& [h, s] : r.heights) {
        if (h < 3 || h > sc.target || s.rounds_used == 0) continue;
        ++counted;
        sum += double(s.rounds_used);
    }
    vs.heights = counted;
    vs.mean_rounds = counted ? sum / double(counted) : 0.0;
    vs.expected = 1.0 / (1.0 - vs.p);
    vs.sigma_mean = counted ? std::sqrt(vs.p) / (1.0 - vs.p) /
                                  std::sqrt(double(counted))
                            : 0.0;
    if (sc.f == 0) {
        vs.within = counted > 0 && vs.mean_rounds == 1.0;
    } else {
        vs.within = counted > 0 &&
                    std::fabs(vs.mean_rounds - vs.expected) <=
                        3.0 * vs.sigma_mean;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "p=%.4f mean=%.4f expected=%.4f sigma=%.6f over %llu heights",
                  vs.p, vs.mean_rounds, vs.expected, vs.sigma_mean,
                  static_cast<unsigned long long>(vs.heights));
    vs.detail = buf;
    return vs;
}

}  // namespace linsbft
