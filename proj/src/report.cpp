#include "linsbft/report.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <map>
#include <sstream>

#include "json.hpp"

namespace linsbft {

using ordered_json = nlohmann::ordered_json;

uint64_t liveness_bound(const Scenario& sc) {
    return sc.target * (sc.dtf() + 126 * sc.delta);
}

LivenessVerdict check_liveness(const RunResult& r, uint64_t bound_ticks) {
    LivenessVerdict lv;
    lv.bound_ticks = bound_ticks;

    if (r.all_final_tick > 0) {
        lv.worst_ticks =
            r.all_final_tick > r.gst ? r.all_final_tick - r.gst : 0;
        if (lv.worst_ticks <= bound_ticks) {
            lv.v = LivenessVerdict::V::Pass;
            lv.detail = "all honest members finalized height " +
                        std::to_string(r.target) + " within " +
                        std::to_string(lv.worst_ticks) +
                        " ticks after stabilization (bound " +
                        std::to_string(bound_ticks) + ")";
        } else {
            lv.v = LivenessVerdict::V::Fail;
            lv.detail = "slowest honest member needed " +
                        std::to_string(lv.worst_ticks) +
                        " ticks after stabilization, bound is " +
                        std::to_string(bound_ticks);
        }
        return lv;
    }

    if (r.end_tick <= r.gst) {
        lv.v = LivenessVerdict::V::NotApplicable;
        lv.detail = "run truncated at tick " + std::to_string(r.end_tick) +
                    ", before the network stabilizes at " +
                    std::to_string(r.gst);
        return lv;
    }

    lv.v = LivenessVerdict::V::Fail;
    lv.detail = r.reached_target
                    ? "height " + std::to_string(r.target) +
                          " finalized somewhere, but not by every honest "
                          "member before tick " + std::to_string(r.end_tick)
                    : "height " + std::to_string(r.target) +
                          " never finalized (run ended at tick " +
                          std::to_string(r.end_tick) + ")";
    return lv;
}

SafetyVerdict scan_trace(const std::string& trace_text) {
    SafetyVerdict sv;
    std::map<uint64_t, std::string> finals;

    std::istringstream in(trace_text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find("e=fin") == std::string::npos) continue;
        uint64_t h = 0;
        std::string b;
        bool have_h = false;
        std::istringstream ls(line);
        std::string tok;
        while (ls >> tok) {
            if (tok.rfind("h=", 0) == 0) {
                h = std::stoull(tok.substr(2));
                have_h = true;
            } else if (tok.rfind("b=", 0) == 0) {
                b = tok.substr(2);
            }
        }
        if (!have_h || b.empty()) continue;
        auto [it, fresh] = finals.emplace(h, b);
        if (!fresh && it->second != b) {
            sv.ok = false;
            sv.detail = "conflicting finalization at height " +
                        std::to_string(h) + ": " + it->second + " vs " + b;
            return sv;
        }
    }
    return sv;
}

namespace {

struct Aggregates {
    uint64_t last_final = 0;     // highest finalized height
    uint64_t final_count = 0;    // finalized heights >= 1
    double msgs_slope = 0.0;     // honest msgs per height, warmup excluded
    double view_change_mean = 0.0;
    double heights_per_sec = 0.0;
    double txs_per_height = 0.0;
};

Aggregates aggregate(const RunResult& r) {
    Aggregates a;
    for (const auto& [h, s] : r.heights) {
        if (h == 0 || !s.finalized) continue;
        ++a.final_count;
        a.last_final = std::max(a.last_final, h);
    }
    uint64_t from = a.last_final >= 3 ? 3 : 1;
    if (a.last_final >= from) {
        uint64_t span = a.last_final - from + 1;
        a.msgs_slope =
            double(r.msgs_between(from, a.last_final)) / double(span);
        a.view_change_mean = r.mean_rounds(from, a.last_final);
    }
    if (r.end_tick > 0)  // one tick is one simulated millisecond
        a.heights_per_sec = double(a.final_count) * 1000.0 / double(r.end_tick);
    if (a.final_count > 0)
        a.txs_per_height = double(r.txs_total) / double(a.final_count);
    return a;
}

}  // namespace

std::string report_jsonl(const RunResult& r, const LivenessVerdict& lv) {
    std::string out;
    Aggregates a = aggregate(r);

    ordered_json meta;
    meta["record"] = "meta";
    meta["scenario"] = r.scenario_name;
    meta["seed"] = r.seed;
    meta["n"] = r.n;
    meta["f"] = r.f;
    meta["target"] = r.target;
    meta["gst"] = r.gst;
    meta["delta"] = r.delta;
    out += meta.dump();
    out += '\n';

    for (const auto& [h, s] : r.heights) {
        if (h == 0) continue;
        ordered_json rec;
        rec["record"] = "height";
        rec["height"] = h;
        rec["rounds_used"] = s.rounds_used;
        rec["honest_msgs"] = s.honest_msgs;
        rec["honest_bytes"] = s.honest_bytes;
        rec["finalize_latency_ticks"] = s.finalize_latency();
        rec["finalized"] = s.finalized;
        out += rec.dump();
        out += '\n';
    }

    ordered_json ag;
    ag["record"] = "aggregate";
    ag["safety_ok"] = r.safety_ok;
    ag["safety_detail"] = r.safety_detail;
    ag["liveness_ok"] = lv.ok();
    ag["liveness"] = lv.name();
    ag["liveness_detail"] = lv.detail;
    ag["liveness_bound_ticks"] = lv.bound_ticks;
    ag["liveness_worst_ticks"] = lv.worst_ticks;
    ag["reached_target"] = r.reached_target;
    ag["all_final_tick"] = r.all_final_tick;
    ag["deadlocked"] = r.deadlocked;
    ag["lock_violations_l1"] = r.l1_violations;
    ag["lock_violations_l2"] = r.l2_violations;
    ag["lock_violations_l3"] = r.l3_violations;
    ag["finalized_heights"] = a.final_count;
    ag["msgs_per_height_slope"] = a.msgs_slope;
    ag["view_change_mean"] = a.view_change_mean;
    ag["heights_per_sim_second"] = a.heights_per_sec;
    ag["txs_per_height"] = a.txs_per_height;
    ag["honest_msgs_total"] = r.honest_msgs_total;
    ag["honest_bytes_total"] = r.honest_bytes_total;
    ag["dkg_synthetic_msgs"] = r.dkg_msgs_total;
    ordered_json ev = ordered_json::object();
    for (const auto& [k, v] : r.evidence) ev[k] = v;
    ag["evidence"] = ev;
    ag["end_tick"] = r.end_tick;
    ag["events"] = r.events;
    out += ag.dump();
    out += '\n';
    return out;
}

std::string report_table(const RunResult& r, const LivenessVerdict& lv) {
    Aggregates a = aggregate(r);
    char buf[256];
    std::string out;

    std::snprintf(buf, sizeof(buf),
                  "scenario %s  seed %" PRIu64 "  n=%u f=%u  target=%" PRIu64
                  "  gst=%" PRIu64 "  delta=%" PRIu64 "\n",
                  r.scenario_name.c_str(), r.seed, r.n, r.f, r.target, r.gst,
                  r.delta);
    out += buf;
    out += "\n";
    out += "height  rounds  honest_msgs  honest_bytes  latency  finalized\n";
    out += "------  ------  -----------  ------------  -------  ---------\n";
    for (const auto& [h, s] : r.heights) {
        if (h == 0) continue;
        std::snprintf(buf, sizeof(buf),
                      "%6" PRIu64 "  %6" PRIu64 "  %11" PRIu64 "  %12" PRIu64
                      "  %7" PRIu64 "  %9s\n",
                      h, s.rounds_used, s.honest_msgs, s.honest_bytes,
                      s.finalize_latency(), s.finalized ? "yes" : "no");
        out += buf;
    }
    out += "\n";

    std::snprintf(buf, sizeof(buf), "safety:        %s%s%s\n",
                  r.safety_ok ? "ok" : "VIOLATION",
                  r.safety_detail.empty() ? "" : " - ",
                  r.safety_detail.c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf), "liveness:      %s - %s\n", lv.name(),
                  lv.detail.c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "locks:         l1=%" PRIu64 " l2=%" PRIu64 " l3=%" PRIu64
                  " violations\n",
                  r.l1_violations, r.l2_violations, r.l3_violations);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "finalized:     %" PRIu64 " heights (top %" PRIu64
                  ") in %" PRIu64 " ticks, %.3f heights/sim-second\n",
                  a.final_count, a.last_final, r.end_tick, a.heights_per_sec);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "throughput:    %.3f txs/height, view-change mean %.4f "
                  "rounds\n",
                  a.txs_per_height, a.view_change_mean);
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "messages:      %.3f honest msgs/height, %" PRIu64
                  " total (%" PRIu64 " bytes), dkg synthetic %" PRIu64 "\n",
                  a.msgs_slope, r.honest_msgs_total, r.honest_bytes_total,
                  r.dkg_msgs_total);
    out += buf;
    if (!r.evidence.empty()) {
        out += "evidence:      ";
        bool first = true;
        for (const auto& [k, v] : r.evidence) {
            if (!first) out += ", ";
            out += k + "=" + std::to_string(v);
            first = false;
        }
        out += "\n";
    }
    return out;
}

}  // namespace linsbft
