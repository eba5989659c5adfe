#pragma once

#include <cstdint>
#include <string>

#include "linsbft/sim.hpp"

namespace linsbft {

// Liveness verdict for one run. NotApplicable covers runs truncated before
// the network ever stabilizes (budget ends at or before GST), which must be
// reported distinctly from a genuine miss.
struct LivenessVerdict {
    enum class V { Pass, Fail, NotApplicable };
    V v = V::NotApplicable;
    uint64_t bound_ticks = 0;   // allowed ticks after GST
    uint64_t worst_ticks = 0;   // slowest observed finalization after GST
    std::string detail;

    bool ok() const { return v != V::Fail; }
    const char* name() const {
        switch (v) {
            case V::Pass: return "pass";
            case V::Fail: return "fail";
            default: return "not_applicable";
        }
    }
};

// Offline safety scan over a trace: false iff two finalization records
// disagree about the block at some height.
struct SafetyVerdict {
    bool ok = true;
    std::string detail;  // first conflict, if any
};

// Ticks after GST within which every height up to the target must finalize:
// target * (dtf + sum of the first six proposal timeouts). The timeout sum
// is the doubling envelope 2*delta * (2^6 - 1) = 126*delta.
uint64_t liveness_bound(const Scenario& sc);

LivenessVerdict check_liveness(const RunResult& r, uint64_t bound_ticks);
SafetyVerdict scan_trace(const std::string& trace_text);

// Line-delimited structured report: one meta record, one record per height,
// one aggregate record. Byte-reproducible for a fixed (scenario, seed).
std::string report_jsonl(const RunResult& r, const LivenessVerdict& lv);

// Human-readable summary table for terminals.
std::string report_table(const RunResult& r, const LivenessVerdict& lv);

}  // namespace linsbft
