// Python bindings for the consensus simulator: scenario I/O, single runs,
// complexity sweeps, view-change statistics, trace checking, and the small
// deterministic helpers (encodings, timeouts, collector draws) that outside
// tooling may want to cross-check.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "linsbft/block.hpp"
#include "linsbft/crypto.hpp"
#include "linsbft/engine.hpp"
#include "linsbft/harness.hpp"
#include "linsbft/report.hpp"
#include "linsbft/scenario.hpp"
#include "linsbft/sim.hpp"

namespace py = pybind11;
using namespace linsbft;

namespace {

Bytes to_bytes(const py::bytes& b) {
    std::string s = b;
    return Bytes(s.begin(), s.end());
}

Digest digest_from_hex(const std::string& hex) {
    if (hex.size() != 64) throw std::invalid_argument("digest hex must be 64 chars");
    Bytes raw;
    raw.reserve(32);
    for (size_t i = 0; i < 64; i += 2)
        raw.push_back(uint8_t(std::stoul(hex.substr(i, 2), nullptr, 16)));
    return Digest::from_bytes(raw);
}

py::bytes from_bytes(const Bytes& b) {
    return py::bytes(reinterpret_cast<const char*>(b.data()), b.size());
}

}  // namespace

PYBIND11_MODULE(_linsbft, m) {
    m.doc() = "BFT consensus simulator core";

    py::class_<Scenario>(m, "Scenario")
        .def(py::init<>())
        .def_readwrite("name", &Scenario::name)
        .def_readwrite("n", &Scenario::n)
        .def_readwrite("f", &Scenario::f)
        .def_readwrite("standby", &Scenario::standby)
        .def_readwrite("delta", &Scenario::delta)
        .def_readwrite("delta_t_f", &Scenario::delta_t_f)
        .def_readwrite("gst", &Scenario::gst)
        .def_readwrite("pre_gst_drop_pct", &Scenario::pre_gst_drop_pct)
        .def_readwrite("seed", &Scenario::seed)
        .def_readwrite("target", &Scenario::target)
        .def_readwrite("max_ticks", &Scenario::max_ticks)
        .def_readwrite("epoch_length", &Scenario::epoch_length)
        .def_readwrite("block_txs", &Scenario::block_txs)
        .def_readwrite("coinbase", &Scenario::coinbase)
        .def_readwrite("stakes", &Scenario::stakes)
        .def_readwrite("all_to_all", &Scenario::all_to_all)
        .def_readwrite("fault_mode", &Scenario::fault_mode)
        .def_readwrite("random_kinds", &Scenario::random_kinds)
        .def("validate", &Scenario::validate)
        .def("to_text", &Scenario::to_text)
        .def_static("parse", &Scenario::parse, py::arg("text"))
        .def_static("load", &Scenario::load, py::arg("path"));

    py::class_<HeightStats>(m, "HeightStats")
        .def_readonly("rounds_used", &HeightStats::rounds_used)
        .def_readonly("honest_msgs", &HeightStats::honest_msgs)
        .def_readonly("honest_bytes", &HeightStats::honest_bytes)
        .def_readonly("finalized", &HeightStats::finalized)
        .def("finalize_latency", &HeightStats::finalize_latency);

    py::class_<RunResult>(m, "RunResult")
        .def_readonly("scenario_name", &RunResult::scenario_name)
        .def_readonly("seed", &RunResult::seed)
        .def_readonly("n", &RunResult::n)
        .def_readonly("f", &RunResult::f)
        .def_readonly("target", &RunResult::target)
        .def_readonly("reached_target", &RunResult::reached_target)
        .def_readonly("all_final_tick", &RunResult::all_final_tick)
        .def_readonly("deadlocked", &RunResult::deadlocked)
        .def_readonly("safety_ok", &RunResult::safety_ok)
        .def_readonly("safety_detail", &RunResult::safety_detail)
        .def_readonly("l1_violations", &RunResult::l1_violations)
        .def_readonly("l2_violations", &RunResult::l2_violations)
        .def_readonly("l3_violations", &RunResult::l3_violations)
        .def_readonly("end_tick", &RunResult::end_tick)
        .def_readonly("events", &RunResult::events)
        .def_readonly("heights", &RunResult::heights)
        .def_readonly("honest_msgs_total", &RunResult::honest_msgs_total)
        .def_readonly("honest_bytes_total", &RunResult::honest_bytes_total)
        .def_readonly("dkg_msgs_total", &RunResult::dkg_msgs_total)
        .def_readonly("txs_total", &RunResult::txs_total)
        .def_readonly("evidence", &RunResult::evidence)
        .def_readonly("cert_broadcasters", &RunResult::cert_broadcasters)
        .def_readonly("rewards", &RunResult::rewards)
        .def_readonly("final_hex", &RunResult::final_hex)
        .def_readonly("trace", &RunResult::trace)
        .def("mean_rounds", &RunResult::mean_rounds, py::arg("from_h"), py::arg("to_h"))
        .def("msgs_between", &RunResult::msgs_between, py::arg("from_h"), py::arg("to_h"));

    py::class_<LivenessVerdict>(m, "LivenessVerdict")
        .def_readonly("bound_ticks", &LivenessVerdict::bound_ticks)
        .def_readonly("worst_ticks", &LivenessVerdict::worst_ticks)
        .def_readonly("detail", &LivenessVerdict::detail)
        .def("ok", &LivenessVerdict::ok)
        .def("name", &LivenessVerdict::name);

    py::class_<RunReport>(m, "RunReport")
        .def_readonly("result", &RunReport::result)
        .def_readonly("liveness", &RunReport::liveness)
        .def_readonly("all_ok", &RunReport::all_ok)
        .def_readonly("jsonl", &RunReport::jsonl)
        .def_readonly("table", &RunReport::table)
        .def_readonly("has_minimized", &RunReport::has_minimized)
        .def_readonly("minimized", &RunReport::minimized);

    py::class_<ComplexityPoint>(m, "ComplexityPoint")
        .def_readonly("n", &ComplexityPoint::n)
        .def_readonly("f", &ComplexityPoint::f)
        .def_readonly("msgs_per_height", &ComplexityPoint::msgs_per_height);

    py::class_<ComplexityReport>(m, "ComplexityReport")
        .def_readonly("points", &ComplexityReport::points)
        .def_readonly("ratios", &ComplexityReport::ratios)
        .def_readonly("slope_c", &ComplexityReport::slope_c)
        .def_readonly("mean_ratio", &ComplexityReport::mean_ratio)
        .def_readonly("linear_ok", &ComplexityReport::linear_ok)
        .def_readonly("detail", &ComplexityReport::detail);

    py::class_<ViewChangeStats>(m, "ViewChangeStats")
        .def_readonly("p", &ViewChangeStats::p)
        .def_readonly("heights", &ViewChangeStats::heights)
        .def_readonly("mean_rounds", &ViewChangeStats::mean_rounds)
        .def_readonly("expected", &ViewChangeStats::expected)
        .def_readonly("sigma_mean", &ViewChangeStats::sigma_mean)
        .def_readonly("within", &ViewChangeStats::within)
        .def_readonly("detail", &ViewChangeStats::detail);

    m.def("run_scenario", &run_scenario, py::arg("scenario"),
          "Simulate one scenario and return the full report.");
    m.def(
        "run_text",
        [](const std::string& text) { return run_scenario(Scenario::parse(text)); },
        py::arg("text"), "Parse scenario text, run it, return the report.");
    m.def(
        "run_file",
        [](const std::string& path) { return run_scenario(Scenario::load(path)); },
        py::arg("path"), "Load a scenario file, run it, return the report.");

    m.def(
        "scan_trace",
        [](const std::string& text) {
            SafetyVerdict v = scan_trace(text);
            return py::make_tuple(v.ok, v.detail);
        },
        py::arg("trace"),
        "Check a trace for conflicting finalizations; returns (ok, detail).");

    m.def("measure_complexity", &measure_complexity, py::arg("ns"),
          py::arg("base"), py::arg("all_to_all") = false,
          "Per-height message counts across validator set sizes.");
    m.def("view_change_stats", &view_change_stats, py::arg("base"),
          py::arg("heights"),
          "Mean rounds per height under random silent faults vs. 1/(1-p).");
    m.def("minimize_counterexample", &minimize_counterexample, py::arg("scenario"),
          "Shrink the fault/netdrop schedule while the run still fails.");

    m.def("timeout_collect", &timeout_collect, py::arg("i"), py::arg("delta"),
          py::arg("cap_exp") = 16, "Collector timeout for round index i.");
    m.def("timeout_propose", &timeout_propose, py::arg("i"), py::arg("delta"),
          py::arg("cap_exp") = 16, "Proposal timeout for round index i.");
    m.def("dur_ticks", &dur_ticks, py::arg("h"), py::arg("h2"), py::arg("r2"),
          py::arg("delta_t_f"), py::arg("delta"),
          "Admission window for a message of round (h2, r2) seen from height h.");

    m.def(
        "select_collector",
        [](const py::bytes& cert_wire, uint64_t v, uint32_t n) {
            return select_collector(to_bytes(cert_wire), v, n);
        },
        py::arg("cert_wire"), py::arg("v"), py::arg("n"),
        "Uniform collector draw from certificate bytes and round number.");
    m.def(
        "select_collector_weighted",
        [](const py::bytes& cert_wire, uint64_t v, const std::vector<uint64_t>& stakes) {
            return select_collector_weighted(to_bytes(cert_wire), v, stakes);
        },
        py::arg("cert_wire"), py::arg("v"), py::arg("stakes"),
        "Stake-weighted collector draw.");

    m.def(
        "tx_encode",
        [](uint64_t fee, const py::bytes& payload) {
            Transaction tx{fee, to_bytes(payload)};
            return from_bytes(tx.wire());
        },
        py::arg("fee"), py::arg("payload"), "Canonical transaction encoding.");
    m.def(
        "block_hash_hex",
        [](uint64_t height, uint64_t round, const std::string& prehash_hex,
           uint32_t proposer, const std::vector<std::pair<uint64_t, py::bytes>>& txs) {
            Block b;
            b.height = height;
            b.round = round;
            b.prehash = digest_from_hex(prehash_hex);
            b.proposer = proposer;
            for (auto& [fee, payload] : txs)
                b.txs.push_back(Transaction{fee, to_bytes(payload)});
            return b.hash().hex();
        },
        py::arg("height"), py::arg("round"), py::arg("prehash_hex"),
        py::arg("proposer"), py::arg("txs"),
        "SHA-256 of the canonical block encoding, as hex.");
    m.def("genesis_hash_hex", [] { return genesis_block().hash().hex(); },
          "Hash of the shared height-0 block.");
}
