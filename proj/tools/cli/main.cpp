#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "linsbft/harness.hpp"

namespace {

bool write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot write " << path << "\n";
        return false;
    }
    f << text;
    return true;
}

int cmd_run(const std::string& scenario_path, uint64_t seed, bool seed_set,
            const std::string& out_path) {
    linsbft::Scenario sc;
    try {
        sc = linsbft::Scenario::load(scenario_path);
        if (seed_set) sc.seed = seed;
        sc.validate();
    } catch (const std::exception& e) {
        std::cerr << "scenario rejected: " << e.what() << "\n";
        return 2;
    }

    linsbft::RunReport rep = linsbft::run_scenario(sc);
    std::cout << rep.table;

    if (!out_path.empty()) {
        if (!write_file(out_path, rep.jsonl)) return 2;
        if (!write_file(out_path + ".trace", rep.result.trace)) return 2;
        std::cout << "report: " << out_path << "\n";
        std::cout << "trace:  " << out_path << ".trace\n";
        if (rep.has_minimized) {
            std::string mpath = out_path + ".min.scenario";
            if (!write_file(mpath, rep.minimized.to_text())) return 2;
            std::cout << "minimized counterexample: " << mpath << " ("
                      << rep.minimized.faults.size() << " faults, "
                      << rep.minimized.netdrops.size() << " drops)\n";
        }
    } else if (rep.has_minimized) {
        std::cout << "minimized counterexample ("
                  << rep.minimized.faults.size() << " faults, "
                  << rep.minimized.netdrops.size() << " drops):\n"
                  << rep.minimized.to_text();
    }

    std::cout << (rep.all_ok ? "RESULT: pass\n" : "RESULT: fail\n");
    return rep.all_ok ? 0 : 1;
}

int cmd_sweep(const std::vector<uint32_t>& ns, uint64_t seed, uint64_t delta,
              uint64_t target, bool all_to_all, const std::string& out_path) {
    linsbft::Scenario base;
    base.name = "sweep";
    base.seed = seed;
    base.delta = delta;
    base.target = target;

    linsbft::ComplexityReport cr =
        linsbft::measure_complexity(ns, base, all_to_all);

    std::ostringstream data;
    data << "n\tmsgs_per_height\n";
    printf("%-6s %-16s %s\n", "n", "msgs/height", "fit c*n");
    for (const linsbft::ComplexityPoint& p : cr.points) {
        printf("%-6u %-16.3f %.3f\n", p.n, p.msgs_per_height,
               cr.slope_c * double(p.n));
        data << p.n << "\t" << p.msgs_per_height << "\n";
    }
    printf("growth ratios:");
    for (double r : cr.ratios) printf(" %.3f", r);
    printf("\n%s\n", cr.detail.c_str());

    bool ok;
    if (all_to_all) {
        ok = cr.mean_ratio >= 3.2 && cr.mean_ratio <= 4.8;
        printf("all-to-all control: mean ratio %.3f (expected near 4) -> %s\n",
               cr.mean_ratio, ok ? "pass" : "fail");
    } else {
        ok = cr.linear_ok;
        printf("linearity: %s\n", ok ? "pass" : "fail");
    }

    if (!out_path.empty() && !write_file(out_path, data.str())) return 2;
    return ok ? 0 : 1;
}

int cmd_check(const std::string& trace_path) {
    std::ifstream f(trace_path, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot read " << trace_path << "\n";
        return 2;
    }
    std::ostringstream buf;
    buf << f.rdbuf();
    linsbft::SafetyVerdict sv = linsbft::scan_trace(buf.str());
    if (sv.ok) {
        std::cout << "safety: ok (no conflicting finalizations)\n";
        return 0;
    }
    std::cout << "safety: VIOLATION - " << sv.detail << "\n";
    return 1;
}

int cmd_view_change(uint32_t n, uint32_t f, uint64_t heights, uint64_t seed,
                    uint64_t delta) {
    linsbft::Scenario base;
    base.n = n;
    base.f = f;
    base.seed = seed;
    base.delta = delta;
    linsbft::ViewChangeStats vs = linsbft::view_change_stats(base, heights);
    printf("%s\n", vs.detail.c_str());
    printf("within 3 sigma of geometric mean: %s\n", vs.within ? "yes" : "no");
    return vs.within ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Deterministic consensus simulator: runs scripted scenarios against a "
        "committee of validators and checks agreement, progress, and message "
        "complexity."};
    app.require_subcommand(1);

    std::string scenario_path, out_path, trace_path;
    uint64_t seed = 0, delta = 10, target = 60, heights = 1000;
    std::vector<uint32_t> ns{5, 9, 17, 33};
    uint32_t vc_n = 5, vc_f = 1;
    bool all_to_all = false;

    CLI::App* run = app.add_subcommand("run", "Run one scenario file");
    run->add_option("--scenario", scenario_path, "scenario file")
        ->required()
        ->check(CLI::ExistingFile);
    CLI::Option* seed_opt =
        run->add_option("--seed", seed, "override the scenario seed");
    run->add_option("--out", out_path,
                    "write the line-delimited report here (trace goes to "
                    "<out>.trace)");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "Message-complexity sweep over committee sizes");
    sweep->add_option("--n", ns, "committee sizes")->delimiter(',');
    sweep->add_option("--seed", seed, "base seed");
    sweep->add_option("--delta", delta, "network delay bound in ticks");
    sweep->add_option("--target", target, "heights per run");
    sweep->add_flag("--all-to-all", all_to_all,
                    "quadratic control mode: votes broadcast to everyone");
    sweep->add_option("--out", out_path, "write sweep data points here");

    CLI::App* check = app.add_subcommand("check", "Scan a trace for conflicts");
    check->add_option("--trace", trace_path, "trace file")
        ->required()
        ->check(CLI::ExistingFile);

    CLI::App* vc = app.add_subcommand(
        "view-change", "Mean rounds per height under random silent faults");
    vc->add_option("--n", vc_n, "committee size");
    vc->add_option("--f", vc_f, "faulty validators per height");
    vc->add_option("--heights", heights, "heights to measure");
    vc->add_option("--seed", seed, "seed");
    vc->add_option("--delta", delta, "network delay bound in ticks");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return cmd_run(scenario_path, seed, seed_opt->count() > 0,
                           out_path);
        if (sweep->parsed())
            return cmd_sweep(ns, seed, delta, target, all_to_all, out_path);
        if (check->parsed()) return cmd_check(trace_path);
        if (vc->parsed())
            return cmd_view_change(vc_n, vc_f, heights, seed, delta);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
