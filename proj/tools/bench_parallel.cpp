// Benchmarks the OpenMP kernels against their serial reference paths and
// checks that both produce identical results.

#include <chrono>
#include <cstdio>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tcqkd/harness.hpp"
#include "tcqkd/io.hpp"

using namespace tcqkd;
using Clock = std::chrono::steady_clock;

namespace {

double seconds(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

bool same_events(const std::vector<DetectionEvent>& a, const std::vector<DetectionEvent>& b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (a[i].sequence_id != b[i].sequence_id || a[i].channel != b[i].channel ||
            a[i].timestamp_ns != b[i].timestamp_ns)
            return false;
    return true;
}

void row(const char* name, double t_serial, double t_parallel, bool identical) {
    std::printf("%-22s %9.3f s %9.3f s %7.2fx   %s\n", name, t_serial, t_parallel,
                t_serial / t_parallel, identical ? "identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
    std::printf("OpenMP not available, both columns run serially\n");
#endif
    std::printf("%-22s %11s %11s %9s\n", "kernel", "serial", "openmp", "speedup");

    ExperimentConfig cfg;  // paper calibration
    cfg.rng_seed = 99;

    auto t0 = Clock::now();
    const SimulationResult sim_s = run_sequences(cfg, ExecPolicy::Serial);
    auto t1 = Clock::now();
    const SimulationResult sim_p = run_sequences(cfg, ExecPolicy::Parallel);
    auto t2 = Clock::now();
    row("sequence simulation", seconds(t0, t1), seconds(t1, t2),
        same_events(sim_s.events, sim_p.events));

    const auto grid = make_delay_grid(cfg.scan_min_ns, cfg.scan_max_ns, cfg.scan_step_ns);
    auto t3 = Clock::now();
    const ScanResult scan_s = qber_scan(sim_s.events, sim_s.truth, grid, cfg.protocol,
                                        ExecPolicy::Serial);
    auto t4 = Clock::now();
    const ScanResult scan_p = qber_scan(sim_s.events, sim_s.truth, grid, cfg.protocol,
                                        ExecPolicy::Parallel);
    auto t5 = Clock::now();
    row("qber delay scan", seconds(t3, t4), seconds(t4, t5),
        scan_s.best_delay_ns == scan_p.best_delay_ns &&
            scan_s.report.n_wrong == scan_p.report.n_wrong &&
            scan_s.report.sifted() == scan_p.report.sifted());

    const AttackContext ctx = make_attack_context(ProtocolConfig{}, make_square(20.0));
    const AttackStrategy strat{0.5, AmbiguousAction::GuessResendFull};
    auto t6 = Clock::now();
    const AttackOutcome mc_s = evaluate_strategy_mc(strat, ctx, 0.1, 2'000'000, 7,
                                                    ExecPolicy::Serial);
    auto t7 = Clock::now();
    const AttackOutcome mc_p = evaluate_strategy_mc(strat, ctx, 0.1, 2'000'000, 7,
                                                    ExecPolicy::Parallel);
    auto t8 = Clock::now();
    row("attack monte carlo", seconds(t6, t7), seconds(t7, t8),
        mc_s.qber_induced == mc_p.qber_induced && mc_s.n_sifted == mc_p.n_sifted &&
            mc_s.gamma_avg == mc_p.gamma_avg);

    const auto sgrid = build_strategy_grid(StrategyGridSpec{}, ctx);
    auto t9 = Clock::now();
    const SecurityCurve cv_s = compute_curve(0.084, sgrid, 0.20, 0.001, ExecPolicy::Serial);
    auto t10 = Clock::now();
    const SecurityCurve cv_p = compute_curve(0.084, sgrid, 0.20, 0.001, ExecPolicy::Parallel);
    auto t11 = Clock::now();
    bool same_curve = cv_s.points.size() == cv_p.points.size();
    for (size_t i = 0; same_curve && i < cv_s.points.size(); ++i)
        same_curve = cv_s.points[i].i_ae == cv_p.points[i].i_ae;
    row("security curve", seconds(t9, t10), seconds(t10, t11), same_curve);
    return 0;
}
