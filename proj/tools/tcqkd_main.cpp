// Command-line front end: simulation, chronogram analysis, gamma estimation,
// security diagrams, attack evaluation and range projection.

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tcqkd/harness.hpp"
#include "tcqkd/io.hpp"

namespace fs = std::filesystem;
using namespace tcqkd;

namespace {

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::string cur;
    for (char c : csv + ",") {
        if (c == ',') {
            if (!cur.empty()) out.push_back(std::stod(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    return out;
}

void print_report(const RunReport& rep) {
    std::printf("qber (all sequences)   %.6f +- %.6f%s\n", rep.qber_all, rep.qber_all_error,
                rep.qber_flagged ? "  [flagged: no unambiguous detections]" : "");
    std::printf("qber (last sequence)   %.6f%s\n", rep.qber_last,
                rep.qber_last_flagged ? "  [flagged]" : "");
    std::printf("best delay             %.3f ns\n", rep.best_delay_ns);
    std::printf("sifted %" PRId64 "  wrong %" PRId64 "  ambiguous %" PRId64 "  out-of-window %" PRId64 "\n",
                rep.sift_all.sifted(), rep.sift_all.n_wrong, rep.sift_all.n_ambiguous,
                rep.sift_all.n_out);
    if (!rep.gamma_flagged) {
        std::printf("gamma0                 %.6f (sigma_T %.6f, N_p %.2f, N_s %" PRId64 ")\n",
                    rep.gamma.gamma0, rep.gamma.sigma_total, rep.gamma.n_p, rep.gamma.n_s);
        std::printf("gamma_3sigma           %.6f\n", rep.gamma_3sigma);
        std::printf("gamma_th               %.6f  dC(central) %.4f  dC(3sigma) %.4f\n",
                    rep.gamma_th, rep.dc_central, rep.dc_3sigma);
    }
    if (!rep.security_flagged) {
        std::printf("I_AB %.4f  I_AE %.4f  advantage %.4f bits/sifted bit"
                    " (%.4f bits/detected pulse)\n",
                    rep.i_ab, rep.i_ae, rep.advantage_per_sifted, rep.advantage_per_pulse);
        std::printf("max secure qber at dC=%.4f: %.4f\n", rep.dc_used, rep.max_secure_qber_at_dc);
    }
    for (const auto& f : rep.flags) std::printf("flag: %s\n", f.c_str());
}

AmbiguousAction action_from(const std::string& name) {
    if (name == "guess") return AmbiguousAction::GuessResendFull;
    if (name == "short") return AmbiguousAction::ResendShortSlot4;
    if (name == "block") return AmbiguousAction::Block;
    throw CLI::ValidationError("--actions", "unknown action '" + name + "'");
}

const char* action_name(AmbiguousAction a) {
    switch (a) {
        case AmbiguousAction::GuessResendFull: return "guess";
        case AmbiguousAction::ResendShortSlot4: return "short";
        case AmbiguousAction::Block: return "block";
    }
    return "?";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"time-coding QKD simulator and analysis toolkit"};
    app.require_subcommand(1);

    // ---- simulate ----
    auto* sim_cmd = app.add_subcommand("simulate", "run the Monte Carlo experiment, write "
                                                   "chronogram/truth/samples CSV and a JSON report");
    std::string sim_config;
    std::string sim_out = ".";
    std::optional<uint64_t> sim_seed;
    sim_cmd->add_option("--config", sim_config, "experiment config file")->required();
    sim_cmd->add_option("--out", sim_out, "output directory");
    sim_cmd->add_option("--seed", sim_seed, "override the config rng seed");

    // ---- analyze-qber ----
    auto* qber_cmd = app.add_subcommand("analyze-qber", "sift a chronogram against a truth file "
                                                        "and scan the propagation delay");
    std::string qber_chrono, qber_truth, qber_config, qber_json;
    qber_cmd->add_option("--chronogram", qber_chrono, "chronogram CSV")->required();
    qber_cmd->add_option("--truth", qber_truth, "truth CSV")->required();
    qber_cmd->add_option("--config", qber_config, "config file (protocol geometry and scan grid)");
    qber_cmd->add_option("--json", qber_json, "also write the report as JSON");

    // ---- estimate-gamma ----
    auto* gamma_cmd = app.add_subcommand("estimate-gamma", "estimate the pulse autocorrelation "
                                                           "from interferometer count samples");
    std::string gamma_samples;
    double gamma_th_opt = 0.0;
    double gamma_k = 3.0;
    gamma_cmd->add_option("--samples", gamma_samples, "contrast-sample CSV")->required();
    gamma_cmd->add_option("--gamma-th", gamma_th_opt, "theoretical autocorrelation for dC");
    gamma_cmd->add_option("--k", gamma_k, "sigma multiplier for the lower bound");

    // ---- security-diagram ----
    auto* sec_cmd = app.add_subcommand("security-diagram", "emit I_AB / I_AE curves for a list "
                                                           "of relative contrast losses");
    std::string sec_dc = "0,0.061,0.084";
    std::string sec_out;
    double sec_qmax = 0.20, sec_qstep = 0.001, sec_pstep = 0.01, sec_qref = 0.033;
    sec_cmd->add_option("--dc", sec_dc, "comma-separated dC values");
    sec_cmd->add_option("--out", sec_out, "curve CSV path (default stdout)");
    sec_cmd->add_option("--q-max", sec_qmax, "largest QBER on the curves");
    sec_cmd->add_option("--q-step", sec_qstep, "QBER grid step (<= 0.001)");
    sec_cmd->add_option("--p-step", sec_pstep, "strategy grid step in p (<= 0.01)");
    sec_cmd->add_option("--q-ref", sec_qref, "QBER at which the summary advantage is printed");

    // ---- attack-eval ----
    auto* atk_cmd = app.add_subcommand("attack-eval", "tabulate intercept-resend outcomes, exact "
                                                      "tree vs Monte Carlo");
    std::string atk_p = "0,0.25,0.5,0.75,1";
    std::string atk_actions = "guess,short,block";
    std::string atk_out;
    int64_t atk_trials = 200000;
    uint64_t atk_seed = 1;
    double atk_mu = 0.1;
    atk_cmd->add_option("--p", atk_p, "comma-separated intercept fractions");
    atk_cmd->add_option("--actions", atk_actions, "comma-separated actions (guess,short,block)");
    atk_cmd->add_option("--trials", atk_trials, "Monte Carlo trials per strategy (>= 1e4)");
    atk_cmd->add_option("--seed", atk_seed, "Monte Carlo seed");
    atk_cmd->add_option("--mu", atk_mu, "mean photons per pulse in the Monte Carlo");
    atk_cmd->add_option("--out", atk_out, "table CSV path (default stdout)");

    // ---- range-projection ----
    auto* rng_cmd = app.add_subcommand("range-projection", "expected QBER and security flag "
                                                           "versus fiber distance");
    LinkBudget budget;
    double rng_dmax = 60.0, rng_dstep = 1.0, rng_dc = 0.084;
    std::string rng_out;
    rng_cmd->add_option("--eta", budget.detector_efficiency, "detector efficiency");
    rng_cmd->add_option("--dark", budget.dark_rate_hz, "dark count rate (counts/s)");
    rng_cmd->add_option("--loss", budget.loss_db_per_km, "fiber loss (dB/km)");
    rng_cmd->add_option("--mu", budget.mu, "mean photons per pulse");
    rng_cmd->add_option("--slot", budget.slot_width_ns, "slot width (ns)");
    rng_cmd->add_option("--dc", rng_dc, "operational relative contrast loss");
    rng_cmd->add_option("--d-max", rng_dmax, "largest distance (km)");
    rng_cmd->add_option("--d-step", rng_dstep, "distance step (km)");
    rng_cmd->add_option("--out", rng_out, "CSV path (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim_cmd->parsed()) {
            ExperimentConfig cfg = parse_config_file(sim_config);
            if (sim_seed) cfg.rng_seed = *sim_seed;
            fs::create_directories(sim_out);
            const SimulationResult sim = run_sequences(cfg);
            const RunReport rep = analyze(sim, cfg);
            write_chronogram_csv((fs::path(sim_out) / "chronogram.csv").string(), sim.events);
            write_truth_csv((fs::path(sim_out) / "truth.csv").string(), sim.truth);
            write_samples_csv((fs::path(sim_out) / "samples.csv").string(), sim.contrast_samples);
            write_report_json((fs::path(sim_out) / "report.json").string(), rep);
            print_report(rep);
        } else if (qber_cmd->parsed()) {
            ExperimentConfig cfg;
            if (!qber_config.empty()) cfg = parse_config_file(qber_config);
            SimulationResult sim;
            sim.events = read_chronogram_csv(qber_chrono);
            sim.truth = read_truth_csv(qber_truth);
            for (const auto& ev : sim.events) {
                while (sim.contrast_samples.size() <= static_cast<size_t>(ev.sequence_id))
                    sim.contrast_samples.push_back(
                        {static_cast<int64_t>(sim.contrast_samples.size()), 0, 0});
                if (ev.channel == Channel::MZ_PLUS)
                    ++sim.contrast_samples[static_cast<size_t>(ev.sequence_id)].n_plus;
                if (ev.channel == Channel::MZ_MINUS)
                    ++sim.contrast_samples[static_cast<size_t>(ev.sequence_id)].n_minus;
            }
            const RunReport rep = analyze(sim, cfg);
            print_report(rep);
            if (!qber_json.empty()) write_report_json(qber_json, rep);
        } else if (gamma_cmd->parsed()) {
            const auto samples = read_samples_csv(gamma_samples);
            const GammaEstimate est = estimate_gamma(samples);
            const double bound = gamma_lower_bound(est, gamma_k);
            std::printf("gamma0       %.6f\n", est.gamma0);
            std::printf("sigma_seq    %.6f (variance %.6e)\n", est.sigma_seq,
                        est.sigma_seq * est.sigma_seq);
            std::printf("sigma_total  %.6e\n", est.sigma_total);
            std::printf("N_p %.3f  N_s %" PRId64 "  mean C %.6f  mean C^2 %.6f\n", est.n_p,
                        est.n_s, est.mean_c, est.mean_c2);
            std::printf("gamma_%gsigma %.6f\n", gamma_k, bound);
            if (est.n_excluded > 0)
                std::printf("flag: %" PRId64 " zero-count sequences excluded\n", est.n_excluded);
            if (est.clamped_low) std::printf("flag: shot noise exceeds signal, gamma0 clamped to 0\n");
            if (est.clamped_high) std::printf("flag: estimate above unity, clamped to 1\n");
            if (gamma_th_opt > 0.0) {
                std::printf("dC(gamma0)      %.6f\n", relative_contrast_loss(est.gamma0, gamma_th_opt));
                std::printf("dC(gamma_%gsigma) %.6f\n", gamma_k,
                            relative_contrast_loss(bound, gamma_th_opt));
            }
        } else if (sec_cmd->parsed()) {
            ProtocolConfig pc;
            const AttackContext ctx = make_attack_context(pc, make_square(pc.pulse_duration_ns));
            StrategyGridSpec spec;
            spec.p_step = sec_pstep;
            const auto grid = build_strategy_grid(spec, ctx);
            std::vector<SecurityCurve> curves;
            for (double dc : parse_double_list(sec_dc)) {
                curves.push_back(compute_curve(dc, grid, sec_qmax, sec_qstep));
                const CrossingResult cr = max_secure_qber(dc, grid);
                std::fprintf(stderr, "dC=%.4f: I_AE(%.3f)=%.4f advantage=%.4f max_secure_qber=",
                             dc, sec_qref, mutual_info_ae(sec_qref, dc, grid),
                             advantage(sec_qref, dc, grid));
                if (cr.state == CrossingResult::State::Found)
                    std::fprintf(stderr, "%.4f\n", cr.q);
                else if (cr.state == CrossingResult::State::SecureOnRange)
                    std::fprintf(stderr, "none (secure over the scanned range)\n");
                else
                    std::fprintf(stderr, "none (insecure already at Q=0)\n");
            }
            if (sec_out.empty())
                write_curves_csv(std::cout, curves);
            else
                write_curves_csv(sec_out, curves);
        } else if (atk_cmd->parsed()) {
            ProtocolConfig pc;
            const AttackContext ctx = make_attack_context(pc, make_square(pc.pulse_duration_ns));
            std::string header =
                "p,action,method,qber,gamma_avg,info_eve,sift_rate,qber_se,gamma_se,info_se\n";
            std::string body;
            char buf[256];
            std::vector<AmbiguousAction> actions;
            {
                std::string cur;
                for (char c : atk_actions + ",") {
                    if (c == ',') {
                        if (!cur.empty()) actions.push_back(action_from(cur));
                        cur.clear();
                    } else cur += c;
                }
            }
            for (double p : parse_double_list(atk_p)) {
                for (AmbiguousAction a : actions) {
                    const AttackStrategy s{p, a};
                    const AttackOutcome ex = evaluate_strategy_exact(s, ctx);
                    std::snprintf(buf, sizeof buf, "%.4f,%s,exact,%.6f,%.6f,%.6f,%.6f,,,\n", p,
                                  action_name(a), ex.qber_induced, ex.gamma_avg, ex.info_eve,
                                  ex.sift_rate);
                    body += buf;
                    const AttackOutcome mc = evaluate_strategy_mc(s, ctx, atk_mu, atk_trials, atk_seed);
                    std::snprintf(buf, sizeof buf,
                                  "%.4f,%s,mc,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", p,
                                  action_name(a), mc.qber_induced, mc.gamma_avg, mc.info_eve,
                                  mc.sift_rate, mc.qber_se, mc.gamma_se, mc.info_se);
                    body += buf;
                }
            }
            if (atk_out.empty()) {
                std::fputs(header.c_str(), stdout);
                std::fputs(body.c_str(), stdout);
            } else {
                std::ofstream os(atk_out);
                if (!os) throw IoError("cannot write file: " + atk_out);
                os << header << body;
            }
        } else if (rng_cmd->parsed()) {
            ProtocolConfig pc;
            const AttackContext ctx = make_attack_context(pc, make_square(pc.pulse_duration_ns));
            const auto grid = build_strategy_grid(StrategyGridSpec{}, ctx);
            std::vector<double> distances;
            for (double d = 0.0; d <= rng_dmax + 1e-9; d += rng_dstep) distances.push_back(d);
            const RangeProjection proj = range_projection(budget, distances, rng_dc, grid);
            std::fprintf(stderr, "qber threshold %.4f", proj.qber_threshold);
            if (proj.secure_range_km)
                std::fprintf(stderr, ", secure range %.2f km\n", *proj.secure_range_km);
            else
                std::fprintf(stderr, ", secure over the scanned range\n");
            if (rng_out.empty())
                write_range_csv(std::cout, proj);
            else
                write_range_csv(rng_out, proj);
        }
    } catch (const IoError& e) {
        std::fprintf(stderr, "file error: %s\n", e.what());
        return 2;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "value error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
