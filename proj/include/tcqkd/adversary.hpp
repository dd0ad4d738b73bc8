#pragma once

#include <cstdint>
#include <optional>

#include "tcqkd/protocol.hpp"

namespace tcqkd {

enum class AmbiguousAction { GuessResendFull, ResendShortSlot4, Block };

struct AttackStrategy {
    double intercept_fraction = 0.0;  // p
    AmbiguousAction ambiguous_action = AmbiguousAction::GuessResendFull;
    // unambiguous verdicts always get a faithful full-duration resend
};

// Precomputed shapes and overlap tables shared by the evaluators. Eve's
// faithful resend uses the honest shape; her slot-4 resend is a T/2 square
// whose autocorrelation at T/2 vanishes.
struct AttackContext {
    ProtocolConfig cfg;
    PulseShape honest;
    PulseShape short_pulse;
    double gamma_honest = 0.0;  // autocorrelation(honest, T/2)
    double gamma_short = 0.0;   // autocorrelation(short, T/2), 0 for squares
};

AttackContext make_attack_context(const ProtocolConfig& cfg, PulseShape honest_shape);

struct AttackOutcome {
    double qber_induced = 0.0;
    double gamma_avg = 0.0;        // mean autocorrelation of pulses reaching Bob at T/2
    double info_eve = 0.0;         // bits per sifted bit
    double sift_rate = 0.0;        // unambiguous fraction of Bob's key detections
    double info_eve_per_pulse = 0.0;  // info_eve * sift_rate, per detected key pulse
    // Monte Carlo only: one-sigma statistical errors and raw counts
    double qber_se = 0.0;
    double gamma_se = 0.0;
    double info_se = 0.0;
    int64_t n_detected = 0;
    int64_t n_sifted = 0;
    bool flagged = false;  // no sifted events
};

// Eve's measurement of one pulse: ideal efficiency, no jitter, same slot
// geometry as Bob. She obtains a verdict for every intercepted pulse; her
// resend reproduces the coherent-pulse statistics, so interception leaves
// Bob's rates untouched.
SlotVerdict eve_intercept(const PulseShape& shape, double emission_offset_ns,
                          const ProtocolConfig& cfg, Rng& rng);

struct EveResend {
    const PulseShape* shape = nullptr;  // nullptr when the pulse is blocked
    double emission_offset_ns = 0.0;
    int guessed_bit = -1;  // >= 0 only on the guess branch
};

EveResend eve_resend(SlotVerdict verdict, const AttackStrategy& strategy,
                     const AttackContext& ctx, Rng& rng);

// Closed-form branch enumeration over (Alice bit x Eve verdict x action x Bob
// slot). Exact for square pulses, where the slot overlap integrals are exact.
AttackOutcome evaluate_strategy_exact(const AttackStrategy& strategy, const AttackContext& ctx);

// Per-pulse probability weights behind the exact outcome; the security module
// mixes strategies on these.
struct StrategyWeights {
    double detected = 0.0;
    double sifted = 0.0;
    double wrong = 0.0;
    double unamb_sifted = 0.0;
    double guess_sifted = 0.0;
    double guess_wrong = 0.0;
    double gamma_weight = 0.0;
};

StrategyWeights evaluate_strategy_weights(const AttackStrategy& strategy, const AttackContext& ctx);
AttackOutcome outcome_from_weights(const StrategyWeights& w);

// Monte Carlo cross-check driven through the photonics and protocol modules:
// one trial = one clock pulse with Poisson photon statistics. Trials run in
// fixed-size blocks with per-block rng streams, so the result does not depend
// on the thread count.
AttackOutcome evaluate_strategy_mc(const AttackStrategy& strategy, const AttackContext& ctx,
                                   double mu, int64_t n_trials, uint64_t seed,
                                   ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace tcqkd
