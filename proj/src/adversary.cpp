#include "tcqkd/adversary.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcqkd/entropy.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tcqkd {

namespace {

struct SlotProbs {
    double bit0 = 0.0, amb = 0.0, bit1 = 0.0, out = 0.0;
};

SlotProbs slot_probs(const PulseShape& shape, double offset, const ProtocolConfig& cfg) {
    const double w = cfg.slot_width_ns();
    SlotProbs p;
    p.bit0 = intensity_fraction(shape, -offset, w - offset);
    p.amb = intensity_fraction(shape, w - offset, 2.0 * w - offset);
    p.bit1 = intensity_fraction(shape, 2.0 * w - offset, 3.0 * w - offset);
    p.out = std::max(0.0, 1.0 - p.bit0 - p.amb - p.bit1);
    return p;
}

double wrong_prob(const SlotProbs& p, int alice_bit) { return alice_bit == 0 ? p.bit1 : p.bit0; }

}  // namespace

AttackContext make_attack_context(const ProtocolConfig& cfg, PulseShape honest_shape) {
    cfg.validate();
    AttackContext ctx;
    ctx.cfg = cfg;
    ctx.honest = std::move(honest_shape);
    ctx.short_pulse = make_square(cfg.slot_width_ns(), ctx.honest.step);
    ctx.gamma_honest = autocorrelation(ctx.honest, cfg.bit_delay_ns());
    ctx.gamma_short = autocorrelation(ctx.short_pulse, cfg.bit_delay_ns());
    return ctx;
}

SlotVerdict eve_intercept(const PulseShape& shape, double emission_offset_ns,
                          const ProtocolConfig& cfg, Rng& rng) {
    const double arrival = emission_offset_ns + sample_emission_time(shape, rng);
    return classify_slot(arrival, 0, 0.0, cfg);
}

EveResend eve_resend(SlotVerdict verdict, const AttackStrategy& strategy, const AttackContext& ctx,
                     Rng& rng) {
    EveResend out;
    // OutOfWindow tells Eve nothing about the bit; she treats it like an
    // ambiguous result. It has zero probability for honest square pulses.
    const bool ambiguous = verdict == SlotVerdict::Ambiguous || verdict == SlotVerdict::OutOfWindow;
    if (!ambiguous) {
        out.shape = &ctx.honest;
        out.emission_offset_ns = verdict == SlotVerdict::Bit0 ? 0.0 : ctx.cfg.bit_delay_ns();
        return out;
    }
    switch (strategy.ambiguous_action) {
        case AmbiguousAction::GuessResendFull:
            out.guessed_bit = rng.bernoulli(0.5) ? 1 : 0;
            out.shape = &ctx.honest;
            out.emission_offset_ns = out.guessed_bit == 0 ? 0.0 : ctx.cfg.bit_delay_ns();
            break;
        case AmbiguousAction::ResendShortSlot4:
            out.shape = &ctx.short_pulse;
            out.emission_offset_ns = ctx.cfg.bit_delay_ns();
            break;
        case AmbiguousAction::Block:
            break;
    }
    return out;
}

StrategyWeights evaluate_strategy_weights(const AttackStrategy& strategy, const AttackContext& ctx) {
    const double p = strategy.intercept_fraction;
    if (p < 0.0 || p > 1.0) throw std::invalid_argument("intercept fraction must be in [0, 1]");
    const ProtocolConfig& cfg = ctx.cfg;
    StrategyWeights w;

    for (int alice_bit = 0; alice_bit < 2; ++alice_bit) {
        const double bit_w = 0.5;
        const double offset = alice_bit == 0 ? 0.0 : cfg.bit_delay_ns();
        const SlotProbs honest_bob = slot_probs(ctx.honest, offset, cfg);

        // untouched pulse
        {
            const double weight = bit_w * (1.0 - p);
            w.detected += weight;
            w.gamma_weight += weight * ctx.gamma_honest;
            w.sifted += weight * (honest_bob.bit0 + honest_bob.bit1);
            w.wrong += weight * wrong_prob(honest_bob, alice_bit);
        }

        // intercepted: Eve's verdict follows the same slot overlap integrals
        const SlotProbs eve = slot_probs(ctx.honest, offset, cfg);
        struct Branch {
            double prob;
            int resend_bit;  // -1 = ambiguous action
            bool unamb;
        };
        const Branch branches[] = {
            {eve.bit0, 0, true},
            {eve.bit1, 1, true},
            {eve.amb + eve.out, -1, false},
        };
        for (const Branch& br : branches) {
            const double weight = bit_w * p * br.prob;
            if (weight <= 0.0) continue;
            if (br.unamb) {
                const double ro = br.resend_bit == 0 ? 0.0 : cfg.bit_delay_ns();
                const SlotProbs bob = slot_probs(ctx.honest, ro, cfg);
                w.detected += weight;
                w.gamma_weight += weight * ctx.gamma_honest;
                const double sift = bob.bit0 + bob.bit1;
                w.sifted += weight * sift;
                w.wrong += weight * wrong_prob(bob, alice_bit);
                w.unamb_sifted += weight * sift;
                continue;
            }
            switch (strategy.ambiguous_action) {
                case AmbiguousAction::GuessResendFull:
                    for (int g = 0; g < 2; ++g) {
                        const double gw = weight * 0.5;
                        const double ro = g == 0 ? 0.0 : cfg.bit_delay_ns();
                        const SlotProbs bob = slot_probs(ctx.honest, ro, cfg);
                        w.detected += gw;
                        w.gamma_weight += gw * ctx.gamma_honest;
                        const double sift = bob.bit0 + bob.bit1;
                        const double wrong = wrong_prob(bob, alice_bit);
                        w.sifted += gw * sift;
                        w.wrong += gw * wrong;
                        w.guess_sifted += gw * sift;
                        w.guess_wrong += gw * wrong;
                    }
                    break;
                case AmbiguousAction::ResendShortSlot4: {
                    const SlotProbs bob = slot_probs(ctx.short_pulse, cfg.bit_delay_ns(), cfg);
                    w.detected += weight;
                    w.gamma_weight += weight * ctx.gamma_short;
                    w.sifted += weight * (bob.bit0 + bob.bit1);
                    w.wrong += weight * wrong_prob(bob, alice_bit);
                    break;
                }
                case AmbiguousAction::Block:
                    break;
            }
        }
    }
    return w;
}

AttackOutcome outcome_from_weights(const StrategyWeights& w) {
    AttackOutcome out;
    if (w.sifted <= 0.0 || w.detected <= 0.0) {
        out.flagged = true;
        return out;
    }
    out.qber_induced = w.wrong / w.sifted;
    out.gamma_avg = w.gamma_weight / w.detected;
    out.sift_rate = w.sifted / w.detected;
    double info = w.unamb_sifted;
    if (w.guess_sifted > 0.0) {
        const double r = w.guess_wrong / w.guess_sifted;
        info += w.guess_sifted * (1.0 - binary_entropy(std::clamp(r, 0.0, 1.0)));
    }
    out.info_eve = info / w.sifted;
    out.info_eve_per_pulse = out.info_eve * out.sift_rate;
    return out;
}

AttackOutcome evaluate_strategy_exact(const AttackStrategy& strategy, const AttackContext& ctx) {
    return outcome_from_weights(evaluate_strategy_weights(strategy, ctx));
}

namespace {

struct McTally {
    int64_t detected = 0;
    int64_t sifted = 0;
    int64_t wrong = 0;
    int64_t unamb_sifted = 0;
    int64_t guess_sifted = 0;
    int64_t guess_wrong = 0;
    double gamma_sum = 0.0;
    double gamma_sq_sum = 0.0;

    void merge(const McTally& o) {
        detected += o.detected;
        sifted += o.sifted;
        wrong += o.wrong;
        unamb_sifted += o.unamb_sifted;
        guess_sifted += o.guess_sifted;
        guess_wrong += o.guess_wrong;
        gamma_sum += o.gamma_sum;
        gamma_sq_sum += o.gamma_sq_sum;
    }
};

void run_mc_block(const AttackStrategy& strategy, const AttackContext& ctx, double mu,
                  int64_t n_trials, Rng rng, McTally& tally) {
    const ProtocolConfig& cfg = ctx.cfg;
    const DetectorParams ideal;  // unit efficiency, no jitter, 0.1 ns binning
    for (int64_t t = 0; t < n_trials; ++t) {
        const int alice_bit = rng.bernoulli(0.5) ? 1 : 0;
        const double offset = alice_bit == 0 ? 0.0 : cfg.bit_delay_ns();

        const PulseShape* shape = &ctx.honest;
        double send_offset = offset;
        double gamma = ctx.gamma_honest;
        bool intercepted = false;
        bool unamb_verdict = false;
        int guess = -1;
        if (rng.bernoulli(strategy.intercept_fraction)) {
            intercepted = true;
            const SlotVerdict verdict = eve_intercept(ctx.honest, offset, cfg, rng);
            unamb_verdict = verdict == SlotVerdict::Bit0 || verdict == SlotVerdict::Bit1;
            const EveResend resend = eve_resend(verdict, strategy, ctx, rng);
            if (resend.shape == nullptr) continue;  // blocked
            shape = resend.shape;
            send_offset = resend.emission_offset_ns;
            guess = resend.guessed_bit;
            gamma = shape == &ctx.short_pulse ? ctx.gamma_short : ctx.gamma_honest;
        }

        const PulseInstance inst{shape, send_offset, mu, 0};
        const auto events = key_detect(inst, ideal, cfg.clock_period_ns, 0, rng);
        for (const auto& ev : events) {
            ++tally.detected;
            tally.gamma_sum += gamma;
            tally.gamma_sq_sum += gamma * gamma;
            const SlotVerdict v = classify_slot(ev.timestamp_ns, 0, 0.0, cfg);
            if (v != SlotVerdict::Bit0 && v != SlotVerdict::Bit1) continue;
            ++tally.sifted;
            const int decoded = v == SlotVerdict::Bit0 ? 0 : 1;
            const bool is_wrong = decoded != alice_bit;
            if (is_wrong) ++tally.wrong;
            if (intercepted && unamb_verdict) ++tally.unamb_sifted;
            if (guess >= 0) {
                ++tally.guess_sifted;
                if (is_wrong) ++tally.guess_wrong;
            }
        }
    }
}

}  // namespace

AttackOutcome evaluate_strategy_mc(const AttackStrategy& strategy, const AttackContext& ctx,
                                   double mu, int64_t n_trials, uint64_t seed, ExecPolicy policy) {
    if (n_trials < 10000) throw std::invalid_argument("Monte Carlo needs at least 1e4 trials");
    if (mu < 0.0) throw std::invalid_argument("mean photon number must be >= 0");

    constexpr int64_t kBlock = 1 << 16;
    const int64_t n_blocks = (n_trials + kBlock - 1) / kBlock;
    std::vector<McTally> tallies(static_cast<size_t>(n_blocks));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::Parallel)
#endif
    for (int64_t b = 0; b < n_blocks; ++b) {
        const int64_t first = b * kBlock;
        const int64_t count = std::min(kBlock, n_trials - first);
        run_mc_block(strategy, ctx, mu, count, Rng(seed, static_cast<uint64_t>(b)),
                     tallies[static_cast<size_t>(b)]);
    }
    McTally tally;
    for (const auto& t : tallies) tally.merge(t);

    AttackOutcome out;
    out.n_detected = tally.detected;
    out.n_sifted = tally.sifted;
    if (tally.sifted == 0 || tally.detected == 0) {
        out.flagged = true;
        return out;
    }
    const auto nd = static_cast<double>(tally.detected);
    const auto ns = static_cast<double>(tally.sifted);
    out.qber_induced = static_cast<double>(tally.wrong) / ns;
    out.sift_rate = ns / nd;
    out.gamma_avg = tally.gamma_sum / nd;
    out.qber_se = std::sqrt(out.qber_induced * (1.0 - out.qber_induced) / ns);
    const double gamma_var = std::max(0.0, tally.gamma_sq_sum / nd - out.gamma_avg * out.gamma_avg);
    out.gamma_se = std::sqrt(gamma_var / nd);

    const double pu = static_cast<double>(tally.unamb_sifted) / ns;
    const double pg = static_cast<double>(tally.guess_sifted) / ns;
    double guess_term = 0.0;
    double r = 0.0;
    if (tally.guess_sifted > 0) {
        r = static_cast<double>(tally.guess_wrong) / static_cast<double>(tally.guess_sifted);
        guess_term = 1.0 - binary_entropy(r);
    }
    out.info_eve = pu + pg * guess_term;
    out.info_eve_per_pulse = out.info_eve * out.sift_rate;
    // delta-method error: spread of the per-sifted-bit contribution plus the
    // sensitivity of the entropy term to r
    const double mean_x = out.info_eve;
    const double ex2 = pu * 1.0 + pg * guess_term * guess_term;
    double var = std::max(0.0, ex2 - mean_x * mean_x) / ns;
    if (tally.guess_sifted > 0 && r > 0.0 && r < 1.0) {
        const double dh = std::log2((1.0 - r) / r);
        const double r_se = std::sqrt(r * (1.0 - r) / static_cast<double>(tally.guess_sifted));
        var += pg * pg * dh * dh * r_se * r_se;
    }
    out.info_se = std::sqrt(var);
    return out;
}

}  // namespace tcqkd
