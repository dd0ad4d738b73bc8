#include "tcqkd/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tcqkd {

void ProtocolConfig::validate() const {
    if (pulse_duration_ns <= 0.0) throw std::invalid_argument("pulse duration must be > 0");
    if (clock_period_ns <= 2.0 * pulse_duration_ns)
        throw std::invalid_argument("clock period must exceed twice the pulse duration");
}

char symbol_to_char(Symbol s) {
    switch (s) {
        case Symbol::a: return 'a';
        case Symbol::b: return 'b';
        case Symbol::c: return 'c';
        case Symbol::d: return 'd';
    }
    return '?';
}

Symbol symbol_from_char(char c) {
    switch (c) {
        case 'a': return Symbol::a;
        case 'b': return Symbol::b;
        case 'c': return Symbol::c;
        case 'd': return Symbol::d;
    }
    throw std::invalid_argument(std::string("unknown symbol: ") + c);
}

double emission_offset(Symbol s, const ProtocolConfig& cfg) {
    const double half = cfg.bit_delay_ns();
    switch (s) {
        case Symbol::b: return 0.0;
        case Symbol::c: return half;
        case Symbol::a:
            if (cfg.variant == Variant::TwoState)
                throw std::invalid_argument("symbol a is not part of the two-state alphabet");
            return -half;
        case Symbol::d:
            if (cfg.variant == Variant::TwoState)
                throw std::invalid_argument("symbol d is not part of the two-state alphabet");
            return cfg.pulse_duration_ns;
    }
    throw std::invalid_argument("invalid symbol");
}

SlotVerdict classify_slot(double timestamp_ns, int64_t clock_index, double propagation_delay_ns,
                          const ProtocolConfig& cfg) {
    const double t = timestamp_ns - static_cast<double>(clock_index) * cfg.clock_period_ns -
                     propagation_delay_ns;
    const double w = cfg.slot_width_ns();
    if (t < 0.0) return SlotVerdict::OutOfWindow;
    if (t < w) return SlotVerdict::Bit0;
    if (t < 2.0 * w) return SlotVerdict::Ambiguous;
    if (t < 3.0 * w) return SlotVerdict::Bit1;
    return SlotVerdict::OutOfWindow;
}

ClassifiedEvent classify_event(double timestamp_ns, double propagation_delay_ns,
                               const ProtocolConfig& cfg) {
    const double t = timestamp_ns - propagation_delay_ns;
    const auto idx = static_cast<int64_t>(std::floor(t / cfg.clock_period_ns));
    return {idx, classify_slot(timestamp_ns, idx, propagation_delay_ns, cfg)};
}

double SiftReport::error_rate() const {
    if (degenerate()) throw std::runtime_error("sift report has no unambiguous detections");
    return static_cast<double>(n_wrong) / static_cast<double>(sifted());
}

double SiftReport::binomial_error() const {
    if (degenerate()) return 0.0;
    const double q = error_rate();
    return std::sqrt(q * (1.0 - q) / static_cast<double>(sifted()));
}

SiftReport sift(std::span<const DetectionEvent> events, const TruthRecord& truth,
                double propagation_delay_ns, const ProtocolConfig& cfg) {
    SiftReport rep;
    for (const auto& ev : events) {
        if (ev.channel != Channel::KEY) continue;
        const auto [idx, verdict] = classify_event(ev.timestamp_ns, propagation_delay_ns, cfg);
        const auto seq = static_cast<size_t>(ev.sequence_id);
        if (ev.sequence_id < 0 || seq >= truth.size() || idx < 0 ||
            static_cast<size_t>(idx) >= truth[seq].size()) {
            ++rep.n_out;
            continue;
        }
        const Symbol sym = truth[seq][static_cast<size_t>(idx)];
        if (sym == Symbol::a || sym == Symbol::d) {
            ++rep.decoy_counts[static_cast<size_t>(verdict)];
            continue;
        }
        switch (verdict) {
            case SlotVerdict::Ambiguous: ++rep.n_ambiguous; break;
            case SlotVerdict::OutOfWindow: ++rep.n_out; break;
            case SlotVerdict::Bit0: (sym == Symbol::b ? rep.n_correct : rep.n_wrong)++; break;
            case SlotVerdict::Bit1: (sym == Symbol::c ? rep.n_correct : rep.n_wrong)++; break;
        }
    }
    return rep;
}

ScanResult qber_scan(std::span<const DetectionEvent> events, const TruthRecord& truth,
                     std::span<const double> delay_grid_ns, const ProtocolConfig& cfg,
                     ExecPolicy policy) {
    if (delay_grid_ns.empty()) throw std::invalid_argument("delay grid is empty");

    std::vector<SiftReport> reports(delay_grid_ns.size());
    const auto n = static_cast<int64_t>(delay_grid_ns.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (policy == ExecPolicy::Parallel)
#endif
    for (int64_t i = 0; i < n; ++i)
        reports[static_cast<size_t>(i)] = sift(events, truth, delay_grid_ns[static_cast<size_t>(i)], cfg);

    // order grid indices by delay so "smallest delay wins" is well defined
    std::vector<size_t> order(delay_grid_ns.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t l, size_t r) { return delay_grid_ns[l] < delay_grid_ns[r]; });

    // Synchronization must retain the detection mass. A misaligned delay can
    // look error-free while throwing most events out of the slot window
    // (stray jitter tails, or the alternating pattern aliased onto the
    // complementary bits), so only delays keeping at least half the peak
    // in-window count are candidates for the minimum.
    int64_t max_in_window = 0;
    for (const auto& rep : reports)
        max_in_window = std::max(max_in_window, rep.sifted() + rep.n_ambiguous);
    const int64_t min_in_window = std::max<int64_t>(1, (max_in_window + 1) / 2);

    ScanResult res;
    bool found = false;
    for (size_t i : order) {
        const SiftReport& rep = reports[i];
        if (rep.degenerate() || rep.sifted() + rep.n_ambiguous < min_in_window) continue;
        if (!found) {
            res.best_delay_ns = delay_grid_ns[i];
            res.report = rep;
            found = true;
            continue;
        }
        // rate < best_rate via integer cross-multiplication, exact
        const int64_t lhs = rep.n_wrong * res.report.sifted();
        const int64_t rhs = res.report.n_wrong * rep.sifted();
        if (lhs < rhs) {
            res.best_delay_ns = delay_grid_ns[i];
            res.report = rep;
        }
    }
    if (!found) {
        res.flagged = true;
        res.best_delay_ns = delay_grid_ns[order.front()];
        res.report = reports[order.front()];
    }
    return res;
}

std::vector<double> make_delay_grid(double min_ns, double max_ns, double step_ns) {
    if (step_ns <= 0.0 || step_ns > 1.0)
        throw std::invalid_argument("delay grid step must be in (0, 1] ns");
    if (max_ns < min_ns) throw std::invalid_argument("delay grid bounds are inverted");
    std::vector<double> grid;
    const auto n = static_cast<int64_t>(std::floor((max_ns - min_ns) / step_ns + 1e-9));
    grid.reserve(static_cast<size_t>(n) + 1);
    for (int64_t i = 0; i <= n; ++i) grid.push_back(min_ns + static_cast<double>(i) * step_ns);
    return grid;
}

std::vector<Symbol> make_alice_sequence(PatternKind pattern, int fixed_bit, int64_t n_clocks,
                                        Variant variant, Rng& rng) {
    if (n_clocks <= 0) throw std::invalid_argument("sequence needs at least one clock");
    std::vector<Symbol> out;
    out.reserve(static_cast<size_t>(n_clocks));
    for (int64_t k = 0; k < n_clocks; ++k) {
        switch (pattern) {
            case PatternKind::Alternating:
                out.push_back(k % 2 == 0 ? Symbol::b : Symbol::c);
                break;
            case PatternKind::Fixed:
                out.push_back(fixed_bit == 0 ? Symbol::b : Symbol::c);
                break;
            case PatternKind::Random: {
                if (variant == Variant::TwoState) {
                    out.push_back(rng.bernoulli(0.5) ? Symbol::c : Symbol::b);
                } else {
                    const auto r = static_cast<uint64_t>(rng.uniform01() * 4.0);
                    out.push_back(static_cast<Symbol>(std::min<uint64_t>(r, 3)));
                }
                break;
            }
        }
    }
    return out;
}

}  // namespace tcqkd
