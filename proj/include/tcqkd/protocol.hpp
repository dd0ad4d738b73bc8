#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tcqkd/photonics.hpp"
#include "tcqkd/rng.hpp"

namespace tcqkd {

enum class Variant { TwoState, FourState };

// Serial path is the reference; Parallel uses OpenMP with the same per-item
// code, so the two must agree bit for bit.
enum class ExecPolicy { Serial, Parallel };

struct ProtocolConfig {
    double clock_period_ns = 100.0;
    double pulse_duration_ns = 20.0;  // T
    Variant variant = Variant::TwoState;

    double bit_delay_ns() const { return 0.5 * pulse_duration_ns; }
    double slot_width_ns() const { return 0.5 * pulse_duration_ns; }
    void validate() const;  // throws on clock_period <= 2T etc.
};

// Alice's pulse alphabet. b and c carry bits 0 and 1; a and d carry no key
// bit and exist only in the four-state variant.
enum class Symbol : uint8_t { a, b, c, d };

char symbol_to_char(Symbol s);
Symbol symbol_from_char(char c);

enum class SlotVerdict : uint8_t { Bit0, Bit1, Ambiguous, OutOfWindow };

// Emission delay of a symbol with respect to its clock edge:
// b -> 0, c -> +T/2, a -> -T/2, d -> +T. Throws for a/d under TwoState.
double emission_offset(Symbol s, const ProtocolConfig& cfg);

// Slot geometry, with t' = timestamp - clock_index*period - delay:
// [0,T/2) -> Bit0 (slot 3), [T/2,T) -> Ambiguous (slot 4),
// [T,3T/2) -> Bit1 (slot 5), anything else OutOfWindow.
SlotVerdict classify_slot(double timestamp_ns, int64_t clock_index, double propagation_delay_ns,
                          const ProtocolConfig& cfg);

// Same classification with the clock index recovered by floor division.
struct ClassifiedEvent {
    int64_t clock_index;
    SlotVerdict verdict;
};
ClassifiedEvent classify_event(double timestamp_ns, double propagation_delay_ns,
                               const ProtocolConfig& cfg);

// Alice's record for one run: symbols[sequence][clock_index].
using TruthRecord = std::vector<std::vector<Symbol>>;

struct SiftReport {
    int64_t n_correct = 0;
    int64_t n_wrong = 0;
    int64_t n_ambiguous = 0;
    int64_t n_out = 0;
    // Detections at a/d clocks, by verdict; excluded from the key.
    std::array<int64_t, 4> decoy_counts{};

    int64_t sifted() const { return n_correct + n_wrong; }
    bool degenerate() const { return sifted() == 0; }
    double error_rate() const;  // n_wrong / sifted; throws when degenerate
    double binomial_error() const;
};

// Counts every KEY-channel event against Alice's record at the given
// propagation delay. Events on other channels are ignored.
SiftReport sift(std::span<const DetectionEvent> events, const TruthRecord& truth,
                double propagation_delay_ns, const ProtocolConfig& cfg);

struct ScanResult {
    double best_delay_ns = 0.0;
    SiftReport report;
    bool flagged = false;  // every candidate delay was degenerate
};

// Evaluates sift over the candidate delays and keeps the minimum error rate;
// ties go to the smallest delay (exact integer comparison, no FP ties).
// Delays retaining fewer than half the peak in-window (sifted + ambiguous)
// count are not synchronization candidates and are skipped.
ScanResult qber_scan(std::span<const DetectionEvent> events, const TruthRecord& truth,
                     std::span<const double> delay_grid_ns, const ProtocolConfig& cfg,
                     ExecPolicy policy = ExecPolicy::Parallel);

std::vector<double> make_delay_grid(double min_ns, double max_ns, double step_ns);

enum class PatternKind { Alternating, Random, Fixed };

std::vector<Symbol> make_alice_sequence(PatternKind pattern, int fixed_bit, int64_t n_clocks,
                                        Variant variant, Rng& rng);

}  // namespace tcqkd
