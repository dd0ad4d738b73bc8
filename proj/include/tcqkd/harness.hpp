#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tcqkd/adversary.hpp"
#include "tcqkd/estimation.hpp"
#include "tcqkd/protocol.hpp"
#include "tcqkd/security.hpp"

namespace tcqkd {

enum class PhaseMode {
    UniformPerSequence,  // free-running phase, one uniform draw per sequence
    UniformScan,         // deterministic grid 2 pi (i + 1/2) / n_sequences
    Fixed,
};

enum class ShapeKind { Square, Edged, Csv };

struct ExperimentConfig {
    ProtocolConfig protocol;

    ShapeKind shape_kind = ShapeKind::Edged;
    double rise_ns = 3.0;
    double decay_ns = 3.0;
    std::optional<double> target_fwhm_ns = 18.7;
    std::string shape_csv_path;

    double mu = 0.1;
    double transmission = 0.353125;  // end-to-end channel knob, see calibration note
    int64_t n_sequences = 290;
    double sequence_duration_ms = 3.2;

    DetectorParams det_key{0.5, jitter_sigma_from_fwhm(0.3), 0.0, 0.1};
    DetectorParams det_mz{0.5, jitter_sigma_from_fwhm(0.3), 0.0, 0.1};

    double interferometer_delay_ns = 10.0;
    PhaseMode phase_mode = PhaseMode::UniformPerSequence;
    double fixed_phase = 0.0;

    std::optional<AttackStrategy> attack;

    uint64_t rng_seed = 1;
    double propagation_delay_ns = 0.0;

    PatternKind pattern = PatternKind::Alternating;
    int fixed_bit = 0;

    // Extra slot-flip error process: each unambiguous key detection is moved
    // to the opposite bit slot with this probability.
    double slot_error_prob = 0.0;

    double scan_min_ns = 0.0;
    double scan_max_ns = 100.0;
    double scan_step_ns = 0.25;

    int64_t pulses_per_sequence() const;
    double sequence_duration_ns() const { return sequence_duration_ms * 1e6; }
    void validate() const;
    PulseShape build_shape() const;
};

struct SimulationResult {
    std::vector<DetectionEvent> events;  // sorted by (sequence, timestamp, channel)
    TruthRecord truth;
    std::vector<ContrastSample> contrast_samples;  // one per sequence
};

// One full 3.2 ms sequence: per clock Alice emits, Eve optionally intercepts,
// the channel attenuates, a 50/50 splitter routes each photon, and the three
// counters detect; dark counts cover the whole window. Deterministic given
// the rng state.
std::vector<DetectionEvent> run_sequence(const ExperimentConfig& cfg, const PulseShape& shape,
                                         const AttackContext* attack_ctx,
                                         const std::vector<Symbol>& symbols, int64_t sequence_id,
                                         double phase, Rng& rng);

// All sequences, each on its own rng stream Rng(seed, sequence_id); the
// parallel path is bit-identical to the serial one.
SimulationResult run_sequences(const ExperimentConfig& cfg,
                               ExecPolicy policy = ExecPolicy::Parallel);

struct RunReport {
    bool qber_flagged = false;
    double qber_all = 0.0;
    double qber_all_error = 0.0;  // binomial
    double qber_last = 0.0;       // the paper measured the last sequence only
    bool qber_last_flagged = false;
    double best_delay_ns = 0.0;
    SiftReport sift_all;

    bool gamma_flagged = false;
    GammaEstimate gamma;
    double gamma_3sigma = 0.0;
    double gamma_th = 0.0;
    double dc_central = 0.0;
    double dc_3sigma = 0.0;

    bool security_flagged = false;
    double i_ab = 0.0;
    double i_ae = 0.0;
    double advantage_per_sifted = 0.0;
    double advantage_per_pulse = 0.0;
    double max_secure_qber_at_dc = 0.0;
    double dc_used = 0.0;

    int64_t counts_key = 0;
    int64_t counts_mz_plus = 0;
    int64_t counts_mz_minus = 0;
    std::vector<std::string> flags;
};

// Full analysis chain: QBER scan on the key events, gamma estimation on the
// interferometer counts, contrast loss against the shape's own gamma, and the
// information advantage at the measured operating point.
RunReport run_experiment(const ExperimentConfig& cfg, ExecPolicy policy = ExecPolicy::Parallel);

// Analysis on existing data (shared by run_experiment and the CLI analyze
// paths, so file round trips reproduce in-memory results exactly).
RunReport analyze(const SimulationResult& sim, const ExperimentConfig& cfg,
                  ExecPolicy policy = ExecPolicy::Parallel);

}  // namespace tcqkd
