#pragma once

#include <cstdint>
#include <vector>

#include "tcqkd/pulse.hpp"
#include "tcqkd/rng.hpp"

namespace tcqkd {

enum class Channel { KEY, MZ_PLUS, MZ_MINUS };

struct DetectorParams {
    double efficiency = 1.0;
    double jitter_sigma_ns = 0.0;
    double dark_rate_hz = 0.0;
    // Recording resolution: timestamps are binned to floor(t/resolution).
    // Bin edges then coincide with slot edges, so binning alone never moves
    // an event across a slot boundary. 0 disables binning.
    double resolution_ns = 0.1;
};

// Gaussian-jitter sigma equivalent to a detector response of the given FWHM.
double jitter_sigma_from_fwhm(double fwhm_ns);

struct DetectionEvent {
    int64_t sequence_id = 0;
    Channel channel = Channel::KEY;
    double timestamp_ns = 0.0;  // relative to the start of its sequence
};

struct PulseInstance {
    const PulseShape* shape = nullptr;  // non-owning; shapes outlive instances
    double emission_offset_ns = 0.0;    // within the clock period
    double mean_photons = 0.0;
    int64_t clock_index = 0;
};

// Poisson photon statistics of a coherent faint pulse. Throws on mu < 0.
int64_t draw_photons(double mu, Rng& rng);

// Scales the mean photon number; throws unless 0 <= transmission <= 1.
PulseInstance attenuate(const PulseInstance& pulse, double transmission);

enum class Arm { Key, Interferometer };

// Fair 50/50 beamsplitter, one independent decision per photon.
Arm route_50_50(Rng& rng);

// Probability that a photon of a pulse with field autocorrelation gamma exits
// the + port of the interferometer at phase phi. The - port gets 1 minus this.
double mz_port_probability(double gamma, double phase);

// Detects n photons of the pulse behind the Mach-Zehnder. Each photon
// survives efficiency thinning, picks a port with probability
// (1 + gamma(path_delay) cos phi)/2 and gets a timestamp drawn from the pulse
// intensity profile plus Gaussian jitter.
std::vector<DetectionEvent> mz_detect(const PulseInstance& pulse, int64_t n_photons,
                                      double path_delay_ns, double phase,
                                      const DetectorParams& det, double clock_period_ns,
                                      int64_t sequence_id, Rng& rng);

// Same detector with the pulse's autocorrelation at the path delay already
// evaluated; the sequence runner hoists that integral out of the clock loop.
std::vector<DetectionEvent> mz_detect_with_gamma(const PulseInstance& pulse, int64_t n_photons,
                                                 double gamma, double phase,
                                                 const DetectorParams& det,
                                                 double clock_period_ns, int64_t sequence_id,
                                                 Rng& rng);

// Convenience form drawing the photon number from the pulse itself.
std::vector<DetectionEvent> mz_detect(const PulseInstance& pulse, double path_delay_ns,
                                      double phase, const DetectorParams& det,
                                      double clock_period_ns, int64_t sequence_id, Rng& rng);

// Key-arm counter: efficiency thinning, intensity-profile timestamps, jitter.
std::vector<DetectionEvent> key_detect(const PulseInstance& pulse, int64_t n_photons,
                                       const DetectorParams& det, double clock_period_ns,
                                       int64_t sequence_id, Rng& rng);

std::vector<DetectionEvent> key_detect(const PulseInstance& pulse, const DetectorParams& det,
                                       double clock_period_ns, int64_t sequence_id, Rng& rng);

// Homogeneous Poisson dark counts on one channel over [t0, t1).
void add_dark_counts(std::vector<DetectionEvent>& events, Channel channel, double t0_ns,
                     double t1_ns, const DetectorParams& det, int64_t sequence_id, Rng& rng);

// Draws an emission time from the intensity profile (inverse CDF on cells).
double sample_emission_time(const PulseShape& shape, Rng& rng);

double quantize_timestamp(double t_ns, double resolution_ns);

}  // namespace tcqkd
