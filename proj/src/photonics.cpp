#include "tcqkd/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tcqkd {

double jitter_sigma_from_fwhm(double fwhm_ns) {
    return fwhm_ns / 2.3548200450309493;  // 2 sqrt(2 ln 2)
}

int64_t draw_photons(double mu, Rng& rng) {
    if (mu < 0.0) throw std::invalid_argument("mean photon number must be >= 0");
    return rng.poisson(mu);
}

PulseInstance attenuate(const PulseInstance& pulse, double transmission) {
    if (transmission < 0.0 || transmission > 1.0)
        throw std::invalid_argument("transmission must be in [0, 1]");
    PulseInstance out = pulse;
    out.mean_photons *= transmission;
    return out;
}

Arm route_50_50(Rng& rng) { return rng.bernoulli(0.5) ? Arm::Key : Arm::Interferometer; }

double mz_port_probability(double gamma, double phase) {
    return 0.5 * (1.0 + gamma * std::cos(phase));
}

double sample_emission_time(const PulseShape& shape, Rng& rng) {
    const double u = rng.uniform01();
    const auto it = std::lower_bound(shape.cdf.begin(), shape.cdf.end(), u);
    const auto cell = static_cast<size_t>(std::distance(shape.cdf.begin(), it));
    const size_t idx = std::min(cell, shape.cdf.size() - 1);
    return shape.cell_time(idx) + rng.uniform01() * shape.step;
}

double quantize_timestamp(double t_ns, double resolution_ns) {
    if (resolution_ns <= 0.0) return t_ns;
    return std::floor(t_ns / resolution_ns) * resolution_ns;
}

namespace {

double detection_timestamp(const PulseInstance& pulse, const DetectorParams& det,
                           double clock_period_ns, Rng& rng) {
    double t = static_cast<double>(pulse.clock_index) * clock_period_ns +
               pulse.emission_offset_ns + sample_emission_time(*pulse.shape, rng);
    if (det.jitter_sigma_ns > 0.0) t = rng.normal(t, det.jitter_sigma_ns);
    return quantize_timestamp(t, det.resolution_ns);
}

void require_normalized(const PulseInstance& pulse) {
    if (pulse.shape == nullptr || !pulse.shape->normalized)
        throw std::invalid_argument("pulse shape must be normalized");
}

}  // namespace

std::vector<DetectionEvent> mz_detect_with_gamma(const PulseInstance& pulse, int64_t n_photons,
                                                 double gamma, double phase,
                                                 const DetectorParams& det,
                                                 double clock_period_ns, int64_t sequence_id,
                                                 Rng& rng) {
    require_normalized(pulse);
    std::vector<DetectionEvent> events;
    if (n_photons <= 0) return events;
    const double p_plus = mz_port_probability(gamma, phase);
    for (int64_t i = 0; i < n_photons; ++i) {
        if (!rng.bernoulli(det.efficiency)) continue;
        const Channel port = rng.bernoulli(p_plus) ? Channel::MZ_PLUS : Channel::MZ_MINUS;
        events.push_back({sequence_id, port, detection_timestamp(pulse, det, clock_period_ns, rng)});
    }
    return events;
}

std::vector<DetectionEvent> mz_detect(const PulseInstance& pulse, int64_t n_photons,
                                      double path_delay_ns, double phase,
                                      const DetectorParams& det, double clock_period_ns,
                                      int64_t sequence_id, Rng& rng) {
    require_normalized(pulse);
    const double gamma = autocorrelation(*pulse.shape, path_delay_ns);
    return mz_detect_with_gamma(pulse, n_photons, gamma, phase, det, clock_period_ns, sequence_id,
                                rng);
}

std::vector<DetectionEvent> mz_detect(const PulseInstance& pulse, double path_delay_ns,
                                      double phase, const DetectorParams& det,
                                      double clock_period_ns, int64_t sequence_id, Rng& rng) {
    const int64_t n = draw_photons(pulse.mean_photons, rng);
    return mz_detect(pulse, n, path_delay_ns, phase, det, clock_period_ns, sequence_id, rng);
}

std::vector<DetectionEvent> key_detect(const PulseInstance& pulse, int64_t n_photons,
                                       const DetectorParams& det, double clock_period_ns,
                                       int64_t sequence_id, Rng& rng) {
    require_normalized(pulse);
    std::vector<DetectionEvent> events;
    for (int64_t i = 0; i < n_photons; ++i) {
        if (!rng.bernoulli(det.efficiency)) continue;
        events.push_back({sequence_id, Channel::KEY, detection_timestamp(pulse, det, clock_period_ns, rng)});
    }
    return events;
}

std::vector<DetectionEvent> key_detect(const PulseInstance& pulse, const DetectorParams& det,
                                       double clock_period_ns, int64_t sequence_id, Rng& rng) {
    const int64_t n = draw_photons(pulse.mean_photons, rng);
    return key_detect(pulse, n, det, clock_period_ns, sequence_id, rng);
}

void add_dark_counts(std::vector<DetectionEvent>& events, Channel channel, double t0_ns,
                     double t1_ns, const DetectorParams& det, int64_t sequence_id, Rng& rng) {
    if (det.dark_rate_hz <= 0.0 || t1_ns <= t0_ns) return;
    const double mean = det.dark_rate_hz * (t1_ns - t0_ns) * 1e-9;
    const int64_t n = rng.poisson(mean);
    for (int64_t i = 0; i < n; ++i) {
        const double t = rng.uniform(t0_ns, t1_ns);
        events.push_back({sequence_id, channel, quantize_timestamp(t, det.resolution_ns)});
    }
}

}  // namespace tcqkd
