#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace tcqkd {

struct ContrastSample {
    int64_t sequence_id = 0;
    int64_t n_plus = 0;
    int64_t n_minus = 0;

    int64_t total() const { return n_plus + n_minus; }
};

// (n+ - n-) / (n+ + n-). Throws when the total count is zero; aggregation
// excludes such samples instead of treating them as C = 0.
double contrast(const ContrastSample& sample);

struct GammaEstimate {
    double gamma0 = 0.0;       // central autocorrelation estimate
    double sigma_seq = 0.0;    // per-sequence shot noise, 1/sqrt(N_p)
    double sigma_total = 0.0;  // sqrt(2 / (N_p N_s))
    double n_p = 0.0;          // mean detected photons per sequence
    int64_t n_s = 0;           // number of valid sequences
    double mean_c2 = 0.0;      // mean of C_i^2 (centred convention)
    double mean_c = 0.0;       // diagnostic; ~0 under uniform phase
    int64_t n_excluded = 0;    // zero-count samples dropped
    bool clamped_low = false;  // shot noise exceeded the signal
    bool clamped_high = false; // estimate above unity (phase assumption violated)
};

// Inverts the contrast second moment: gamma0^2 = 2 (mean C^2 - 1/N_p).
// The factor 2 averages the squared cosine of the free-running phase.
GammaEstimate estimate_gamma(std::span<const ContrastSample> samples);

// Arithmetic core on precomputed aggregates; estimate_gamma reduces to this.
GammaEstimate estimate_gamma_from_moments(double mean_c2, double n_p, int64_t n_s);

// max(0, gamma0 - k sigma_total): the k-sigma lower confidence bound.
double gamma_lower_bound(const GammaEstimate& est, double k);

// dC = (gamma_th - gamma) / gamma_th. Negative when the measurement exceeds
// theory; reported as-is, not clamped. Throws on gamma_th <= 0.
double relative_contrast_loss(double gamma, double gamma_th);

}  // namespace tcqkd
