#include "tcqkd/estimation.hpp"

#include <cmath>
#include <stdexcept>

namespace tcqkd {

double contrast(const ContrastSample& sample) {
    if (sample.total() <= 0) throw std::invalid_argument("contrast undefined for zero total count");
    return static_cast<double>(sample.n_plus - sample.n_minus) / static_cast<double>(sample.total());
}

GammaEstimate estimate_gamma_from_moments(double mean_c2, double n_p, int64_t n_s) {
    if (n_p <= 0.0) throw std::invalid_argument("mean photon number per sequence must be > 0");
    if (n_s < 2) throw std::invalid_argument("need at least two valid sequences");
    GammaEstimate est;
    est.mean_c2 = mean_c2;
    est.n_p = n_p;
    est.n_s = n_s;
    est.sigma_seq = 1.0 / std::sqrt(n_p);
    est.sigma_total = std::sqrt(2.0 / (n_p * static_cast<double>(n_s)));
    double g2 = 2.0 * (mean_c2 - 1.0 / n_p);
    if (g2 < 0.0) {
        g2 = 0.0;
        est.clamped_low = true;
    }
    est.gamma0 = std::sqrt(g2);
    if (est.gamma0 > 1.0) {
        est.gamma0 = 1.0;
        est.clamped_high = true;
    }
    return est;
}

GammaEstimate estimate_gamma(std::span<const ContrastSample> samples) {
    double sum_c = 0.0, sum_c2 = 0.0, sum_n = 0.0;
    int64_t valid = 0, excluded = 0;
    for (const auto& s : samples) {
        if (s.total() <= 0) {
            ++excluded;
            continue;
        }
        const double c = contrast(s);
        sum_c += c;
        sum_c2 += c * c;
        sum_n += static_cast<double>(s.total());
        ++valid;
    }
    if (valid < 2) throw std::invalid_argument("need at least two valid contrast samples");
    GammaEstimate est = estimate_gamma_from_moments(sum_c2 / static_cast<double>(valid),
                                                    sum_n / static_cast<double>(valid), valid);
    est.mean_c = sum_c / static_cast<double>(valid);
    est.n_excluded = excluded;
    return est;
}

double gamma_lower_bound(const GammaEstimate& est, double k) {
    if (k < 0.0) throw std::invalid_argument("sigma multiplier must be >= 0");
    return std::max(0.0, est.gamma0 - k * est.sigma_total);
}

double relative_contrast_loss(double gamma, double gamma_th) {
    if (gamma_th <= 0.0) throw std::invalid_argument("theoretical autocorrelation must be > 0");
    return (gamma_th - gamma) / gamma_th;
}

}  // namespace tcqkd
