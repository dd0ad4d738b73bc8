#include "tcqkd/pulse.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tcqkd {

namespace {

constexpr double kLn9 = 2.1972245773362196;  // 10-90% rise time = tau * ln 9

// Builds a shape by sampling an analytic intensity at cell centres over
// [lo, hi), with one zero cell of padding on each side.
template <typename F>
PulseShape sample_intensity(F&& intensity, double lo, double hi, double step, ShapeLabel label,
                            double nominal) {
    PulseShape s;
    s.step = step;
    s.t0 = lo - step;
    s.label = label;
    s.nominal_duration = nominal;
    const auto n = static_cast<size_t>(std::ceil((hi - lo) / step)) + 2;
    s.amplitude.resize(n);
    for (size_t i = 0; i < n; ++i) {
        const double tc = s.t0 + (static_cast<double>(i) + 0.5) * step;
        s.amplitude[i] = std::sqrt(std::max(0.0, intensity(tc)));
    }
    normalize(s);
    return s;
}

double edged_fwhm(double on_time, double tau_r, double tau_d, double step) {
    auto intensity = [&](double t) {
        if (t < 0.0) return 0.0;
        if (t < on_time) return 1.0 - std::exp(-t / tau_r);
        return (1.0 - std::exp(-on_time / tau_r)) * std::exp(-(t - on_time) / tau_d);
    };
    PulseShape s = sample_intensity(intensity, 0.0, on_time + 40.0 * tau_d + 1.0, step,
                                    ShapeLabel::EdgedSquare, on_time);
    return fwhm(s);
}

}  // namespace

void normalize(PulseShape& shape) {
    double total = 0.0;
    for (double a : shape.amplitude) {
        if (a < 0.0 || !std::isfinite(a)) throw std::invalid_argument("pulse amplitude must be finite and >= 0");
        total += a * a;
    }
    total *= shape.step;
    if (total <= 0.0) throw std::invalid_argument("pulse profile is identically zero");
    const double scale = 1.0 / std::sqrt(total);
    shape.cdf.resize(shape.amplitude.size());
    double cum = 0.0;
    for (size_t i = 0; i < shape.amplitude.size(); ++i) {
        shape.amplitude[i] *= scale;
        cum += shape.amplitude[i] * shape.amplitude[i] * shape.step;
        shape.cdf[i] = cum;
    }
    if (!shape.cdf.empty()) shape.cdf.back() = 1.0;
    shape.normalized = true;
}

PulseShape make_square(double duration_ns, double step_ns) {
    if (duration_ns <= 0.0) throw std::invalid_argument("square pulse duration must be > 0");
    if (step_ns <= 0.0 || step_ns > 0.1) throw std::invalid_argument("grid step must be in (0, 0.1] ns");
    auto intensity = [&](double t) { return (t >= 0.0 && t < duration_ns) ? 1.0 : 0.0; };
    return sample_intensity(intensity, 0.0, duration_ns, step_ns, ShapeLabel::Square, duration_ns);
}

PulseShape make_edged(double duration_ns, double rise_ns, double decay_ns,
                      std::optional<double> target_fwhm_ns, double step_ns) {
    if (rise_ns <= 0.0 || decay_ns <= 0.0) throw std::invalid_argument("rise and decay times must be > 0");
    if (duration_ns <= rise_ns + decay_ns) throw std::invalid_argument("duration must exceed rise + decay");
    if (step_ns <= 0.0 || step_ns > 0.1) throw std::invalid_argument("grid step must be in (0, 0.1] ns");
    const double tau_r = rise_ns / kLn9;
    const double tau_d = decay_ns / kLn9;

    double on_time = duration_ns;
    if (target_fwhm_ns) {
        const double target = *target_fwhm_ns;
        // FWHM is monotone in the on-time; bracket then bisect.
        double lo = step_ns;
        double hi = target + rise_ns + decay_ns + 1.0;
        if (edged_fwhm(lo, tau_r, tau_d, step_ns) > target + 0.05)
            throw std::invalid_argument("target FWHM is infeasible for the given rise/decay times");
        for (int it = 0; it < 60 && hi - lo > 1e-4; ++it) {
            const double mid = 0.5 * (lo + hi);
            (edged_fwhm(mid, tau_r, tau_d, step_ns) < target ? lo : hi) = mid;
        }
        on_time = 0.5 * (lo + hi);
    }

    const double peak = 1.0 - std::exp(-on_time / tau_r);
    auto intensity = [&](double t) {
        if (t < 0.0) return 0.0;
        if (t < on_time) return 1.0 - std::exp(-t / tau_r);
        return peak * std::exp(-(t - on_time) / tau_d);
    };
    PulseShape s = sample_intensity(intensity, 0.0, on_time + 40.0 * tau_d + 1.0, step_ns,
                                    ShapeLabel::EdgedSquare, duration_ns);
    if (target_fwhm_ns && std::abs(fwhm(s) - *target_fwhm_ns) > 0.05)
        throw std::invalid_argument("target FWHM is infeasible for the given rise/decay times");
    return s;
}

PulseShape make_custom(std::vector<double> intensity, double t0_ns, double step_ns) {
    if (intensity.empty()) throw std::invalid_argument("custom profile has no samples");
    if (step_ns <= 0.0 || step_ns > 0.1) throw std::invalid_argument("grid step must be in (0, 0.1] ns");
    PulseShape s;
    s.t0 = t0_ns - step_ns;
    s.step = step_ns;
    s.label = ShapeLabel::Custom;
    s.amplitude.reserve(intensity.size() + 2);
    s.amplitude.push_back(0.0);
    for (double v : intensity) {
        if (v < 0.0 || !std::isfinite(v)) throw std::invalid_argument("custom profile intensity must be finite and >= 0");
        s.amplitude.push_back(std::sqrt(v));
    }
    s.amplitude.push_back(0.0);
    double support = 0.0;
    for (size_t i = 0; i < intensity.size(); ++i)
        if (intensity[i] > 0.0) support = (static_cast<double>(i) + 1.0) * step_ns;
    s.nominal_duration = support;
    normalize(s);
    return s;
}

PulseShape load_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open profile file: " + path);
    std::vector<double> times, values;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ss(line);
        std::string a, b;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b))
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected time_ns,intensity");
        try {
            const double t = std::stod(a);
            const double v = std::stod(b);
            times.push_back(t);
            values.push_back(v);
        } catch (const std::exception&) {
            if (lineno == 1) continue;  // header row
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    if (times.size() < 2) throw std::runtime_error(path + ": need at least two profile samples");
    const double step = times[1] - times[0];
    if (step <= 0.0) throw std::runtime_error(path + ": time column must be strictly increasing");
    for (size_t i = 1; i < times.size(); ++i)
        if (std::abs(times[i] - times[i - 1] - step) > 1e-6 * step + 1e-9)
            throw std::runtime_error(path + ": time grid is not uniform");
    return make_custom(std::move(values), times[0], step);
}

double autocorrelation(const PulseShape& shape, double tau_ns) {
    if (!shape.normalized) throw std::invalid_argument("autocorrelation requires a normalized shape");
    const auto n = static_cast<ptrdiff_t>(shape.amplitude.size());
    const double shift = tau_ns / shape.step;
    const auto k = static_cast<ptrdiff_t>(std::floor(shift));
    const double frac = shift - static_cast<double>(k);

    // sum a[i] * lerp(a[i+k], a[i+k+1]); out-of-range samples are zero
    double acc = 0.0;
    for (ptrdiff_t i = 0; i < n; ++i) {
        const ptrdiff_t j = i + k;
        double shifted = 0.0;
        if (j >= 0 && j < n) shifted += (1.0 - frac) * shape.amplitude[j];
        if (j + 1 >= 0 && j + 1 < n) shifted += frac * shape.amplitude[j + 1];
        acc += shape.amplitude[i] * shifted;
    }
    return std::clamp(acc * shape.step, 0.0, 1.0);
}

double fwhm(const PulseShape& shape) {
    const auto n = shape.amplitude.size();
    size_t imax = 0;
    double peak = 0.0;
    for (size_t i = 0; i < n; ++i) {
        const double v = shape.amplitude[i] * shape.amplitude[i];
        if (v > peak) {
            peak = v;
            imax = i;
        }
    }
    if (peak <= 0.0) throw std::invalid_argument("fwhm of an all-zero shape");
    const double half = 0.5 * peak;
    auto intensity = [&](size_t i) { return shape.amplitude[i] * shape.amplitude[i]; };

    double left = shape.cell_time(0);
    for (size_t i = imax; i-- > 0;) {
        if (intensity(i) < half) {
            const double i0 = intensity(i), i1 = intensity(i + 1);
            left = shape.cell_time(i) + shape.step * (half - i0) / (i1 - i0);
            break;
        }
    }
    double right = shape.cell_time(n - 1);
    for (size_t i = imax; i + 1 < n; ++i) {
        if (intensity(i + 1) < half) {
            const double i0 = intensity(i), i1 = intensity(i + 1);
            right = shape.cell_time(i) + shape.step * (i0 - half) / (i0 - i1);
            break;
        }
    }
    return right - left;
}

double intensity_fraction(const PulseShape& shape, double lo_ns, double hi_ns) {
    if (hi_ns <= lo_ns) return 0.0;
    double acc = 0.0;
    for (size_t i = 0; i < shape.amplitude.size(); ++i) {
        const double c0 = shape.cell_time(i);
        const double c1 = c0 + shape.step;
        const double overlap = std::min(hi_ns, c1) - std::max(lo_ns, c0);
        if (overlap > 0.0) acc += shape.amplitude[i] * shape.amplitude[i] * overlap;
    }
    return acc;  // intensity integrates to 1 after normalize
}

}  // namespace tcqkd
