#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tcqkd {

enum class ShapeLabel { Square, EdgedSquare, Custom };

// Sampled field-amplitude profile of one pulse on a uniform time grid.
//
// Sample i holds the amplitude of the cell [t0 + i*step, t0 + (i+1)*step),
// taken at the cell centre; the profile is zero outside the grid. All
// integrals are trapezoidal sums over the zero-padded grid, which for this
// cell convention reduce to step * sum(samples) and keep square-pulse
// overlap integrals exact at slot boundaries.
struct PulseShape {
    std::vector<double> amplitude;  // field amplitude per cell, >= 0
    std::vector<double> cdf;        // cumulative intensity per cell, filled by normalize()
    double t0 = 0.0;                // start of the first cell, ns
    double step = 0.01;             // grid step, ns
    double nominal_duration = 0.0;  // T, ns
    ShapeLabel label = ShapeLabel::Custom;
    bool normalized = false;

    double cell_time(size_t i) const { return t0 + static_cast<double>(i) * step; }
    size_t size() const { return amplitude.size(); }
};

inline constexpr double kDefaultGridStep = 0.01;  // ns, well under the 0.1 ns cap

// Uniform amplitude on [0, T). Throws on T <= 0.
PulseShape make_square(double duration_ns, double step_ns = kDefaultGridStep);

// Intensity rises as 1-exp(-t/tau_r) while the drive is on, then decays
// exponentially; tau is fixed by the 10-90% rise/decay times. When
// target_fwhm_ns is given the on-time is solved by bisection so the
// intensity FWHM matches within 0.05 ns.
PulseShape make_edged(double duration_ns, double rise_ns, double decay_ns,
                      std::optional<double> target_fwhm_ns = std::nullopt,
                      double step_ns = kDefaultGridStep);

// Custom profile from intensity samples on a uniform grid (amplitude = sqrt).
PulseShape make_custom(std::vector<double> intensity, double t0_ns, double step_ns);

// Two-column CSV: time_ns,intensity. Grid must be uniform.
PulseShape load_profile_csv(const std::string& path);

// Rescales so the intensity integrates to 1 and rebuilds the sampling CDF.
void normalize(PulseShape& shape);

// Overlap integral of the normalized field amplitude with its tau-shifted
// copy. Symmetric in +-tau; zero outside the support. Result clamped to [0,1].
double autocorrelation(const PulseShape& shape, double tau_ns);

// Full width of the intensity profile at half maximum, linear interpolation
// between grid points. Throws on an all-zero shape.
double fwhm(const PulseShape& shape);

// Fraction of the pulse intensity falling in [lo, hi), exact on cells.
double intensity_fraction(const PulseShape& shape, double lo_ns, double hi_ns);

}  // namespace tcqkd
