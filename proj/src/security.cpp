#include "tcqkd/security.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "tcqkd/entropy.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace tcqkd {

std::vector<StrategyVertex> build_strategy_grid(const StrategyGridSpec& spec,
                                                const AttackContext& ctx) {
    if (spec.p_step <= 0.0 || spec.p_step > 0.01 + 1e-12)
        throw std::invalid_argument("strategy grid p step must be in (0, 0.01]");
    if (spec.actions.empty()) throw std::invalid_argument("strategy grid needs at least one action");
    std::vector<StrategyVertex> grid;
    const auto n = static_cast<int64_t>(std::round(1.0 / spec.p_step));
    for (AmbiguousAction action : spec.actions) {
        for (int64_t i = 0; i <= n; ++i) {
            AttackStrategy s;
            s.intercept_fraction = std::min(1.0, static_cast<double>(i) * spec.p_step);
            s.ambiguous_action = action;
            grid.push_back({s, evaluate_strategy_weights(s, ctx)});
        }
    }
    return grid;
}

namespace {

struct MixState {
    double detected, sifted, wrong, unamb_sifted, guess_sifted, guess_wrong, gamma_weight;
};

MixState mix(const StrategyWeights& a, const StrategyWeights& b, double lam) {
    const double mu = 1.0 - lam;
    return {lam * a.detected + mu * b.detected,
            lam * a.sifted + mu * b.sifted,
            lam * a.wrong + mu * b.wrong,
            lam * a.unamb_sifted + mu * b.unamb_sifted,
            lam * a.guess_sifted + mu * b.guess_sifted,
            lam * a.guess_wrong + mu * b.guess_wrong,
            lam * a.gamma_weight + mu * b.gamma_weight};
}

// Eve knows which component of a mixture she applied, so the information
// numerators of the components add; the entropy term stays per component and
// the weights already carry it through guess_sifted/guess_wrong.
double info_of(const MixState& m) {
    double info = m.unamb_sifted;
    if (m.guess_sifted > 0.0) {
        const double r = std::clamp(m.guess_wrong / m.guess_sifted, 0.0, 1.0);
        info += m.guess_sifted * (1.0 - binary_entropy(r));
    }
    return info / m.sifted;
}

bool loss_ok(const MixState& m, double dc, double gamma_honest) {
    if (m.detected <= 0.0) return false;
    const double gamma_avg = m.gamma_weight / m.detected;
    return gamma_honest - gamma_avg <= dc * gamma_honest + 1e-12;
}

}  // namespace

double mutual_info_ae(double q, double dc, std::span<const StrategyVertex> grid) {
    if (grid.empty()) throw std::invalid_argument("strategy grid is empty");
    if (q < 0.0 || q > 1.0) throw std::invalid_argument("QBER must be in [0, 1]");

    // gamma of the honest pulse = gamma_avg of the p=0 vertex
    double gamma_honest = 0.0;
    for (const auto& v : grid)
        if (v.strategy.intercept_fraction == 0.0 && v.weights.detected > 0.0)
            gamma_honest = std::max(gamma_honest, v.weights.gamma_weight / v.weights.detected);
    if (gamma_honest <= 0.0) throw std::invalid_argument("strategy grid lacks an honest vertex");

    double best = 0.0;
    bool feasible = false;
    const size_t n = grid.size();
    for (size_t i = 0; i < n; ++i) {
        const StrategyWeights& a = grid[i].weights;
        if (a.sifted <= 0.0) continue;
        const double fa = a.wrong - q * a.sifted;
        if (std::abs(fa) < 1e-12 * std::max(1.0, a.sifted)) {
            const MixState m = mix(a, a, 1.0);
            if (loss_ok(m, dc, gamma_honest)) {
                best = std::max(best, info_of(m));
                feasible = true;
            }
        }
        for (size_t j = i + 1; j < n; ++j) {
            const StrategyWeights& b = grid[j].weights;
            if (b.sifted <= 0.0) continue;
            const double fb = b.wrong - q * b.sifted;
            if (fa == fb) continue;
            const double lam = fb / (fb - fa);  // solves wrong/sifted == q exactly
            if (lam < 0.0 || lam > 1.0) continue;
            const MixState m = mix(a, b, lam);
            if (m.sifted <= 0.0 || !loss_ok(m, dc, gamma_honest)) continue;
            best = std::max(best, info_of(m));
            feasible = true;
        }
    }
    return feasible ? best : 0.0;
}

double advantage(double q, double dc, std::span<const StrategyVertex> grid) {
    return mutual_info_ab(q) - mutual_info_ae(q, dc, grid);
}

SecurityCurve compute_curve(double dc, std::span<const StrategyVertex> grid, double q_max,
                            double q_step, ExecPolicy policy) {
    if (q_step <= 0.0 || q_step > 0.001 + 1e-12)
        throw std::invalid_argument("curve q step must be in (0, 0.001]");
    SecurityCurve curve;
    curve.dc = dc;
    const auto n = static_cast<int64_t>(std::floor(q_max / q_step + 1e-9));
    curve.points.resize(static_cast<size_t>(n) + 1);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) if (policy == ExecPolicy::Parallel)
#endif
    for (int64_t i = 0; i <= n; ++i) {
        const double q = static_cast<double>(i) * q_step;
        auto& pt = curve.points[static_cast<size_t>(i)];
        pt.q = q;
        pt.i_ab = mutual_info_ab(q);
        pt.i_ae = mutual_info_ae(q, dc, grid);
    }
    return curve;
}

CrossingResult max_secure_qber(double dc, std::span<const StrategyVertex> grid, double q_scan_max,
                               double q_step) {
    if (q_step <= 0.0 || q_step > 0.001 + 1e-12)
        throw std::invalid_argument("crossing q step must be in (0, 0.001]");
    auto f = [&](double q) { return mutual_info_ab(q) - mutual_info_ae(q, dc, grid); };

    if (f(0.0) <= 0.0) return {CrossingResult::State::InsecureAtZero, 0.0};

    const double top = std::min(q_scan_max, 0.5);
    double lo = 0.0, hi = -1.0;
    for (double q = q_step; q <= top + 1e-12; q += q_step) {
        const double qq = std::min(q, top);
        if (f(qq) <= 0.0) {
            hi = qq;
            break;
        }
        lo = qq;
    }
    if (hi < 0.0) return {CrossingResult::State::SecureOnRange, 0.0};

    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double v = f(mid);
        if (std::abs(v) < 1e-6 || hi - lo < 1e-12) return {CrossingResult::State::Found, mid};
        (v > 0.0 ? lo : hi) = mid;
    }
    return {CrossingResult::State::Found, 0.5 * (lo + hi)};
}

double expected_qber_at(double distance_km, const LinkBudget& budget) {
    const double signal =
        budget.mu * budget.detector_efficiency * std::pow(10.0, -budget.loss_db_per_km * distance_km / 10.0);
    const double dark = budget.dark_rate_hz * budget.slot_width_ns * 1e-9;
    if (signal + dark <= 0.0) return 0.0;
    return dark / (2.0 * (signal + dark));
}

RangeProjection range_projection(const LinkBudget& budget, std::span<const double> distances_km,
                                 double dc_operational, std::span<const StrategyVertex> grid) {
    if (budget.loss_db_per_km < 0.0 || budget.detector_efficiency < 0.0 ||
        budget.dark_rate_hz < 0.0 || budget.mu < 0.0 || budget.slot_width_ns < 0.0)
        throw std::invalid_argument("link budget fields must be non-negative");

    RangeProjection proj;
    const CrossingResult crossing = max_secure_qber(dc_operational, grid);
    switch (crossing.state) {
        case CrossingResult::State::Found: proj.qber_threshold = crossing.q; break;
        case CrossingResult::State::SecureOnRange: proj.qber_threshold = 0.5; break;
        case CrossingResult::State::InsecureAtZero: proj.qber_threshold = 0.0; break;
    }

    for (double d : distances_km) {
        RangePoint pt;
        pt.distance_km = d;
        pt.expected_qber = expected_qber_at(d, budget);
        pt.secure = pt.expected_qber < proj.qber_threshold;
        proj.points.push_back(pt);
    }

    // analytic crossing distance: signal where expected qber hits the threshold
    const double dark = budget.dark_rate_hz * budget.slot_width_ns * 1e-9;
    const double q = proj.qber_threshold;
    if (dark > 0.0 && q > 0.0 && q < 0.5 && budget.mu * budget.detector_efficiency > 0.0 &&
        budget.loss_db_per_km > 0.0) {
        const double signal_needed = dark * (1.0 - 2.0 * q) / (2.0 * q);
        const double ratio = signal_needed / (budget.mu * budget.detector_efficiency);
        if (ratio < 1.0 && ratio > 0.0)
            proj.secure_range_km = -10.0 * std::log10(ratio) / budget.loss_db_per_km;
        else if (ratio >= 1.0)
            proj.secure_range_km = 0.0;
    }
    return proj;
}

}  // namespace tcqkd
