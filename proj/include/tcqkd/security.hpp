#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "tcqkd/adversary.hpp"
#include "tcqkd/entropy.hpp"

namespace tcqkd {

// One grid point of Eve's strategy family together with its per-pulse
// weights; mixtures combine these weights linearly.
struct StrategyVertex {
    AttackStrategy strategy;
    StrategyWeights weights;
};

// p in {0, p_step, ..., 1} for each resend action. Block is deliberately not
// part of the optimization family: it trades losses, not errors or contrast,
// and loss accounting is outside this model.
struct StrategyGridSpec {
    double p_step = 0.01;
    std::vector<AmbiguousAction> actions = {AmbiguousAction::GuessResendFull,
                                            AmbiguousAction::ResendShortSlot4};
};

std::vector<StrategyVertex> build_strategy_grid(const StrategyGridSpec& spec,
                                                const AttackContext& ctx);

// Maximum of Eve's information over mixtures of grid strategies whose induced
// QBER equals q and whose relative contrast loss stays within dc. Mixtures of
// two vertices are solved exactly for q, which is optimal on the grid because
// the feasible weight set is the convex hull of the vertices. Returns 0 when
// nothing is feasible.
double mutual_info_ae(double q, double dc, std::span<const StrategyVertex> grid);

// I_AB(q) - I_AE(q, dc)
double advantage(double q, double dc, std::span<const StrategyVertex> grid);

struct CurvePoint {
    double q = 0.0;
    double i_ab = 0.0;
    double i_ae = 0.0;
};

struct SecurityCurve {
    double dc = 0.0;
    std::vector<CurvePoint> points;  // sorted by q
};

// Default emission range keeps the family's monotone regime; the curves cross
// I_AB well inside it.
SecurityCurve compute_curve(double dc, std::span<const StrategyVertex> grid, double q_max = 0.20,
                            double q_step = 0.001, ExecPolicy policy = ExecPolicy::Parallel);

struct CrossingResult {
    enum class State { Found, SecureOnRange, InsecureAtZero };
    State state = State::SecureOnRange;
    double q = 0.0;  // valid when state == Found
};

// Solves I_AB(q) = I_AE(q, dc) by grid scan plus bisection. q_scan_max stays
// below the family's feasibility edge at 1/4.
CrossingResult max_secure_qber(double dc, std::span<const StrategyVertex> grid,
                               double q_scan_max = 0.24, double q_step = 0.001);

struct LinkBudget {
    double loss_db_per_km = 0.2;
    double detector_efficiency = 0.10;
    double dark_rate_hz = 1e5;
    double mu = 0.1;
    double slot_width_ns = 10.0;
};

struct RangePoint {
    double distance_km = 0.0;
    double expected_qber = 0.0;
    bool secure = false;
};

struct RangeProjection {
    std::vector<RangePoint> points;
    double qber_threshold = 0.0;               // crossing used for the secure flag
    std::optional<double> secure_range_km;     // analytic distance where qber hits the threshold
};

// Expected QBER model: signal per pulse mu*eta*10^(-loss d/10) lands in its
// slot; darks land uniformly over the slots and only wrong-slot darks cause
// errors, giving qber = dark/(2 (signal + dark)).
double expected_qber_at(double distance_km, const LinkBudget& budget);

RangeProjection range_projection(const LinkBudget& budget, std::span<const double> distances_km,
                                 double dc_operational, std::span<const StrategyVertex> grid);

}  // namespace tcqkd
