#pragma once

// Exact event-driven simulation of X_t = sum U_i - p t and Monte Carlo
// estimators of its supremum, passage and endpoint functionals.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "levyruin/model.hpp"
#include "levyruin/parallel.hpp"
#include "levyruin/rng.hpp"
#include "levyruin/stats.hpp"

namespace levyruin {

struct PathSample {
    double horizon = 0.0;
    double premium = 0.0;
    std::vector<double> times;  // increasing, in (0, horizon]
    std::vector<double> sizes;  // > 0

    std::size_t jumps() const { return times.size(); }
    // Right-continuous value X_t.
    double value(double t) const;
};

enum class CrossingMode { jump, drift };

struct PassageEvent {
    double tau = 0.0;
    double overshoot = 0.0;  // X_tau - u
    CrossingMode mode = CrossingMode::jump;
    double pre_sup = 0.0;    // sup_{s < tau} X_s
    double pre_value = 0.0;  // X_{tau-}
};

// One claim size. The TiltedPareto law is drawn by acceptance-rejection
// against Exponential(alpha) with envelope constant (alpha + theta/sigma)/alpha;
// `proposals` counts envelope draws.
double sample_claim(const ClaimDistribution& dist, RandomStream& stream);
double sample_claim(const ClaimDistribution& dist, RandomStream& stream, std::uint64_t& proposals);

PathSample sample_path(const RiskModel& model, double horizon, RandomStream& stream);

// Exact supremum over [0, t]; no time discretisation.
double running_sup(const PathSample& path, double t);

// First time the path exceeds u >= 0 within the horizon.
std::optional<PassageEvent> first_passage(const PathSample& path, double u);

// Importance sampling selector for passage and endpoint estimators.
struct ImportanceSampling {
    enum class Kind { none, esscher } kind = Kind::none;
    double alpha = 0.0;

    static ImportanceSampling direct() { return {}; }
    static ImportanceSampling esscher(double a) { return {Kind::esscher, a}; }
};

inline constexpr double kInfiniteHorizon = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------- sup MGF

enum class SupMgfMethod { automatic, direct, esscher };

// Estimates m(t) = E exp(alpha sup_{s<=t} X_s). The Esscher form uses
// m(t) = e^{psi(alpha) t} E^Q exp(alpha (Xbar_t - X_t)) with the bounded
// weight exp(alpha (Xbar_t - X_t)) <= e^{alpha p t}; `automatic` picks it
// whenever the direct estimator would have infinite variance or the tilted
// drift is positive.
class SupMgfSampler {
public:
    SupMgfSampler(const RiskModel& model, double alpha, SupMgfMethod method = SupMgfMethod::automatic);

    SupMgfMethod method() const { return method_; }
    const char* method_name() const;
    double psi() const { return psi_; }

    // One replica of the estimator evaluated at every horizon (ascending),
    // all from the same path.
    void profile(std::span<const double> horizons, RandomStream& stream, std::span<double> out) const;
    double sample(double t, RandomStream& stream) const;

private:
    RiskModel sim_;  // model the path is drawn from
    double alpha_;
    double psi_;
    SupMgfMethod method_;
};

MCEstimate estimate_sup_mgf(const RiskModel& model, double alpha, double t, const McOptions& opts,
                            SupMgfMethod method = SupMgfMethod::automatic);
// Shared paths across horizons (ascending).
std::vector<MCEstimate> estimate_sup_mgf_grid(const RiskModel& model, double alpha, std::span<const double> horizons,
                                              const McOptions& opts, SupMgfMethod method = SupMgfMethod::automatic);

// ---------------------------------------------------------------- passage

// Finite surrogate for an infinite horizon. With beta in (0, alpha_max] and
// psi(beta) < 0, exp(beta X_t) is a supermartingale, so by the maximal
// inequality P(ruin after H) <= exp(-beta u + psi(beta) H). H is the
// smallest horizon pushing this below `rel` times a lower bound of the ruin
// probability (ruin by the first claim).
struct SurrogateHorizon {
    double horizon = 0.0;
    double tail_bound = 0.0;
    double lower_bound = 0.0;
    double beta = 0.0;
};
SurrogateHorizon surrogate_horizon(const RiskModel& model, double u, double rel = 0.01);

struct WeightedPassage {
    PassageEvent event;
    double weight = 1.0;  // likelihood ratio dP/dQ on the passage event
};

// Simulates one path (under the Esscher model when requested) until it
// passes u or reaches the horizon.
class PassageSimulator {
public:
    PassageSimulator(const RiskModel& model, ImportanceSampling is);

    // horizon may be kInfiniteHorizon only if the simulation measure drifts up.
    std::optional<WeightedPassage> run(double u, double horizon, RandomStream& stream) const;
    bool drifts_up() const { return sim_drift_ > 0.0; }
    const RiskModel& simulation_model() const { return sim_; }

private:
    RiskModel sim_;
    ImportanceSampling is_;
    double psi_ = 0.0;
    double sim_drift_ = 0.0;
};

// P(tau(u) < T). T = kInfiniteHorizon is answered on the surrogate horizon
// when the simulation measure does not pass u almost surely; the chosen
// horizon is recorded in `flags`.
MCEstimate estimate_ruin_prob(const RiskModel& model, double u, double horizon, const McOptions& opts,
                              ImportanceSampling is = {});

// P(X_T > u), with endpoint weight exp(-alpha X_T + psi(alpha) T) under IS.
MCEstimate estimate_tail_prob(const RiskModel& model, double u, double horizon, const McOptions& opts,
                              ImportanceSampling is = {});

}  // namespace levyruin
