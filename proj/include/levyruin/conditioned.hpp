#pragma once

// Sampler for the limiting conditioned first-passage object: an Esscher
// segment Z on [0, tau), a jump at tau, and a post-jump segment W started at
// W_0 and conditioned to pass 0 before T - tau.

#include <cstdint>
#include <filesystem>
#include <vector>

#include "levyruin/model.hpp"
#include "levyruin/parallel.hpp"
#include "levyruin/path_sim.hpp"
#include "levyruin/rng.hpp"
#include "levyruin/stats.hpp"

namespace levyruin {

// Independent killing time of the Esscher segment: density proportional to
// e^{psi t} on [0, T) (uniform when psi = 0).
double sample_tau(double psi, double T, RandomStream& stream);
double sample_tau(const RiskModel& model, double alpha, double T, RandomStream& stream);
double tau_cdf(double psi, double T, double t);

struct PassageGridSpec {
    int levels = 48;        // a-levels (including a = 0), log-spaced above a_min
    int times = 32;         // uniform s-grid on [0, T] including both ends
    double a_min = 0.01;    // first positive level
    double a_max = 8.0;     // initial extent, doubled until certified
    int max_doublings = 6;
    double certificate = 1e-4;
};

// Tabulates h(a, s) = e^{alpha a} P(tau(a) < s), a >= 0, so that the
// initial law of W has density alpha h(-z, s) on z < 0 and alpha e^{-alpha z}
// on z > 0. h is estimated under the Esscher measure as
// E^Q[e^{-alpha O_a + psi tau_a}; tau_a < s] from one path per replica
// shared by every cell.
class PassageGrid {
public:
    std::uint64_t model_digest = 0;
    double alpha = 0.0;
    double psi = 0.0;
    double horizon = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t replicas = 0;
    std::vector<double> levels;  // a, ascending, levels[0] = 0
    std::vector<double> times;   // s, ascending, times[0] = 0, times.back() = horizon
    std::vector<double> h;       // levels x times, row-major by level
    std::vector<double> h_se;

    double at(std::size_t i, std::size_t j) const { return h[i * times.size() + j]; }
    double se(std::size_t i, std::size_t j) const { return h_se[i * times.size() + j]; }
    // P(tau(a) < s) at grid nodes.
    double passage_prob(std::size_t i, std::size_t j) const;
    // h(a_i, s), linear in s.
    double interpolate(std::size_t i, double s) const;
    // 1 + alpha int h(a, s) da: the grid estimate of E e^{alpha Xbar_s}.
    double mass(double s) const;
    // Truncation ratio h(a_max, T) / max_a h(a, T).
    double truncation_ratio() const;

    void save(const std::filesystem::path& file) const;
    static PassageGrid load(const std::filesystem::path& file);
    // Throws GridError unless the grid was built for this model, alpha and T.
    void check_matches(const RiskModel& model, double alpha, double T) const;
};

PassageGrid build_passage_grid(const RiskModel& model, double alpha, double T, const PassageGridSpec& spec,
                               const McOptions& opts);

// W_0 for remaining time s; GridError if s is outside [0, T].
double sample_w0(const PassageGrid& grid, double s, RandomStream& stream);
// P(W_0 > 0) for remaining time s.
double prob_w0_positive(const PassageGrid& grid, double s);

struct LimitTriple {
    double tau = 0.0;        // jump time
    double w0 = 0.0;         // post-jump offset
    double tau0 = 0.0;       // passage time of W over 0
    double overshoot = 0.0;  // W at tau0
    double prejump = 0.0;    // Z_{tau-}
    std::uint64_t w_attempts = 0;
    PathSample z_path;  // Esscher path on [0, tau), kept on request
    PathSample w_path;  // W - w0 on [0, tau0], kept on request

    double passage_time() const { return tau + tau0; }
};

// Post-jump segment for remaining time s: W_0 > 0 with probability
// 1 / mass(s), then Exponential(alpha); otherwise (W_0, path) is drawn
// jointly from the law of a base path started at W_0 <= 0 conditioned to pass
// 0 before s, with W_0 truncated to [-a_max, 0].
struct ConditionedW {
    double w0 = 0.0;
    double tau0 = 0.0;
    double overshoot = 0.0;
    std::uint64_t attempts = 0;  // proposals used by the negative branch (0 if W_0 > 0)
    PathSample path;             // W - w0 on [0, tau0], kept on request
};

// Normaliser of the negative-branch proposal: its acceptance rate is
// int_0^{a_max} h(a, s) da divided by this value.
double negative_branch_bound(const RiskModel& model, double alpha, double s);

struct TripleOptions {
    bool keep_paths = false;
    double min_acceptance = 1e-4;
};

ConditionedW sample_conditioned_w(const RiskModel& model, double alpha, const PassageGrid& grid, double s,
                                  RandomStream& stream, const TripleOptions& topts = {});

LimitTriple sample_limit_triple(const RiskModel& model, double alpha, double T, const PassageGrid& grid,
                                RandomStream& stream, const TripleOptions& topts = {});
std::vector<LimitTriple> sample_limit_triples(const RiskModel& model, double alpha, double T, const PassageGrid& grid,
                                              const McOptions& opts, const TripleOptions& topts = {});

// Weighted empirical law of (O_u, tau(u)) given tau(u) < T by Esscher IS.
struct ConditionalSample {
    WeightedSample overshoot;
    WeightedSample time;
    MCEstimate ruin;  // P(tau(u) < T)
};
ConditionalSample conditional_mc_reference(const RiskModel& model, double alpha, double u, double T,
                                           const McOptions& opts);

}  // namespace levyruin
