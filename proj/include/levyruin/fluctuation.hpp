#pragma once

// Ladder-height quantities of the Cramer-Lundberg model and the limiting
// overshoot laws built from them.

#include <functional>
#include <string>
#include <vector>

#include "levyruin/model.hpp"
#include "levyruin/parallel.hpp"
#include "levyruin/stats.hpp"

namespace levyruin {

// Ascending ladder process of X = sum U_i - p t with E X_1 < 0: ladder
// heights follow the integrated tail G(dx) = Fbar(x) dx / mu_F, each new
// maximum occurs with probability rho = lambda mu_F / p, d_H = 0. Only
// normalisation-free ratios are exposed.
struct LadderData {
    RiskModel model;
    double claim_mean = 0.0;
    double rho = 0.0;
    double drift = 0.0;          // d_H
    double kill_fraction = 0.0;  // q / (q + Pi_H(0, inf)) = 1 - rho

    // Pi_H(dz) / q per unit z: lambda Fbar(z) / (p - lambda mu_F).
    double ladder_ratio_density(double z) const;
    double integrated_tail_density(double x) const;
    double integrated_tail(double x) const;  // Gbar(x)
    // int e^{beta x} G(dx) for beta <= alpha.
    double integrated_tail_mgf(double beta) const;
};

LadderData ladder_data(const RiskModel& model);

// Ladder exponent kappa(beta) = k (1 - rho Ghat(-beta)) for beta >= -alpha
// with normalisation k.
double ladder_exponent(const RiskModel& model, double beta, double k = 1.0);

// E exp(alpha Xbar_inf) = (1 - rho) / (1 - rho ghat(alpha)). When
// psi(alpha) >= 0 the value is +inf and `regime` says why.
struct SupMgfInfinity {
    double value = 0.0;
    Regime regime = Regime::subcritical;
    bool finite() const { return regime == Regime::subcritical; }
};
SupMgfInfinity sup_mgf_infinity(const RiskModel& model, double alpha);

// mu(inf) = int_0^inf E e^{alpha X_t} dt by quadrature and
// nu(inf) = kappa(0) / kappa(-alpha) with ghat by quadrature of the
// integrated tail; their product is the T = inf ruin constant.
double mu_infinity(const RiskModel& model, double alpha);
double nu_infinity(const RiskModel& model, double alpha);
// lim P(tau(u) < inf) / Pibar(u) = E e^{alpha Xbar_inf} / (-psi(alpha)).
double infinite_horizon_constant(const RiskModel& model, double alpha);

enum class LadderSampling {
    automatic,  // closed form for exponential claims, tilted otherwise
    geometric,  // Geometric(1 - rho) number of G-distributed heights
    tilted,     // heights from the exponentially tilted G, weight (rho ghat)^n e^{-beta S_n}
};

// P(tau(u) < inf) as a geometric compound tail.
MCEstimate ruin_prob_infinite(const RiskModel& model, double u, const McOptions& opts = {1000000, 20240601, 1},
                              LadderSampling method = LadderSampling::automatic);

// Weighted overshoot sample of the ladder walk over u (tilted sampling).
WeightedSample ladder_overshoot_sample(const RiskModel& model, double u, const McOptions& opts);

// Limiting overshoot law on [0, inf) with no atom at 0 (d_H = 0).
class OvershootLaw {
public:
    OvershootLaw(std::string kind, std::function<double(double)> density, double scale);

    const std::string& kind() const { return kind_; }
    double density(double gamma) const { return density_(gamma); }
    // From a Simpson table of the density on [0, gamma_max]; exact 1 beyond.
    double cdf(double gamma) const;
    // Total mass by adaptive quadrature on [0, inf).
    double mass(double rel_tol = 1e-10) const;
    double atom_at_zero() const { return 0.0; }
    double gamma_max() const { return gmax_; }

private:
    std::string kind_;
    std::function<double(double)> density_;
    double gmax_;
    std::vector<double> grid_cdf_;
    double step_;
};

// Inner integral int_0^inf e^{alpha y} Fbar(y + gamma) dy by quadrature.
double tilted_tail_integral(const RiskModel& model, double alpha, double gamma);

OvershootLaw overshoot_law_infinite(const RiskModel& model, double alpha);
OvershootLaw overshoot_law_cramer(const RiskModel& model, double alpha, double tol = 1e-10);

enum class SubordinatorOvershoot {
    renewal,   // Fbar(gamma) / mu_F
    weighted,  // (alpha / psi(alpha)) lambda int e^{alpha y} f(y + gamma) dy
};
OvershootLaw overshoot_law_subordinator(const RiskModel& model, double alpha,
                                        SubordinatorOvershoot variant = SubordinatorOvershoot::renewal);

// Max relative gap over z_grid between the ladder ratio density (scaled by
// fault_factor) and lambda int_0^inf f(y + z) dy / (p - lambda mu_F).
double vigon_check(const RiskModel& model, const std::vector<double>& z_grid = {0.5, 1.0, 2.0, 4.0},
                   double fault_factor = 1.0);

}  // namespace levyruin
