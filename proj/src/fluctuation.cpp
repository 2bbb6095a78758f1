#include "levyruin/fluctuation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyruin/errors.hpp"
#include "levyruin/path_sim.hpp"
#include "levyruin/quadrature.hpp"
#include "levyruin/rng.hpp"

namespace levyruin {

namespace {

const quad::Tolerance kTight{1e-13, 1e-300, 4000};
const quad::Tolerance kInner{1e-10, 1e-300, 1000};

void require_ladder(const RiskModel& model) {
    validate(model);
    if (!(model.premium > 0.0)) throw RegimeError("ladder quantities need a premium p > 0");
    if (mean_increment(model) >= 0.0) {
        std::ostringstream os;
        os << "E X_1 = " << mean_increment(model) << " >= 0: the ladder process is not killed and Xbar_inf = inf";
        throw RegimeError(os.str());
    }
}

double decay_rate(const RiskModel& model, double alpha) {
    double r = mgf_abscissa(model.claims);
    if (alpha > 0.0) r = std::min(r, alpha);
    return r;
}

// Draw from G(dx) = Fbar(x) dx / mu_F.
double sample_integrated_tail(const ClaimDistribution& dist, RandomStream& s) {
    if (const auto* e = std::get_if<Exponential>(&dist)) return s.exponential(e->rate);
    if (const auto* t = std::get_if<TiltedPareto>(&dist)) {
        for (;;) {
            const double x = s.exponential(t->alpha);
            if (s.uniform() <= std::pow(1.0 + x / t->sigma, -t->theta)) return x;
        }
    }
    throw ConfigError("integrated-tail sampling is implemented for exponential and tilted Pareto claims");
}

struct TiltedLadder {
    double beta;        // tilt of G
    double step_ratio;  // rho * ghat(beta)
};

TiltedLadder tilted_ladder(const LadderData& ld) {
    const ClaimDistribution& d = ld.model.claims;
    if (std::holds_alternative<Exponential>(d)) {
        const double nu = *lundberg_root(ld.model);
        return {nu, ld.rho * ld.integrated_tail_mgf(nu)};
    }
    if (const auto* t = std::get_if<TiltedPareto>(&d)) return {t->alpha, ld.rho * ld.integrated_tail_mgf(t->alpha)};
    throw ConfigError("tilted ladder sampling is implemented for exponential and tilted Pareto claims");
}

// Draw from e^{beta x} G(dx) / ghat(beta).
double sample_tilted_height(const ClaimDistribution& dist, double beta, RandomStream& s) {
    if (const auto* e = std::get_if<Exponential>(&dist)) return s.exponential(e->rate - beta);
    const auto& t = std::get<TiltedPareto>(dist);
    // e^{alpha x} Fbar(x) = (1 + x/sigma)^{-theta}: Lomax(theta - 1, sigma).
    return t.sigma * std::expm1(-std::log(s.uniform()) / (t.theta - 1.0));
}

}  // namespace

double LadderData::ladder_ratio_density(double z) const {
    return model.lambda * claim_tail(model.claims, z) / (model.premium - model.lambda * claim_mean);
}

double LadderData::integrated_tail_density(double x) const {
    return x < 0.0 ? 0.0 : claim_tail(model.claims, x) / claim_mean;
}

double LadderData::integrated_tail(double x) const {
    if (x <= 0.0) return 1.0;
    return quad::integrate_to_infinity([&](double y) { return claim_tail(model.claims, y); }, x, kTight) / claim_mean;
}

double LadderData::integrated_tail_mgf(double beta) const {
    if (beta == 0.0) return 1.0;
    return (claim_mgf(model.claims, beta) - 1.0) / (beta * claim_mean);
}

LadderData ladder_data(const RiskModel& model) {
    require_ladder(model);
    LadderData ld;
    ld.model = model;
    ld.claim_mean = claim_mean(model.claims);
    ld.rho = model.lambda * ld.claim_mean / model.premium;
    ld.drift = 0.0;
    ld.kill_fraction = 1.0 - ld.rho;
    return ld;
}

double ladder_exponent(const RiskModel& model, double beta, double k) {
    const LadderData ld = ladder_data(model);
    return k * (1.0 - ld.rho * ld.integrated_tail_mgf(-beta));
}

SupMgfInfinity sup_mgf_infinity(const RiskModel& model, double alpha) {
    const LadderData ld = ladder_data(model);
    if (alpha == 0.0) return {1.0, Regime::subcritical};
    const double psi = cumulant(model, alpha);
    if (psi >= 0.0) return {INFINITY, psi == 0.0 ? Regime::critical : Regime::supercritical};
    return {(1.0 - ld.rho) / (1.0 - ld.rho * ld.integrated_tail_mgf(alpha)), Regime::subcritical};
}

double mu_infinity(const RiskModel& model, double alpha) {
    const double psi = cumulant(model, alpha);
    if (psi >= 0.0) return INFINITY;
    return quad::integrate_to_infinity([&](double t) { return std::exp(psi * t); }, 0.0, kTight);
}

double nu_infinity(const RiskModel& model, double alpha) {
    const LadderData ld = ladder_data(model);
    if (cumulant(model, alpha) >= 0.0) return INFINITY;
    const double body = 10.0 / decay_rate(model, 0.0);
    const double ghat =
        quad::integrate_half_line([&](double x) { return tilted_claim_tail(model.claims, alpha, x); }, body, kTight) /
        ld.claim_mean;
    return (1.0 - ld.rho) / (1.0 - ld.rho * ghat);
}

double infinite_horizon_constant(const RiskModel& model, double alpha) {
    const SupMgfInfinity e = sup_mgf_infinity(model, alpha);
    if (!e.finite()) return INFINITY;
    return e.value / -cumulant(model, alpha);
}

MCEstimate ruin_prob_infinite(const RiskModel& model, double u, const McOptions& opts, LadderSampling method) {
    const LadderData ld = ladder_data(model);
    if (!(u >= 0.0)) throw DomainError("ruin level u must be >= 0");
    if (method == LadderSampling::automatic) {
        if (const auto* e = std::get_if<Exponential>(&model.claims)) {
            MCEstimate out;
            out.estimate = ld.rho * std::exp(-(e->rate - model.lambda / model.premium) * u);
            out.seed = opts.seed;
            out.method = "closed form";
            return out;
        }
        method = LadderSampling::tilted;
    }
    RunningStats st;
    std::string name;
    if (method == LadderSampling::geometric) {
        name = "geometric";
        st = run_chunked<RunningStats>(
            opts.replicas, opts.threads,
            [&](std::uint64_t b, std::uint64_t e) {
                RunningStats part;
                for (std::uint64_t i = b; i < e; ++i) {
                    RandomStream s(opts.seed, StreamTag::geometric, i);
                    double sum = 0.0, hit = 0.0;
                    while (s.uniform() < ld.rho) {
                        sum += sample_integrated_tail(model.claims, s);
                        if (sum > u) {
                            hit = 1.0;
                            break;
                        }
                    }
                    part.add(hit);
                }
                return part;
            },
            [](RunningStats& o, const RunningStats& p) { o.merge(p); });
    } else {
        name = "tilted ladder";
        const TiltedLadder tl = tilted_ladder(ld);
        st = run_chunked<RunningStats>(
            opts.replicas, opts.threads,
            [&](std::uint64_t b, std::uint64_t e) {
                RunningStats part;
                for (std::uint64_t i = b; i < e; ++i) {
                    RandomStream s(opts.seed, StreamTag::geometric, i);
                    double sum = 0.0;
                    int n = 0;
                    do {
                        sum += sample_tilted_height(model.claims, tl.beta, s);
                        ++n;
                    } while (sum <= u);
                    part.add(std::pow(tl.step_ratio, n) * std::exp(-tl.beta * sum));
                }
                return part;
            },
            [](RunningStats& o, const RunningStats& p) { o.merge(p); });
    }
    return MCEstimate::from_stats(st, opts.seed, name);
}

WeightedSample ladder_overshoot_sample(const RiskModel& model, double u, const McOptions& opts) {
    const LadderData ld = ladder_data(model);
    const TiltedLadder tl = tilted_ladder(ld);
    return run_chunked<WeightedSample>(
        opts.replicas, opts.threads,
        [&](std::uint64_t b, std::uint64_t e) {
            WeightedSample part;
            for (std::uint64_t i = b; i < e; ++i) {
                RandomStream s(opts.seed, StreamTag::geometric, i);
                double sum = 0.0;
                int n = 0;
                do {
                    sum += sample_tilted_height(model.claims, tl.beta, s);
                    ++n;
                } while (sum <= u);
                part.add(sum - u, std::pow(tl.step_ratio, n) * std::exp(-tl.beta * sum));
            }
            return part;
        },
        [](WeightedSample& o, const WeightedSample& p) {
            o.values.insert(o.values.end(), p.values.begin(), p.values.end());
            o.weights.insert(o.weights.end(), p.weights.begin(), p.weights.end());
        });
}

// ---------------------------------------------------------------- overshoot laws

OvershootLaw::OvershootLaw(std::string kind, std::function<double(double)> density, double scale)
    : kind_(std::move(kind)), density_(std::move(density)), gmax_(scale) {
    const int cells = 4000;
    step_ = gmax_ / cells;
    grid_cdf_.assign(cells + 1, 0.0);
    double left = density_(0.0);
    for (int i = 0; i < cells; ++i) {
        const double a = i * step_;
        const double mid = density_(a + 0.5 * step_);
        const double right = density_(a + step_);
        grid_cdf_[i + 1] = grid_cdf_[i] + step_ / 6.0 * (left + 4.0 * mid + right);
        left = right;
    }
}

double OvershootLaw::cdf(double gamma) const {
    if (gamma <= 0.0) return 0.0;
    if (gamma >= gmax_) return 1.0;
    const double pos = gamma / step_;
    const std::size_t i = std::min(grid_cdf_.size() - 2, static_cast<std::size_t>(pos));
    const double frac = pos - static_cast<double>(i);
    return std::min(1.0, grid_cdf_[i] + frac * (grid_cdf_[i + 1] - grid_cdf_[i]));
}

double OvershootLaw::mass(double rel_tol) const {
    const quad::Tolerance tol{rel_tol, 1e-300, 4000};
    return quad::integrate_half_line(density_, gmax_ / 8.0, tol);
}

double tilted_tail_integral(const RiskModel& model, double alpha, double gamma) {
    return std::exp(-alpha * gamma) *
           quad::integrate_to_infinity([&](double y) { return tilted_claim_tail(model.claims, alpha, y + gamma); }, 0.0,
                                       kInner);
}

OvershootLaw overshoot_law_infinite(const RiskModel& model, double alpha) {
    const LadderData ld = ladder_data(model);
    const SupMgfInfinity e = sup_mgf_infinity(model, alpha);
    if (!e.finite()) throw RegimeError("T = inf overshoot law needs psi(alpha) < 0");
    const double c = alpha * model.lambda / (model.premium - model.lambda * ld.claim_mean);
    const double emgf = e.value;
    return OvershootLaw(
        "infinite",
        [=](double g) { return alpha * std::exp(-alpha * g) / emgf + c * tilted_tail_integral(model, alpha, g); },
        45.0 / decay_rate(model, alpha));
}

OvershootLaw overshoot_law_cramer(const RiskModel& model, double alpha, double tol) {
    const LadderData ld = ladder_data(model);
    const double psi = cumulant(model, alpha);
    if (std::abs(psi) > tol) {
        std::ostringstream os;
        os << "Cramer overshoot law needs psi(alpha) = 0, got " << psi;
        throw RegimeError(os.str());
    }
    if (!std::isfinite(cumulant_derivatives(model, alpha).first))
        throw RegimeError("Cramer overshoot law needs E(X_1 e^{alpha X_1}) < inf");
    const double c = alpha * model.lambda / (model.premium - model.lambda * ld.claim_mean);
    return OvershootLaw(
        "cramer", [=](double g) { return c * tilted_tail_integral(model, alpha, g); }, 45.0 / decay_rate(model, alpha));
}

OvershootLaw overshoot_law_subordinator(const RiskModel& model, double alpha, SubordinatorOvershoot variant) {
    validate(model);
    if (model.premium != 0.0) throw RegimeError("subordinator overshoot law needs p = 0 (no drift)");
    const double scale = 45.0 / decay_rate(model, 0.0);
    if (variant == SubordinatorOvershoot::renewal) {
        const double mu = claim_mean(model.claims);
        return OvershootLaw(
            "subordinator renewal", [=](double g) { return claim_tail(model.claims, g) / mu; }, scale);
    }
    const double psi = cumulant(model, alpha);
    const double c = alpha / psi * model.lambda;
    return OvershootLaw(
        "subordinator weighted",
        [=](double g) {
            return c * std::exp(-alpha * g) *
                   quad::integrate_to_infinity(
                       [&](double y) { return tilted_claim_density(model.claims, alpha, y + g); }, 0.0, kInner);
        },
        45.0 / decay_rate(model, alpha));
}

double vigon_check(const RiskModel& model, const std::vector<double>& z_grid, double fault_factor) {
    const LadderData ld = ladder_data(model);
    const double scale = model.lambda / (model.premium - model.lambda * ld.claim_mean);
    double worst = 0.0;
    for (double z : z_grid) {
        const double lhs = fault_factor * ld.ladder_ratio_density(z);
        // Descending ladder renewal measure is Lebesgue: integrate Pi_X(y + dz) over y >= 0.
        const double rhs =
            scale * quad::integrate_to_infinity([&](double y) { return claim_density(model.claims, y + z); }, 0.0, kTight);
        worst = std::max(worst, std::abs(lhs - rhs) / rhs);
    }
    return worst;
}

}  // namespace levyruin
