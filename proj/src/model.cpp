#include "levyruin/model.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>

#include "levyruin/errors.hpp"
#include "levyruin/quadrature.hpp"

namespace levyruin {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};

const quad::Tolerance kMgfTol{1e-13, 1e-300, 2000};

// I_k(b) = int_0^inf x^k e^{(b - alpha) x} (1 + x/sigma)^(-theta) dx for
// real or complex b with Re(b) <= alpha.
template <class T>
T tp_moment_integral(const TiltedPareto& tp, T b, int k) {
    const double decay = tp.alpha - std::real(b);
    double body = 10.0 * tp.sigma;
    if (decay > 0.0) body = std::min(body, 40.0 / decay);
    auto f = [&](double x) -> T {
        const T e = std::exp((b - tp.alpha) * x);
        return e * (std::pow(x, k) * std::pow(1.0 + x / tp.sigma, -tp.theta));
    };
    return quad::integrate_half_line(f, body, kMgfTol);
}

bool tp_moment_finite(const TiltedPareto& tp, double b, int k) {
    return b < tp.alpha || tp.theta > k + 1.0;
}

// M, M', M'' of the untilted TiltedPareto via M(b) = 1 + b I_0(b).
MgfDerivatives tp_derivatives(const TiltedPareto& tp, double b) {
    if (b == 0.0) {
        const double i0 = tp_moment_integral(tp, 0.0, 0);
        const double i1 = tp_moment_finite(tp, 0.0, 1) ? tp_moment_integral(tp, 0.0, 1) : kInf;
        return {1.0, i0, 2.0 * i1};
    }
    const double i0 = tp_moment_integral(tp, b, 0);
    const double i1 = tp_moment_finite(tp, b, 1) ? tp_moment_integral(tp, b, 1) : kInf;
    const double i2 = tp_moment_finite(tp, b, 2) ? tp_moment_integral(tp, b, 2) : kInf;
    const double m = 1.0 + b * i0;
    const double m1 = i0 + b * i1;
    const double m2 = 2.0 * i1 + b * i2;
    return {m, std::isnan(m1) ? kInf : m1, std::isnan(m2) ? kInf : m2};
}

double tp_mgf(const TiltedPareto& tp, double b) {
    // Closed form at the abscissa: 1 + alpha sigma / (theta - 1).
    if (b == tp.alpha) return 1.0 + tp.alpha * tp.sigma / (tp.theta - 1.0);
    if (b == 0.0) return 1.0;
    return 1.0 + b * tp_moment_integral(tp, b, 0);
}

void require_domain(const ClaimDistribution& dist, double beta) {
    if (!in_mgf_domain(dist, beta)) {
        std::ostringstream os;
        os << "beta = " << beta << " outside the MGF domain of " << describe(dist)
           << " (abscissa " << mgf_abscissa(dist) << ")";
        throw DomainError(os.str());
    }
}

void require_domain(const ClaimDistribution& dist, std::complex<double> beta) {
    require_domain(dist, beta.real());
}

}  // namespace

void validate(const ClaimDistribution& dist) {
    std::visit(overloaded{
                   [](const Exponential& e) {
                       if (!(e.rate > 0.0 && std::isfinite(e.rate))) throw DomainError("exponential rate must be > 0");
                   },
                   [](const TiltedPareto& t) {
                       if (!(t.alpha > 0.0) || !(t.theta > 1.0) || !(t.sigma > 0.0) || !std::isfinite(t.alpha) ||
                           !std::isfinite(t.theta) || !std::isfinite(t.sigma))
                           throw DomainError("tilted Pareto needs alpha > 0, theta > 1, sigma > 0");
                   },
                   [](const EsscherTiltedPareto& e) {
                       validate(ClaimDistribution{e.base});
                       if (!(e.tilt >= 0.0 && e.tilt <= e.base.alpha))
                           throw DomainError("Esscher tilt must lie in [0, alpha]");
                   },
               },
               dist);
}

double mgf_abscissa(const ClaimDistribution& dist) {
    return std::visit(overloaded{
                          [](const Exponential& e) { return e.rate; },
                          [](const TiltedPareto& t) { return t.alpha; },
                          [](const EsscherTiltedPareto& e) { return e.base.alpha - e.tilt; },
                      },
                      dist);
}

bool mgf_abscissa_attained(const ClaimDistribution& dist) {
    return !std::holds_alternative<Exponential>(dist);
}

bool in_mgf_domain(const ClaimDistribution& dist, double beta) {
    if (std::isnan(beta)) return false;
    const double a = mgf_abscissa(dist);
    return mgf_abscissa_attained(dist) ? beta <= a : beta < a;
}

double claim_mgf(const ClaimDistribution& dist, double beta) {
    require_domain(dist, beta);
    return std::visit(overloaded{
                          [&](const Exponential& e) { return e.rate / (e.rate - beta); },
                          [&](const TiltedPareto& t) { return tp_mgf(t, beta); },
                          [&](const EsscherTiltedPareto& e) {
                              return tp_mgf(e.base, e.tilt + beta) / tp_mgf(e.base, e.tilt);
                          },
                      },
                      dist);
}

std::complex<double> claim_mgf(const ClaimDistribution& dist, std::complex<double> beta) {
    require_domain(dist, beta);
    using C = std::complex<double>;
    return std::visit(overloaded{
                          [&](const Exponential& e) { return C(e.rate) / (e.rate - beta); },
                          [&](const TiltedPareto& t) { return 1.0 + beta * tp_moment_integral(t, beta, 0); },
                          [&](const EsscherTiltedPareto& e) {
                              const C shifted = e.tilt + beta;
                              return (1.0 + shifted * tp_moment_integral(e.base, shifted, 0)) /
                                     tp_mgf(e.base, e.tilt);
                          },
                      },
                      dist);
}

std::complex<double> claim_mgf_derivative(const ClaimDistribution& dist, std::complex<double> beta) {
    require_domain(dist, beta);
    using C = std::complex<double>;
    return std::visit(overloaded{
                          [&](const Exponential& e) {
                              const C d = e.rate - beta;
                              return C(e.rate) / (d * d);
                          },
                          [&](const TiltedPareto& t) {
                              return tp_moment_integral(t, beta, 0) + beta * tp_moment_integral(t, beta, 1);
                          },
                          [&](const EsscherTiltedPareto& e) {
                              const C s = e.tilt + beta;
                              return (tp_moment_integral(e.base, s, 0) + s * tp_moment_integral(e.base, s, 1)) /
                                     tp_mgf(e.base, e.tilt);
                          },
                      },
                      dist);
}

MgfDerivatives claim_mgf_derivatives(const ClaimDistribution& dist, double beta) {
    require_domain(dist, beta);
    return std::visit(overloaded{
                          [&](const Exponential& e) {
                              const double d = e.rate - beta;
                              return MgfDerivatives{e.rate / d, e.rate / (d * d), 2.0 * e.rate / (d * d * d)};
                          },
                          [&](const TiltedPareto& t) { return tp_derivatives(t, beta); },
                          [&](const EsscherTiltedPareto& e) {
                              const double norm = tp_mgf(e.base, e.tilt);
                              MgfDerivatives d = tp_derivatives(e.base, e.tilt + beta);
                              return MgfDerivatives{d.value / norm, d.first / norm, d.second / norm};
                          },
                      },
                      dist);
}

double claim_tail(const ClaimDistribution& dist, double x) {
    if (x <= 0.0) return 1.0;
    return std::visit(overloaded{
                          [&](const Exponential& e) { return std::exp(-e.rate * x); },
                          [&](const TiltedPareto& t) {
                              return std::pow(1.0 + x / t.sigma, -t.theta) * std::exp(-t.alpha * x);
                          },
                          [&](const EsscherTiltedPareto& e) {
                              const TiltedPareto& t = e.base;
                              const double norm = tp_mgf(t, e.tilt);
                              const double w = 1.0 + x / t.sigma;
                              if (e.tilt == t.alpha) {
                                  return (t.alpha * t.sigma / (t.theta - 1.0) * std::pow(w, 1.0 - t.theta) +
                                          std::pow(w, -t.theta)) /
                                         norm;
                              }
                              // e^{tilt y} f(y) integrated over (x, inf).
                              auto g = [&](double y) {
                                  const double v = 1.0 + y / t.sigma;
                                  return std::exp((e.tilt - t.alpha) * y) *
                                         (t.alpha * std::pow(v, -t.theta) + t.theta / t.sigma * std::pow(v, -t.theta - 1.0));
                              };
                              return quad::integrate_to_infinity(g, x, kMgfTol) / norm;
                          },
                      },
                      dist);
}

double claim_density(const ClaimDistribution& dist, double x) {
    if (x < 0.0) return 0.0;
    return std::visit(overloaded{
                          [&](const Exponential& e) { return e.rate * std::exp(-e.rate * x); },
                          [&](const TiltedPareto& t) {
                              const double w = 1.0 + x / t.sigma;
                              return std::exp(-t.alpha * x) *
                                     (t.alpha * std::pow(w, -t.theta) + t.theta / t.sigma * std::pow(w, -t.theta - 1.0));
                          },
                          [&](const EsscherTiltedPareto& e) {
                              const TiltedPareto& t = e.base;
                              const double w = 1.0 + x / t.sigma;
                              return std::exp((e.tilt - t.alpha) * x) *
                                     (t.alpha * std::pow(w, -t.theta) + t.theta / t.sigma * std::pow(w, -t.theta - 1.0)) /
                                     tp_mgf(t, e.tilt);
                          },
                      },
                      dist);
}

double tilted_claim_tail(const ClaimDistribution& dist, double beta, double x) {
    if (x <= 0.0) return std::exp(beta * std::max(x, 0.0));
    if (const auto* e = std::get_if<Exponential>(&dist)) return std::exp((beta - e->rate) * x);
    if (const auto* t = std::get_if<TiltedPareto>(&dist))
        return std::exp((beta - t->alpha) * x - t->theta * std::log1p(x / t->sigma));
    const double v = claim_tail(dist, x);
    return v == 0.0 ? 0.0 : std::exp(beta * x + std::log(v));
}

double tilted_claim_density(const ClaimDistribution& dist, double beta, double x) {
    if (x < 0.0) return 0.0;
    if (const auto* e = std::get_if<Exponential>(&dist)) return e->rate * std::exp((beta - e->rate) * x);
    const TiltedPareto* t = std::get_if<TiltedPareto>(&dist);
    double tilt = 0.0, norm = 1.0;
    if (!t) {
        const auto& e = std::get<EsscherTiltedPareto>(dist);
        t = &e.base;
        tilt = e.tilt;
        norm = tp_mgf(e.base, e.tilt);
    }
    const double lw = std::log1p(x / t->sigma);
    const double poly = t->alpha + t->theta / t->sigma * std::exp(-lw);
    return std::exp((beta + tilt - t->alpha) * x - t->theta * lw) * poly / norm;
}

double claim_mean(const ClaimDistribution& dist) {
    return std::visit(overloaded{
                          [](const Exponential& e) { return 1.0 / e.rate; },
                          [](const TiltedPareto& t) { return tp_moment_integral(t, 0.0, 0); },
                          [&](const EsscherTiltedPareto&) { return claim_mgf_derivatives(dist, 0.0).first; },
                      },
                      dist);
}

bool is_convolution_equivalent(const ClaimDistribution& dist) {
    return std::holds_alternative<TiltedPareto>(dist);
}

std::string describe(const ClaimDistribution& dist) {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const Exponential& e) { os << "exp:" << e.rate; },
                   [&](const TiltedPareto& t) { os << "tpareto:" << t.alpha << ',' << t.theta << ',' << t.sigma; },
                   [&](const EsscherTiltedPareto& e) {
                       os << "esscher(" << e.tilt << ")tpareto:" << e.base.alpha << ',' << e.base.theta << ','
                          << e.base.sigma;
                   },
               },
               dist);
    return os.str();
}

void validate(const RiskModel& model) {
    if (!(model.lambda > 0.0) || !std::isfinite(model.lambda)) throw DomainError("claim rate lambda must be > 0");
    if (!std::isfinite(model.premium)) throw DomainError("premium must be finite");
    validate(model.claims);
}

std::string describe(const RiskModel& model) {
    std::ostringstream os;
    os.precision(17);
    os << "lambda=" << model.lambda << " premium=" << model.premium << " claims=" << describe(model.claims);
    return os.str();
}

std::uint64_t digest(const RiskModel& model) {
    std::ostringstream os;
    os << std::hexfloat << model.lambda << '|' << model.premium << '|';
    std::visit(overloaded{
                   [&](const Exponential& e) { os << "E" << e.rate; },
                   [&](const TiltedPareto& t) { os << "T" << t.alpha << ',' << t.theta << ',' << t.sigma; },
                   [&](const EsscherTiltedPareto& e) {
                       os << "Z" << e.tilt << ',' << e.base.alpha << ',' << e.base.theta << ',' << e.base.sigma;
                   },
               },
               model.claims);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

double cumulant(const RiskModel& model, double beta) {
    return model.lambda * (claim_mgf(model.claims, beta) - 1.0) - model.premium * beta;
}

std::complex<double> cumulant(const RiskModel& model, std::complex<double> beta) {
    return model.lambda * (claim_mgf(model.claims, beta) - 1.0) - model.premium * beta;
}

MgfDerivatives cumulant_derivatives(const RiskModel& model, double beta) {
    const MgfDerivatives m = claim_mgf_derivatives(model.claims, beta);
    return {model.lambda * (m.value - 1.0) - model.premium * beta, model.lambda * m.first - model.premium,
            model.lambda * m.second};
}

double mean_increment(const RiskModel& model) {
    return model.lambda * claim_mean(model.claims) - model.premium;
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::subcritical: return "subcritical";
        case Regime::critical: return "critical";
        case Regime::supercritical: return "supercritical";
    }
    return "?";
}

CumulantInfo cumulant_info(const RiskModel& model, double alpha, double critical_tol) {
    const double psi = cumulant(model, alpha);
    Regime r = Regime::critical;
    if (psi < -critical_tol) r = Regime::subcritical;
    if (psi > critical_tol) r = Regime::supercritical;
    return {alpha, psi, r, lundberg_root(model), mgf_abscissa(model.claims)};
}

std::optional<double> lundberg_root(const RiskModel& model) {
    // psi is convex with psi(0) = 0: a positive root needs psi'(0) < 0.
    if (mean_increment(model) >= 0.0) return std::nullopt;
    const double a = mgf_abscissa(model.claims);
    double hi;
    if (mgf_abscissa_attained(model.claims)) {
        const double at = cumulant(model, a);
        if (std::abs(at) <= 1e-12) return a;
        if (at < 0.0) return std::nullopt;
        hi = a;
    } else {
        hi = NAN;
        for (int k = 1; k <= 60; ++k) {
            const double b = a * (1.0 - std::ldexp(1.0, -k));
            if (cumulant(model, b) > 0.0) {
                hi = b;
                break;
            }
        }
        if (std::isnan(hi)) return std::nullopt;
    }
    // Left end: the minimiser of psi on (0, hi), where psi < 0.
    double lo = 0.0, dhi = hi;
    for (int it = 0; it < 200 && dhi - lo > 1e-15; ++it) {
        const double mid = 0.5 * (lo + dhi);
        if (cumulant_derivatives(model, mid).first < 0.0)
            lo = mid;
        else
            dhi = mid;
    }
    if (lo == 0.0) lo = 0.5 * dhi;
    if (cumulant(model, lo) >= 0.0) return std::nullopt;
    for (int it = 0; it < 200 && hi - lo > 1e-13; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cumulant(model, mid) < 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double phi_inverse(const RiskModel& model, double delta) {
    if (!(model.premium > 0.0)) throw DomainError("phi_inverse needs a downward drift, premium > 0");
    if (!(delta >= 0.0)) throw DomainError("phi_inverse needs delta >= 0");
    // Right end of the decreasing left branch.
    double right = 0.0;
    if (mean_increment(model) > 0.0) {
        double lo = -1.0;
        while (cumulant_derivatives(model, lo).first > 0.0) lo *= 2.0;
        double hi = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (cumulant_derivatives(model, mid).first > 0.0)
                hi = mid;
            else
                lo = mid;
        }
        right = 0.5 * (lo + hi);
    }
    auto g = [&](double b) { return cumulant(model, b) - delta; };
    if (delta == 0.0 && right == 0.0) return 0.0;
    double hi = right;
    double lo = right - 1.0;
    while (g(lo) < 0.0) lo = right - 2.0 * (right - lo);
    // Safeguarded Newton on [lo, hi]; g decreasing there.
    double b = 0.5 * (lo + hi);
    const double tol = std::max(1e-13, 8.0 * std::numeric_limits<double>::epsilon() * delta);
    for (int it = 0; it < 300; ++it) {
        const double v = g(b);
        if (std::abs(v) <= tol) return b;
        if (v > 0.0)
            lo = b;
        else
            hi = b;
        const double d = cumulant_derivatives(model, b).first;
        double next = b - v / d;
        if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
        if (hi - lo < 1e-16 * std::max(1.0, std::abs(b))) return next;
        b = next;
    }
    return b;
}

std::complex<double> phi_inverse(const RiskModel& model, std::complex<double> delta, std::complex<double> guess) {
    if (!(model.premium > 0.0)) throw DomainError("phi_inverse needs a downward drift, premium > 0");
    std::complex<double> b = guess;
    const double tol = std::max(1e-13, 16.0 * std::numeric_limits<double>::epsilon() * std::abs(delta));
    for (int it = 0; it < 100; ++it) {
        const std::complex<double> v = cumulant(model, b) - delta;
        if (std::abs(v) <= tol) return b;
        const std::complex<double> d = model.lambda * claim_mgf_derivative(model.claims, b) - model.premium;
        std::complex<double> step = v / d;
        // Damp steps that would leave the left half-plane.
        while ((b - step).real() > 0.0) step *= 0.5;
        b -= step;
    }
    throw DomainError("complex phi_inverse did not converge");
}

RiskModel esscher_model(const RiskModel& model, double alpha) {
    if (alpha == 0.0) return model;
    if (!in_mgf_domain(model.claims, alpha)) {
        std::ostringstream os;
        os << "Esscher tilt " << alpha << " outside the MGF domain of " << describe(model.claims);
        throw DomainError(os.str());
    }
    RiskModel out = model;
    out.lambda = model.lambda * claim_mgf(model.claims, alpha);
    out.claims = std::visit(overloaded{
                                [&](const Exponential& e) -> ClaimDistribution { return Exponential{e.rate - alpha}; },
                                [&](const TiltedPareto& t) -> ClaimDistribution {
                                    return EsscherTiltedPareto{t, alpha};
                                },
                                [&](const EsscherTiltedPareto& e) -> ClaimDistribution {
                                    return EsscherTiltedPareto{e.base, e.tilt + alpha};
                                },
                            },
                            model.claims);
    return out;
}

double levy_tail(const RiskModel& model, double u) {
    return model.lambda * claim_tail(model.claims, u);
}

double premium_for_cumulant(const RiskModel& model, double alpha, double target) {
    if (!(alpha > 0.0)) throw DomainError("premium_for_cumulant needs alpha > 0");
    return (model.lambda * (claim_mgf(model.claims, alpha) - 1.0) - target) / alpha;
}

}  // namespace levyruin
