#pragma once

// Claim distributions, the Cramer-Lundberg risk model X_t = sum U_i - p t,
// and its analytic functionals: MGF, cumulant, Lundberg root, inverse
// cumulant on the left branch and the Esscher transform.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>

namespace levyruin {

struct Exponential {
    double rate = 1.0;
};

// Tail (1 + x/sigma)^(-theta) * exp(-alpha x): regularly varying factor
// times an exponential tilt, convolution equivalent with index alpha.
struct TiltedPareto {
    double alpha = 1.0;
    double theta = 2.0;
    double sigma = 1.0;
};

// Esscher transform of a TiltedPareto law: density e^{tilt x} f(x) / M(tilt),
// 0 <= tilt <= base.alpha.
struct EsscherTiltedPareto {
    TiltedPareto base;
    double tilt = 0.0;
};

using ClaimDistribution = std::variant<Exponential, TiltedPareto, EsscherTiltedPareto>;

void validate(const ClaimDistribution& dist);

// Abscissa of convergence of the claim MGF and whether it is attained.
double mgf_abscissa(const ClaimDistribution& dist);
bool mgf_abscissa_attained(const ClaimDistribution& dist);
bool in_mgf_domain(const ClaimDistribution& dist, double beta);

double claim_mgf(const ClaimDistribution& dist, double beta);
// Complex argument with Re(beta) inside the domain (used by Laplace inversion).
std::complex<double> claim_mgf(const ClaimDistribution& dist, std::complex<double> beta);

// M(beta), M'(beta), M''(beta); derivatives may be +inf on the boundary.
struct MgfDerivatives {
    double value;
    double first;
    double second;
};
MgfDerivatives claim_mgf_derivatives(const ClaimDistribution& dist, double beta);
std::complex<double> claim_mgf_derivative(const ClaimDistribution& dist, std::complex<double> beta);

double claim_tail(const ClaimDistribution& dist, double x);
double claim_density(const ClaimDistribution& dist, double x);
// e^{beta x} Fbar(x) and e^{beta x} f(x) without overflow for large x.
double tilted_claim_tail(const ClaimDistribution& dist, double beta, double x);
double tilted_claim_density(const ClaimDistribution& dist, double beta, double x);
double claim_mean(const ClaimDistribution& dist);
bool is_convolution_equivalent(const ClaimDistribution& dist);

std::string describe(const ClaimDistribution& dist);

struct RiskModel {
    double lambda = 1.0;   // claim arrival rate
    double premium = 0.0;  // p; p <= 0 allowed for subordinator / upward drift
    ClaimDistribution claims = Exponential{1.0};
};

void validate(const RiskModel& model);
std::string describe(const RiskModel& model);
// FNV-1a digest of the exact parameter bits.
std::uint64_t digest(const RiskModel& model);

// psi(beta) = lambda (M(beta) - 1) - p beta.
double cumulant(const RiskModel& model, double beta);
std::complex<double> cumulant(const RiskModel& model, std::complex<double> beta);
MgfDerivatives cumulant_derivatives(const RiskModel& model, double beta);

// E X_1 = lambda mu_F - p.
double mean_increment(const RiskModel& model);

enum class Regime { subcritical, critical, supercritical };
const char* to_string(Regime r);

struct CumulantInfo {
    double alpha;
    double psi;
    Regime regime;
    std::optional<double> lundberg_root;
    double abscissa;
};
CumulantInfo cumulant_info(const RiskModel& model, double alpha, double critical_tol = 1e-10);

// Positive root nu of psi, or nothing when no root exists in the domain.
std::optional<double> lundberg_root(const RiskModel& model);

// phi(delta) <= 0: inverse of psi restricted to (-inf, 0] (left branch).
double phi_inverse(const RiskModel& model, double delta);
// Complex continuation by Newton iteration from `guess`.
std::complex<double> phi_inverse(const RiskModel& model, std::complex<double> delta, std::complex<double> guess);

// Esscher transform by alpha: rate lambda M(alpha), claims e^{alpha x}F(dx)/M(alpha).
RiskModel esscher_model(const RiskModel& model, double alpha);

// Tail of the positive Levy measure, lambda * Fbar(u).
double levy_tail(const RiskModel& model, double u);

// Premium p at which psi(alpha; p) equals `target`; psi is affine in p.
double premium_for_cumulant(const RiskModel& model, double alpha, double target = 0.0);

}  // namespace levyruin
