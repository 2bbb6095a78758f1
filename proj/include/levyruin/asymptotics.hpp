#pragma once

// The finite-time ruin constant
//   B(T) = int_0^T e^{psi(alpha)(T - t)} E e^{alpha Xbar_t} dt,
// so that P(tau(u) < T) ~ Pibar(u) B(T), by three independent methods, and
// the quantities derived from it.

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "levyruin/model.hpp"
#include "levyruin/parallel.hpp"
#include "levyruin/path_sim.hpp"

namespace levyruin {

enum class BMethod { quadrature, exp_time, laplace };
const char* to_string(BMethod m);

struct BEstimate {
    double value = 0.0;
    double std_error = 0.0;  // 0 for the deterministic Laplace method
    BMethod method = BMethod::quadrature;
    double T = 0.0;
    double alpha = 0.0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    std::string flags;
};

// Composite Simpson over `intervals` (even) nodes of e^{psi t} m(T - t), all
// nodes from the same paths. The standard error is exact: each replica
// contributes one Simpson sum, so shared-path covariance is included.
BEstimate b_quadrature(const RiskModel& model, double alpha, double T, int intervals, const McOptions& opts,
                       SupMgfMethod method = SupMgfMethod::automatic);
// B on a horizon grid from one set of paths (shared seeds across T).
std::vector<BEstimate> b_curve(const RiskModel& model, double alpha, const std::vector<double>& horizons, int intervals,
                               const McOptions& opts, SupMgfMethod method = SupMgfMethod::automatic);

// psi > 0: B = e^{psi T}/psi E(e^{alpha Xbar_e}; e < T), e ~ Exp(psi).
// psi < 0: B = E(e^{alpha Xbar_{T-e}}; e < T)/(-psi), e ~ Exp(-psi).
// Falls back to quadrature (flagged) when |psi| < 1e-8.
BEstimate b_exp_time(const RiskModel& model, double alpha, double T, const McOptions& opts,
                     int fallback_intervals = 64);

// Laplace transform of B at complex delta with Re(delta) > max(psi, 0):
// (phi(delta) - alpha) / ((delta - psi)^2 phi(delta)); 1/(delta - psi)^2
// for p = 0. `phi_guess` seeds the Newton continuation of phi.
std::complex<double> b_transform(const RiskModel& model, double alpha, std::complex<double> delta,
                                 std::complex<double>* phi_guess = nullptr);

// Euler-summation inversion with 2M + 1 = 41 terms, contour shifted by
// max(psi, 0).
BEstimate b_laplace(const RiskModel& model, double alpha, double T);

// Headline approximation Pibar(u) B(T).
double finite_time_ruin_estimate(const RiskModel& model, double u, const BEstimate& b);

struct GrowthEstimate {
    std::vector<double> t;
    std::vector<double> rate;  // ln m(t) / t
    std::vector<double> std_error;
    double extrapolated = 0.0;  // C from the fit C + b ln(1 + t)/t + c/t
};
GrowthEstimate growth_rate(const RiskModel& model, double alpha, const std::vector<double>& t_grid,
                           const McOptions& opts);

// Classical constants at the Lundberg root nu: C = -E X_1 / psi'(nu),
// a = 1/psi'(nu), b^2 = psi''(nu)/psi'(nu)^3.
struct SegerdahlConstants {
    double nu = 0.0;
    double C = 0.0;
    double a = 0.0;
    double b = 0.0;
};
std::optional<SegerdahlConstants> segerdahl_constants(const RiskModel& model);
// C e^{-nu u} Phi((T - a u)/(b sqrt u)); C e^{-nu u} for T = inf.
std::optional<double> segerdahl(const RiskModel& model, double u, double T);

struct TailRatioRow {
    double u = 0.0;
    double ratio = 0.0;  // P(X_T > u) / Pibar(u)
    double std_error = 0.0;
    double prediction = 0.0;  // T e^{psi(alpha) T}
    std::uint64_t hits = 0;
};
std::vector<TailRatioRow> tail_ratio_diagnostic(const RiskModel& model, double alpha, double T,
                                                const std::vector<double>& u_grid, const McOptions& opts);

}  // namespace levyruin
