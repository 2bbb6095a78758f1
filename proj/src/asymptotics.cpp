#include "levyruin/asymptotics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "levyruin/errors.hpp"
#include "levyruin/rng.hpp"

namespace levyruin {

namespace {

constexpr int kEulerM = 20;
constexpr double kResonanceGap = 1e-6;

void append_flag(std::string& flags, const std::string& f) { flags = flags.empty() ? f : flags + "; " + f; }

std::vector<double> simpson_weights(int n, double h) {
    std::vector<double> w(n + 1);
    for (int k = 0; k <= n; ++k) w[k] = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    for (auto& x : w) x *= h / 3.0;
    return w;
}

// Euler summation weights eta_k, k = 0..2M.
std::array<double, 2 * kEulerM + 1> euler_weights() {
    std::array<double, 2 * kEulerM + 1> xi{};
    xi[0] = 0.5;
    for (int k = 1; k <= kEulerM; ++k) xi[k] = 1.0;
    xi[2 * kEulerM] = std::ldexp(1.0, -kEulerM);
    double binom = 1.0;  // C(M, k)
    for (int k = 1; k < kEulerM; ++k) {
        binom = binom * (kEulerM - k + 1) / k;
        xi[2 * kEulerM - k] = xi[2 * kEulerM - k + 1] + std::ldexp(binom, -kEulerM);
    }
    std::array<double, 2 * kEulerM + 1> eta{};
    for (int k = 0; k <= 2 * kEulerM; ++k) eta[k] = (k % 2 ? -1.0 : 1.0) * xi[k];
    return eta;
}

}  // namespace

const char* to_string(BMethod m) {
    switch (m) {
        case BMethod::quadrature: return "quadrature";
        case BMethod::exp_time: return "exp-time";
        case BMethod::laplace: return "laplace";
    }
    return "?";
}

std::vector<BEstimate> b_curve(const RiskModel& model, double alpha, const std::vector<double>& horizons, int intervals,
                               const McOptions& opts, SupMgfMethod method) {
    validate(model);
    if (intervals < 2 || intervals % 2) throw ConfigError("Simpson rule needs an even number of intervals >= 2");
    for (double T : horizons)
        if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be finite and > 0");
    if (!in_mgf_domain(model.claims, alpha)) throw DomainError("alpha outside the MGF domain: psi(alpha) is infinite");
    const SupMgfSampler sampler(model, alpha, method);
    const double psi = sampler.psi();

    // Node s = T - t_k of every horizon, merged into one ascending list.
    std::vector<double> nodes;
    for (double T : horizons)
        for (int k = 0; k <= intervals; ++k) nodes.push_back(T * (intervals - k) / intervals);
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    struct Term {
        std::size_t node;
        double coef;
    };
    std::vector<std::vector<Term>> terms(horizons.size());
    for (std::size_t j = 0; j < horizons.size(); ++j) {
        const double T = horizons[j];
        const auto w = simpson_weights(intervals, T / intervals);
        for (int k = 0; k <= intervals; ++k) {
            const double t = T * k / intervals;
            const double s = T * (intervals - k) / intervals;
            const auto at = std::lower_bound(nodes.begin(), nodes.end(), s) - nodes.begin();
            terms[j].push_back({static_cast<std::size_t>(at), w[k] * std::exp(psi * t)});
        }
    }

    using Partial = std::vector<RunningStats>;
    const std::size_t nh = horizons.size();
    const Partial total = run_chunked<Partial>(
        opts.replicas, opts.threads,
        [&](std::uint64_t b, std::uint64_t e) {
            Partial part(nh);
            std::vector<double> row(nodes.size());
            for (std::uint64_t i = b; i < e; ++i) {
                RandomStream s(opts.seed, StreamTag::quadrature_b, i);
                sampler.profile(nodes, s, row);
                for (std::size_t j = 0; j < nh; ++j) {
                    double y = 0.0;
                    for (const Term& t : terms[j]) y += t.coef * row[t.node];
                    part[j].add(y);
                }
            }
            return part;
        },
        [](Partial& out, const Partial& p) {
            for (std::size_t j = 0; j < out.size(); ++j) out[j].merge(p[j]);
        },
        Partial(nh));

    std::vector<BEstimate> out;
    for (std::size_t j = 0; j < nh; ++j) {
        BEstimate b;
        b.value = total[j].mean();
        b.std_error = total[j].std_error();
        b.method = BMethod::quadrature;
        b.T = horizons[j];
        b.alpha = alpha;
        b.replicas = opts.replicas;
        b.seed = opts.seed;
        b.flags = std::string("sup-mgf ") + sampler.method_name();
        out.push_back(b);
    }
    return out;
}

BEstimate b_quadrature(const RiskModel& model, double alpha, double T, int intervals, const McOptions& opts,
                       SupMgfMethod method) {
    return b_curve(model, alpha, {T}, intervals, opts, method).front();
}

BEstimate b_exp_time(const RiskModel& model, double alpha, double T, const McOptions& opts, int fallback_intervals) {
    validate(model);
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be finite and > 0");
    if (!in_mgf_domain(model.claims, alpha)) throw DomainError("alpha outside the MGF domain: psi(alpha) is infinite");
    const double psi = cumulant(model, alpha);
    if (std::abs(psi) < 1e-8) {
        BEstimate b = b_quadrature(model, alpha, T, fallback_intervals, opts);
        append_flag(b.flags, "exp-time fallback to quadrature: psi(alpha) = 0");
        return b;
    }
    const SupMgfSampler sampler(model, alpha);
    const double rate = std::abs(psi);
    const RunningStats st = run_chunked<RunningStats>(
        opts.replicas, opts.threads,
        [&](std::uint64_t b, std::uint64_t e) {
            RunningStats part;
            for (std::uint64_t i = b; i < e; ++i) {
                RandomStream s(opts.seed, StreamTag::exp_time, i);
                const double et = s.exponential(rate);
                double v = 0.0;
                if (et < T) v = sampler.sample(psi > 0.0 ? et : T - et, s);
                part.add(v);
            }
            return part;
        },
        [](RunningStats& o, const RunningStats& p) { o.merge(p); });
    const double scale = psi > 0.0 ? std::exp(psi * T) / psi : 1.0 / -psi;
    BEstimate b;
    b.value = scale * st.mean();
    b.std_error = scale * st.std_error();
    b.method = BMethod::exp_time;
    b.T = T;
    b.alpha = alpha;
    b.replicas = opts.replicas;
    b.seed = opts.seed;
    b.flags = std::string("sup-mgf ") + sampler.method_name();
    return b;
}

std::complex<double> b_transform(const RiskModel& model, double alpha, std::complex<double> delta,
                                 std::complex<double>* phi_guess) {
    const double psi = cumulant(model, alpha);
    const std::complex<double> d = delta - psi;
    if (model.premium == 0.0) return 1.0 / (d * d);
    if (model.premium < 0.0) throw DomainError("Laplace transform of B needs p >= 0");
    std::complex<double> phi;
    if (delta.imag() == 0.0) {
        phi = phi_inverse(model, delta.real());
    } else {
        const std::complex<double> far = -(delta + model.lambda) / model.premium;
        const std::complex<double> guess = phi_guess ? *phi_guess : far;
        try {
            phi = phi_inverse(model, delta, guess);
        } catch (const DomainError&) {
            phi = phi_inverse(model, delta, far);
        }
        if (phi.real() > 0.0) phi = phi_inverse(model, delta, far);
    }
    if (phi_guess) *phi_guess = phi;
    return (phi - alpha) / (d * d * phi);
}

BEstimate b_laplace(const RiskModel& model, double alpha, double T) {
    validate(model);
    if (model.premium < 0.0) throw DomainError("Laplace method needs p >= 0 (spectrally positive with drift down)");
    if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon T must be finite and > 0");
    if (!in_mgf_domain(model.claims, alpha)) throw DomainError("alpha outside the MGF domain: psi(alpha) is infinite");
    const double psi = cumulant(model, alpha);
    static const auto eta = euler_weights();
    const double a = kEulerM * std::numbers::ln10 / 3.0;
    // Shift the contour so the double pole at psi sits on the imaginary axis.
    const double c = std::max(psi, 0.0);
    BEstimate b;
    b.method = BMethod::laplace;
    b.T = T;
    b.alpha = alpha;
    if (std::abs(a / T + c - psi) < kResonanceGap) append_flag(b.flags, "resonance: contour within 1e-6 of psi(alpha)");
    // The k = 0 node is real; its phi seeds the continuation along the contour.
    std::complex<double> guess = 0.0;
    double sum = 0.0;
    for (int k = 0; k <= 2 * kEulerM; ++k) {
        const std::complex<double> s(a / T, std::numbers::pi * k / T);
        const std::complex<double> v = b_transform(model, alpha, s + c, model.premium > 0.0 ? &guess : nullptr);
        sum += eta[k] * v.real();
    }
    b.value = std::exp(c * T) * std::pow(10.0, kEulerM / 3.0) / T * sum;
    return b;
}

double finite_time_ruin_estimate(const RiskModel& model, double u, const BEstimate& b) {
    return levy_tail(model, u) * b.value;
}

GrowthEstimate growth_rate(const RiskModel& model, double alpha, const std::vector<double>& t_grid,
                           const McOptions& opts) {
    GrowthEstimate g;
    g.t = t_grid;
    const auto est = estimate_sup_mgf_grid(model, alpha, t_grid, opts);
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const double t = t_grid[k];
        g.rate.push_back(std::log(est[k].estimate) / t);
        g.std_error.push_back(est[k].std_error / (est[k].estimate * t));
    }
    const std::size_t n = t_grid.size();
    if (n < 3) {
        g.extrapolated = n ? g.rate.back() : NAN;
        return g;
    }
    // Weighted least squares for rate(t) = C + b ln(1 + t)/t + c/t.
    double A[3][3] = {}, r[3] = {};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t_grid[k];
        const double x[3] = {1.0, std::log1p(t) / t, 1.0 / t};
        const double w = 1.0 / std::max(g.std_error[k] * g.std_error[k], 1e-300);
        for (int i = 0; i < 3; ++i) {
            r[i] += w * x[i] * g.rate[k];
            for (int j = 0; j < 3; ++j) A[i][j] += w * x[i] * x[j];
        }
    }
    // Gaussian elimination with partial pivoting.
    int piv[3] = {0, 1, 2};
    for (int col = 0; col < 3; ++col) {
        int best = col;
        for (int i = col + 1; i < 3; ++i)
            if (std::abs(A[piv[i]][col]) > std::abs(A[piv[best]][col])) best = i;
        std::swap(piv[col], piv[best]);
        for (int i = col + 1; i < 3; ++i) {
            const double f = A[piv[i]][col] / A[piv[col]][col];
            for (int j = col; j < 3; ++j) A[piv[i]][j] -= f * A[piv[col]][j];
            r[piv[i]] -= f * r[piv[col]];
        }
    }
    double sol[3];
    for (int i = 2; i >= 0; --i) {
        double v = r[piv[i]];
        for (int j = i + 1; j < 3; ++j) v -= A[piv[i]][j] * sol[j];
        sol[i] = v / A[piv[i]][i];
    }
    g.extrapolated = sol[0];
    return g;
}

std::optional<SegerdahlConstants> segerdahl_constants(const RiskModel& model) {
    const auto nu = lundberg_root(model);
    if (!nu) return std::nullopt;
    const MgfDerivatives d = cumulant_derivatives(model, *nu);
    if (!std::isfinite(d.first) || !std::isfinite(d.second) || !(d.first > 0.0)) return std::nullopt;
    SegerdahlConstants c;
    c.nu = *nu;
    c.C = -mean_increment(model) / d.first;
    c.a = 1.0 / d.first;
    c.b = std::sqrt(d.second / (d.first * d.first * d.first));
    return c;
}

std::optional<double> segerdahl(const RiskModel& model, double u, double T) {
    const auto c = segerdahl_constants(model);
    if (!c) return std::nullopt;
    const double cl = c->C * std::exp(-c->nu * u);
    if (std::isinf(T)) return cl;
    const double z = (T - c->a * u) / (c->b * std::sqrt(u));
    return cl * 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

std::vector<TailRatioRow> tail_ratio_diagnostic(const RiskModel& model, double alpha, double T,
                                                const std::vector<double>& u_grid, const McOptions& opts) {
    std::vector<TailRatioRow> rows;
    const double pred = T * std::exp(cumulant(model, alpha) * T);
    for (double u : u_grid) {
        const MCEstimate e = estimate_tail_prob(model, u, T, opts, ImportanceSampling::esscher(alpha));
        const double tail = levy_tail(model, u);
        rows.push_back({u, e.estimate / tail, e.std_error / tail, pred, e.hits});
    }
    return rows;
}

}  // namespace levyruin
