#include "levyruin/path_sim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "levyruin/errors.hpp"
#include "levyruin/quadrature.hpp"

namespace levyruin {

namespace {

double lomax(double shape, double scale, RandomStream& s) {
    return scale * std::expm1(-std::log(s.uniform()) / shape);
}

double tilted_pareto_ar(const TiltedPareto& t, RandomStream& s, std::uint64_t& proposals) {
    const double envelope = t.alpha + t.theta / t.sigma;
    for (;;) {
        ++proposals;
        const double x = s.exponential(t.alpha);
        const double w = 1.0 + x / t.sigma;
        const double ratio = (t.alpha * std::pow(w, -t.theta) + t.theta / t.sigma * std::pow(w, -t.theta - 1.0)) / envelope;
        if (s.uniform() <= ratio) return x;
    }
}

// Full tilt by alpha: mixture of Lomax(theta-1, sigma) with mass
// alpha sigma/(theta-1) and Lomax(theta, sigma) with mass 1.
double full_tilt_mixture(const TiltedPareto& t, RandomStream& s) {
    const double heavy = t.alpha * t.sigma / (t.theta - 1.0);
    const double pick = s.uniform() * (1.0 + heavy);
    return pick < heavy ? lomax(t.theta - 1.0, t.sigma, s) : lomax(t.theta, t.sigma, s);
}

double esscher_tp(const EsscherTiltedPareto& e, RandomStream& s, std::uint64_t& proposals) {
    if (e.tilt == 0.0) return tilted_pareto_ar(e.base, s, proposals);
    if (e.tilt == e.base.alpha) {
        ++proposals;
        return full_tilt_mixture(e.base, s);
    }
    // Partial tilt: the full-tilt mixture dominates, accept with e^{-(alpha - tilt) x}.
    const double gap = e.base.alpha - e.tilt;
    for (;;) {
        ++proposals;
        const double x = full_tilt_mixture(e.base, s);
        if (s.uniform() <= std::exp(-gap * x)) return x;
    }
}

}  // namespace

double sample_claim(const ClaimDistribution& dist, RandomStream& stream, std::uint64_t& proposals) {
    if (const auto* e = std::get_if<Exponential>(&dist)) {
        ++proposals;
        return stream.exponential(e->rate);
    }
    if (const auto* t = std::get_if<TiltedPareto>(&dist)) return tilted_pareto_ar(*t, stream, proposals);
    return esscher_tp(std::get<EsscherTiltedPareto>(dist), stream, proposals);
}

double sample_claim(const ClaimDistribution& dist, RandomStream& stream) {
    std::uint64_t ignored = 0;
    return sample_claim(dist, stream, ignored);
}

double PathSample::value(double t) const {
    double x = -premium * t;
    for (std::size_t i = 0; i < times.size() && times[i] <= t; ++i) x += sizes[i];
    return x;
}

PathSample sample_path(const RiskModel& model, double horizon, RandomStream& stream) {
    PathSample p;
    p.horizon = horizon;
    p.premium = model.premium;
    double t = 0.0;
    for (;;) {
        t += stream.exponential(model.lambda);
        if (t > horizon) break;
        p.times.push_back(t);
        p.sizes.push_back(sample_claim(model.claims, stream));
    }
    return p;
}

double running_sup(const PathSample& path, double t) {
    double sup = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < path.times.size() && path.times[i] <= t; ++i) {
        acc += path.sizes[i];
        sup = std::max(sup, acc - path.premium * path.times[i]);
    }
    if (path.premium < 0.0) sup = std::max(sup, acc - path.premium * t);
    return sup;
}

std::optional<PassageEvent> first_passage(const PathSample& path, double u) {
    const double p = path.premium;
    double t = 0.0, x = 0.0, sup = 0.0;
    for (std::size_t i = 0;; ++i) {
        const double next = i < path.times.size() ? path.times[i] : path.horizon;
        if (p < 0.0) {
            const double tc = t + (u - x) / -p;
            if (tc <= next) return PassageEvent{tc, 0.0, CrossingMode::drift, u, u};
        }
        if (i == path.times.size()) return std::nullopt;
        const double pre = x - p * (next - t);
        const double pre_sup = std::max(sup, pre);
        const double y = pre + path.sizes[i];
        if (y > u) return PassageEvent{next, y - u, CrossingMode::jump, pre_sup, pre};
        t = next;
        x = y;
        sup = std::max(pre_sup, y);
    }
}

// ---------------------------------------------------------------- sup MGF

SupMgfSampler::SupMgfSampler(const RiskModel& model, double alpha, SupMgfMethod method)
    : sim_(model), alpha_(alpha), psi_(cumulant(model, alpha)), method_(method) {
    validate(model);
    if (method_ == SupMgfMethod::automatic) {
        method_ = SupMgfMethod::esscher;
        if (const auto* e = std::get_if<Exponential>(&model.claims)) {
            // Direct is fine when E e^{2 alpha Xbar} < inf and the tilted drift is not positive.
            if (2.0 * alpha < e->rate && cumulant_derivatives(model, alpha).first <= 0.0) method_ = SupMgfMethod::direct;
        }
    }
    if (method_ == SupMgfMethod::esscher) sim_ = esscher_model(model, alpha);
}

const char* SupMgfSampler::method_name() const {
    return method_ == SupMgfMethod::esscher ? "esscher" : "direct";
}

void SupMgfSampler::profile(std::span<const double> horizons, RandomStream& stream, std::span<double> out) const {
    const double p = sim_.premium;
    const bool tilted = method_ == SupMgfMethod::esscher;
    double t = 0.0, x = 0.0, sup = 0.0;
    double next = stream.exponential(sim_.lambda);
    std::size_t k = 0;
    const std::size_t n = horizons.size();
    for (;;) {
        while (k < n && horizons[k] < next) {
            const double h = horizons[k];
            const double xh = x - p * (h - t);
            const double sh = std::max(sup, xh);
            out[k] = tilted ? std::exp(psi_ * h + alpha_ * (sh - xh)) : std::exp(alpha_ * sh);
            ++k;
        }
        if (k == n) return;
        x += sample_claim(sim_.claims, stream) - p * (next - t);
        t = next;
        sup = std::max(sup, x);
        next = t + stream.exponential(sim_.lambda);
    }
}

double SupMgfSampler::sample(double t, RandomStream& stream) const {
    double out = 0.0;
    profile(std::span<const double>(&t, 1), stream, std::span<double>(&out, 1));
    return out;
}

std::vector<MCEstimate> estimate_sup_mgf_grid(const RiskModel& model, double alpha, std::span<const double> horizons,
                                              const McOptions& opts, SupMgfMethod method) {
    if (!std::is_sorted(horizons.begin(), horizons.end())) throw ConfigError("horizons must be ascending");
    if (!horizons.empty() && horizons.front() < 0.0) throw ConfigError("horizons must be >= 0");
    const SupMgfSampler sampler(model, alpha, method);
    const std::size_t n = horizons.size();
    using Partial = std::vector<RunningStats>;
    const Partial total = run_chunked<Partial>(
        opts.replicas, opts.threads,
        [&](std::uint64_t b, std::uint64_t e) {
            Partial part(n);
            std::vector<double> row(n);
            for (std::uint64_t i = b; i < e; ++i) {
                RandomStream s(opts.seed, StreamTag::sup_mgf, i);
                sampler.profile(horizons, s, row);
                for (std::size_t k = 0; k < n; ++k) part[k].add(row[k]);
            }
            return part;
        },
        [](Partial& out, const Partial& p) {
            for (std::size_t k = 0; k < out.size(); ++k) out[k].merge(p[k]);
        },
        Partial(n));
    std::vector<MCEstimate> res;
    res.reserve(n);
    for (std::size_t k = 0; k < n; ++k) res.push_back(MCEstimate::from_stats(total[k], opts.seed, sampler.method_name()));
    return res;
}

MCEstimate estimate_sup_mgf(const RiskModel& model, double alpha, double t, const McOptions& opts,
                            SupMgfMethod method) {
    return estimate_sup_mgf_grid(model, alpha, std::span<const double>(&t, 1), opts, method).front();
}

// ---------------------------------------------------------------- passage

SurrogateHorizon surrogate_horizon(const RiskModel& model, double u, double rel) {
    if (!(model.premium > 0.0) || mean_increment(model) >= 0.0)
        throw RegimeError("infinite-horizon surrogate needs E X_1 < 0: ruin is certain otherwise");
    SurrogateHorizon out;
    out.lower_bound = quad::integrate_to_infinity(
        [&](double t) { return model.lambda * std::exp(-model.lambda * t) * claim_tail(model.claims, u + model.premium * t); },
        0.0, quad::Tolerance{1e-10, 1e-300, 1000});
    double beta_max = mgf_abscissa(model.claims);
    if (const auto nu = lundberg_root(model)) beta_max = *nu;
    if (!mgf_abscissa_attained(model.claims) && !lundberg_root(model)) beta_max *= 1.0 - 1e-9;
    const double target = std::log(rel * out.lower_bound);
    out.horizon = INFINITY;
    const int grid = 400;
    for (int i = 1; i <= grid; ++i) {
        const double b = beta_max * i / grid;
        const double psi = cumulant(model, b);
        if (!(psi < 0.0)) continue;
        const double h = std::max(0.0, (target + b * u) / psi);
        if (h < out.horizon) {
            out.horizon = h;
            out.beta = b;
        }
    }
    if (!std::isfinite(out.horizon)) throw RegimeError("no beta with psi(beta) < 0 for the surrogate certificate");
    out.tail_bound = std::exp(-out.beta * u + cumulant(model, out.beta) * out.horizon);
    return out;
}

PassageSimulator::PassageSimulator(const RiskModel& model, ImportanceSampling is) : sim_(model), is_(is) {
    validate(model);
    if (is.kind == ImportanceSampling::Kind::esscher) {
        if (!(is.alpha > 0.0) || !in_mgf_domain(model.claims, is.alpha)) {
            std::ostringstream os;
            os << "Esscher IS index " << is.alpha << " outside the MGF domain of " << describe(model.claims);
            throw ConfigError(os.str());
        }
        psi_ = cumulant(model, is.alpha);
        sim_ = esscher_model(model, is.alpha);
    }
    sim_drift_ = mean_increment(sim_);
}

std::optional<WeightedPassage> PassageSimulator::run(double u, double horizon, RandomStream& stream) const {
    if (std::isinf(horizon) && !drifts_up())
        throw ConfigError("infinite horizon needs a simulation measure with positive drift");
    const double p = sim_.premium;
    double t = 0.0, x = 0.0, sup = 0.0;
    for (;;) {
        const double next = t + stream.exponential(sim_.lambda);
        std::optional<PassageEvent> ev;
        if (p < 0.0) {
            const double tc = t + (u - x) / -p;
            if (tc <= std::min(next, horizon)) ev = PassageEvent{tc, 0.0, CrossingMode::drift, u, u};
        }
        if (!ev) {
            if (next > horizon) return std::nullopt;
            const double pre = x - p * (next - t);
            const double pre_sup = std::max(sup, pre);
            const double y = pre + sample_claim(sim_.claims, stream);
            if (y > u) {
                ev = PassageEvent{next, y - u, CrossingMode::jump, pre_sup, pre};
            } else {
                t = next;
                x = y;
                sup = std::max(pre_sup, y);
                continue;
            }
        }
        WeightedPassage wp{*ev, 1.0};
        if (is_.kind == ImportanceSampling::Kind::esscher)
            wp.weight = std::exp(-is_.alpha * (u + ev->overshoot) + psi_ * ev->tau);
        return wp;
    }
}

namespace {

std::string is_name(const ImportanceSampling& is) {
    if (is.kind == ImportanceSampling::Kind::none) return "direct";
    std::ostringstream os;
    os << "esscher(" << is.alpha << ")";
    return os.str();
}

void append_flag(MCEstimate& e, const std::string& flag) {
    e.flags = e.flags.empty() ? flag : e.flags + "; " + flag;
}

}  // namespace

MCEstimate estimate_ruin_prob(const RiskModel& model, double u, double horizon, const McOptions& opts,
                              ImportanceSampling is) {
    if (!(u >= 0.0)) throw DomainError("ruin level u must be >= 0");
    if (!(horizon > 0.0)) throw DomainError("horizon must be > 0");
    const PassageSimulator sim(model, is);
    std::string note;
    double h = horizon;
    if (std::isinf(horizon) && !sim.drifts_up()) {
        if (mean_increment(model) >= 0.0 && is.kind == ImportanceSampling::Kind::none) {
            MCEstimate e;
            e.estimate = 1.0;
            e.replicas = opts.replicas;
            e.seed = opts.seed;
            e.method = "certain";
            e.hits = opts.replicas;
            e.flags = "E X_1 >= 0: ruin is certain";
            return e;
        }
        const SurrogateHorizon s = surrogate_horizon(model, u);
        h = s.horizon;
        std::ostringstream os;
        os << "surrogate horizon " << s.horizon << " (tail bound " << s.tail_bound << ")";
        note = os.str();
    }
    const RunningStats st = run_chunked<RunningStats>(
        opts.replicas, opts.threads,
        [&](std::uint64_t b, std::uint64_t e) {
            RunningStats part;
            for (std::uint64_t i = b; i < e; ++i) {
                RandomStream s(opts.seed, StreamTag::ruin, i);
                const auto r = sim.run(u, h, s);
                part.add(r ? r->weight : 0.0);
            }
            return part;
        },
        [](RunningStats& out, const RunningStats& p) { out.merge(p); });
    MCEstimate est = MCEstimate::from_stats(st, opts.seed, is_name(is));
    if (!note.empty()) append_flag(est, note);
    return est;
}

MCEstimate estimate_tail_prob(const RiskModel& model, double u, double horizon, const McOptions& opts,
                              ImportanceSampling is) {
    if (!(horizon >= 0.0) || std::isinf(horizon)) throw DomainError("tail probability needs a finite horizon");
    validate(model);
    RiskModel sim = model;
    double psi = 0.0;
    const bool tilted = is.kind == ImportanceSampling::Kind::esscher;
    if (tilted) {
        if (!(is.alpha > 0.0) || !in_mgf_domain(model.claims, is.alpha))
            throw ConfigError("Esscher IS index outside the MGF domain");
        psi = cumulant(model, is.alpha);
        sim = esscher_model(model, is.alpha);
    }
    const RunningStats st = run_chunked<RunningStats>(
        opts.replicas, opts.threads,
        [&](std::uint64_t b, std::uint64_t e) {
            RunningStats part;
            for (std::uint64_t i = b; i < e; ++i) {
                RandomStream s(opts.seed, StreamTag::tail, i);
                double x = -sim.premium * horizon;
                for (double t = s.exponential(sim.lambda); t <= horizon; t += s.exponential(sim.lambda))
                    x += sample_claim(sim.claims, s);
                double v = x > u ? 1.0 : 0.0;
                if (tilted && v > 0.0) v = std::exp(-is.alpha * x + psi * horizon);
                part.add(v);
            }
            return part;
        },
        [](RunningStats& out, const RunningStats& p) { out.merge(p); });
    return MCEstimate::from_stats(st, opts.seed, is_name(is));
}

}  // namespace levyruin
