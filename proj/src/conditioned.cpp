#include "levyruin/conditioned.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "levyruin/errors.hpp"

namespace levyruin {

namespace {

constexpr std::array<char, 4> kGridMagic{'L', 'R', 'P', 'G'};
constexpr std::uint32_t kGridVersion = 1;

struct GridSums {
    std::vector<double> sum;
    std::vector<double> sq;
};

std::vector<double> make_levels(const PassageGridSpec& spec, double a_max) {
    std::vector<double> out(static_cast<std::size_t>(spec.levels));
    out[0] = 0.0;
    const int n = spec.levels - 1;
    for (int k = 0; k < n; ++k)
        out[static_cast<std::size_t>(k) + 1] =
            n == 1 ? a_max : spec.a_min * std::pow(a_max / spec.a_min, static_cast<double>(k) / (n - 1));
    out.back() = a_max;
    return out;
}

std::vector<double> make_times(int n, double T) {
    std::vector<double> out(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = T * j / (n - 1);
    out.back() = T;
    return out;
}

// Walks one path on [0, horizon] and reports, for every level in `levels`
// (ascending), the passage time and overshoot; unreached levels get tau = inf.
void passage_profile(const RiskModel& sim, std::span<const double> levels, double horizon, RandomStream& stream,
                     std::span<double> tau, std::span<double> over) {
    std::fill(tau.begin(), tau.end(), kInfiniteHorizon);
    std::size_t next_level = 0;
    const std::size_t n = levels.size();
    const double p = sim.premium;
    double t = 0.0, x = 0.0;
    // Before the first jump the path only moves by drift.
    auto drift_cross = [&](double t_end) {
        if (p >= 0.0) return;
        const double x_end = x - p * (t_end - t);
        while (next_level < n && levels[next_level] < x_end) {
            const double a = levels[next_level];
            tau[next_level] = t + std::max(0.0, a - x) / -p;
            over[next_level] = 0.0;
            ++next_level;
        }
    };
    while (next_level < n) {
        const double arrival = t + stream.exponential(sim.lambda);
        if (arrival > horizon) {
            drift_cross(horizon);
            return;
        }
        drift_cross(arrival);
        x -= p * (arrival - t);
        t = arrival;
        x += sample_claim(sim.claims, stream);
        while (next_level < n && levels[next_level] < x) {
            tau[next_level] = t;
            over[next_level] = x - levels[next_level];
            ++next_level;
        }
    }
}

// A piece of the level range [0, a_max] crossed either by one jump (all
// levels share tau and O = y - a) or by upward drift (O = 0, tau linear in a).
struct CrossPiece {
    double lo, hi;
    double t, x;  // jump time (jump) or segment start (drift)
    double y;     // post-jump value; unused for drift
    bool drift;
    double weight;
};

// Size-biased proposal for the negative branch of W. Given remaining time s,
// the joint target of (a, path) is proportional to
// e^{-alpha O_a + psi tau_a} 1{tau_a < s} da Q(dpath) on a in [0, a_max].
// Proposals are drawn from Q weighted by the bound
// b = e^{psi_+ s} (N / alpha + (-p)_+ s) >= int w_a da, accepted with
// probability int w_a da / b, and a is then drawn from w_a.
class NegativeBranch {
public:
    NegativeBranch(const RiskModel& sim, double alpha, double psi, double a_max)
        : sim_(sim), alpha_(alpha), psi_(psi), a_max_(a_max) {}

    // Returns false on rejection.
    bool attempt(double s, RandomStream& stream, ConditionedW& out, PathSample* path) {
        const double p = sim_.premium;
        const double up = std::max(-p, 0.0);
        const double jump_part = sim_.lambda * s / alpha_;
        const bool biased = stream.uniform() * (jump_part + up * s) < jump_part;
        times_.clear();
        for (double t = stream.exponential(sim_.lambda); t < s; t += stream.exponential(sim_.lambda))
            times_.push_back(t);
        if (biased) {
            const double extra = stream.uniform() * s;
            times_.insert(std::upper_bound(times_.begin(), times_.end(), extra), extra);
        }
        sizes_.resize(times_.size());
        for (double& u : sizes_) u = sample_claim(sim_.claims, stream);

        pieces_.clear();
        double total = 0.0;
        double t = 0.0, x = 0.0, sup = 0.0;
        auto drift_to = [&](double t_end) {
            if (p >= 0.0 || sup >= a_max_) return;
            const double x_end = x - p * (t_end - t);
            if (x_end > sup) {
                const double hi = std::min(x_end, a_max_);
                // int e^{psi (t + (a - x)/up)} da over [sup, hi]
                const double r = psi_ / up;
                const double base = std::exp(psi_ * (t + (sup - x) / up));
                const double w = r == 0.0 ? base * (hi - sup) : base * std::expm1(r * (hi - sup)) / r;
                pieces_.push_back({sup, hi, t, x, 0.0, true, w});
                total += w;
                sup = hi;
            }
        };
        for (std::size_t k = 0; k < times_.size(); ++k) {
            drift_to(times_[k]);
            x -= p * (times_[k] - t);
            t = times_[k];
            x += sizes_[k];
            if (x > sup && sup < a_max_) {
                const double hi = std::min(x, a_max_);
                const double w = std::exp(psi_ * t) * (std::exp(-alpha_ * (x - hi)) - std::exp(-alpha_ * (x - sup))) / alpha_;
                pieces_.push_back({sup, hi, t, x, x, false, w});
                total += w;
            }
            sup = std::max(sup, x);
        }
        drift_to(s);
        const double bound = std::exp(std::max(psi_, 0.0) * s) * (static_cast<double>(times_.size()) / alpha_ + up * s);
        if (!(total > 0.0) || stream.uniform() * bound > total) return false;

        double pick = stream.uniform() * total;
        std::size_t k = 0;
        while (k + 1 < pieces_.size() && pick > pieces_[k].weight) pick -= pieces_[k++].weight;
        const CrossPiece& c = pieces_[k];
        const double v = stream.uniform();
        double a;
        if (c.drift) {
            const double r = psi_ / up;
            a = r == 0.0 ? c.lo + v * (c.hi - c.lo) : c.lo + std::log1p(v * std::expm1(r * (c.hi - c.lo))) / r;
            a = std::clamp(a, c.lo, c.hi);
            out.tau0 = c.t + (a - c.x) / up;
            out.overshoot = 0.0;
        } else {
            a = c.lo + std::log1p(v * std::expm1(alpha_ * (c.hi - c.lo))) / alpha_;
            a = std::clamp(a, c.lo, c.hi);
            out.tau0 = c.t;
            out.overshoot = c.y - a;
        }
        out.w0 = -a;
        if (path) {
            *path = PathSample{out.tau0, p, {}, {}};
            for (std::size_t j = 0; j < times_.size() && times_[j] <= out.tau0; ++j) {
                if (c.drift && times_[j] >= out.tau0) break;
                path->times.push_back(times_[j]);
                path->sizes.push_back(sizes_[j]);
            }
        }
        return true;
    }

private:
    const RiskModel& sim_;
    double alpha_, psi_, a_max_;
    std::vector<double> times_, sizes_;
    std::vector<CrossPiece> pieces_;
};

void write_raw(std::ofstream& os, const void* p, std::size_t n) { os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
void read_raw(std::ifstream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw GridError("truncated passage grid file");
}

template <class T>
void write_pod(std::ofstream& os, const T& v) {
    write_raw(os, &v, sizeof v);
}
template <class T>
T read_pod(std::ifstream& is) {
    T v{};
    read_raw(is, &v, sizeof v);
    return v;
}

std::uint64_t attempt_cap(double min_acceptance) {
    return static_cast<std::uint64_t>(std::ceil(10.0 / min_acceptance));
}

}  // namespace

// ------------------------------------------------------------------ tau

double tau_cdf(double psi, double T, double t) {
    if (t <= 0.0) return 0.0;
    if (t >= T) return 1.0;
    if (psi == 0.0) return t / T;
    return std::expm1(psi * t) / std::expm1(psi * T);
}

double sample_tau(double psi, double T, RandomStream& stream) {
    if (!(T > 0.0) || std::isinf(T)) throw DomainError("tau needs a finite horizon T > 0");
    const double u = stream.uniform();
    if (psi == 0.0) return u * T;
    const double t = std::log1p(u * std::expm1(psi * T)) / psi;
    return std::clamp(t, 0.0, std::nextafter(T, 0.0));
}

double sample_tau(const RiskModel& model, double alpha, double T, RandomStream& stream) {
    return sample_tau(cumulant(model, alpha), T, stream);
}

// ------------------------------------------------------------------ grid

double PassageGrid::passage_prob(std::size_t i, std::size_t j) const {
    return std::exp(-alpha * levels[i]) * at(i, j);
}

double PassageGrid::interpolate(std::size_t i, double s) const {
    if (!(s >= 0.0 && s <= horizon)) {
        std::ostringstream os;
        os << "remaining time " << s << " outside the grid range [0, " << horizon << "]";
        throw GridError(os.str());
    }
    const std::size_t ns = times.size();
    const double pos = s / horizon * static_cast<double>(ns - 1);
    const std::size_t j = std::min(ns - 2, static_cast<std::size_t>(pos));
    const double w = pos - static_cast<double>(j);
    return (1.0 - w) * at(i, j) + w * at(i, j + 1);
}

double PassageGrid::mass(double s) const {
    double acc = 0.0;
    double prev = interpolate(0, s);
    for (std::size_t i = 1; i < levels.size(); ++i) {
        const double cur = interpolate(i, s);
        acc += 0.5 * (prev + cur) * (levels[i] - levels[i - 1]);
        prev = cur;
    }
    return 1.0 + alpha * acc;
}

double PassageGrid::truncation_ratio() const {
    const std::size_t last = times.size() - 1;
    double peak = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) peak = std::max(peak, at(i, last));
    return peak > 0.0 ? at(levels.size() - 1, last) / peak : 0.0;
}

void PassageGrid::save(const std::filesystem::path& file) const {
    std::ofstream os(file, std::ios::binary | std::ios::trunc);
    if (!os) throw GridError("cannot write passage grid to " + file.string());
    write_raw(os, kGridMagic.data(), kGridMagic.size());
    write_pod(os, kGridVersion);
    write_pod(os, model_digest);
    write_pod(os, alpha);
    write_pod(os, psi);
    write_pod(os, horizon);
    write_pod(os, seed);
    write_pod(os, replicas);
    write_pod(os, static_cast<std::uint64_t>(levels.size()));
    write_pod(os, static_cast<std::uint64_t>(times.size()));
    write_raw(os, levels.data(), levels.size() * sizeof(double));
    write_raw(os, times.data(), times.size() * sizeof(double));
    write_raw(os, h.data(), h.size() * sizeof(double));
    write_raw(os, h_se.data(), h_se.size() * sizeof(double));
    if (!os) throw GridError("failed writing passage grid to " + file.string());
}

PassageGrid PassageGrid::load(const std::filesystem::path& file) {
    std::ifstream is(file, std::ios::binary);
    if (!is) throw GridError("cannot open passage grid " + file.string());
    std::array<char, 4> magic{};
    read_raw(is, magic.data(), magic.size());
    if (magic != kGridMagic) throw GridError("not a passage grid file: " + file.string());
    if (read_pod<std::uint32_t>(is) != kGridVersion) throw GridError("unsupported passage grid version");
    PassageGrid g;
    g.model_digest = read_pod<std::uint64_t>(is);
    g.alpha = read_pod<double>(is);
    g.psi = read_pod<double>(is);
    g.horizon = read_pod<double>(is);
    g.seed = read_pod<std::uint64_t>(is);
    g.replicas = read_pod<std::uint64_t>(is);
    const auto nl = read_pod<std::uint64_t>(is);
    const auto ns = read_pod<std::uint64_t>(is);
    if (nl < 2 || ns < 2 || nl > (1u << 16) || ns > (1u << 16)) throw GridError("corrupt passage grid dimensions");
    g.levels.resize(nl);
    g.times.resize(ns);
    g.h.resize(nl * ns);
    g.h_se.resize(nl * ns);
    read_raw(is, g.levels.data(), nl * sizeof(double));
    read_raw(is, g.times.data(), ns * sizeof(double));
    read_raw(is, g.h.data(), nl * ns * sizeof(double));
    read_raw(is, g.h_se.data(), nl * ns * sizeof(double));
    return g;
}

void PassageGrid::check_matches(const RiskModel& model, double a, double T) const {
    if (model_digest != digest(model)) throw GridError("passage grid was built for a different model");
    if (alpha != a) throw GridError("passage grid was built for a different alpha");
    if (horizon != T) throw GridError("passage grid was built for a different horizon");
}

PassageGrid build_passage_grid(const RiskModel& model, double alpha, double T, const PassageGridSpec& spec,
                               const McOptions& opts) {
    validate(model);
    if (!(T > 0.0) || std::isinf(T)) throw DomainError("passage grid needs a finite horizon T > 0");
    if (spec.levels < 3 || spec.times < 2) throw ConfigError("passage grid needs >= 3 levels and >= 2 times");
    if (!(spec.a_min > 0.0 && spec.a_max > spec.a_min)) throw ConfigError("passage grid needs 0 < a_min < a_max");
    if (!(alpha > 0.0) || !in_mgf_domain(model.claims, alpha)) throw DomainError("alpha outside the MGF domain");
    const RiskModel sim = esscher_model(model, alpha);
    const double psi = cumulant(model, alpha);

    double a_max = spec.a_max;
    for (int attempt = 0; attempt <= spec.max_doublings; ++attempt, a_max *= 2.0) {
        PassageGrid g;
        g.model_digest = digest(model);
        g.alpha = alpha;
        g.psi = psi;
        g.horizon = T;
        g.seed = opts.seed;
        g.replicas = opts.replicas;
        g.levels = make_levels(spec, a_max);
        g.times = make_times(spec.times, T);
        const std::size_t nl = g.levels.size(), ns = g.times.size();
        GridSums init{std::vector<double>(nl * ns, 0.0), std::vector<double>(nl * ns, 0.0)};

        const GridSums sums = run_chunked<GridSums>(
            opts.replicas, opts.threads,
            [&](std::uint64_t b, std::uint64_t e) {
                GridSums part = init;
                std::vector<double> tau(nl), over(nl);
                for (std::uint64_t r = b; r < e; ++r) {
                    RandomStream s(opts.seed, StreamTag::passage_grid, r);
                    passage_profile(sim, g.levels, T, s, tau, over);
                    for (std::size_t i = 0; i < nl; ++i) {
                        if (!(tau[i] < T)) break;
                        const double v = std::exp(-alpha * over[i] + psi * tau[i]);
                        const std::size_t j0 = static_cast<std::size_t>(
                            std::upper_bound(g.times.begin(), g.times.end(), tau[i]) - g.times.begin());
                        for (std::size_t j = j0; j < ns; ++j) {
                            part.sum[i * ns + j] += v;
                            part.sq[i * ns + j] += v * v;
                        }
                    }
                }
                return part;
            },
            [](GridSums& out, const GridSums& p) {
                for (std::size_t k = 0; k < out.sum.size(); ++k) {
                    out.sum[k] += p.sum[k];
                    out.sq[k] += p.sq[k];
                }
            },
            init);

        const double n = static_cast<double>(opts.replicas);
        g.h.resize(nl * ns);
        g.h_se.resize(nl * ns);
        for (std::size_t k = 0; k < nl * ns; ++k) {
            const double mean = sums.sum[k] / n;
            g.h[k] = mean;
            const double var = n > 1 ? std::max(0.0, (sums.sq[k] - n * mean * mean) / (n - 1)) : 0.0;
            g.h_se[k] = std::sqrt(var / n);
        }
        if (g.truncation_ratio() <= spec.certificate) return g;
    }
    std::ostringstream os;
    os << "passage grid not certified (ratio > " << spec.certificate << ") up to a_max = " << a_max / 2.0;
    throw BudgetError(os.str());
}

// ------------------------------------------------------------------ W_0

double prob_w0_positive(const PassageGrid& grid, double s) { return 1.0 / grid.mass(s); }

double sample_w0(const PassageGrid& grid, double s, RandomStream& stream) {
    const std::size_t nl = grid.levels.size();
    std::vector<double> col(nl), cum(nl, 0.0);
    for (std::size_t i = 0; i < nl; ++i) col[i] = grid.interpolate(i, s);
    for (std::size_t i = 1; i < nl; ++i)
        cum[i] = cum[i - 1] + 0.5 * (col[i - 1] + col[i]) * (grid.levels[i] - grid.levels[i - 1]);
    const double neg = grid.alpha * cum.back();
    const double u = stream.uniform() * (1.0 + neg);
    if (u < 1.0 || neg <= 0.0) return stream.exponential(grid.alpha);
    // Negative part: density proportional to h(a, s), linear between levels.
    const double target = (u - 1.0) / grid.alpha;
    const std::size_t i = std::min<std::size_t>(
        nl - 1, static_cast<std::size_t>(std::upper_bound(cum.begin(), cum.end(), target) - cum.begin()));
    const double c0 = col[i - 1], c1 = col[i];
    const double width = grid.levels[i] - grid.levels[i - 1];
    const double t = std::max(0.0, target - cum[i - 1]);
    // Solve c0 x + (c1 - c0) x^2 / (2 width) = t on [0, width].
    const double disc = c0 * c0 + 2.0 * (c1 - c0) * t / width;
    const double denom = c0 + std::sqrt(std::max(0.0, disc));
    const double x = denom > 0.0 ? std::min(width, 2.0 * t / denom) : width;
    return -(grid.levels[i - 1] + x);
}

// ------------------------------------------------------------------ triple

double negative_branch_bound(const RiskModel& model, double alpha, double s) {
    const RiskModel sim = esscher_model(model, alpha);
    const double psi = cumulant(model, alpha);
    return std::exp(std::max(psi, 0.0) * s) * (sim.lambda * s / alpha + std::max(-sim.premium, 0.0) * s);
}

ConditionedW sample_conditioned_w(const RiskModel& model, double alpha, const PassageGrid& grid, double s,
                                  RandomStream& stream, const TripleOptions& topts) {
    grid.check_matches(model, alpha, grid.horizon);
    ConditionedW out;
    if (stream.uniform() < prob_w0_positive(grid, s)) {
        out.w0 = stream.exponential(alpha);
        out.overshoot = out.w0;
        if (topts.keep_paths) out.path = PathSample{0.0, model.premium, {}, {}};
        return out;
    }
    const RiskModel sim = esscher_model(model, alpha);
    NegativeBranch branch(sim, alpha, grid.psi, grid.levels.back());
    const std::uint64_t cap = attempt_cap(topts.min_acceptance);
    for (std::uint64_t k = 1;; ++k) {
        if (k > cap) {
            std::ostringstream os;
            os << "conditioned path acceptance below " << topts.min_acceptance << " at remaining time " << s;
            throw RejectionBudgetError(os.str());
        }
        if (branch.attempt(s, stream, out, topts.keep_paths ? &out.path : nullptr)) {
            out.attempts = k;
            return out;
        }
    }
}

LimitTriple sample_limit_triple(const RiskModel& model, double alpha, double T, const PassageGrid& grid,
                                RandomStream& stream, const TripleOptions& topts) {
    grid.check_matches(model, alpha, T);
    const RiskModel sim = esscher_model(model, alpha);
    const double psi = grid.psi;
    const std::uint64_t cap = attempt_cap(topts.min_acceptance);
    LimitTriple out;

    // Jump time: the independent tau law thinned by m(T - t) / m(T).
    const double m_top = grid.mass(T);
    for (std::uint64_t k = 0;; ++k) {
        if (k >= cap) throw RejectionBudgetError("jump-time acceptance fell below the rejection budget");
        const double t = sample_tau(psi, T, stream);
        if (stream.uniform() * m_top <= grid.mass(T - t)) {
            out.tau = t;
            break;
        }
    }
    ConditionedW w = sample_conditioned_w(model, alpha, grid, T - out.tau, stream, topts);
    out.w0 = w.w0;
    out.tau0 = w.tau0;
    out.overshoot = w.overshoot;
    out.w_attempts = w.attempts;
    if (topts.keep_paths) out.w_path = std::move(w.path);
    PathSample z = sample_path(sim, out.tau, stream);
    out.prejump = z.value(out.tau);
    if (topts.keep_paths) out.z_path = std::move(z);
    return out;
}

std::vector<LimitTriple> sample_limit_triples(const RiskModel& model, double alpha, double T, const PassageGrid& grid,
                                              const McOptions& opts, const TripleOptions& topts) {
    grid.check_matches(model, alpha, T);
    using Batch = std::vector<LimitTriple>;
    return run_chunked<Batch>(
        opts.replicas, opts.threads,
        [&](std::uint64_t b, std::uint64_t e) {
            Batch part;
            part.reserve(e - b);
            for (std::uint64_t i = b; i < e; ++i) {
                RandomStream s(opts.seed, StreamTag::limit_triple, i);
                part.push_back(sample_limit_triple(model, alpha, T, grid, s, topts));
            }
            return part;
        },
        [](Batch& out, Batch& p) {
            out.insert(out.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
        });
}

// ------------------------------------------------------------------ reference

ConditionalSample conditional_mc_reference(const RiskModel& model, double alpha, double u, double T,
                                           const McOptions& opts) {
    if (!(u >= 0.0)) throw DomainError("level u must be >= 0");
    if (!(T > 0.0) || std::isinf(T)) throw DomainError("conditional reference needs a finite horizon");
    const PassageSimulator sim(model, ImportanceSampling::esscher(alpha));
    struct Part {
        RunningStats stats;
        ConditionalSample sample;
    };
    Part all = run_chunked<Part>(
        opts.replicas, opts.threads,
        [&](std::uint64_t b, std::uint64_t e) {
            Part part;
            for (std::uint64_t i = b; i < e; ++i) {
                RandomStream s(opts.seed, StreamTag::conditional, i);
                const auto r = sim.run(u, T, s);
                part.stats.add(r ? r->weight : 0.0);
                if (!r) continue;
                part.sample.overshoot.add(r->event.overshoot, r->weight);
                part.sample.time.add(r->event.tau, r->weight);
            }
            return part;
        },
        [](Part& out, Part& p) {
            out.stats.merge(p.stats);
            auto append = [](WeightedSample& d, const WeightedSample& src) {
                d.values.insert(d.values.end(), src.values.begin(), src.values.end());
                d.weights.insert(d.weights.end(), src.weights.begin(), src.weights.end());
            };
            append(out.sample.overshoot, p.sample.overshoot);
            append(out.sample.time, p.sample.time);
        });
    if (all.sample.overshoot.size() == 0) {
        std::ostringstream os;
        os << "no passages of u = " << u << " before T = " << T << " in " << opts.replicas << " replicas";
        throw NoHitsError(os.str());
    }
    all.sample.ruin = MCEstimate::from_stats(all.stats, opts.seed, "esscher");
    return std::move(all.sample);
}

}  // namespace levyruin
