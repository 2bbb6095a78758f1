#include "levyruin/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace levyruin {

void RunningStats::add(double x) {
    ++n_;
    if (x != 0.0) ++nonzero_;
    const double d = x - mean_;
    mean_ += d / static_cast<double>(n_);
    m2_ += d * (x - mean_);
}

void RunningStats::merge(const RunningStats& o) {
    if (o.n_ == 0) return;
    if (n_ == 0) {
        *this = o;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(o.n_);
    const double n = na + nb;
    const double d = o.mean_ - mean_;
    mean_ += d * nb / n;
    m2_ += o.m2_ + d * d * na * nb / n;
    n_ += o.n_;
    nonzero_ += o.nonzero_;
}

double RunningStats::variance() const {
    return n_ > 1 ? std::max(0.0, m2_ / static_cast<double>(n_ - 1)) : 0.0;
}

double RunningStats::std_error() const {
    return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

MCEstimate MCEstimate::from_stats(const RunningStats& s, std::uint64_t seed, std::string method) {
    MCEstimate e;
    e.estimate = s.mean();
    e.std_error = s.std_error();
    e.replicas = s.count();
    e.seed = seed;
    e.method = std::move(method);
    e.hits = s.nonzero();
    if (e.hits == 0) e.flags = "no hits";
    return e;
}

double combined_z(double a, double se_a, double b, double se_b) {
    const double se = std::hypot(se_a, se_b);
    const double d = std::abs(a - b);
    if (se == 0.0) return d == 0.0 ? 0.0 : INFINITY;
    return d / se;
}

double WeightedSample::total_weight() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double WeightedSample::effective_size() const {
    double s = 0.0, s2 = 0.0;
    for (double w : weights) {
        s += w;
        s2 += w * w;
    }
    return s2 > 0.0 ? s * s / s2 : 0.0;
}

namespace {

std::vector<std::size_t> sorted_order(const std::vector<double>& v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return v[i] < v[j]; });
    return idx;
}

}  // namespace

double WeightedSample::quantile(double q) const {
    if (values.empty()) return NAN;
    const auto idx = sorted_order(values);
    const double target = q * total_weight();
    double acc = 0.0;
    for (std::size_t i : idx) {
        acc += weights[i];
        if (acc >= target) return values[i];
    }
    return values[idx.back()];
}

double ks_statistic(const WeightedSample& sample, const std::function<double(double)>& cdf) {
    if (sample.values.empty()) return 1.0;
    const auto idx = sorted_order(sample.values);
    const double total = sample.total_weight();
    double acc = 0.0;
    double d = 0.0;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        const double x = sample.values[idx[k]];
        const double f = cdf(x);
        d = std::max(d, std::abs(f - acc / total));
        acc += sample.weights[idx[k]];
        // Ties: only compare the upper step once all tied weights are in.
        if (k + 1 < idx.size() && sample.values[idx[k + 1]] == x) continue;
        d = std::max(d, std::abs(acc / total - f));
    }
    return d;
}

double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf) {
    WeightedSample ws;
    ws.values.assign(sample.begin(), sample.end());
    ws.weights.assign(sample.size(), 1.0);
    return ks_statistic(ws, cdf);
}

double ks_two_sample(const WeightedSample& a, const WeightedSample& b) {
    if (a.values.empty() || b.values.empty()) return 1.0;
    const auto ia = sorted_order(a.values);
    const auto ib = sorted_order(b.values);
    const double ta = a.total_weight();
    const double tb = b.total_weight();
    std::size_t i = 0, j = 0;
    double fa = 0.0, fb = 0.0, d = 0.0;
    while (i < ia.size() || j < ib.size()) {
        const double xa = i < ia.size() ? a.values[ia[i]] : INFINITY;
        const double xb = j < ib.size() ? b.values[ib[j]] : INFINITY;
        const double x = std::min(xa, xb);
        while (i < ia.size() && a.values[ia[i]] == x) fa += a.weights[ia[i++]];
        while (j < ib.size() && b.values[ib[j]] == x) fb += b.weights[ib[j++]];
        d = std::max(d, std::abs(fa / ta - fb / tb));
    }
    return d;
}

double ks_critical_95(double n, double m) {
    if (n <= 0.0 || m <= 0.0) return 1.0;
    return 1.358 * std::sqrt((n + m) / (n * m));
}

}  // namespace levyruin
