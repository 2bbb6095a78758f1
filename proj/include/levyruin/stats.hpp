#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace levyruin {

// Streaming mean/variance with an order-sensitive but deterministic merge
// (Chan et al.). Merging the same partials in the same order reproduces
// the same bits.
class RunningStats {
public:
    void add(double x);
    void merge(const RunningStats& other);

    std::uint64_t count() const { return n_; }
    std::uint64_t nonzero() const { return nonzero_; }
    double mean() const { return mean_; }
    double variance() const;  // unbiased sample variance
    double std_error() const;

private:
    std::uint64_t n_ = 0;
    std::uint64_t nonzero_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Point estimate of a Monte Carlo quantity with its provenance.
struct MCEstimate {
    double estimate = 0.0;
    double std_error = 0.0;
    std::uint64_t replicas = 0;
    std::uint64_t seed = 0;
    std::string method;
    std::uint64_t hits = 0;  // replicas with a nonzero contribution
    std::string flags;       // e.g. "no hits"

    static MCEstimate from_stats(const RunningStats& s, std::uint64_t seed, std::string method);
};

// Difference of two independent estimates in units of their combined SE.
// Returns 0 when both are exact and equal.
double combined_z(double a, double se_a, double b, double se_b);

// Weighted sample of scalar values. Unit weights give the plain ECDF.
struct WeightedSample {
    std::vector<double> values;
    std::vector<double> weights;

    void add(double v, double w = 1.0) {
        values.push_back(v);
        weights.push_back(w);
    }
    std::size_t size() const { return values.size(); }
    double total_weight() const;
    // Kish effective sample size.
    double effective_size() const;
    // Weighted quantile by inverse ECDF.
    double quantile(double q) const;
};

// sup_x |F_n(x) - F(x)| for a (possibly weighted) sample against a
// continuous reference CDF.
double ks_statistic(const WeightedSample& sample, const std::function<double(double)>& cdf);
double ks_statistic(std::span<const double> sample, const std::function<double(double)>& cdf);

// Two-sample sup-distance between weighted ECDFs.
double ks_two_sample(const WeightedSample& a, const WeightedSample& b);

// Asymptotic 95% critical value of the two-sample KS statistic for
// effective sizes n and m.
double ks_critical_95(double n, double m);

}  // namespace levyruin
