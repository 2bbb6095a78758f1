#include <catch_amalgamated.hpp>

#include <cmath>

#include "levyruin/asymptotics.hpp"
#include "levyruin/errors.hpp"
#include "levyruin/fluctuation.hpp"
#include "levyruin/quadrature.hpp"

using namespace levyruin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

const RiskModel kSub{1.0, 0.0, TiltedPareto{1.0, 2.5, 1.0}};
const RiskModel kExp{1.0, 2.0, Exponential{1.0}};
const RiskModel kExpUp{1.0, 0.9, Exponential{1.0}};
const RiskModel kTp{1.0, 2.0, TiltedPareto{1.0, 2.0, 1.0}};

bool agree(const BEstimate& a, const BEstimate& b, double rel = 0.005) {
    const double tol = std::max(3.0 * std::hypot(a.std_error, b.std_error), rel * std::abs(a.value));
    return std::abs(a.value - b.value) <= tol;
}

}  // namespace

TEST_CASE("subordinator identity B(T) = T e^{psi T}") {
    const double psi = cumulant(kSub, 1.0);
    for (double T : {0.5, 1.0, 2.0}) {
        const double exact = T * std::exp(psi * T);
        CHECK_THAT(b_laplace(kSub, 1.0, T).value, WithinRel(exact, 1e-7));
        const BEstimate q = b_quadrature(kSub, 1.0, T, 32, McOptions{20000, 1, 1});
        CHECK(std::abs(q.value - exact) <= 3.0 * q.std_error + 1e-12 * exact);
        const BEstimate e = b_exp_time(kSub, 1.0, T, McOptions{100000, 2, 1});
        CHECK(std::abs(e.value - exact) <= 3.0 * e.std_error);
    }
    // The direct estimator has finite variance for alpha below half the abscissa.
    const RiskModel light{1.0, 0.0, TiltedPareto{1.0, 2.5, 1.0}};
    const BEstimate d = b_quadrature(light, 0.4, 1.0, 16, McOptions{100000, 3, 1}, SupMgfMethod::direct);
    const double exact = std::exp(cumulant(light, 0.4));
    CHECK(std::abs(d.value - exact) <= 3.0 * d.std_error);
}

TEST_CASE("three methods agree in both sign regimes") {
    for (const auto& [m, a] : {std::pair{kExp, 0.25}, std::pair{kExpUp, 0.5}, std::pair{kTp, 1.0}}) {
        for (double T : {1.0, 2.0}) {
            const BEstimate q = b_quadrature(m, a, T, 32, McOptions{40000, 11, 1});
            const BEstimate e = b_exp_time(m, a, T, McOptions{40000, 12, 1});
            const BEstimate l = b_laplace(m, a, T);
            CHECK(agree(q, e, 0.0));
            CHECK(agree(q, l));
        }
    }
}

TEST_CASE("critical index falls back to quadrature") {
    const BEstimate e = b_exp_time(kExp, 0.5, 1.0, McOptions{4000, 1, 1});
    CHECK(e.method == BMethod::quadrature);
    CHECK(e.flags.find("fallback") != std::string::npos);
}

TEST_CASE("small-T limit") {
    for (const auto& [m, a] : {std::pair{kExp, 0.25}, std::pair{kTp, 1.0}}) {
        double prev_gap = INFINITY;
        for (double T : {0.1, 0.05, 0.025}) {
            const double r = b_laplace(m, a, T).value / T;
            CHECK(r > 0.9);
            CHECK(r < 1.1);
            CHECK(std::abs(r - 1.0) < prev_gap);
            prev_gap = std::abs(r - 1.0);
        }
    }
}

TEST_CASE("Laplace transform identity") {
    const double delta = 1.0;
    const double psi = cumulant(kExp, 0.25);
    const double analytic = b_transform(kExp, 0.25, delta).real();
    const double numeric = quad::integrate_to_infinity(
        [&](double s) { return s == 0.0 ? 0.0 : std::exp(-delta * s) * b_laplace(kExp, 0.25, s).value; }, 0.0,
        quad::Tolerance{1e-7, 1e-14, 200});
    CHECK_THAT(numeric, WithinRel(analytic, 1e-5));
    // E e^{alpha Xbar_e}, e ~ Exp(delta), by Monte Carlo.
    const SupMgfSampler sampler(kExp, 0.25, SupMgfMethod::direct);
    RunningStats st;
    for (std::uint64_t i = 0; i < 100000; ++i) {
        RandomStream s(31, StreamTag::generic, i);
        st.add(sampler.sample(s.exponential(delta), s));
    }
    const double scale = 1.0 / (delta * (delta - psi));
    CHECK(std::abs(st.mean() * scale - analytic) <= 3.0 * st.std_error() * scale);
}

TEST_CASE("B is increasing and saturates or diverges") {
    const auto curve = b_curve(kTp, 1.0, {0.5, 1.0, 2.0, 3.0, 4.0, 5.0}, 32, McOptions{20000, 5, 1});
    for (std::size_t k = 1; k < curve.size(); ++k) CHECK(curve[k].value > curve[k - 1].value);
    const double limit = infinite_horizon_constant(kTp, 1.0);
    for (const auto& b : curve) CHECK(b.value < limit);
    CHECK(std::abs(b_laplace(kTp, 1.0, 5.0).value - limit) / limit < 0.05);
    CHECK(std::abs(b_laplace(kExp, 0.25, 30.0).value - 9.0) / 9.0 < 0.05);

    const double b8 = b_laplace(kExpUp, 0.5, 8.0).value;
    const double b16 = b_laplace(kExpUp, 0.5, 16.0).value;
    CHECK(b16 >= 1.5 * b8);
}

TEST_CASE("Segerdahl constants") {
    const auto c = segerdahl_constants(kExp);
    REQUIRE(c);
    CHECK_THAT(c->nu, WithinAbs(0.5, 1e-12));
    CHECK_THAT(c->C, WithinRel(0.5, 1e-10));
    CHECK_THAT(c->a, WithinRel(0.5, 1e-10));
    CHECK_THAT(c->b, WithinRel(std::sqrt(2.0), 1e-8));
    CHECK_THAT(*segerdahl(kExp, 5.0, kInfiniteHorizon), WithinRel(0.5 * std::exp(-2.5), 1e-10));
    CHECK_THAT(*segerdahl(kExp, 5.0, 1e6), WithinRel(0.5 * std::exp(-2.5), 1e-10));
    CHECK(*segerdahl(kExp, 5.0, 2.5) < *segerdahl(kExp, 5.0, 10.0));
    CHECK_FALSE(segerdahl(kTp, 5.0, 1.0).has_value());
}

TEST_CASE("headline estimate scales with the claim rate") {
    const BEstimate b = b_laplace(kTp, 1.0, 2.0);
    RiskModel twice = kTp;
    twice.lambda *= 2.0;
    CHECK_THAT(finite_time_ruin_estimate(twice, 3.0, b), WithinRel(2.0 * finite_time_ruin_estimate(kTp, 3.0, b), 1e-15));
}

TEST_CASE("growth rate") {
    const GrowthEstimate g = growth_rate(kSub, 1.0, {1.0, 2.0, 4.0}, McOptions{2000, 1, 1});
    const double psi = cumulant(kSub, 1.0);
    for (double r : g.rate) CHECK_THAT(r, WithinRel(psi, 1e-10));
    CHECK_THAT(g.extrapolated, WithinRel(psi, 1e-6));

    RiskModel cr{1.0, 0.0, TiltedPareto{1.0, 3.0, 1.0}};
    cr.premium = premium_for_cumulant(cr, 1.0);
    const GrowthEstimate c = growth_rate(cr, 1.0, {1.0, 2.0, 4.0, 8.0, 16.0}, McOptions{20000, 2, 1});
    for (std::size_t k = 1; k < c.rate.size(); ++k) CHECK(c.rate[k] < c.rate[k - 1]);
    CHECK(c.rate.back() > 0.0);
}

TEST_CASE("tail ratio diagnostic") {
    const auto rows = tail_ratio_diagnostic(kTp, 1.0, 2.0, {4.0, 8.0}, McOptions{50000, 3, 1});
    REQUIRE(rows.size() == 2);
    CHECK_THAT(rows[0].prediction, WithinRel(2.0 * std::exp(-2.0), 1e-12));
    CHECK(std::abs(rows[1].ratio - rows[1].prediction) < std::abs(rows[0].ratio - rows[0].prediction) + 3.0 * rows[1].std_error);
}
