#include <catch_amalgamated.hpp>

#include <cmath>

#include "levyruin/errors.hpp"
#include "levyruin/fluctuation.hpp"
#include "levyruin/path_sim.hpp"

using namespace levyruin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Frozen from tests/oracles/model_oracles.py.
constexpr double kMeanTp121 = 0.40365263767680592566;
constexpr double kRhoTp121P2 = 0.20182631883840296283;
constexpr double kSupMgfInfTp121P2 = 1.5963473623231940743;
constexpr double kInfDensityAtHalf = 0.6332484124152215092;

const RiskModel kExp{1.0, 2.0, Exponential{1.0}};
const RiskModel kTp{1.0, 2.0, TiltedPareto{1.0, 2.0, 1.0}};

}  // namespace

TEST_CASE("ladder data") {
    const LadderData e = ladder_data(kExp);
    CHECK(e.rho == 0.5);
    CHECK(e.drift == 0.0);
    for (double z : {0.0, 0.5, 3.0}) {
        CHECK_THAT(e.ladder_ratio_density(z), WithinRel(std::exp(-z), 1e-15));
        CHECK_THAT(e.integrated_tail_density(z), WithinRel(std::exp(-z), 1e-15));
        CHECK_THAT(e.integrated_tail(z), WithinRel(std::exp(-z), 1e-10));
    }
    const LadderData t = ladder_data(kTp);
    CHECK_THAT(t.rho, WithinRel(kRhoTp121P2, 1e-11));
    CHECK_THAT(t.claim_mean, WithinRel(kMeanTp121, 1e-11));
    CHECK_THROWS_AS(ladder_data(RiskModel{1.0, 0.3, Exponential{1.0}}), RegimeError);
    CHECK_THROWS_AS(ladder_data(RiskModel{1.0, 0.0, Exponential{1.0}}), RegimeError);
}

TEST_CASE("sup MGF at infinity") {
    CHECK(sup_mgf_infinity(kExp, 0.0).value == 1.0);
    CHECK_THAT(sup_mgf_infinity(kExp, 1e-8).value, WithinAbs(1.0, 1e-7));
    CHECK_THAT(sup_mgf_infinity(kExp, 0.25).value, WithinRel(1.5, 1e-14));
    CHECK_THAT(sup_mgf_infinity(kTp, 1.0).value, WithinRel(kSupMgfInfTp121P2, 1e-10));
    const auto crit = sup_mgf_infinity(kExp, 0.5);
    CHECK_FALSE(crit.finite());
    CHECK(std::isinf(crit.value));
    // Exp claims: E e^{beta Xbar_inf} is (1 - rho)/(1 - rho eta/(eta - beta)); ladder exponent agrees.
    CHECK_THAT(ladder_exponent(kExp, 0.0) / ladder_exponent(kExp, -0.25), WithinRel(1.5, 1e-14));
}

TEST_CASE("infinite-horizon constant factorises") {
    for (const auto& [m, a] : {std::pair{kExp, 0.25}, std::pair{kTp, 1.0},
                               std::pair{RiskModel{1.0, 2.0, TiltedPareto{1.0, 2.5, 1.0}}, 1.0}}) {
        const double lhs = infinite_horizon_constant(m, a);
        const double rhs = mu_infinity(m, a) * nu_infinity(m, a);
        CHECK_THAT(lhs, WithinRel(rhs, 1e-12));
    }
    CHECK_THAT(infinite_horizon_constant(kExp, 0.25), WithinRel(9.0, 1e-13));
}

TEST_CASE("infinite-horizon ruin probability") {
    const auto c = ruin_prob_infinite(kExp, 5.0);
    CHECK(c.method == "closed form");
    CHECK_THAT(c.estimate, WithinRel(0.5 * std::exp(-2.5), 1e-14));
    CHECK(ruin_prob_infinite(kExp, 0.0).estimate == 0.5);

    const McOptions opts{200000, 3, 1};
    const auto g = ruin_prob_infinite(kExp, 5.0, opts, LadderSampling::geometric);
    const auto t = ruin_prob_infinite(kExp, 5.0, opts, LadderSampling::tilted);
    CHECK(std::abs(g.estimate - c.estimate) <= 3.0 * g.std_error);
    CHECK(std::abs(t.estimate - c.estimate) <= 3.0 * t.std_error + 1e-15);

    const auto tp0 = ruin_prob_infinite(kTp, 0.0, opts);
    CHECK(std::abs(tp0.estimate - kRhoTp121P2) <= 3.0 * tp0.std_error + 1e-15);
    const auto tg = ruin_prob_infinite(kTp, 3.0, opts, LadderSampling::geometric);
    const auto tt = ruin_prob_infinite(kTp, 3.0, McOptions{200000, 4, 1});
    CHECK(combined_z(tg.estimate, tg.std_error, tt.estimate, tt.std_error) < 3.0);

    // Cross-check against the path simulator on a long horizon.
    const auto ps = estimate_ruin_prob(kTp, 3.0, kInfiniteHorizon, McOptions{100000, 5, 1}, ImportanceSampling::esscher(1.0));
    CHECK(combined_z(ps.estimate, ps.std_error, tt.estimate, tt.std_error) < 3.0);
}

TEST_CASE("infinite-horizon overshoot law") {
    const OvershootLaw law = overshoot_law_infinite(kTp, 1.0);
    CHECK_THAT(law.density(0.5), WithinRel(kInfDensityAtHalf, 1e-8));
    CHECK_THAT(law.mass(), WithinAbs(1.0, 1e-6));
    CHECK_THAT(law.cdf(law.gamma_max() * 0.999), WithinAbs(1.0, 1e-6));
    CHECK(law.atom_at_zero() == 0.0);
    double prev = 0.0;
    for (double g = 0.0; g < 30.0; g += 0.25) {
        CHECK(law.density(g) >= 0.0);
        CHECK(law.cdf(g) >= prev);
        prev = law.cdf(g);
        // Tail is e^{-alpha g} times a slowly varying factor.
        if (g > 1.0) CHECK(law.density(g) * std::exp(g) < 2.0);
    }
    // Closed-form inner integral for tilted Pareto claims.
    for (double g : {0.0, 0.7, 3.0}) {
        CHECK_THAT(tilted_tail_integral(kTp, 1.0, g), WithinRel(std::exp(-g) / (1.0 + g), 1e-9));
    }
    CHECK_THROWS_AS(overshoot_law_infinite(kExp, 0.5), RegimeError);
}

TEST_CASE("Cramer overshoot law") {
    // Exponential claims with alpha = 0.25 and p = 4/3: density at 0 is 1.
    RiskModel m{1.0, 0.0, Exponential{1.0}};
    m.premium = premium_for_cumulant(m, 0.25);
    const OvershootLaw law = overshoot_law_cramer(m, 0.25);
    CHECK_THAT(law.density(0.0), WithinRel(1.0, 1e-8));
    // Memoryless: the law is Exp(1) again.
    CHECK_THAT(law.density(2.0), WithinRel(std::exp(-2.0), 1e-8));
    CHECK_THAT(law.mass(), WithinAbs(1.0, 1e-4));

    RiskModel tp{1.0, 0.0, TiltedPareto{1.0, 3.0, 1.0}};
    tp.premium = premium_for_cumulant(tp, 1.0);
    CHECK_THAT(overshoot_law_cramer(tp, 1.0).mass(), WithinAbs(1.0, 1e-4));

    CHECK_THROWS_AS(overshoot_law_cramer(kExp, 0.25), RegimeError);
    RiskModel heavy{1.0, 0.0, TiltedPareto{1.0, 2.0, 1.0}};
    heavy.premium = premium_for_cumulant(heavy, 1.0);
    CHECK_THROWS_AS(overshoot_law_cramer(heavy, 1.0), RegimeError);
}

TEST_CASE("subordinator overshoot laws") {
    const RiskModel e{1.0, 0.0, Exponential{2.0}};
    const OvershootLaw r = overshoot_law_subordinator(e, 1.0);
    for (double g : {0.0, 0.5, 2.0}) CHECK_THAT(r.density(g), WithinRel(2.0 * std::exp(-2.0 * g), 1e-14));
    const RiskModel t{1.0, 0.0, TiltedPareto{1.0, 2.5, 1.0}};
    CHECK_THAT(overshoot_law_subordinator(t, 1.0).mass(), WithinAbs(1.0, 1e-8));
    CHECK_THAT(overshoot_law_subordinator(t, 1.0, SubordinatorOvershoot::weighted).mass(), WithinAbs(1.0, 1e-6));
    CHECK_THROWS_AS(overshoot_law_subordinator(kTp, 1.0), RegimeError);
}

TEST_CASE("Vigon identity") {
    CHECK(vigon_check(kExp) <= 1e-12);
    CHECK(vigon_check(kTp, {0.1, 0.5, 1.0, 2.0, 4.0, 8.0}) <= 1e-12);
    CHECK_THAT(vigon_check(kTp, {0.5, 1.0, 2.0, 4.0}, 1.01), WithinAbs(0.01, 1e-10));
}
