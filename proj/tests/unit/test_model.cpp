#include <catch_amalgamated.hpp>

#include <cmath>

#include "levyruin/errors.hpp"
#include "levyruin/model.hpp"

using namespace levyruin;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Values frozen from tests/oracles/model_oracles.py (mpmath, 40 digits).
constexpr double kMgfTp121At1 = 2.0;
constexpr double kMgfTp121AtHalf = 1.2692723418790673828;
constexpr double kMgfTp121AtMinus1 = 0.72265723377644516939;
constexpr double kMgfTp1251At1 = 1.6666666666666666667;
constexpr double kMgfTp131At1 = 1.5;
constexpr double kMeanTp121 = 0.40365263767680592566;
constexpr double kMeanTp1251 = 0.34382954152174947472;
constexpr double kMeanTp131 = 0.29817368116159703717;
constexpr double kPhiExpAt075 = -0.5530536126122565;

RiskModel exp_model(double p) { return {1.0, p, Exponential{1.0}}; }
RiskModel tp_model(double p, double theta = 2.0) { return {1.0, p, TiltedPareto{1.0, theta, 1.0}}; }

}  // namespace

TEST_CASE("claim MGF closed forms and quadrature oracle") {
    const ClaimDistribution e = Exponential{1.0};
    CHECK(claim_mgf(e, 0.0) == 1.0);
    CHECK_THAT(claim_mgf(e, 0.5), WithinRel(2.0, 1e-15));
    CHECK_THROWS_AS(claim_mgf(e, 1.0), DomainError);

    const ClaimDistribution tp = TiltedPareto{1.0, 2.0, 1.0};
    CHECK_THAT(claim_mgf(tp, 1.0), WithinRel(kMgfTp121At1, 1e-12));
    CHECK_THAT(claim_mgf(tp, 0.5), WithinRel(kMgfTp121AtHalf, 1e-10));
    CHECK_THAT(claim_mgf(tp, -1.0), WithinRel(kMgfTp121AtMinus1, 1e-10));
    CHECK_THAT(claim_mgf(TiltedPareto{1.0, 2.5, 1.0}, 1.0), WithinRel(kMgfTp1251At1, 1e-10));
    CHECK_THAT(claim_mgf(TiltedPareto{1.0, 3.0, 1.0}, 1.0), WithinRel(kMgfTp131At1, 1e-10));
    CHECK_THROWS_AS(claim_mgf(tp, 1.0 + 1e-9), DomainError);

    // The quadrature path agrees with the closed form just below the abscissa.
    CHECK_THAT(claim_mgf(tp, 1.0 - 1e-7), WithinRel(kMgfTp121At1, 1e-5));
}

TEST_CASE("complex MGF reduces to the real one on the real axis") {
    const ClaimDistribution tp = TiltedPareto{1.0, 2.0, 1.0};
    const auto z = claim_mgf(tp, std::complex<double>(0.5, 0.0));
    CHECK_THAT(z.real(), WithinRel(kMgfTp121AtHalf, 1e-10));
    CHECK_THAT(z.imag(), WithinAbs(0.0, 1e-14));
    // Conjugate symmetry.
    const auto a = claim_mgf(tp, std::complex<double>(-0.3, 2.0));
    const auto b = claim_mgf(tp, std::complex<double>(-0.3, -2.0));
    CHECK_THAT(a.real(), WithinRel(b.real(), 1e-12));
    CHECK_THAT(a.imag(), WithinRel(-b.imag(), 1e-12));
}

TEST_CASE("claim means") {
    CHECK_THAT(claim_mean(TiltedPareto{1.0, 2.0, 1.0}), WithinRel(kMeanTp121, 1e-11));
    CHECK_THAT(claim_mean(TiltedPareto{1.0, 2.5, 1.0}), WithinRel(kMeanTp1251, 1e-11));
    CHECK_THAT(claim_mean(TiltedPareto{1.0, 3.0, 1.0}), WithinRel(kMeanTp131, 1e-11));
    CHECK(claim_mean(Exponential{4.0}) == 0.25);
}

TEST_CASE("tail and density are consistent") {
    for (const ClaimDistribution d : {ClaimDistribution{TiltedPareto{1.0, 2.0, 1.0}},
                                      ClaimDistribution{TiltedPareto{0.5, 1.5, 2.0}},
                                      ClaimDistribution{EsscherTiltedPareto{{1.0, 2.0, 1.0}, 1.0}},
                                      ClaimDistribution{EsscherTiltedPareto{{1.0, 3.0, 1.0}, 0.4}}}) {
        CHECK(claim_tail(d, 0.0) == 1.0);
        double prev = 1.0;
        for (double x : {0.1, 0.5, 1.0, 3.0, 10.0}) {
            const double h = 1e-5;
            const double fd = (claim_tail(d, x - h) - claim_tail(d, x + h)) / (2 * h);
            CHECK_THAT(fd, WithinRel(claim_density(d, x), 1e-6));
            const double t = claim_tail(d, x);
            CHECK(t <= prev);
            prev = t;
        }
    }
}

TEST_CASE("cumulant examples") {
    CHECK(cumulant(exp_model(2.0), 0.0) == 0.0);
    CHECK_THAT(cumulant(exp_model(2.0), 0.5), WithinAbs(0.0, 1e-15));
    CHECK_THAT(cumulant(exp_model(2.0), -1.0), WithinRel(1.5, 1e-15));
    CHECK_THAT(cumulant(tp_model(2.0), 1.0), WithinAbs(-1.0, 1e-12));
}

TEST_CASE("cumulant is convex and its slope at zero is the mean increment") {
    for (const RiskModel& m : {exp_model(2.0), tp_model(2.0), tp_model(0.5, 3.0), tp_model(0.0, 2.5)}) {
        CHECK(cumulant(m, 0.0) == 0.0);
        const double lo = -3.0;
        const double hi = mgf_abscissa(m.claims) * (mgf_abscissa_attained(m.claims) ? 1.0 : 0.99);
        const int n = 100;
        auto grid = [&](int i) { return i + 1 == n ? hi : lo + (hi - lo) * i / (n - 1); };
        for (int i = 1; i + 1 < n; ++i) {
            const double d2 = cumulant(m, grid(i - 1)) - 2.0 * cumulant(m, grid(i)) + cumulant(m, grid(i + 1));
            CHECK(d2 >= -1e-9);
        }
        const double e = 1e-5;
        const double slope = (cumulant(m, e) - cumulant(m, -e)) / (2 * e);
        CHECK_THAT(slope, WithinRel(mean_increment(m), 1e-6));
        CHECK_THAT(cumulant_derivatives(m, 0.0).first, WithinRel(mean_increment(m), 1e-10));
    }
}

TEST_CASE("Lundberg root") {
    const auto nu = lundberg_root(exp_model(2.0));
    REQUIRE(nu.has_value());
    CHECK_THAT(*nu, WithinAbs(0.5, 1e-12));
    CHECK(cumulant_derivatives(exp_model(2.0), *nu).first > 0.0);

    CHECK_FALSE(lundberg_root(exp_model(0.5)).has_value());
    CHECK_FALSE(lundberg_root(tp_model(0.0)).has_value());
    // Large-premium convolution-equivalent regime: psi(alpha) < 0 and no root.
    CHECK_FALSE(lundberg_root(tp_model(2.0)).has_value());

    // Exp claims at lambda=1, eta=2, p=1: root at eta - lambda/p = 1.
    const RiskModel m{1.0, 1.0, Exponential{2.0}};
    const auto r = lundberg_root(m);
    REQUIRE(r.has_value());
    CHECK(std::abs(cumulant(m, *r)) <= 1e-10);
    CHECK_THAT(*r, WithinAbs(1.0, 1e-12));
}

TEST_CASE("phi inverse on the left branch") {
    const RiskModel m = exp_model(2.0);
    CHECK(phi_inverse(m, 0.0) == 0.0);
    CHECK_THAT(phi_inverse(m, 1.5), WithinAbs(-1.0, 1e-12));
    CHECK_THAT(phi_inverse(m, 0.75), WithinAbs(kPhiExpAt075, 1e-12));
    for (const RiskModel& mm : {exp_model(2.0), tp_model(2.0), tp_model(0.3)}) {
        for (double d : {0.0, 1e-6, 0.1, 1.0, 10.0, 1000.0}) {
            const double b = phi_inverse(mm, d);
            CHECK(b <= 0.0);
            CHECK(std::abs(cumulant(mm, b) - d) <= 1e-10 * std::max(1.0, d));
        }
    }
    CHECK_THROWS_AS(phi_inverse(tp_model(0.0), 1.0), DomainError);
    // Upward drift in mean: phi(0) is the negative root, not 0.
    const RiskModel up = tp_model(0.3);
    CHECK(phi_inverse(up, 0.0) < 0.0);
}

TEST_CASE("complex phi inverse continues the real one") {
    const RiskModel m = tp_model(2.0);
    const double d = 0.7;
    const auto z = phi_inverse(m, std::complex<double>(d, 0.0), std::complex<double>(phi_inverse(m, d) + 0.1, 0.0));
    CHECK_THAT(z.real(), WithinAbs(phi_inverse(m, d), 1e-11));
    const auto w = phi_inverse(m, std::complex<double>(d, 3.0), z);
    CHECK(std::abs(cumulant(m, w) - std::complex<double>(d, 3.0)) < 1e-10);
}

TEST_CASE("Esscher transform") {
    const RiskModel m = exp_model(2.0);
    const RiskModel same = esscher_model(m, 0.0);
    CHECK(digest(same) == digest(m));

    const RiskModel t = esscher_model(m, 0.5);
    CHECK(t.lambda == 2.0);
    CHECK(std::get<Exponential>(t.claims).rate == 0.5);
    CHECK(t.premium == 2.0);

    const RiskModel tp = tp_model(2.0);
    const RiskModel tt = esscher_model(tp, 1.0);
    CHECK_THAT(tt.lambda, WithinRel(2.0, 1e-12));
    for (double b : {-2.0, -0.5, 0.0}) {
        CHECK_THAT(claim_mgf(tt.claims, b) * claim_mgf(tp.claims, 1.0), WithinRel(claim_mgf(tp.claims, 1.0 + b), 1e-8));
    }
    const RiskModel half = esscher_model(tp, 0.4);
    for (double b : {-1.0, 0.3, 0.6}) {
        CHECK_THAT(claim_mgf(half.claims, b) * claim_mgf(tp.claims, 0.4), WithinRel(claim_mgf(tp.claims, 0.4 + b), 1e-8));
    }
    // psi_Q(beta) = psi(alpha + beta) - psi(alpha).
    CHECK_THAT(cumulant(tt, -0.7), WithinRel(cumulant(tp, 0.3) - cumulant(tp, 1.0), 1e-9));
    CHECK_THROWS_AS(esscher_model(m, 1.0), DomainError);
}

TEST_CASE("Levy tail") {
    CHECK(levy_tail({2.0, 1.0, Exponential{1.0}}, 0.0) == 2.0);
    CHECK_THAT(levy_tail(tp_model(2.0), 1.0), WithinRel(0.25 * std::exp(-1.0), 1e-15));
    CHECK_THAT(levy_tail(exp_model(2.0), 3.0), WithinRel(std::exp(-3.0), 1e-15));
}

TEST_CASE("regime classification and premium tuning") {
    CHECK(cumulant_info(tp_model(2.0), 1.0).regime == Regime::subcritical);
    CHECK(cumulant_info(exp_model(0.9), 0.5).regime == Regime::supercritical);
    CHECK(cumulant_info(exp_model(2.0), 0.5).regime == Regime::critical);
    const RiskModel base = tp_model(1.0, 3.0);
    RiskModel cr = base;
    cr.premium = premium_for_cumulant(base, 1.0);
    CHECK(std::abs(cumulant(cr, 1.0)) < 1e-12);
    CHECK_THAT(cr.premium, WithinRel(0.5, 1e-10));
}

TEST_CASE("validation rejects bad parameters") {
    CHECK_THROWS_AS(validate(RiskModel{0.0, 1.0, Exponential{1.0}}), DomainError);
    CHECK_THROWS_AS(validate(RiskModel{1.0, 1.0, TiltedPareto{1.0, 1.0, 1.0}}), DomainError);
    CHECK_THROWS_AS(validate(RiskModel{1.0, 1.0, Exponential{-1.0}}), DomainError);
    CHECK_NOTHROW(validate(tp_model(2.0)));
}
