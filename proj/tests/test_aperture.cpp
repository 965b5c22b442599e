// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "fadechan/aperture/aperture.hpp"
#include "fadechan/error.hpp"
#include "oracles.hpp"

using namespace fadechan;

namespace {

const ApertureGeometry kGeom{0.075, 0.023, 0.0};
constexpr double kPi = std::numbers::pi;

double max_grid_error(double W) {
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const double r0 = 3.0 * W * i / 199.0;
        worst = std::max(worst, std::abs(annular_transmittance_approx(r0, W, kGeom) -
                                         annular_transmittance_exact(r0, W, kGeom)));
    }
    return worst;
}

}  // namespace

TEST_CASE("weibull parameters: closed form of the peak transmittance") {
    const auto p = weibull_params(0.075, 2.0 / 0.075);
    CHECK(std::abs(p.eta0 - (1.0 - std::exp(-2.0))) <= 1e-15);
    CHECK(std::abs(p.eta0 - 0.864664716763387) <= 1e-12);
}

TEST_CASE("weibull parameters against high-precision evaluation") {
    struct Row {
        double x, lambda, rate;
    };
    // x = a^2 xi^2, reference values at 40 digits.
    const Row rows[] = {
        {1.0e-8, 2.0, 4.9999999875000000104e-9},
        {0.001, 2.0000000000104166658, 0.00049987501041927013882},
        {0.3, 2.0002791046915253711, 0.13905061882180411478},
        {0.49999, 2.0012751931676840811, 0.22018864002086287588},
        {0.50001, 2.0012753441382364836, 0.22019631782665488155},
        {1.0, 2.0096344571573745880563217232354, 0.0},
        {2.0, 2.0637968070654983756, 0.60337619863045441227},
        {50.0, 7.8988977646395690466, 0.7513714139142663473},
        {2000.0, 51.269755888512705221, 0.70210839081342364781},
    };
    for (const auto& row : rows) {
        const auto p = weibull_params(1.0, std::sqrt(row.x));
        CHECK(std::abs(p.lambda - row.lambda) <= 1e-12 * row.lambda);
        if (row.rate > 0.0) CHECK(std::abs(p.rate - row.rate) <= 1e-12 * row.rate);
        CHECK(std::isfinite(p.R));
        CHECK(p.R > 0.0);
    }
    const auto one = weibull_params(2.0, 0.5);
    CHECK(std::abs(one.R - 1.6031948455092889274980222919218) <= 1e-12);
}

TEST_CASE("weibull scale satisfies its defining relation") {
    // The closed form cancels below x ~ 1e-2, so the oracle stops there.
    for (double x : {0.01, 0.7, 3.0, 25.0, 400.0}) {
        const auto p = weibull_params(0.05, std::sqrt(x) / 0.05);
        const double i0e = boost::math::cyl_bessel_i(0, x) * std::exp(-x);
        const double log_ratio = std::log(2.0 * p.eta0 / (1.0 - i0e));
        CHECK(std::abs(std::pow(p.R, -p.lambda) - log_ratio) <= 1e-9 * log_ratio);
    }
}

TEST_CASE("weibull factor keeps the gaussian small-aperture limit") {
    const double a = 1e-4, W = 1.0;
    const auto p = weibull_params(a, 2.0 / W);
    CHECK(std::abs(p.lambda - 2.0) <= 1e-12);
    for (double r0 : {0.0, 0.3, 1.0, 2.0}) {
        CHECK(std::abs(p.factor(r0 / a) - std::exp(-2.0 * r0 * r0 / (W * W))) <= 1e-7);
    }
    CHECK_THROWS_AS(weibull_params(0.0, 1.0), DomainError);
    CHECK_THROWS_AS(weibull_params(1.0, -1.0), DomainError);
}

TEST_CASE("annular exact map: closed form at the centre") {
    CHECK(std::abs(annular_transmittance_exact(0.0, 0.075, kGeom) - 0.69320577262886762982) <= 1e-12);
    const ApertureGeometry disk{0.075, 0.0, 0.0};
    CHECK(std::abs(annular_transmittance_exact(0.0, 0.05, disk) - (1.0 - std::exp(-2.0 * 0.075 * 0.075 / 0.0025))) <=
          1e-14);
}

TEST_CASE("annular exact map agrees with direct quadrature") {
    for (double W : {0.023, 0.049, 0.075, 0.15}) {
        for (double r0 : {0.0, 0.01, 0.04, 0.09, 0.2}) {
            const double ref = oracle::elliptic_annulus_power(kGeom.a1, kGeom.a2, r0, 0.0, W, W, 0.0);
            CHECK(std::abs(annular_transmittance_exact(r0, W, kGeom) - ref) <= 1e-8);
        }
    }
}

TEST_CASE("annular exact map: narrow beam inside the annulus is fully transmitted") {
    CHECK(annular_transmittance_exact(0.05, 1e-5, kGeom) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(annular_transmittance_exact(0.01, 1e-5, kGeom) <= 1e-12);
}

TEST_CASE("annular maps: exact and approximate agree at zero offset") {
    for (double W : {0.01, 0.023, 0.05, 0.075, 0.3}) {
        CHECK(std::abs(annular_transmittance_approx(0.0, W, kGeom) - annular_transmittance_exact(0.0, W, kGeom)) <=
              1e-14);
    }
}

TEST_CASE("annular approximation vanishes far from the aperture") {
    CHECK(annular_transmittance_approx(10.0, 0.075, kGeom) <= 1e-300);
}

TEST_CASE("annular approximation within 0.02 of the exact map at W = a2") {
    const double worst = max_grid_error(kGeom.a2);
    MESSAGE("max |approx - exact| at W = a2: " << worst);
    CHECK(worst <= 0.02);
}

TEST_CASE("annular approximation within 0.02 of the exact map at W = (a1 + a2)/2") {
    const double worst = max_grid_error(0.5 * (kGeom.a1 + kGeom.a2));
    MESSAGE("max |approx - exact| at W = (a1+a2)/2: " << worst);
    CHECK(worst <= 0.02);
}

TEST_CASE("annular approximation within 0.02 of the exact map at W = a1") {
    const double worst = max_grid_error(kGeom.a1);
    MESSAGE("max |approx - exact| at W = a1: " << worst);
    CHECK(worst <= 0.02);
}

TEST_CASE("annular approximation within 0.02 of the exact map at W = 2 a1") {
    const double worst = max_grid_error(2.0 * kGeom.a1);
    MESSAGE("max |approx - exact| at W = 2 a1: " << worst);
    CHECK(worst <= 0.02);
}

TEST_CASE("annular map peaks inside the annulus for a narrow beam") {
    const double W = 0.015;
    std::vector<double> eta;
    for (int i = 0; i <= 300; ++i) eta.push_back(annular_transmittance_exact(0.1 * i / 300.0, W, kGeom));
    const auto peak = std::max_element(eta.begin(), eta.end()) - eta.begin();
    const double r_peak = 0.1 * peak / 300.0;
    CHECK(peak > 0);
    CHECK(peak < 300);
    CHECK(eta[peak] > eta.front());
    CHECK(std::abs(r_peak - 0.5 * (kGeom.a1 + kGeom.a2)) < 0.01);
    std::vector<double> approx;
    for (int i = 0; i <= 300; ++i) approx.push_back(annular_transmittance_approx(0.1 * i / 300.0, W, kGeom));
    const auto peak_approx = std::max_element(approx.begin(), approx.end()) - approx.begin();
    CHECK(peak_approx > 0);
    CHECK(peak_approx < 300);
}

TEST_CASE("effective spot: circular beam and symmetries") {
    const double a = 0.075;
    for (double chi : {0.0, 0.3, 1.2, 2.9}) {
        CHECK(std::abs(effective_spot(chi, a, 0.05, 0.05) - 0.05) <= 1e-15);
    }
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> w(0.2 * a, 3.0 * a), ang(-7.0, 7.0);
    for (int i = 0; i < 500; ++i) {
        const double W1 = w(gen), W2 = w(gen), chi = ang(gen);
        const double base = effective_spot(chi, a, W1, W2);
        CHECK(std::abs(effective_spot(chi + kPi, a, W1, W2) - base) <= 1e-12 * base);
        CHECK(std::abs(effective_spot(chi + 0.5 * kPi, a, W2, W1) - base) <= 1e-12 * base);
    }
    CHECK(std::abs(effective_spot(0.0, a, 0.06, 0.04) - effective_spot(0.5 * kPi, a, 0.04, 0.06)) <= 1e-15);
}

TEST_CASE("effective spot against a high-precision lambert evaluation") {
    const double a = 0.075;
    CHECK(std::abs(effective_spot(0.25 * kPi, a, 1.2 * a, 0.8 * a) / a - 0.94825612783981638288) <= 1e-13);
}

TEST_CASE("effective spot stays finite for very narrow axes") {
    const double w = effective_spot(0.4, 0.075, 1e-5, 2e-5);
    CHECK(std::isfinite(w));
    CHECK(w > 0.0);
    CHECK(w < 2e-5);
}

TEST_CASE("elliptic peak transmittance") {
    const double a = 0.075;
    for (double W : {0.01, 0.075, 0.2}) {
        CHECK(std::abs(elliptic_max_transmittance(a, W, W) - (1.0 - std::exp(-2.0 * a * a / (W * W)))) <= 1e-15);
        // Continuous through the circular branch.
        CHECK(std::abs(elliptic_max_transmittance(a, W, W * (1.0 + 1e-9)) - elliptic_max_transmittance(a, W, W)) <=
              1e-7);
    }
    CHECK(elliptic_max_transmittance(1e3, 0.05, 0.1) == doctest::Approx(1.0).epsilon(1e-15));
    double worst = 0.0;
    for (double W2 : {0.02, 0.04, 0.06, 0.1}) {
        const double W1 = 2.0 * W2;
        const double v = elliptic_max_transmittance(a, W1, W2);
        const double circ1 = 1.0 - std::exp(-2.0 * a * a / (W1 * W1));
        const double circ2 = 1.0 - std::exp(-2.0 * a * a / (W2 * W2));
        CHECK(v <= 1.0);
        CHECK(v <= std::max(circ1, circ2) + 1e-12);
        worst = std::max(worst, std::abs(v - oracle::elliptic_disk_power(a, 0.0, 0.0, W1, W2, 0.3)));
    }
    MESSAGE("max |peak - quadrature| for W1 = 2 W2: " << worst);
    CHECK(worst <= 0.02);
}

TEST_CASE("elliptic map: circular state reduces to the annular approximation") {
    const double W0 = 0.02;
    for (double theta : {-0.5, 0.7, 2.4}) {
        for (double r0 : {0.0, 0.02, 0.06, 0.1}) {
            const EllipticBeamState s{r0 * std::cos(0.4), r0 * std::sin(0.4), theta, theta, 1.1};
            const double W = W0 * std::exp(0.5 * theta);
            CHECK(std::abs(elliptic_transmittance(s, kGeom, W0) - annular_transmittance_approx(r0, W, kGeom)) <=
                  1e-13);
        }
    }
}

TEST_CASE("elliptic map at zero offset is the difference of peak transmittances") {
    const double W0 = 0.02;
    const EllipticBeamState s{0.0, 0.0, 1.2, 2.1, 0.5};
    const double W1 = W0 * std::exp(0.6), W2 = W0 * std::exp(1.05);
    CHECK(std::abs(elliptic_transmittance(s, kGeom, W0) -
                   (elliptic_max_transmittance(kGeom.a1, W1, W2) - elliptic_max_transmittance(kGeom.a2, W1, W2))) <=
          1e-15);
}

TEST_CASE("elliptic map: orientation symmetries and range") {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> th(-2.0, 4.0), pos(-0.15, 0.15), ang(0.0, 0.5 * kPi);
    ClampTally tally;
    for (int i = 0; i < 2000; ++i) {
        const EllipticBeamState s{pos(gen), pos(gen), th(gen), th(gen), ang(gen)};
        const double eta = elliptic_transmittance(s, kGeom, 0.02, &tally);
        CHECK((eta >= 0.0 && eta <= 1.0));
        EllipticBeamState swapped = s;
        swapped.phi += 0.5 * kPi;
        std::swap(swapped.theta1, swapped.theta2);
        CHECK(std::abs(elliptic_transmittance(swapped, kGeom, 0.02) - eta) <= 1e-12);
        EllipticBeamState half_turn = s;
        half_turn.phi += kPi;
        CHECK(std::abs(elliptic_transmittance(half_turn, kGeom, 0.02) - eta) <= 1e-12);
        EllipticBeamState mirrored = s;
        mirrored.x0 = -s.x0;
        mirrored.y0 = -s.y0;
        CHECK(std::abs(elliptic_transmittance(mirrored, kGeom, 0.02) - eta) <= 1e-12);
    }
    CHECK(tally.evaluations == 2000);
    MESSAGE("elliptic clamp rate: " << tally.rate());
}

TEST_CASE("canonical state folds the orientation") {
    const auto s = canonical_state({0.0, 0.0, 1.0, 2.0, 0.5 * kPi + 0.1});
    CHECK(s.phi == doctest::Approx(0.1));
    CHECK(s.theta1 == 2.0);
    CHECK(s.theta2 == 1.0);
    const auto t = canonical_state({0.0, 0.0, 1.0, 2.0, -kPi + 0.2});
    CHECK(t.phi == doctest::Approx(0.2));
    CHECK(t.theta1 == 1.0);
}

TEST_CASE("elliptic approximation within 0.05 of direct quadrature") {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> w(0.5 * kGeom.a1, 2.0 * kGeom.a1), rad(0.0, 2.0 * kGeom.a1),
        ang(0.0, 2.0 * kPi), orient(0.0, 0.5 * kPi);
    const double W0 = 0.02;
    double worst = 0.0;
    for (int i = 0; i < 150; ++i) {
        const double W1 = w(gen), W2 = w(gen), r0 = rad(gen), p0 = ang(gen), phi = orient(gen);
        const EllipticBeamState s{r0 * std::cos(p0), r0 * std::sin(p0), 2.0 * std::log(W1 / W0),
                                  2.0 * std::log(W2 / W0), phi};
        const double ref = oracle::elliptic_annulus_power(kGeom.a1, kGeom.a2, s.x0, s.y0, W1, W2, phi);
        worst = std::max(worst, std::abs(elliptic_transmittance(s, kGeom, W0) - ref));
    }
    MESSAGE("max |elliptic approximation - quadrature|: " << worst);
    CHECK(worst <= 0.05);
}

TEST_CASE("geometry validation") {
    CHECK_NOTHROW(kGeom.validate());
    CHECK_THROWS_AS((ApertureGeometry{0.02, 0.03, 0.0}.validate()), DomainError);
    CHECK_THROWS_AS((ApertureGeometry{0.05, -0.01, 0.0}.validate()), DomainError);
    CHECK_THROWS_AS((ApertureGeometry{0.05, 0.01, -1.0}.validate()), DomainError);
}
