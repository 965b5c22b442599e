// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>
#include <cstdlib>
#include <limits>

#include "fadechan/error.hpp"
#include "fadechan/numerics/quadrature.hpp"
#include "fadechan/pdt/pdt.hpp"

using namespace fadechan;

namespace {

const ApertureGeometry kGeom{0.075, 0.023, 0.0};

Estimate exact(double v) { return {v, 0.0}; }

// Field statistics of the default scenario, frozen from a 512-realization
// run so the model tests do not pay for the turbulence pass.
FieldStatistics frozen_stats(double L) {
    FieldStatistics s;
    if (L == 1000.0) {
        s.mean_eta = {exact(0.99666), exact(0.77872)};
        s.eta_corr = {{{exact(0.99333), exact(0.77612)}, {exact(0.77612), exact(0.60976)}}};
        s.W_ST = exact(0.02561);
        s.sigma_bw2 = exact(0.00403 * 0.00403);
        s.theta_mean = exact(0.4711);
        s.theta_var = exact(0.04633);
        s.theta_cov = exact(-0.00293);
    } else {
        s.mean_eta = {exact(0.85129), exact(0.19243)};
        s.eta_corr = {{{exact(0.73307), exact(0.16976)}, {exact(0.16976), exact(0.04857)}}};
        s.W_ST = exact(0.06323);
        s.sigma_bw2 = exact(0.02088 * 0.02088);
        s.theta_mean = exact(2.2398);
        s.theta_var = exact(0.12433);
        s.theta_cov = exact(-0.01687);
    }
    return s;
}

ChannelParams link(double L) {
    ChannelParams p;
    p.L = L;
    return p;
}

SamplingPlan plan(std::size_t n, std::uint64_t seed = 7) {
    SamplingPlan p;
    p.n_samples = n;
    p.seed = seed;
    return p;
}

void check_hygiene(const TransmittanceDistribution& d) {
    CHECK(std::abs(d.total_mass() - 1.0) <= 1e-9);
    CHECK(d.bin_edges.front() >= 0.0);
    CHECK(d.bin_edges.back() <= 1.0);
    for (double v : d.density) CHECK(v >= 0.0);
    CHECK(d.mean * d.mean <= d.second_moment);
    CHECK(d.mean >= 0.0);
    CHECK(d.mean <= 1.0);
}

double total_variation(const TransmittanceDistribution& a, const TransmittanceDistribution& b) {
    double tv = 0.0;
    for (std::size_t i = 0; i < a.bins(); ++i) tv += std::abs(a.density[i] - b.density[i]) * a.bin_width(i);
    return 0.5 * tv;
}

// Rice density of the centroid offset, evaluated with an independent Bessel.
double rice_pdf(double r, double nu, double sigma) {
    const double s2 = sigma * sigma;
    const double x = r * nu / s2;
    const double scaled = boost::math::cyl_bessel_i(0, x) * std::exp(-x);
    return r / s2 * std::exp(-(r - nu) * (r - nu) / (2.0 * s2)) * scaled;
}

}  // namespace

TEST_CASE("model names round trip") {
    for (PdtModel m : {PdtModel::beam_wandering, PdtModel::elliptic, PdtModel::weak_bw})
        CHECK(parse_model(model_name(m)) == m);
    CHECK_THROWS_AS(parse_model("gamma_gamma"), InputError);
}

TEST_CASE("loss in dB converts to a factor") {
    CHECK(db_to_factor(0.0) == 1.0);
    CHECK(db_to_factor(2.3) == doctest::Approx(std::pow(10.0, -0.23)).epsilon(1e-15));
    CHECK(db_to_factor(2.3) == doctest::Approx(0.5888).epsilon(1e-4));
    CHECK_THROWS_AS(db_to_factor(-1.0), DomainError);
}

TEST_CASE("settings validation") {
    CorrectionSettings c;
    c.tracking_ratio = 0.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.tracking_ratio = 1.5;
    CHECK_THROWS_AS(c.validate(), DomainError);
    c.tracking_ratio = 0.25;
    c.eta_det = 0.0;
    CHECK_THROWS_AS(c.validate(), DomainError);
    SamplingPlan p;
    p.bins = 0;
    CHECK_THROWS_AS(p.validate(), DomainError);
}

TEST_CASE("beam wandering without wander puts all mass in one bin") {
    ApertureGeometry g = kGeom;
    g.d0 = 0.04;
    CorrectionSettings c;
    c.eta_det = 0.7;
    const auto d = pdt_beam_wandering(0.03, 0.0, g, c, plan(5000));
    const double eta = annular_transmittance_approx(0.04, 0.03, g) * 0.7;
    std::size_t nonzero = 0;
    for (std::size_t i = 0; i < d.bins(); ++i) {
        if (d.density[i] > 0.0) {
            ++nonzero;
            CHECK(d.bin_edges[i] <= eta);
            CHECK(eta < d.bin_edges[i + 1]);
        }
    }
    CHECK(nonzero == 1);
    CHECK(d.mean == doctest::Approx(eta).epsilon(1e-12));
    CHECK(d.variance <= 1e-20);
}

TEST_CASE("beam wandering mean matches the Rice-averaged transmittance") {
    for (double d0 : {0.0, 0.03}) {
        ApertureGeometry g = kGeom;
        g.d0 = d0;
        CorrectionSettings c;
        c.eta_det = 0.8;
        const double W = 0.03, sigma = 0.012;
        const auto d = pdt_beam_wandering(W, sigma, g, c, plan(400000));
        const auto f = [&](double r) { return rice_pdf(r, d0, sigma) * annular_transmittance_approx(r, W, g); };
        const double reference = 0.8 * adaptive_quad_1d(f, 0.0, d0 + 12.0 * sigma, 1e-12).value;
        CHECK(std::abs(d.mean - reference) <= 3.0 * d.mean_error);
        check_hygiene(d);
    }
}

TEST_CASE("few samples are flagged") {
    const auto d = pdt_beam_wandering(0.03, 0.01, kGeom, {}, plan(500));
    CHECK(d.diagnostics.has_flag(kFlagFewSamples));
    const auto e = pdt_beam_wandering(0.03, 0.01, kGeom, {}, plan(2000));
    CHECK_FALSE(e.diagnostics.has_flag(kFlagFewSamples));
}

TEST_CASE("elliptic model with frozen log-variables reduces to beam wandering") {
    const auto p = link(1000.0);
    const double W = 0.028, sigma = 0.01;
    FieldStatistics s;
    s.W_ST = exact(W);
    s.sigma_bw2 = exact(sigma * sigma);
    s.theta_mean = exact(std::log(W * W / (p.W0 * p.W0)));
    s.theta_var = exact(0.0);
    s.theta_cov = exact(0.0);
    for (double d0 : {0.0, 0.049}) {
        ApertureGeometry g = kGeom;
        g.d0 = d0;
        const auto el = pdt_elliptic(s, p, g, {}, plan(1'000'000, 11));
        const auto bw = pdt_beam_wandering(W, sigma, g, {}, plan(1'000'000, 12));
        CHECK(total_variation(el, bw) <= 0.02);
        CHECK(std::abs(el.mean - bw.mean) <= 4.0 * std::hypot(el.mean_error, bw.mean_error));
        check_hygiene(el);
    }
}

TEST_CASE("elliptic model validates its inputs") {
    auto s = frozen_stats(1000.0);
    s.theta_var = exact(-1.0);
    CHECK_THROWS_AS(pdt_elliptic(s, link(1000.0), kGeom, {}, plan(1000)), DomainError);
    s = frozen_stats(1000.0);
    s.W_ST = exact(0.0);
    CHECK_THROWS_AS(pdt_elliptic(s, link(1000.0), kGeom, {}, plan(1000)), DomainError);
}

TEST_CASE("weak wander parameters collapse without wander") {
    auto s = frozen_stats(3000.0);
    s.sigma_bw2 = exact(0.0);
    const auto w = weak_bw_params(s, kGeom, {});
    for (std::size_t n = 0; n < 2; ++n) {
        CHECK(w.eta0[n] == doctest::Approx(s.mean_eta[n].value).epsilon(1e-14));
        for (std::size_t m = 0; m < 2; ++m)
            CHECK(w.zeta0[n][m] * w.zeta0[n][m] == doctest::Approx(s.eta_corr[n][m].value).epsilon(1e-14));
    }
}

TEST_CASE("weak wander parameters reproduce the input moments") {
    for (double L : {1000.0, 3000.0}) {
        for (double ratio : {1.0, 0.25}) {
            const auto s = frozen_stats(L);
            CorrectionSettings c;
            c.tracking_ratio = ratio;
            const auto w = weak_bw_params(s, kGeom, c);
            const auto back = weak_bw_round_trip(w);
            for (std::size_t n = 0; n < 2; ++n) {
                CHECK(std::abs(back.mean[n] / s.mean_eta[n].value - 1.0) <= 1e-8);
                for (std::size_t m = 0; m < 2; ++m)
                    CHECK(std::abs(back.corr[n][m] / s.eta_corr[n][m].value - 1.0) <= 1e-8);
            }
            CHECK(w.eta0[0] > 0.0);
            CHECK(w.eta0[0] <= 1.0);
            CHECK(w.eta0[1] > 0.0);
            CHECK(w.eta0[1] <= 1.0);
        }
    }
}

TEST_CASE("weak wander log-normal parameters") {
    const auto s = frozen_stats(3000.0);
    const auto w = weak_bw_params(s, kGeom, {});
    for (int n = 1; n <= 2; ++n) {
        const auto i = static_cast<std::size_t>(n - 1);
        // Self-consistent sign: the mean log at zero deflection is ln(eta0^2 / zeta_nn).
        CHECK(w.log_mean(n, 0.0) == doctest::Approx(std::log(w.eta0[i] * w.eta0[i] / w.zeta0[i][i])));
        CHECK(w.log_mean(n, 0.0) < 0.0);
        // The deflection only shifts the mean log.
        const double shift = w.log_mean(n, 0.01) - w.log_mean(n, 0.0);
        CHECK(shift == doctest::Approx(std::log(w.offset_factor(n, 0.01))));
        // Log-normal moment matching at fixed deflection.
        const double var = w.cov_lognormal[i][i];
        for (double r0 : {0.0, 0.02}) {
            CHECK(std::exp(w.log_mean(n, r0) + 0.5 * var) ==
                  doctest::Approx(w.conditional_mean(n, r0)).epsilon(1e-12));
            CHECK(std::exp(2.0 * w.log_mean(n, r0) + 2.0 * var) ==
                  doctest::Approx(w.conditional_corr(n, n, r0)).epsilon(1e-12));
        }
    }
    CHECK(w.cov_lognormal[0][1] == w.cov_lognormal[1][0]);
    const double det = w.cov_lognormal[0][0] * w.cov_lognormal[1][1] - w.cov_lognormal[0][1] * w.cov_lognormal[0][1];
    CHECK(det >= 0.0);
    CHECK(w.truncation_mass > 0.95);
    CHECK(w.truncation_mass <= 1.0);
    CHECK_FALSE(w.has_flag(kFlagTruncationDegraded));
}

TEST_CASE("weak wander model reproduces the first-principles mean") {
    const auto s = frozen_stats(3000.0);
    CorrectionSettings c;
    c.eta_det = db_to_factor(2.3);
    const auto w = weak_bw_params(s, kGeom, c);
    const auto d = pdt_weak_bw(w, s, kGeom, c, plan(400000));
    const double target = (s.mean_eta[0].value - s.mean_eta[1].value) * c.eta_det;
    CHECK(std::abs(d.mean / target - 1.0) <= 0.02);
    CHECK(d.diagnostics.rejection_rate() < 0.05);
    check_hygiene(d);
}

TEST_CASE("truncation degradation is flagged") {
    auto s = frozen_stats(3000.0);
    // Mean close to one with a wide spread leaves much mass above eta = 1.
    s.mean_eta[0] = exact(0.95);
    s.eta_corr[0][0] = exact(0.95);
    const auto w = weak_bw_params(s, kGeom, {});
    CHECK(w.truncation_mass < 0.95);
    CHECK(w.has_flag(kFlagTruncationDegraded));
}

TEST_CASE("excessive rejection is a diagnostic error") {
    auto s = frozen_stats(3000.0);
    // Nearly equal, anti-correlated partial transmittances: the ordering
    // constraint and the truncation together reject most draws.
    s.mean_eta = {exact(0.85), exact(0.84)};
    s.eta_corr = {{{exact(0.75), exact(0.70)}, {exact(0.70), exact(0.74)}}};
    const auto w = weak_bw_params(s, kGeom, {});
    CHECK_THROWS_AS(pdt_weak_bw(w, s, kGeom, {}, plan(20000)), DiagnosticError);
}

TEST_CASE("weak wander needs a central obscuration") {
    ApertureGeometry g{0.075, 0.0, 0.0};
    CHECK_THROWS_AS(weak_bw_params(frozen_stats(3000.0), g, {}), DomainError);
}

TEST_CASE("deterministic loss rescales the support") {
    const auto d = pdt_beam_wandering(0.03, 0.01, kGeom, {}, plan(20000));
    const auto same = apply_deterministic_loss(d, 1.0);
    CHECK(same.bin_edges == d.bin_edges);
    CHECK(same.density == d.density);
    CHECK(same.mean == d.mean);

    const double f = db_to_factor(2.3);
    const auto once = apply_deterministic_loss(d, f);
    CHECK(once.mean == doctest::Approx(d.mean * f).epsilon(1e-15));
    CHECK(once.second_moment == doctest::Approx(d.second_moment * f * f).epsilon(1e-15));
    CHECK(std::abs(once.total_mass() - 1.0) <= 1e-9);
    CHECK(once.bin_edges.back() == doctest::Approx(f));

    const auto twice = apply_deterministic_loss(apply_deterministic_loss(d, db_to_factor(1.15)), db_to_factor(1.15));
    CHECK(twice.mean == doctest::Approx(once.mean).epsilon(1e-14));
    for (std::size_t i = 0; i < d.bins(); ++i) {
        CHECK(twice.bin_edges[i] == doctest::Approx(once.bin_edges[i]).epsilon(1e-14));
        CHECK(twice.density[i] == doctest::Approx(once.density[i]).epsilon(1e-14));
    }
    CHECK_THROWS_AS(apply_deterministic_loss(d, 0.0), DomainError);
}

TEST_CASE("loss applied at sampling matches loss applied afterwards") {
    CorrectionSettings c;
    c.eta_det = 0.5;
    const auto at_sampling = pdt_beam_wandering(0.03, 0.01, kGeom, c, plan(50000));
    const auto after = apply_deterministic_loss(pdt_beam_wandering(0.03, 0.01, kGeom, {}, plan(50000)), 0.5);
    CHECK(at_sampling.mean == doctest::Approx(after.mean).epsilon(1e-12));
}

TEST_CASE("quantiles and tail mass are consistent") {
    const auto d = pdt_beam_wandering(0.03, 0.01, kGeom, {}, plan(100000));
    for (double p : {0.1, 0.5, 0.9}) CHECK(d.mass_above(d.quantile(p)) == doctest::Approx(1.0 - p).epsilon(1e-9));
    CHECK(d.mass_above(-1.0) == doctest::Approx(1.0));
    CHECK(d.mass_above(2.0) == 0.0);
    CHECK_THROWS_AS(d.quantile(1.5), DomainError);
}

TEST_CASE("single-point offset scan equals a direct call") {
    PdtInputs in;
    in.model = PdtModel::elliptic;
    in.stats = frozen_stats(1000.0);
    in.params = link(1000.0);
    in.geom = kGeom;
    in.plan = plan(50000);
    const double d0[] = {0.03};
    const auto scan = scan_offset(in, d0);
    REQUIRE(scan.size() == 1);
    in.geom.d0 = 0.03;
    const auto direct = run_model(in);
    CHECK(scan[0].d0 == 0.03);
    CHECK(scan[0].distribution.density == direct.density);
    CHECK(scan[0].mean_eta == direct.mean);
    const double bad[] = {0.2};
    CHECK_THROWS_AS(scan_offset(in, bad), DomainError);
}

TEST_CASE("offset scan of the 1 km elliptic model peaks mid-annulus") {
    PdtInputs in;
    in.model = PdtModel::elliptic;
    in.stats = frozen_stats(1000.0);
    in.params = link(1000.0);
    in.geom = kGeom;
    in.plan = plan(100000);
    std::vector<double> grid;
    for (int i = 0; i < 15; ++i) grid.push_back((kGeom.a1 + kGeom.a2) * i / 14.0);
    const auto scan = scan_offset(in, grid);
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.size(); ++i)
        if (scan[i].mean_eta > scan[best].mean_eta) best = i;
    CHECK(std::abs(scan[best].d0 - 0.049) <= (kGeom.a1 - kGeom.a2) / 4.0);
}

TEST_CASE("tracking helps at the optimal offset and hurts when centred") {
    PdtInputs in;
    in.model = PdtModel::elliptic;
    in.stats = frozen_stats(1000.0);
    in.params = link(1000.0);
    in.geom = kGeom;
    in.plan = plan(200000);
    in.geom.d0 = 0.049;
    const auto free_aim = run_model(in);
    in.corrections.tracking_ratio = 0.25;
    const auto tracked = run_model(in);
    CHECK(tracked.mean > free_aim.mean + 3.0 * std::hypot(tracked.mean_error, free_aim.mean_error));

    in.geom.d0 = 0.0;
    in.corrections.tracking_ratio = 1.0;
    const auto centred = run_model(in);
    const double threshold = centred.quantile(0.9);
    in.corrections.tracking_ratio = 0.25;
    const auto centred_tracked = run_model(in);
    CHECK(centred_tracked.mass_above(threshold) < centred.mass_above(threshold));
}

TEST_CASE("every model is normalized and supported on the unit interval") {
    const auto s = frozen_stats(3000.0);
    for (PdtModel m : {PdtModel::beam_wandering, PdtModel::elliptic, PdtModel::weak_bw}) {
        PdtInputs in;
        in.model = m;
        in.stats = s;
        in.params = link(3000.0);
        in.geom = kGeom;
        in.geom.d0 = 0.02;
        in.plan = plan(70000);
        in.plan.bins = 137;
        const auto d = run_model(in);
        CHECK(d.bins() == 137);
        CHECK(d.n_samples == 70000);
        CHECK(d.model_tag == m);
        check_hygiene(d);
    }
}

TEST_CASE("histograms depend on the seed only") {
    PdtInputs in;
    in.model = PdtModel::weak_bw;
    in.stats = frozen_stats(3000.0);
    in.params = link(3000.0);
    in.geom = kGeom;
    in.plan = plan(150000, 99);
    in.plan.shard_size = 10000;
    ::setenv("FADECHAN_THREADS", "1", 1);
    const auto one = run_model(in);
    ::setenv("FADECHAN_THREADS", "3", 1);
    const auto three = run_model(in);
    const auto again = run_model(in);
    ::unsetenv("FADECHAN_THREADS");
    CHECK(one.density == three.density);
    CHECK(one.mean == three.mean);
    CHECK(one.second_moment == three.second_moment);
    CHECK(again.density == three.density);
    in.plan.seed = 100;
    CHECK(run_model(in).density != one.density);
}
