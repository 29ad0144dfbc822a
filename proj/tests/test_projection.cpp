#include "doctest.h"

#include "longrisk/errors.hpp"
#include "longrisk/leecarter.hpp"
#include "longrisk/mortality_data.hpp"
#include "longrisk/projection.hpp"
#include "longrisk/rng.hpp"
#include "longrisk/synthetic.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <memory>
#include <vector>

using namespace longrisk;

namespace {

struct OlsOracle {
    double a = 0.0;
    double b = 0.0;
    double s2 = 0.0;
    Eigen::VectorXd fitted;
};

// Independent least-squares solve through a QR factorization.
OlsOracle ols_qr(const Eigen::VectorXd& k, const std::vector<int>& years) {
    const auto n = static_cast<Eigen::Index>(years.size());
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = years[static_cast<size_t>(i)];
        x(i, 1) = 1.0;
    }
    const Eigen::Vector2d coef = x.colPivHouseholderQr().solve(k);
    OlsOracle out;
    out.a = coef(0);
    out.b = coef(1);
    out.fitted = x * coef;
    out.s2 = (k - out.fitted).squaredNorm() / static_cast<double>(n - 2);
    return out;
}

LeeCarterModel single_age_model(double alpha, double beta) {
    LeeCarterModel m;
    m.age_min = m.age_max = 70;
    m.year_min = 2000;
    m.year_max = 2005;
    m.alpha = Eigen::VectorXd::Constant(1, alpha);
    m.beta = Eigen::VectorXd::Constant(1, beta);
    m.k = Eigen::VectorXd::Zero(6);
    return m;
}

} // namespace

TEST_CASE("drift fit agrees with a QR least-squares solve") {
    std::vector<int> years;
    for (int y = 11; y <= 30; ++y) years.push_back(y);
    RngStream noise(42);
    Eigen::VectorXd k(20);
    for (int i = 0; i < 20; ++i) {
        k(i) = -1.7 * years[static_cast<size_t>(i)] + 12.0 + 2.0 * noise.normal();
    }

    const DriftModel drift = fit_drift(k, years);
    const OlsOracle oracle = ols_qr(k, years);
    CHECK(drift.a == doctest::Approx(oracle.a).epsilon(1e-12));
    CHECK(drift.b == doctest::Approx(oracle.b).epsilon(1e-12));
    CHECK(drift.sigma_gamma == doctest::Approx(std::sqrt(oracle.s2)).epsilon(1e-12));
    CHECK(drift.n_obs == 20);
    CHECK(drift.year_min == 11);
    CHECK(drift.year_max == 30);

    Eigen::MatrixXd xtx(2, 2);
    double st = 0.0, st2 = 0.0;
    for (int y : years) {
        st += y;
        st2 += static_cast<double>(y) * y;
    }
    xtx << st2, st, st, 20.0;
    const Eigen::Matrix2d cov = oracle.s2 * xtx.inverse();
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            CHECK(drift.cov_ab(r, c) == doctest::Approx(cov(r, c)).epsilon(1e-9));
        }
    }
}

TEST_CASE("drift fit on calendar years reproduces fitted values and prediction variance") {
    std::vector<int> years;
    for (int y = 1990; y <= 2009; ++y) years.push_back(y);
    RngStream noise(43);
    Eigen::VectorXd k(20);
    for (int i = 0; i < 20; ++i) {
        k(i) = -2.1 * years[static_cast<size_t>(i)] + 4200.0 + 3.0 * noise.normal();
    }

    const DriftModel drift = fit_drift(k, years);
    const OlsOracle oracle = ols_qr(k, years);
    for (int i = 0; i < 20; ++i) {
        const double line = drift.a * years[static_cast<size_t>(i)] + drift.b;
        CHECK(line == doctest::Approx(oracle.fitted(i)).epsilon(1e-9));
    }
    CHECK(drift.sigma_gamma == doctest::Approx(std::sqrt(oracle.s2)).epsilon(1e-10));

    // prediction variance at year y from the textbook decomposition; the
    // quadratic form in cov_ab must reproduce it
    const double t_mean = 1999.5;
    double sxx = 0.0;
    for (int y : years) sxx += (y - t_mean) * (y - t_mean);
    for (int y : {2010, 2030, 2055}) {
        const double quad = drift.cov_ab(0, 0) * y * static_cast<double>(y) +
                            2.0 * drift.cov_ab(0, 1) * y + drift.cov_ab(1, 1);
        const double textbook = oracle.s2 * (1.0 / 20.0 + (y - t_mean) * (y - t_mean) / sxx);
        CHECK(quad == doctest::Approx(textbook).epsilon(1e-8));
    }
}

TEST_CASE("drift fit input guards") {
    std::vector<int> years{2000, 2001, 2002};
    CHECK_THROWS_AS((void)fit_drift(Eigen::VectorXd::Zero(2), years), ArgumentError);
    CHECK_THROWS_AS((void)fit_drift(Eigen::VectorXd::Zero(2), std::vector<int>{2000, 2001}),
                    ArgumentError);
    CHECK_THROWS_AS(
        (void)fit_drift(Eigen::VectorXd::Zero(3), std::vector<int>{2000, 2000, 2000}),
        ArgumentError);
}

TEST_CASE("reference drift is pinned") {
    const DriftModel drift = reference_drift();
    CHECK(drift.a == -2.05775);
    CHECK(drift.b == 4059.94439);
    CHECK(drift.sigma_gamma == 3.9388782);
    CHECK(drift.n_obs == 56);
    CHECK(drift.year_min == 1950);
    CHECK(drift.year_max == 2005);
    CHECK(drift.cov_ab(0, 0) > 0.0);
    CHECK(drift.cov_ab(0, 1) == drift.cov_ab(1, 0));
    CHECK(drift.cov_ab.determinant() >= 0.0);

    const Eigen::VectorXd k = extrapolate_k(drift, {2030});
    CHECK(k(0) == doctest::Approx(-117.28811).epsilon(1e-9));
}

TEST_CASE("extrapolation rejects years inside the fit window") {
    const DriftModel drift = reference_drift();
    CHECK_THROWS_AS((void)extrapolate_k(drift, {2005}), ArgumentError);
    CHECK_THROWS_AS((void)extrapolate_k(drift, {2006, 1990}), ArgumentError);
    CHECK_NOTHROW((void)extrapolate_k(drift, {2006}));
}

TEST_CASE("zero-sigma paths reproduce the line bit for bit") {
    const DriftModel drift = reference_drift();
    std::vector<int> years{2006, 2007, 2008, 2009};
    const Eigen::VectorXd line = extrapolate_k(drift, years);
    const Eigen::VectorXd path = sample_k_path(drift, years, RngStream(123), 0.0);
    for (int i = 0; i < 4; ++i) {
        CHECK(path(i) == line(i));
    }
    CHECK_THROWS_AS((void)sample_k_path(drift, years, RngStream(1), -0.1), ArgumentError);
}

TEST_CASE("the noise drawn for a year does not depend on the year set") {
    const DriftModel drift = reference_drift();
    std::vector<int> years;
    for (int y = 2010; y <= 2019; ++y) years.push_back(y);
    const Eigen::VectorXd whole = sample_k_path(drift, years, RngStream(5), 2.0);
    for (size_t i = 0; i < years.size(); ++i) {
        const Eigen::VectorXd solo =
            sample_k_path(drift, {years[i]}, RngStream(5), 2.0);
        CHECK(solo(0) == whole(static_cast<Eigen::Index>(i)));
    }
}

TEST_CASE("two-argument overload uses the fitted sigma") {
    const DriftModel drift = reference_drift();
    std::vector<int> years{2010, 2011, 2012};
    const Eigen::VectorXd a = sample_k_path(drift, years, RngStream(9));
    const Eigen::VectorXd b = sample_k_path(drift, years, RngStream(9), drift.sigma_gamma);
    for (int i = 0; i < 3; ++i) {
        CHECK(a(i) == b(i));
    }
}

TEST_CASE("sampled path noise has the requested distribution") {
    const DriftModel drift = reference_drift();
    const double sigma = 2.5;
    const double line = drift.a * 2010 + drift.b;
    const int n = 20000;
    double sum = 0.0, sum_sq = 0.0;
    RngStream root(2024);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd k =
            sample_k_path(drift, {2010}, root.substream(static_cast<uint64_t>(i)), sigma);
        const double eps = k(0) - line;
        sum += eps;
        sum_sq += eps * eps;
    }
    const double mean = sum / n;
    const double sd = std::sqrt(sum_sq / n - mean * mean);
    CHECK(std::abs(mean) < 4.0 * sigma / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(sd - sigma) < 4.0 * sigma / std::sqrt(2.0 * n));
}

TEST_CASE("spanning path stitches history and projection") {
    SyntheticWorldOptions options;
    options.seed = 17;
    const MortalitySurface surface = synthetic_surface(options);
    const LeeCarterModel model = fit(surface);
    const DriftModel drift = fit_drift(model);

    std::vector<int> years{1950, 2000, 2005, 2006, 2010};
    const Eigen::VectorXd det =
        k_path_spanning(model, drift, years, PathMode::kDeterministic, RngStream(3), 2.0);
    CHECK(det(0) == model.k(0));
    CHECK(det(1) == model.k(50));
    CHECK(det(2) == model.k(55));
    CHECK(det(3) == drift.a * 2006 + drift.b);
    CHECK(det(4) == drift.a * 2010 + drift.b);

    const Eigen::VectorXd sampled =
        k_path_spanning(model, drift, years, PathMode::kSampled, RngStream(3), 2.0);
    CHECK(sampled(0) == model.k(0));  // history never gets noise
    CHECK(sampled(2) == model.k(55));
    const Eigen::VectorXd solo = sample_k_path(drift, {2010}, RngStream(3), 2.0);
    CHECK(sampled(4) == solo(0)); // same per-year keying as sample_k_path

    CHECK_THROWS_AS((void)k_path_spanning(model, drift, {1949}, PathMode::kDeterministic,
                                          RngStream(1), 0.0),
                    ArgumentError);
}

TEST_CASE("drift parameter draws follow the Cholesky transform") {
    DriftModel drift = reference_drift();

    SUBCASE("zero covariance returns the point estimate") {
        drift.cov_ab.setZero();
        const auto draw = sample_drift_params(drift, RngStream(11));
        CHECK(draw.first == drift.a);
        CHECK(draw.second == drift.b);
    }

    SUBCASE("diagonal covariance scales independent normals") {
        drift.cov_ab << 4.0, 0.0, 0.0, 9.0;
        const auto draw = sample_drift_params(drift, RngStream(7));
        RngStream replay(7);
        const double z1 = replay.normal();
        const double z2 = replay.normal();
        CHECK(draw.first == drift.a + 2.0 * z1);
        CHECK(draw.second == drift.b + 3.0 * z2);
    }

    SUBCASE("indefinite covariance is rejected") {
        drift.cov_ab << 1.0, 2.0, 2.0, 1.0;
        CHECK_THROWS_AS((void)sample_drift_params(drift, RngStream(1)), NumericError);
        drift.cov_ab << -1.0, 0.0, 0.0, 1.0;
        CHECK_THROWS_AS((void)sample_drift_params(drift, RngStream(1)), NumericError);
    }

    SUBCASE("sampled moments match the covariance") {
        const int n = 20000;
        double sa = 0.0, saa = 0.0;
        RngStream root(31);
        for (int i = 0; i < n; ++i) {
            const auto draw = sample_drift_params(drift, root.substream(static_cast<uint64_t>(i)));
            sa += draw.first;
            saa += draw.first * draw.first;
        }
        const double mean = sa / n;
        const double var = saa / n - mean * mean;
        const double sd_a = std::sqrt(drift.cov_ab(0, 0));
        CHECK(std::abs(mean - drift.a) < 4.0 * sd_a / std::sqrt(static_cast<double>(n)));
        CHECK(std::abs(var - drift.cov_ab(0, 0)) <
              4.0 * drift.cov_ab(0, 0) * std::sqrt(2.0 / n));
    }
}

TEST_CASE("surface kind names round trip") {
    for (SurfaceKind kind : {SurfaceKind::kDeterministic, SurfaceKind::kStochasticRaw,
                             SurfaceKind::kStochasticCorrected}) {
        CHECK(surface_kind_from_string(to_string(kind)) == kind);
    }
    CHECK_THROWS_AS((void)surface_kind_from_string("nope"), ArgumentError);
}

TEST_CASE("projected cells follow the closed form, correction shifts hazards") {
    SyntheticWorldOptions options;
    options.seed = 21;
    const auto model = std::make_shared<const LeeCarterModel>(fit(synthetic_surface(options)));
    const DriftModel drift = fit_drift(*model);

    std::vector<int> years;
    for (int y = 2006; y <= 2015; ++y) years.push_back(y);
    const Eigen::VectorXd k = extrapolate_k(drift, years);
    const double sigma = 3.0;

    const ProjectedSurface raw = build_surface(model, years, k, false, sigma);
    const ProjectedSurface corrected = build_surface(model, years, k, true, sigma);
    CHECK(raw.kind == SurfaceKind::kStochasticRaw);
    CHECK(corrected.kind == SurfaceKind::kStochasticCorrected);
    CHECK(raw.year_start == 2006);
    CHECK(raw.year_end == 2015);

    for (Eigen::Index i = 0; i < model->alpha.size(); i += 9) {
        for (Eigen::Index j = 0; j < 10; j += 3) {
            const double mu_raw = std::exp(model->alpha(i) + model->beta(i) * k(j));
            CHECK(raw.q_future(i, j) == doctest::Approx(mu_to_q(mu_raw)).epsilon(1e-13));
            const double shift = 0.5 * sigma * sigma * model->beta(i) * model->beta(i);
            const double mu_corr = std::exp(model->alpha(i) - shift + model->beta(i) * k(j));
            CHECK(corrected.q_future(i, j) == doctest::Approx(mu_to_q(mu_corr)).epsilon(1e-13));
            // hazard ratio depends only on age
            const double ratio =
                q_to_mu(raw.q_future(i, j)) / q_to_mu(corrected.q_future(i, j));
            CHECK(ratio == doctest::Approx(std::exp(shift)).epsilon(1e-12));
        }
    }
}

TEST_CASE("surface construction guards") {
    SyntheticWorldOptions options;
    const auto model = std::make_shared<const LeeCarterModel>(fit(synthetic_surface(options)));
    const Eigen::VectorXd k2 = Eigen::VectorXd::Zero(2);

    CHECK_THROWS_AS((void)build_surface(nullptr, {2006, 2007}, k2, false, 0.0), ArgumentError);
    CHECK_THROWS_AS((void)build_surface(model, {}, Eigen::VectorXd(), false, 0.0),
                    ArgumentError);
    CHECK_THROWS_AS((void)build_surface(model, {2006, 2007}, Eigen::VectorXd::Zero(3),
                                        false, 0.0),
                    ArgumentError);
    CHECK_THROWS_AS((void)build_surface(model, {2006, 2008}, k2, false, 0.0), ArgumentError);
    Eigen::VectorXd bad(2);
    bad << 0.0, std::nan("");
    CHECK_THROWS_AS((void)build_surface(model, {2006, 2007}, bad, false, 0.0), DomainError);
}

TEST_CASE("bias correction centers the sampled hazard") {
    const auto model = std::make_shared<const LeeCarterModel>(single_age_model(-4.0, 1.0));
    DriftModel drift;
    drift.a = 0.0;
    drift.b = 0.0;
    drift.year_max = 2005;
    const double sigma = 0.1;
    const double mu_trend = std::exp(-4.0);

    const int n = 60000;
    double sum_raw = 0.0, sum_corr = 0.0, sum_raw_sq = 0.0;
    RngStream root(606);
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd k =
            sample_k_path(drift, {2006}, root.substream(static_cast<uint64_t>(i)), sigma);
        const ProjectedSurface raw = build_surface(model, {2006}, k, false, sigma);
        const ProjectedSurface corr = build_surface(model, {2006}, k, true, sigma);
        const double r = q_to_mu(raw.q_future(0, 0)) / mu_trend;
        sum_raw += r;
        sum_raw_sq += r * r;
        sum_corr += q_to_mu(corr.q_future(0, 0)) / mu_trend;
    }
    const double mean_raw = sum_raw / n;
    const double se = std::sqrt((sum_raw_sq / n - mean_raw * mean_raw) / n);
    const double expected = std::exp(0.5 * sigma * sigma); // lognormal mean
    CHECK(std::abs(mean_raw - expected) < 4.0 * se);
    CHECK(std::abs(sum_corr / n - 1.0) < 4.0 * se);
}

TEST_CASE("deterministic projection equals the assembled pieces") {
    SyntheticWorldOptions options;
    options.seed = 33;
    const auto model = std::make_shared<const LeeCarterModel>(fit(synthetic_surface(options)));
    const DriftModel drift = fit_drift(*model);

    const ProjectedSurface projected = project_deterministic(model, drift, 2006, 2020);
    CHECK(projected.kind == SurfaceKind::kDeterministic);
    CHECK(projected.year_start == 2006);
    CHECK(projected.year_end == 2020);

    std::vector<int> years;
    for (int y = 2006; y <= 2020; ++y) years.push_back(y);
    const ProjectedSurface direct =
        build_surface(model, years, extrapolate_k(drift, years), false, 0.0);
    CHECK((projected.q_future - direct.q_future).cwiseAbs().maxCoeff() == 0.0);

    const MortalitySurface view = projected.to_surface();
    CHECK(view.age_min == model->age_min);
    CHECK(view.age_max == model->age_max);
    CHECK(view.year_min == 2006);
    CHECK(view.year_max == 2020);
    CHECK_NOTHROW(validate_surface(view));

    CHECK_THROWS_AS((void)project_deterministic(model, drift, 2010, 2009), ArgumentError);
    CHECK_THROWS_AS((void)project_deterministic(nullptr, drift, 2006, 2010), ArgumentError);
}

TEST_CASE("stochastic draw collapses to the deterministic table at sigma zero") {
    SyntheticWorldOptions options;
    options.seed = 8;
    const LeeCarterModel model = fit(synthetic_surface(options));
    const DriftModel drift = fit_drift(model);

    const ClosedTable det = project_closed_surface(model, drift, 2006, 2056, 120,
                                                   ClosureMethod::kLogisticBlend);
    const ClosedTable collapsed =
        draw_closed_surface(model, drift, 2006, 2056, 120, ClosureMethod::kLogisticBlend,
                            0.0, true, RngStream(99));
    CHECK(collapsed.base_age_max == det.base_age_max);
    CHECK(collapsed.terminal_age == det.terminal_age);
    REQUIRE(collapsed.table.q.rows() == det.table.q.rows());
    REQUIRE(collapsed.table.q.cols() == det.table.q.cols());
    CHECK((collapsed.table.q - det.table.q).cwiseAbs().maxCoeff() == 0.0);

    const ClosedTable noisy =
        draw_closed_surface(model, drift, 2006, 2056, 120, ClosureMethod::kLogisticBlend,
                            drift.sigma_gamma, true, RngStream(99));
    CHECK((noisy.table.q - det.table.q).cwiseAbs().maxCoeff() > 0.0);

    // death is certain at the terminal age in every projection year
    for (int y = det.table.year_min; y <= det.table.year_max; y += 10) {
        CHECK(det.table.at(120, y) == 1.0);
        CHECK(det.table.at(119, y) < 1.0);
    }
}
