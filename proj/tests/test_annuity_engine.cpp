#include "doctest.h"

#include "longrisk/annuity_engine.hpp"
#include "longrisk/errors.hpp"
#include "longrisk/leecarter.hpp"
#include "longrisk/projection.hpp"
#include "longrisk/rng.hpp"
#include "longrisk/synthetic.hpp"

#include "support/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

using namespace longrisk;

namespace {

// Small fully specified table: q(a, y) on ages [age_min, terminal], with the
// terminal row pinned at 1.
ClosedTable hand_table(int age_min, int terminal, int year_min, int year_max,
                       double base, double age_step, double year_step) {
    ClosedTable ct;
    ct.table.age_min = age_min;
    ct.table.age_max = terminal;
    ct.table.year_min = year_min;
    ct.table.year_max = year_max;
    const int n_ages = terminal - age_min + 1;
    const int n_years = year_max - year_min + 1;
    ct.table.q.resize(n_ages, n_years);
    for (int i = 0; i < n_ages; ++i) {
        for (int j = 0; j < n_years; ++j) {
            ct.table.q(i, j) = (i == n_ages - 1) ? 1.0 : base + age_step * i + year_step * j;
        }
    }
    ct.base_age_max = terminal - 1;
    ct.terminal_age = terminal;
    ct.method = ClosureMethod::kLogisticBlend;
    return ct;
}

ClosedTable synthetic_closed_table(uint64_t seed = 0) {
    SyntheticWorldOptions options;
    options.seed = seed;
    const LeeCarterModel model = fit(synthetic_surface(options));
    const DriftModel drift = fit_drift(model);
    return project_closed_surface(model, drift, 2006, 2076, 120,
                                  ClosureMethod::kLogisticBlend);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

} // namespace

TEST_CASE("schedule probabilities follow the survival chain") {
    const SurvivalSchedule s = schedule_from_rates(65, 2000, {0.1, 0.2, 0.3, 1.0});
    CHECK(s.age == 65);
    CHECK(s.year == 2000);
    REQUIRE(s.death_prob.size() == 4);
    CHECK(s.death_prob[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(s.death_prob[1] == doctest::Approx(0.18).epsilon(1e-15));
    CHECK(s.death_prob[2] == doctest::Approx(0.216).epsilon(1e-15));
    CHECK(s.death_prob[3] == doctest::Approx(0.504).epsilon(1e-15));
    CHECK(s.cum_death.back() == 1.0);

    CHECK_THROWS_AS((void)schedule_from_rates(65, 2000, {}), ArgumentError);
    CHECK_THROWS_AS((void)schedule_from_rates(65, 2000, {0.1, 1.2}), DomainError);
    CHECK_THROWS_AS((void)schedule_from_rates(65, 2000, {-0.1, 1.0}), DomainError);
    CHECK_THROWS_AS((void)schedule_from_rates(65, 2000, {0.1, 0.9999}), DomainError);
}

TEST_CASE("death time inversion uses strict exceedance") {
    const SurvivalSchedule two = schedule_from_rates(70, 2000, {0.5, 1.0});
    CHECK(sample_death_time(two, 0.0) == 0);
    CHECK(sample_death_time(two, 0.49) == 0);
    CHECK(sample_death_time(two, 0.5) == 1); // ties go to survival
    CHECK(sample_death_time(two, 0.999) == 1);
    CHECK(sample_death_time(two, 1.0) == 1); // defensive clamp

    const SurvivalSchedule four = schedule_from_rates(65, 2000, {0.1, 0.2, 0.3, 1.0});
    CHECK(sample_death_time(four, 0.0999) == 0);
    CHECK(sample_death_time(four, 0.1) == 1);
    CHECK(sample_death_time(four, 0.2799) == 1);
    CHECK(sample_death_time(four, 0.4961) == 3);
}

TEST_CASE("reserve discounts payments in arrears") {
    CHECK(reserve({100.0}, 0.025) == doctest::Approx(97.5609756097561).epsilon(1e-13));
    CHECK(reserve({100.0, 100.0}, 0.0) == 200.0);
    CHECK(reserve({}, 0.05) == 0.0);
    // flows {1,1,1} at 100%: 1/2 + 1/4 + 1/8
    CHECK(reserve({1.0, 1.0, 1.0}, 1.0) == doctest::Approx(0.875).epsilon(1e-15));
    CHECK_THROWS_AS((void)reserve({1.0}, -1.0), ArgumentError);
}

TEST_CASE("expected flows halve with a constant one-half rate") {
    const ClosedTable ct = hand_table(60, 63, 2000, 2003, 0.5, 0.0, 0.0);
    Portfolio p;
    p.valuation_year = 2000;
    p.annuitants.push_back({1, 60, 1.0});
    const std::vector<double> flows = expected_flows(p, ct);
    REQUIRE(flows.size() == 3);
    CHECK(flows[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(flows[1] == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(flows[2] == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(reserve(flows, 0.0) == doctest::Approx(0.875).epsilon(1e-14));
}

TEST_CASE("expected flows match a brute-force enumeration") {
    const ClosedTable ct = hand_table(60, 65, 2000, 2005, 0.1, 0.02, 0.01);
    Portfolio p;
    p.valuation_year = 2000;
    p.annuitants.push_back({1, 60, 2.0});
    p.annuitants.push_back({2, 63, 1.0});
    p.annuitants.push_back({3, 64, 3.5});

    const std::vector<double> flows = expected_flows(p, ct);
    REQUIRE(flows.size() == 5); // the 60-year-old can collect five payments

    std::vector<double> manual(5, 0.0);
    for (const auto& a : p.annuitants) {
        double survival = 1.0;
        const int steps = 65 - a.age + 1;
        for (int t = 1; t < steps; ++t) {
            survival *= 1.0 - ct.table.at(a.age + t - 1, 2000 + t - 1);
            manual[static_cast<size_t>(t - 1)] += a.rent * survival;
        }
    }
    for (size_t t = 0; t < 5; ++t) {
        CHECK(flows[t] == doctest::Approx(manual[t]).epsilon(1e-14));
    }

    const double direct = reserve(flows, 0.03);
    double by_hand = 0.0;
    for (size_t t = 0; t < 5; ++t) {
        by_hand += manual[t] * std::pow(1.03, -static_cast<double>(t + 1));
    }
    CHECK(direct == doctest::Approx(by_hand).epsilon(1e-13));

    Portfolio empty;
    empty.valuation_year = 2000;
    CHECK_THROWS_AS((void)expected_flows(empty, ct), ArgumentError);
}

TEST_CASE("portfolio csv loader") {
    testsupport::TempDir dir("portfolio");

    SUBCASE("valid file with comments and a fractional age") {
        write_file(dir.path() / "p.csv",
                   "# book extract\nid,age,rent\n1,64,5000\n2,70.5,800.25\n\n3,59,1200\n");
        std::vector<std::string> warnings;
        const Portfolio p = load_portfolio_csv(dir.path() / "p.csv", &warnings);
        REQUIRE(p.annuitants.size() == 3);
        CHECK(p.annuitants[0].id == 1);
        CHECK(p.annuitants[0].age == 64);
        CHECK(p.annuitants[0].rent == 5000.0);
        CHECK(p.annuitants[1].age == 71); // rounded up
        CHECK(p.annuitants[1].rent == 800.25);
        REQUIRE(warnings.size() == 1);
        CHECK(warnings[0].find("70.5") != std::string::npos);
    }

    SUBCASE("column order does not matter") {
        write_file(dir.path() / "p.csv", "rent,id,age\n100,7,80\n");
        const Portfolio p = load_portfolio_csv(dir.path() / "p.csv");
        REQUIRE(p.annuitants.size() == 1);
        CHECK(p.annuitants[0].id == 7);
        CHECK(p.annuitants[0].age == 80);
        CHECK(p.annuitants[0].rent == 100.0);
    }

    SUBCASE("malformed inputs") {
        CHECK_THROWS_AS((void)load_portfolio_csv(dir.path() / "missing.csv"), IoError);

        write_file(dir.path() / "a.csv", "id,age\n1,64\n");
        CHECK_THROWS_AS((void)load_portfolio_csv(dir.path() / "a.csv"), StructuralError);

        write_file(dir.path() / "b.csv", "id,age,rent\n1,64,100\n1,65,200\n");
        CHECK_THROWS_AS((void)load_portfolio_csv(dir.path() / "b.csv"), StructuralError);

        write_file(dir.path() / "c.csv", "id,age,rent\n1,64,0\n");
        CHECK_THROWS_AS((void)load_portfolio_csv(dir.path() / "c.csv"), DomainError);

        write_file(dir.path() / "d.csv", "id,age,rent\n1,-3,100\n");
        CHECK_THROWS_AS((void)load_portfolio_csv(dir.path() / "d.csv"), DomainError);

        write_file(dir.path() / "e.csv", "id,age,rent\n1,sixty,100\n");
        CHECK_THROWS_AS((void)load_portfolio_csv(dir.path() / "e.csv"), StructuralError);

        write_file(dir.path() / "f.csv", "id,age,rent\n");
        CHECK_THROWS_AS((void)load_portfolio_csv(dir.path() / "f.csv"), StructuralError);

        write_file(dir.path() / "g.csv", "id,age,rent\n1,64\n");
        CHECK_THROWS_AS((void)load_portfolio_csv(dir.path() / "g.csv"), StructuralError);
    }
}

TEST_CASE("replication keeps the first copy and mints fresh ids") {
    Portfolio p;
    p.valuation_year = 2006;
    p.annuitants.push_back({5, 64, 100.0});
    p.annuitants.push_back({9, 70, 250.0});

    const Portfolio r = replicate(p, 3);
    REQUIRE(r.annuitants.size() == 6);
    CHECK(r.valuation_year == 2006);
    CHECK(r.annuitants[0].id == 5);
    CHECK(r.annuitants[1].id == 9);
    CHECK(r.annuitants[2].id == 10);
    CHECK(r.annuitants[3].id == 11);
    CHECK(r.annuitants[4].id == 12);
    CHECK(r.annuitants[5].id == 13);
    std::set<uint64_t> ids;
    for (const auto& a : r.annuitants) {
        ids.insert(a.id);
        CHECK((a.age == 64 || a.age == 70));
    }
    CHECK(ids.size() == 6);

    CHECK_THROWS_AS((void)replicate(p, 0), ArgumentError);
    Portfolio empty;
    CHECK_THROWS_AS((void)replicate(empty, 2), ArgumentError);
}

TEST_CASE("schedules read the cohort diagonal of a closed table") {
    const ClosedTable table = synthetic_closed_table();
    const Annuitant a{42, 64, 1000.0};
    const SurvivalSchedule s = build_schedule(a, table, 2006);
    CHECK(s.age == 64);
    CHECK(s.year == 2006);
    REQUIRE(s.q.size() == static_cast<size_t>(120 - 64 + 1));
    for (size_t step = 0; step < s.q.size(); step += 11) {
        CHECK(s.q[step] ==
              table.table.at(64 + static_cast<int>(step), 2006 + static_cast<int>(step)));
    }
    CHECK(s.q.back() == 1.0);
}

TEST_CASE("coverage violations name the annuitant") {
    const ClosedTable table = synthetic_closed_table();

    try {
        (void)build_schedule(Annuitant{7, 30, 1.0}, table, 2006);
        FAIL("expected a coverage error");
    } catch (const CoverageError& e) {
        CHECK(std::string(e.what()).find("annuitant 7") != std::string::npos);
    }

    try {
        (void)build_schedule(Annuitant{8, 64, 1.0}, table, 2000);
        FAIL("expected a coverage error");
    } catch (const CoverageError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("annuitant 8") != std::string::npos);
        CHECK(msg.find("year") != std::string::npos);
    }
}

TEST_CASE("an unclosed projection cannot feed a schedule") {
    SyntheticWorldOptions options;
    const auto model = std::make_shared<const LeeCarterModel>(fit(synthetic_surface(options)));
    const DriftModel drift = fit_drift(*model);
    const ProjectedSurface open_surface = project_deterministic(model, drift, 2006, 2041);
    // the diagonal stops at age 99 with q < 1: no certain death
    CHECK_THROWS_AS((void)build_schedule(Annuitant{1, 64, 1.0}, open_surface, 2006),
                    DomainError);
}

TEST_CASE("discount prefix sums are cumulative annuity factors") {
    const ClosedTable ct = hand_table(60, 63, 2000, 2003, 0.5, 0.0, 0.0);
    Portfolio p;
    p.valuation_year = 2000;
    p.annuitants.push_back({1, 60, 1.0});
    const PortfolioSchedules s = build_schedules(p, ct, 0.0);
    REQUIRE(s.discount_prefix.size() == 4);
    CHECK(s.discount_prefix[0] == 0.0);
    CHECK(s.discount_prefix[1] == 1.0);
    CHECK(s.discount_prefix[3] == 3.0);

    const PortfolioSchedules d = build_schedules(p, ct, 0.025);
    CHECK(d.discount_prefix[1] == doctest::Approx(1.0 / 1.025).epsilon(1e-15));
    CHECK(d.discount_prefix[2] ==
          doctest::Approx(1.0 / 1.025 + 1.0 / (1.025 * 1.025)).epsilon(1e-15));

    CHECK_THROWS_AS((void)build_schedules(p, ct, -1.5), ArgumentError);
}

TEST_CASE("lambda simulation is reproducible and keyed by annuitant id") {
    const ClosedTable table = synthetic_closed_table();
    SyntheticPortfolioOptions popt;
    popt.size = 12;
    const Portfolio p = synthetic_portfolio(popt);

    const LiabilityDistribution d1 = simulate_lambda(p, table, 0.025, 50, 7);
    const LiabilityDistribution d2 = simulate_lambda(p, table, 0.025, 50, 7);
    REQUIRE(d1.samples.size() == 50);
    CHECK(d1.samples == d2.samples);
    CHECK(d1.kind == SurfaceKind::kDeterministic);

    const LiabilityDistribution d4 = simulate_lambda(p, table, 0.025, 50, 7, 4);
    CHECK(d1.samples == d4.samples);

    // scenario n is the deaths root's n-th substream
    const PortfolioSchedules schedules = build_schedules(p, table, 0.025);
    const RngStream deaths_root = RngStream(7).substream(kStreamDeaths);
    for (int n : {0, 13, 49}) {
        const double direct =
            simulate_lambda_once(schedules, deaths_root.substream(static_cast<uint64_t>(n)));
        CHECK(direct == d1.samples[static_cast<size_t>(n)]);
    }

    // the annuitant order only changes the summation order
    Portfolio shuffled = p;
    std::rotate(shuffled.annuitants.begin(), shuffled.annuitants.begin() + 5,
                shuffled.annuitants.end());
    const LiabilityDistribution d5 = simulate_lambda(shuffled, table, 0.025, 50, 7);
    for (size_t n = 0; n < 50; ++n) {
        CHECK(d5.samples[n] == doctest::Approx(d1.samples[n]).epsilon(1e-12));
    }

    CHECK_THROWS_AS((void)simulate_lambda(p, table, 0.025, 0, 7), ArgumentError);
    const LiabilityDistribution single = simulate_lambda(p, table, 0.025, 1, 7);
    CHECK(single.summary.n == 1);
    CHECK(single.summary.mean == single.samples[0]);
    CHECK(single.summary.sd == 0.0);
}

TEST_CASE("simulated lambda is an unbiased estimate of the reserve") {
    const ClosedTable table = synthetic_closed_table();
    SyntheticPortfolioOptions popt;
    popt.size = 30;
    const Portfolio p = synthetic_portfolio(popt);
    const double i = 0.025;
    const double l0 = reserve(expected_flows(p, table), i);

    const LiabilityDistribution dist = simulate_lambda(p, table, i, 4000, 2025);
    const double se = dist.summary.sd / std::sqrt(4000.0);
    CHECK(std::abs(dist.summary.mean - l0) < 4.0 * se);
}

TEST_CASE("inversion and per-year bernoulli walks draw the same law") {
    const SurvivalSchedule s = schedule_from_rates(65, 2000, {0.1, 0.2, 0.3, 1.0});
    const std::vector<double> probs{0.1, 0.18, 0.216, 0.504};
    const int n = 50000;

    std::vector<long long> inv_counts(4, 0);
    std::vector<long long> walk_counts(4, 0);
    RngStream root(4242);
    for (int k = 0; k < n; ++k) {
        const RngStream stream = root.substream(static_cast<uint64_t>(k));
        ++inv_counts[static_cast<size_t>(sample_death_time(s, stream.substream(1).uniform()))];
        RngStream walk = stream.substream(2);
        ++walk_counts[static_cast<size_t>(testsupport::sample_death_time_bernoulli(s, walk))];
    }
    // chi-square, 3 df; 16.266 is the 0.1% critical value
    CHECK(testsupport::chi2_statistic(inv_counts, probs) < 16.266);
    CHECK(testsupport::chi2_statistic(walk_counts, probs) < 16.266);
}

TEST_CASE("stochastic simulation collapses to the fixed-table run at sigma zero") {
    SyntheticWorldOptions wopt;
    const LeeCarterModel model = fit(synthetic_surface(wopt));
    const DriftModel drift = fit_drift(model);
    SyntheticPortfolioOptions popt;
    popt.size = 20;
    const Portfolio p = synthetic_portfolio(popt);

    int age_min = p.annuitants.front().age;
    for (const auto& a : p.annuitants) age_min = std::min(age_min, a.age);

    StochasticSimOptions opt;
    opt.n_sims = 400;
    opt.sigma_scale = 0.0;
    opt.seed = 11;
    const LiabilityDistribution collapsed =
        simulate_lambda_stochastic(p, model, drift, 0.025, opt);
    CHECK(collapsed.kind == SurfaceKind::kDeterministic);

    const ClosedTable det = project_closed_surface(model, drift, 2006, 2006 + 120 - age_min,
                                                   120, ClosureMethod::kLogisticBlend);
    const LiabilityDistribution fixed = simulate_lambda(p, det, 0.025, 400, 11);
    CHECK(collapsed.samples == fixed.samples);
}

TEST_CASE("raw surfaces are deadlier than corrected ones draw by draw") {
    SyntheticWorldOptions wopt;
    const LeeCarterModel model = fit(synthetic_surface(wopt));
    const DriftModel drift = fit_drift(model);
    SyntheticPortfolioOptions popt;
    popt.size = 15;
    const Portfolio p = synthetic_portfolio(popt);

    StochasticSimOptions opt;
    opt.n_sims = 600;
    opt.seed = 3;
    const LiabilityDistribution corrected =
        simulate_lambda_stochastic(p, model, drift, 0.025, opt);
    CHECK(corrected.kind == SurfaceKind::kStochasticCorrected);

    StochasticSimOptions raw_opt = opt;
    raw_opt.raw_bias = true;
    const LiabilityDistribution raw = simulate_lambda_stochastic(p, model, drift, 0.025, raw_opt);
    CHECK(raw.kind == SurfaceKind::kStochasticRaw);

    // same k path and same death uniforms per scenario: raw hazards dominate,
    // so every realization pays at most as much
    for (size_t n = 0; n < raw.samples.size(); ++n) {
        CHECK(raw.samples[n] <= corrected.samples[n]);
    }
    CHECK(raw.summary.mean < corrected.summary.mean);
}

TEST_CASE("stochastic simulation is deterministic across thread counts") {
    SyntheticWorldOptions wopt;
    const LeeCarterModel model = fit(synthetic_surface(wopt));
    const DriftModel drift = fit_drift(model);
    SyntheticPortfolioOptions popt;
    popt.size = 10;
    const Portfolio p = synthetic_portfolio(popt);

    StochasticSimOptions opt;
    opt.n_sims = 200;
    opt.seed = 77;
    opt.threads = 1;
    const LiabilityDistribution one = simulate_lambda_stochastic(p, model, drift, 0.02, opt);
    opt.threads = 4;
    const LiabilityDistribution four = simulate_lambda_stochastic(p, model, drift, 0.02, opt);
    CHECK(one.samples == four.samples);

    StochasticSimOptions du = opt;
    du.drift_uncertainty = true;
    const LiabilityDistribution with_drift =
        simulate_lambda_stochastic(p, model, drift, 0.02, du);
    CHECK(with_drift.samples != four.samples);
}

TEST_CASE("quantiles interpolate linearly between order statistics") {
    const std::vector<double> sorted{1.0, 2.0, 3.0, 4.0};
    CHECK(quantile_sorted(sorted, 0.0) == 1.0);
    CHECK(quantile_sorted(sorted, 1.0) == 4.0);
    CHECK(quantile_sorted(sorted, 0.5) == doctest::Approx(2.5).epsilon(1e-15));
    CHECK(quantile_sorted(sorted, 0.25) == doctest::Approx(1.75).epsilon(1e-15));

    std::vector<double> ten;
    for (int i = 10; i <= 19; ++i) ten.push_back(i);
    CHECK(quantile_sorted(ten, 0.05) == doctest::Approx(10.45).epsilon(1e-15));

    CHECK(quantile_sorted({5.0}, 0.7) == 5.0);
    CHECK_THROWS_AS((void)quantile_sorted({}, 0.5), ArgumentError);
    CHECK_THROWS_AS((void)quantile_sorted(sorted, 1.5), ArgumentError);
    CHECK_THROWS_AS((void)quantile_sorted(sorted, std::nan("")), ArgumentError);
}

TEST_CASE("summary statistics on a known sample") {
    const std::vector<double> x{5.0, 1.0, 4.0, 2.0, 3.0}; // unsorted on purpose
    const SampleSummary s = summarize(x);
    CHECK(s.n == 5);
    CHECK(s.mean == doctest::Approx(3.0).epsilon(1e-15));
    CHECK(s.sd == doctest::Approx(std::sqrt(2.5)).epsilon(1e-15));
    CHECK(s.cv == doctest::Approx(std::sqrt(2.5) / 3.0).epsilon(1e-15));
    CHECK(s.q05 == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(s.q25 == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(s.q75 == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(s.q95 == doctest::Approx(4.8).epsilon(1e-15));
    CHECK(s.min == 1.0);
    CHECK(s.max == 5.0);

    const SampleSummary flat = summarize({2.0, 2.0, 2.0});
    CHECK(flat.sd == 0.0);
    CHECK(flat.cv == 0.0);

    CHECK_THROWS_AS((void)summarize({1.0}), ArgumentError);
}

TEST_CASE("histogram bins") {
    SUBCASE("explicit bin count") {
        std::vector<double> x;
        for (int i = 0; i <= 10; ++i) x.push_back(i / 10.0);
        const Histogram h = histogram(x, 2);
        REQUIRE(h.edges.size() == 3);
        REQUIRE(h.counts.size() == 2);
        CHECK(h.edges[0] == 0.0);
        CHECK(h.edges[1] == doctest::Approx(0.5).epsilon(1e-15));
        CHECK(h.edges[2] == 1.0);
        CHECK(h.counts[0] == 5);
        CHECK(h.counts[1] == 6); // the max lands in the last bin
    }

    SUBCASE("constant sample") {
        const Histogram h = histogram({3.0, 3.0, 3.0});
        REQUIRE(h.counts.size() == 1);
        CHECK(h.counts[0] == 3);
        CHECK(h.edges[1] - h.edges[0] == 1.0); // fallback span
    }

    SUBCASE("automatic width covers the sample") {
        RngStream r(88);
        std::vector<double> x;
        for (int i = 0; i < 1000; ++i) x.push_back(r.normal());
        const Histogram h = histogram(x);
        CHECK(h.counts.size() >= 10);
        CHECK(h.counts.size() <= 1000);
        CHECK(h.edges.size() == h.counts.size() + 1);
        size_t total = 0;
        for (const size_t c : h.counts) total += c;
        CHECK(total == 1000);
    }

    SUBCASE("empty input") {
        CHECK_THROWS_AS((void)histogram({}), ArgumentError);
    }
}
