#pragma once

#include "longrisk/mortality_data.hpp"
#include "longrisk/projection.hpp"
#include "longrisk/rng.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace longrisk {

struct Annuitant {
    uint64_t id = 0;
    int age = 0;       // integer age at the valuation date
    double rent = 0.0; // annual rent, paid in arrears
};

struct Portfolio {
    std::vector<Annuitant> annuitants;
    int valuation_year = 0;
};

/// Reads `id,age,rent` rows. Fractional ages are rounded to the nearest
/// integer; a note per affected row is appended to `warnings` when given.
Portfolio load_portfolio_csv(const std::filesystem::path& path,
                             std::vector<std::string>* warnings = nullptr);

/// Portfolio with `factor` copies of every annuitant. The first copy keeps
/// the original ids; later copies get fresh ids above the original maximum,
/// so no two copies share a death substream.
Portfolio replicate(const Portfolio& portfolio, int factor);

/// Law of one annuitant's death time T (completed payment years): death
/// during step i has probability p_i = q_i * prod_{j<i}(1 - q_j), where q_i
/// is the diagonal rate q(age+i, valuation_year+i). The final rate is 1, so
/// the p_i sum to 1.
struct SurvivalSchedule {
    int age = 0;
    int year = 0;                    // calendar year of the first exposure step
    std::vector<double> q;           // diagonal one-year death probabilities
    std::vector<double> death_prob;  // p_i
    std::vector<double> cum_death;   // running sums of p_i; last entry 1
};

/// Builds the schedule from raw diagonal rates (the last must be 1).
SurvivalSchedule schedule_from_rates(int age, int year, const std::vector<double>& q);

SurvivalSchedule build_schedule(const Annuitant& annuitant, const ClosedTable& table,
                                int valuation_year);
SurvivalSchedule build_schedule(const Annuitant& annuitant, const ProjectedSurface& surface,
                                int valuation_year);

/// Inversion method: smallest j with cum_death[j] > u. T = j means the
/// annuitant received the payments of years 1..j and died during year j+1.
int sample_death_time(const SurvivalSchedule& schedule, double u);

/// Expected aggregate flow per payment year, F_t for t = 1..horizon
/// (index 0 holds F_1).
std::vector<double> expected_flows(const Portfolio& portfolio, const ClosedTable& table);

/// L_0 = sum_t F_t (1+i)^{-t}; flows[0] is F_1.
double reserve(const std::vector<double>& flows, double discount_rate);

/// Portfolio prepared for repeated simulation: schedules plus discount
/// prefix sums so a death time maps to a liability by table lookup.
/// Same-age annuitants share one diagonal, so `schedules` holds one entry
/// per distinct age and `schedule_index[j]` points annuitant j at it.
struct PortfolioSchedules {
    std::vector<SurvivalSchedule> schedules;
    std::vector<size_t> schedule_index;
    std::vector<uint64_t> ids;
    std::vector<double> rents;
    std::vector<double> discount_prefix; // discount_prefix[t] = sum_{s=1..t} (1+i)^{-s}
    double discount_rate = 0.0;
};

PortfolioSchedules build_schedules(const Portfolio& portfolio, const ClosedTable& table,
                                   double discount_rate);

/// One portfolio realization: every annuitant's T drawn from its own
/// substream of `deaths_stream` (keyed by id), liability in closed form.
double simulate_lambda_once(const PortfolioSchedules& schedules, const RngStream& deaths_stream);

struct SampleSummary {
    size_t n = 0;
    double mean = 0.0;
    double sd = 0.0;
    double cv = 0.0;
    double q05 = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    double q95 = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct LiabilityDistribution {
    std::vector<double> samples;
    uint64_t seed = 0;
    double discount_rate = 0.0;
    SurfaceKind kind = SurfaceKind::kDeterministic;
    SampleSummary summary;
};

/// N independent realizations on a fixed (already drawn or deterministic)
/// table. Streams: deaths root -> substream(n) -> substream(id).
LiabilityDistribution simulate_lambda(const Portfolio& portfolio, const ClosedTable& table,
                                      double discount_rate, int n_sims, uint64_t seed,
                                      int threads = 1);

struct StochasticSimOptions {
    int n_sims = 20000;
    double sigma_scale = 1.0;
    bool raw_bias = false;          // skip the lognormal mean correction
    bool drift_uncertainty = false; // redraw (a, b) per scenario
    int terminal_age = 120;
    ClosureMethod closure = ClosureMethod::kLogisticBlend;
    uint64_t seed = 0;
    int threads = 1;
};

/// N realizations where each scenario first draws its own mortality surface,
/// then the portfolio's death times on it. With an effective sigma of zero
/// this reproduces the fixed-table simulation on the deterministic projection
/// bit-for-bit (same death substreams).
LiabilityDistribution simulate_lambda_stochastic(const Portfolio& portfolio,
                                                 const LeeCarterModel& model,
                                                 const DriftModel& drift, double discount_rate,
                                                 const StochasticSimOptions& options);

/// Linear-interpolation empirical quantile on a sorted sample.
double quantile_sorted(const std::vector<double>& sorted, double p);

/// Mean, SD with (N-1), cv, and interpolated quantiles. N < 2 is an error
/// (the SD denominator needs it).
SampleSummary summarize(const std::vector<double>& samples);

struct Histogram {
    std::vector<double> edges;  // n_bins + 1
    std::vector<size_t> counts; // n_bins
};

/// Freedman-Diaconis bin width by default; n_bins == 0 picks automatically.
Histogram histogram(const std::vector<double>& samples, size_t n_bins = 0);

} // namespace longrisk
