#pragma once

#include "longrisk/annuity_engine.hpp"
#include "longrisk/leecarter.hpp"
#include "longrisk/mortality_data.hpp"

#include <cstdint>

namespace longrisk {

/// Parameters of a synthetic Lee-Carter world. The defaults describe a
/// female-like population (ages 50-99, years 1950-2005) whose fitted drift
/// has a slope near -2 per year and a residual sd near 4.2, and whose scale
/// puts a ~370-life annuity portfolio's reserve in the tens of millions.
struct SyntheticWorldOptions {
    int age_min = 50;
    int age_max = 99;
    int year_min = 1950;
    int year_max = 2005;
    double alpha_base = -6.2;   // log-hazard at the youngest age
    double alpha_slope = 0.095; // per year of age
    double k_slope = -2.0;      // per calendar year
    double k_noise_sd = 4.5;    // white noise around the k trend
    double cell_noise_sd = 0.0; // log-hazard noise per cell
    uint64_t seed = 0;
};

/// Constraint-satisfying (alpha, beta, k): beta positive decreasing with
/// sum(beta) = 1, k centered with sum(k) = 0.
LeeCarterParams synthetic_params(const SyntheticWorldOptions& options = {});

/// Exact surface q = 1 - exp(-exp(alpha_x + beta_x k_t)) on the params grid.
MortalitySurface surface_from_params(const LeeCarterParams& params, int age_min, int year_min);

/// Surface from synthetic params, plus optional cell-level log-hazard noise.
MortalitySurface synthetic_surface(const SyntheticWorldOptions& options = {});

struct SyntheticPortfolioOptions {
    int size = 374;
    double mean_age = 64.0;
    double age_sd = 6.0;
    int age_floor = 50;
    int age_cap = 90;
    double mean_rent = 5500.0;
    double rent_log_sd = 0.6;
    int valuation_year = 2006;
    uint64_t seed = 0;
};

/// Annuitant ids run 1..size; ages are clamped to [age_floor, age_cap];
/// rents are lognormal with the requested mean.
Portfolio synthetic_portfolio(const SyntheticPortfolioOptions& options = {});

} // namespace longrisk
