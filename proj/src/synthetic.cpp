#include "longrisk/synthetic.hpp"

#include "longrisk/errors.hpp"
#include "longrisk/rng.hpp"

#include <algorithm>
#include <cmath>

namespace longrisk {

namespace {
// synthetic-generator substream labels, independent of the engine's
constexpr uint64_t kSynthK = 11;
constexpr uint64_t kSynthCells = 12;
constexpr uint64_t kSynthAges = 13;
constexpr uint64_t kSynthRents = 14;
} // namespace

LeeCarterParams synthetic_params(const SyntheticWorldOptions& options) {
    const int n_ages = options.age_max - options.age_min + 1;
    const int n_years = options.year_max - options.year_min + 1;
    if (n_ages < 2 || n_years < 2) {
        throw ArgumentError("synthetic world needs at least 2 ages and 2 years");
    }

    LeeCarterParams params;
    params.alpha.resize(n_ages);
    params.beta.resize(n_ages);
    for (int i = 0; i < n_ages; ++i) {
        params.alpha(i) = options.alpha_base + options.alpha_slope * i;
        params.beta(i) = static_cast<double>(n_ages - i);
    }
    params.beta /= params.beta.sum();

    const RngStream k_stream = RngStream(options.seed).substream(kSynthK);
    const double t_mid = 0.5 * (options.year_min + options.year_max);
    params.k.resize(n_years);
    for (int j = 0; j < n_years; ++j) {
        const int year = options.year_min + j;
        double value = options.k_slope * (year - t_mid);
        if (options.k_noise_sd > 0.0) {
            value += options.k_noise_sd *
                     k_stream.substream(static_cast<uint64_t>(year)).normal();
        }
        params.k(j) = value;
    }
    params.k.array() -= params.k.mean();
    return params;
}

MortalitySurface surface_from_params(const LeeCarterParams& params, int age_min, int year_min) {
    MortalitySurface surface;
    surface.age_min = age_min;
    surface.age_max = age_min + static_cast<int>(params.alpha.size()) - 1;
    surface.year_min = year_min;
    surface.year_max = year_min + static_cast<int>(params.k.size()) - 1;
    surface.q.resize(params.alpha.size(), params.k.size());
    for (Eigen::Index i = 0; i < params.alpha.size(); ++i) {
        for (Eigen::Index j = 0; j < params.k.size(); ++j) {
            const double mu = std::exp(params.alpha(i) + params.beta(i) * params.k(j));
            surface.q(i, j) = mu_to_q(mu);
        }
    }
    return surface;
}

MortalitySurface synthetic_surface(const SyntheticWorldOptions& options) {
    const LeeCarterParams params = synthetic_params(options);
    MortalitySurface surface = surface_from_params(params, options.age_min, options.year_min);
    if (options.cell_noise_sd > 0.0) {
        RngStream cells = RngStream(options.seed).substream(kSynthCells);
        for (Eigen::Index i = 0; i < surface.q.rows(); ++i) {
            for (Eigen::Index j = 0; j < surface.q.cols(); ++j) {
                const double mu = q_to_mu(surface.q(i, j));
                const double noise =
                    options.cell_noise_sd *
                    cells.substream(static_cast<uint64_t>(i), static_cast<uint64_t>(j)).normal();
                surface.q(i, j) = mu_to_q(mu * std::exp(noise));
            }
        }
    }
    return surface;
}

Portfolio synthetic_portfolio(const SyntheticPortfolioOptions& options) {
    if (options.size < 1) {
        throw ArgumentError("portfolio size must be positive");
    }
    if (options.age_floor > options.age_cap) {
        throw ArgumentError("age_floor exceeds age_cap");
    }
    const RngStream root(options.seed);
    const RngStream ages = root.substream(kSynthAges);
    const RngStream rents = root.substream(kSynthRents);

    Portfolio portfolio;
    portfolio.valuation_year = options.valuation_year;
    portfolio.annuitants.reserve(static_cast<size_t>(options.size));
    for (int j = 0; j < options.size; ++j) {
        const auto key = static_cast<uint64_t>(j);
        const double raw_age = options.mean_age + options.age_sd * ages.substream(key).normal();
        const int age = std::clamp(static_cast<int>(std::lround(raw_age)), options.age_floor,
                                   options.age_cap);
        // lognormal with mean equal to mean_rent
        const double z = rents.substream(key).normal();
        const double rent = options.mean_rent *
                            std::exp(options.rent_log_sd * z -
                                     0.5 * options.rent_log_sd * options.rent_log_sd);
        portfolio.annuitants.push_back({static_cast<uint64_t>(j + 1), age, rent});
    }
    return portfolio;
}

} // namespace longrisk
