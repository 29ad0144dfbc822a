#include "longrisk/annuity_engine.hpp"

#include "longrisk/errors.hpp"
#include "longrisk/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace longrisk {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back("");
    }
    return fields;
}

std::vector<double> diagonal_rates(const MortalitySurface& surface, uint64_t id, int age,
                                   int valuation_year, int age_stop) {
    if (age < surface.age_min || age > age_stop || age_stop > surface.age_max) {
        throw CoverageError("annuitant " + std::to_string(id) + " aged " + std::to_string(age) +
                            " is outside the table's age range [" +
                            std::to_string(surface.age_min) + ", " +
                            std::to_string(surface.age_max) + "]");
    }
    const int steps = age_stop - age + 1;
    if (valuation_year < surface.year_min ||
        valuation_year + steps - 1 > surface.year_max) {
        throw CoverageError("annuitant " + std::to_string(id) + " aged " + std::to_string(age) +
                            ": diagonal years " + std::to_string(valuation_year) + ".." +
                            std::to_string(valuation_year + steps - 1) +
                            " exceed the table's year range [" +
                            std::to_string(surface.year_min) + ", " +
                            std::to_string(surface.year_max) + "]");
    }
    std::vector<double> q(static_cast<size_t>(steps));
    for (int s = 0; s < steps; ++s) {
        q[static_cast<size_t>(s)] = surface.q(age + s - surface.age_min,
                                              valuation_year + s - surface.year_min);
    }
    return q;
}

} // namespace

Portfolio load_portfolio_csv(const std::filesystem::path& path,
                             std::vector<std::string>* warnings) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open portfolio file: " + path.string());
    }

    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        header = split_csv_line(line);
        break;
    }
    if (header.empty()) {
        throw StructuralError("portfolio file has no header row: " + path.string());
    }
    auto column_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw StructuralError("missing column '" + name + "' in " + path.string());
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t id_col = column_index("id");
    const std::size_t age_col = column_index("age");
    const std::size_t rent_col = column_index("rent");

    Portfolio portfolio;
    std::set<uint64_t> seen;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto fields = split_csv_line(line);
        const std::size_t needed = std::max({id_col, age_col, rent_col}) + 1;
        if (fields.size() < needed) {
            throw StructuralError("line " + std::to_string(line_no) + ": expected at least " +
                                  std::to_string(needed) + " fields");
        }
        uint64_t id = 0;
        double age = 0.0, rent = 0.0;
        try {
            std::size_t pos = 0;
            id = std::stoull(fields[id_col], &pos);
            if (pos != fields[id_col].size()) throw std::invalid_argument("id");
            age = std::stod(fields[age_col], &pos);
            if (pos != fields[age_col].size()) throw std::invalid_argument("age");
            rent = std::stod(fields[rent_col], &pos);
            if (pos != fields[rent_col].size()) throw std::invalid_argument("rent");
        } catch (const std::exception&) {
            throw StructuralError("line " + std::to_string(line_no) + ": unparsable row '" +
                                  line + "'");
        }
        if (!(rent > 0.0)) {
            throw DomainError("line " + std::to_string(line_no) + ": rent must be positive, got " +
                              std::to_string(rent));
        }
        if (!(age >= 0.0)) {
            throw DomainError("line " + std::to_string(line_no) + ": age must be non-negative");
        }
        if (!seen.insert(id).second) {
            throw StructuralError("line " + std::to_string(line_no) + ": duplicate annuitant id " +
                                  std::to_string(id));
        }
        const int rounded = static_cast<int>(std::lround(age));
        if (warnings && std::abs(age - rounded) > 1e-9) {
            warnings->push_back("line " + std::to_string(line_no) + ": fractional age " +
                                std::to_string(age) + " rounded to " + std::to_string(rounded));
        }
        portfolio.annuitants.push_back({id, rounded, rent});
    }
    if (portfolio.annuitants.empty()) {
        throw StructuralError("portfolio file has no data rows: " + path.string());
    }
    return portfolio;
}

Portfolio replicate(const Portfolio& portfolio, int factor) {
    if (factor < 1) {
        throw ArgumentError("replication factor must be at least 1, got " +
                            std::to_string(factor));
    }
    if (portfolio.annuitants.empty()) {
        throw ArgumentError("cannot replicate an empty portfolio");
    }
    Portfolio out;
    out.valuation_year = portfolio.valuation_year;
    out.annuitants.reserve(portfolio.annuitants.size() * static_cast<size_t>(factor));
    uint64_t next_id = 0;
    for (const auto& a : portfolio.annuitants) {
        next_id = std::max(next_id, a.id + 1);
    }
    for (int copy = 0; copy < factor; ++copy) {
        for (const auto& a : portfolio.annuitants) {
            Annuitant fresh = a;
            if (copy > 0) {
                fresh.id = next_id++;
            }
            out.annuitants.push_back(fresh);
        }
    }
    return out;
}

SurvivalSchedule schedule_from_rates(int age, int year, const std::vector<double>& q) {
    if (q.empty()) {
        throw ArgumentError("schedule needs at least one rate");
    }
    SurvivalSchedule schedule;
    schedule.age = age;
    schedule.year = year;
    schedule.q = q;
    schedule.death_prob.resize(q.size());
    schedule.cum_death.resize(q.size());
    double survival = 1.0;
    for (size_t i = 0; i < q.size(); ++i) {
        if (!(q[i] >= 0.0) || q[i] > 1.0) {
            throw DomainError("schedule rate out of [0,1] at step " + std::to_string(i));
        }
        const double next = survival * (1.0 - q[i]);
        schedule.death_prob[i] = survival - next;
        schedule.cum_death[i] = 1.0 - next;
        survival = next;
    }
    if (std::abs(schedule.cum_death.back() - 1.0) > 1e-12) {
        throw DomainError("schedule does not force certain death: cumulative mass " +
                          std::to_string(schedule.cum_death.back()));
    }
    return schedule;
}

SurvivalSchedule build_schedule(const Annuitant& annuitant, const ClosedTable& table,
                                int valuation_year) {
    const auto q = diagonal_rates(table.table, annuitant.id, annuitant.age, valuation_year,
                                  table.terminal_age);
    return schedule_from_rates(annuitant.age, valuation_year, q);
}

SurvivalSchedule build_schedule(const Annuitant& annuitant, const ProjectedSurface& surface,
                                int valuation_year) {
    const MortalitySurface grid = surface.to_surface();
    const auto q =
        diagonal_rates(grid, annuitant.id, annuitant.age, valuation_year, grid.age_max);
    return schedule_from_rates(annuitant.age, valuation_year, q);
}

int sample_death_time(const SurvivalSchedule& schedule, double u) {
    const auto it =
        std::upper_bound(schedule.cum_death.begin(), schedule.cum_death.end(), u);
    if (it == schedule.cum_death.end()) {
        return static_cast<int>(schedule.cum_death.size()) - 1;
    }
    return static_cast<int>(it - schedule.cum_death.begin());
}

std::vector<double> expected_flows(const Portfolio& portfolio, const ClosedTable& table) {
    if (portfolio.annuitants.empty()) {
        throw ArgumentError("portfolio is empty");
    }
    std::vector<SurvivalSchedule> schedules;
    schedules.reserve(portfolio.annuitants.size());
    size_t horizon = 0;
    for (const auto& a : portfolio.annuitants) {
        schedules.push_back(build_schedule(a, table, portfolio.valuation_year));
        horizon = std::max(horizon, schedules.back().q.size() - 1);
    }
    // F_t = sum_j r_j P(T_j >= t); payment t is made iff T >= t.
    std::vector<double> flows(horizon, 0.0);
    for (size_t j = 0; j < schedules.size(); ++j) {
        const auto& cum = schedules[j].cum_death;
        const double rent = portfolio.annuitants[j].rent;
        for (size_t t = 1; t < cum.size(); ++t) {
            flows[t - 1] += rent * (1.0 - cum[t - 1]);
        }
    }
    return flows;
}

double reserve(const std::vector<double>& flows, double discount_rate) {
    if (!(discount_rate > -1.0)) {
        throw ArgumentError("discount rate must exceed -1");
    }
    const double v = 1.0 / (1.0 + discount_rate);
    double discount = 1.0;
    double total = 0.0;
    for (const double f : flows) {
        discount *= v;
        total += f * discount;
    }
    return total;
}

PortfolioSchedules build_schedules(const Portfolio& portfolio, const ClosedTable& table,
                                   double discount_rate) {
    if (!(discount_rate > -1.0)) {
        throw ArgumentError("discount rate must exceed -1");
    }
    if (portfolio.annuitants.empty()) {
        throw ArgumentError("portfolio is empty");
    }
    PortfolioSchedules out;
    out.discount_rate = discount_rate;
    const size_t count = portfolio.annuitants.size();
    out.schedule_index.reserve(count);
    out.ids.reserve(count);
    out.rents.reserve(count);
    std::map<int, size_t> slot_by_age;
    size_t horizon = 0;
    for (const auto& a : portfolio.annuitants) {
        const auto [it, fresh] = slot_by_age.try_emplace(a.age, out.schedules.size());
        if (fresh) {
            out.schedules.push_back(build_schedule(a, table, portfolio.valuation_year));
            horizon = std::max(horizon, out.schedules.back().q.size() - 1);
        }
        out.schedule_index.push_back(it->second);
        out.ids.push_back(a.id);
        out.rents.push_back(a.rent);
    }
    out.discount_prefix.resize(horizon + 1);
    out.discount_prefix[0] = 0.0;
    const double v = 1.0 / (1.0 + discount_rate);
    double discount = 1.0;
    for (size_t t = 1; t <= horizon; ++t) {
        discount *= v;
        out.discount_prefix[t] = out.discount_prefix[t - 1] + discount;
    }
    return out;
}

double simulate_lambda_once(const PortfolioSchedules& schedules, const RngStream& deaths_stream) {
    double lambda = 0.0;
    for (size_t j = 0; j < schedules.ids.size(); ++j) {
        const double u = deaths_stream.substream(schedules.ids[j]).uniform();
        const int t = sample_death_time(schedules.schedules[schedules.schedule_index[j]], u);
        lambda += schedules.rents[j] * schedules.discount_prefix[static_cast<size_t>(t)];
    }
    return lambda;
}

LiabilityDistribution simulate_lambda(const Portfolio& portfolio, const ClosedTable& table,
                                      double discount_rate, int n_sims, uint64_t seed,
                                      int threads) {
    if (n_sims < 1) {
        throw ArgumentError("n_sims must be at least 1");
    }
    const PortfolioSchedules schedules = build_schedules(portfolio, table, discount_rate);
    const RngStream deaths_root = RngStream(seed).substream(kStreamDeaths);

    LiabilityDistribution dist;
    dist.seed = seed;
    dist.discount_rate = discount_rate;
    dist.kind = SurfaceKind::kDeterministic;
    dist.samples.resize(static_cast<size_t>(n_sims));
    parallel_for(n_sims, threads, [&](long long begin, long long end) {
        for (long long n = begin; n < end; ++n) {
            dist.samples[static_cast<size_t>(n)] =
                simulate_lambda_once(schedules, deaths_root.substream(static_cast<uint64_t>(n)));
        }
    });
    if (dist.samples.size() >= 2) {
        dist.summary = summarize(dist.samples);
    } else {
        dist.summary.n = dist.samples.size();
        dist.summary.mean = dist.samples[0];
        dist.summary.min = dist.summary.max = dist.samples[0];
    }
    return dist;
}

LiabilityDistribution simulate_lambda_stochastic(const Portfolio& portfolio,
                                                 const LeeCarterModel& model,
                                                 const DriftModel& drift, double discount_rate,
                                                 const StochasticSimOptions& options) {
    if (options.n_sims < 1) {
        throw ArgumentError("n_sims must be at least 1");
    }
    if (options.sigma_scale < 0.0) {
        throw ArgumentError("sigma_scale must be non-negative");
    }
    const double sigma_eff = options.sigma_scale * drift.sigma_gamma;
    int age_min = portfolio.annuitants.front().age;
    for (const auto& a : portfolio.annuitants) {
        age_min = std::min(age_min, a.age);
    }
    const int year_start = portfolio.valuation_year;
    const int year_end = year_start + options.terminal_age - std::min(age_min, options.terminal_age);

    if (sigma_eff == 0.0 && !options.drift_uncertainty) {
        // No surface randomness left: identical to the deterministic pipeline,
        // and reported as such.
        const ClosedTable table = project_closed_surface(model, drift, year_start, year_end,
                                                         options.terminal_age, options.closure);
        return simulate_lambda(portfolio, table, discount_rate, options.n_sims, options.seed,
                               options.threads);
    }

    const RngStream root(options.seed);
    const RngStream surface_root = root.substream(kStreamSurface);
    const RngStream deaths_root = root.substream(kStreamDeaths);
    const RngStream drift_root = root.substream(kStreamDrift);

    LiabilityDistribution dist;
    dist.seed = options.seed;
    dist.discount_rate = discount_rate;
    dist.kind =
        options.raw_bias ? SurfaceKind::kStochasticRaw : SurfaceKind::kStochasticCorrected;
    dist.samples.resize(static_cast<size_t>(options.n_sims));
    parallel_for(options.n_sims, options.threads, [&](long long begin, long long end) {
        for (long long n = begin; n < end; ++n) {
            const auto key = static_cast<uint64_t>(n);
            DriftModel scenario_drift = drift;
            if (options.drift_uncertainty) {
                RngStream stream = drift_root.substream(key);
                const auto [a, b] = sample_drift_params(drift, stream);
                scenario_drift.a = a;
                scenario_drift.b = b;
            }
            const ClosedTable table = draw_closed_surface(
                model, scenario_drift, year_start, year_end, options.terminal_age,
                options.closure, sigma_eff, !options.raw_bias, surface_root.substream(key));
            const PortfolioSchedules schedules =
                build_schedules(portfolio, table, discount_rate);
            dist.samples[static_cast<size_t>(n)] =
                simulate_lambda_once(schedules, deaths_root.substream(key));
        }
    });
    if (dist.samples.size() >= 2) {
        dist.summary = summarize(dist.samples);
    } else {
        dist.summary.n = dist.samples.size();
        dist.summary.mean = dist.samples[0];
        dist.summary.min = dist.summary.max = dist.samples[0];
    }
    return dist;
}

double quantile_sorted(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) {
        throw ArgumentError("quantile of an empty sample");
    }
    if (!(p >= 0.0) || !(p <= 1.0)) {
        throw ArgumentError("quantile level must lie in [0,1]");
    }
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<size_t>(h);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

SampleSummary summarize(const std::vector<double>& samples) {
    if (samples.size() < 2) {
        throw ArgumentError("summary needs at least 2 samples, got " +
                            std::to_string(samples.size()));
    }
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());

    SampleSummary s;
    s.n = samples.size();
    const double n = static_cast<double>(s.n);
    double sum = 0.0;
    for (const double x : samples) {
        sum += x;
    }
    s.mean = sum / n;
    double ss = 0.0;
    for (const double x : samples) {
        const double d = x - s.mean;
        ss += d * d;
    }
    s.sd = std::sqrt(ss / (n - 1.0));
    s.cv = s.sd == 0.0 ? 0.0 : s.sd / s.mean;
    s.q05 = quantile_sorted(sorted, 0.05);
    s.q25 = quantile_sorted(sorted, 0.25);
    s.q75 = quantile_sorted(sorted, 0.75);
    s.q95 = quantile_sorted(sorted, 0.95);
    s.min = sorted.front();
    s.max = sorted.back();
    return s;
}

Histogram histogram(const std::vector<double>& samples, size_t n_bins) {
    if (samples.empty()) {
        throw ArgumentError("histogram of an empty sample");
    }
    std::vector<double> sorted = samples;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front();
    const double hi = sorted.back();

    if (n_bins == 0) {
        // Freedman-Diaconis width
        const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
        const double width =
            2.0 * iqr / std::cbrt(static_cast<double>(sorted.size()));
        if (width > 0.0 && hi > lo) {
            n_bins = static_cast<size_t>(std::ceil((hi - lo) / width));
            n_bins = std::clamp<size_t>(n_bins, 1, 100000);
        } else {
            n_bins = 1;
        }
    }

    Histogram h;
    h.counts.assign(n_bins, 0);
    h.edges.resize(n_bins + 1);
    const double span = hi > lo ? hi - lo : 1.0;
    for (size_t i = 0; i <= n_bins; ++i) {
        h.edges[i] = lo + span * static_cast<double>(i) / static_cast<double>(n_bins);
    }
    for (const double x : sorted) {
        auto bin = static_cast<size_t>((x - lo) / span * static_cast<double>(n_bins));
        bin = std::min(bin, n_bins - 1);
        ++h.counts[bin];
    }
    return h;
}

} // namespace longrisk
