#include "longrisk/serialization.hpp"

#include "longrisk/errors.hpp"

#include <charconv>
#include <fstream>
#include <system_error>

namespace longrisk {

namespace {

Eigen::VectorXd vector_from_json(const nlohmann::json& j, const std::string& key) {
    if (!j.contains(key) || !j[key].is_array()) {
        throw StructuralError("model JSON: missing array '" + key + "'");
    }
    const auto& arr = j[key];
    Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
    for (size_t i = 0; i < arr.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
    }
    return v;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
    nlohmann::json arr = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        arr.push_back(v(i));
    }
    return arr;
}

std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    return out;
}

void write_config_comment(std::ofstream& out, const nlohmann::json& config) {
    if (config.is_null()) {
        return;
    }
    // one line per key, deterministic (nlohmann objects iterate sorted)
    for (const auto& [key, value] : config.items()) {
        out << "# " << key << ": " << value.dump() << "\n";
    }
}

} // namespace

std::string format_double(double value) {
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    if (result.ec != std::errc()) {
        throw NumericError("cannot format double");
    }
    return std::string(buffer, result.ptr);
}

nlohmann::json model_to_json(const LeeCarterModel& model, const DriftModel& drift) {
    nlohmann::json j;
    j["age_min"] = model.age_min;
    j["age_max"] = model.age_max;
    j["year_min"] = model.year_min;
    j["year_max"] = model.year_max;
    j["alpha"] = vector_to_json(model.alpha);
    j["beta"] = vector_to_json(model.beta);
    j["k"] = vector_to_json(model.k);
    j["explained_variance"] = model.explained_variance;
    j["residual_sd"] = model.residual_sd;
    j["degenerate"] = model.degenerate;
    j["drift"] = {
        {"a", drift.a},
        {"b", drift.b},
        {"sigma_gamma", drift.sigma_gamma},
        {"n_obs", drift.n_obs},
        {"year_min", drift.year_min},
        {"year_max", drift.year_max},
        {"cov_ab",
         {{drift.cov_ab(0, 0), drift.cov_ab(0, 1)}, {drift.cov_ab(1, 0), drift.cov_ab(1, 1)}}},
    };
    return j;
}

std::pair<LeeCarterModel, DriftModel> model_from_json(const nlohmann::json& j) {
    LeeCarterModel model;
    try {
        model.age_min = j.at("age_min").get<int>();
        model.age_max = j.at("age_max").get<int>();
        model.year_min = j.at("year_min").get<int>();
        model.year_max = j.at("year_max").get<int>();
        model.alpha = vector_from_json(j, "alpha");
        model.beta = vector_from_json(j, "beta");
        model.k = vector_from_json(j, "k");
        model.explained_variance = j.at("explained_variance").get<double>();
        model.residual_sd = j.at("residual_sd").get<double>();
        model.degenerate = j.value("degenerate", false);
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError(std::string("model JSON: ") + e.what());
    }
    if (model.alpha.size() != model.n_ages() || model.beta.size() != model.n_ages() ||
        model.k.size() != model.n_years()) {
        throw StructuralError("model JSON: parameter lengths do not match the declared ranges");
    }

    DriftModel drift;
    try {
        const auto& d = j.at("drift");
        drift.a = d.at("a").get<double>();
        drift.b = d.at("b").get<double>();
        drift.sigma_gamma = d.at("sigma_gamma").get<double>();
        drift.n_obs = d.at("n_obs").get<int>();
        drift.year_min = d.at("year_min").get<int>();
        drift.year_max = d.at("year_max").get<int>();
        const auto& cov = d.at("cov_ab");
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                drift.cov_ab(r, c) = cov.at(r).at(c).get<double>();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError(std::string("model JSON drift: ") + e.what());
    }
    if (drift.sigma_gamma < 0.0) {
        throw DomainError("model JSON: sigma_gamma must be non-negative");
    }
    return {model, drift};
}

void save_model_json(const std::filesystem::path& path, const LeeCarterModel& model,
                     const DriftModel& drift, const nlohmann::json& config) {
    nlohmann::json j = model_to_json(model, drift);
    if (!config.is_null()) {
        j["config"] = config;
    }
    save_json(path, j);
}

std::pair<LeeCarterModel, DriftModel> load_model_json(const std::filesystem::path& path) {
    return model_from_json(load_json(path));
}

nlohmann::json summary_to_json(const SampleSummary& summary) {
    return {
        {"n", summary.n}, {"mean", summary.mean}, {"sd", summary.sd},   {"cv", summary.cv},
        {"q05", summary.q05}, {"q25", summary.q25}, {"q75", summary.q75}, {"q95", summary.q95},
        {"min", summary.min}, {"max", summary.max},
    };
}

nlohmann::json decomposition_to_json(const DecompositionResult& result) {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& round : result.trace) {
        trace.push_back({
            {"round", round.round},
            {"n_outer", round.n_outer},
            {"m_inner", round.m_inner},
            {"within", round.within},
            {"between_raw", round.between_raw},
            {"between", round.between},
            {"total", round.total},
            {"omega", round.omega},
            {"grand_mean", round.grand_mean},
        });
    }
    return {
        {"within", result.within},
        {"between_raw", result.between_raw},
        {"between", result.between},
        {"total", result.total},
        {"omega", result.omega},
        {"grand_mean", result.grand_mean},
        {"n_outer", result.n_outer},
        {"m_inner", result.m_inner},
        {"rounds", result.rounds},
        {"converged", result.converged},
        {"stopping_rule",
         "abs(omega_r - omega_{r-1}) < threshold and relative total-variance change < threshold"},
        {"trace", trace},
    };
}

void save_json(const std::filesystem::path& path, const nlohmann::json& j) {
    auto out = open_output(path);
    out << j.dump(2) << "\n";
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

nlohmann::json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        throw StructuralError("invalid JSON in " + path.string() + ": " + e.what());
    }
}

void write_surface_csv(const std::filesystem::path& path, const MortalitySurface& surface,
                       const nlohmann::json& config) {
    auto out = open_output(path);
    write_config_comment(out, config);
    out << "age,year,qx\n";
    for (int age = surface.age_min; age <= surface.age_max; ++age) {
        for (int year = surface.year_min; year <= surface.year_max; ++year) {
            out << age << ',' << year << ','
                << format_double(surface.q(age - surface.age_min, year - surface.year_min))
                << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_residuals_csv(const std::filesystem::path& path, const Eigen::MatrixXd& residuals,
                         int age_min, int year_min, const nlohmann::json& config) {
    auto out = open_output(path);
    write_config_comment(out, config);
    out << "age,year,residual\n";
    for (Eigen::Index i = 0; i < residuals.rows(); ++i) {
        for (Eigen::Index j = 0; j < residuals.cols(); ++j) {
            out << (age_min + static_cast<int>(i)) << ',' << (year_min + static_cast<int>(j))
                << ',' << format_double(residuals(i, j)) << '\n';
        }
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_samples_csv(const std::filesystem::path& path, const std::vector<double>& samples,
                       const nlohmann::json& config) {
    auto out = open_output(path);
    write_config_comment(out, config);
    out << "lambda\n";
    for (const double x : samples) {
        out << format_double(x) << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_flows_csv(const std::filesystem::path& path, const std::vector<double>& flows,
                     const nlohmann::json& config) {
    auto out = open_output(path);
    write_config_comment(out, config);
    out << "t,F_t\n";
    for (size_t t = 0; t < flows.size(); ++t) {
        out << (t + 1) << ',' << format_double(flows[t]) << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram,
                         const nlohmann::json& config) {
    auto out = open_output(path);
    write_config_comment(out, config);
    out << "bin_start,bin_end,count\n";
    for (size_t i = 0; i < histogram.counts.size(); ++i) {
        out << format_double(histogram.edges[i]) << ',' << format_double(histogram.edges[i + 1])
            << ',' << histogram.counts[i] << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_omega_curve_csv(const std::filesystem::path& path,
                           const std::vector<OmegaCurvePoint>& points,
                           const nlohmann::json& config) {
    auto out = open_output(path);
    write_config_comment(out, config);
    out << "sigma_scale,size_scale,omega,within,between,total,rounds\n";
    for (const auto& p : points) {
        out << format_double(p.sigma_scale) << ',' << p.size_scale << ','
            << format_double(p.omega) << ',' << format_double(p.within) << ','
            << format_double(p.between) << ',' << format_double(p.total) << ',' << p.rounds
            << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

void write_portfolio_csv(const std::filesystem::path& path, const Portfolio& portfolio,
                         const nlohmann::json& config) {
    auto out = open_output(path);
    write_config_comment(out, config);
    out << "id,age,rent\n";
    for (const auto& a : portfolio.annuitants) {
        out << a.id << ',' << a.age << ',' << format_double(a.rent) << '\n';
    }
    if (!out) {
        throw IoError("failed writing " + path.string());
    }
}

} // namespace longrisk
