#pragma once

#include "longrisk/annuity_engine.hpp"
#include "longrisk/leecarter.hpp"
#include "longrisk/mortality_data.hpp"
#include "longrisk/projection.hpp"
#include "longrisk/risk_decomposition.hpp"

#include "json.hpp"

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace longrisk {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

nlohmann::json model_to_json(const LeeCarterModel& model, const DriftModel& drift);
std::pair<LeeCarterModel, DriftModel> model_from_json(const nlohmann::json& j);

/// `config` (may be null) is echoed under a "config" key for reproducibility.
void save_model_json(const std::filesystem::path& path, const LeeCarterModel& model,
                     const DriftModel& drift, const nlohmann::json& config = nullptr);
std::pair<LeeCarterModel, DriftModel> load_model_json(const std::filesystem::path& path);

nlohmann::json summary_to_json(const SampleSummary& summary);
nlohmann::json decomposition_to_json(const DecompositionResult& result);

void save_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json load_json(const std::filesystem::path& path);

/// CSV writers. The `config` object is emitted first as '# key: value'
/// comment lines, which the CSV loaders skip.
void write_surface_csv(const std::filesystem::path& path, const MortalitySurface& surface,
                       const nlohmann::json& config = nullptr);
void write_residuals_csv(const std::filesystem::path& path, const Eigen::MatrixXd& residuals,
                         int age_min, int year_min, const nlohmann::json& config = nullptr);
void write_samples_csv(const std::filesystem::path& path, const std::vector<double>& samples,
                       const nlohmann::json& config = nullptr);
void write_flows_csv(const std::filesystem::path& path, const std::vector<double>& flows,
                     const nlohmann::json& config = nullptr);
void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram,
                         const nlohmann::json& config = nullptr);
void write_omega_curve_csv(const std::filesystem::path& path,
                           const std::vector<OmegaCurvePoint>& points,
                           const nlohmann::json& config = nullptr);
void write_portfolio_csv(const std::filesystem::path& path, const Portfolio& portfolio,
                         const nlohmann::json& config = nullptr);

} // namespace longrisk
