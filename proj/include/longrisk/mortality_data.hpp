#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>

namespace longrisk {

/// Dense rectangular grid of annual death probabilities q(age, year).
///
/// Rows index ages, columns index calendar years. Every cell of a validated
/// surface lies strictly inside (0, 1); closure may append ages where q
/// reaches 1 (see ClosedTable).
struct MortalitySurface {
    int age_min = 0;
    int age_max = 0;
    int year_min = 0;
    int year_max = 0;
    Eigen::MatrixXd q; // (n_ages x n_years)

    int n_ages() const { return age_max - age_min + 1; }
    int n_years() const { return year_max - year_min + 1; }

    bool contains(int age, int year) const {
        return age >= age_min && age <= age_max && year >= year_min && year <= year_max;
    }

    /// Bounds-checked cell access; throws ArgumentError outside the grid.
    double at(int age, int year) const;
};

/// Check shape and cell-domain invariants; throws on violation.
void validate_surface(const MortalitySurface& surface);

enum class ClosureMethod {
    kLogisticBlend, // logit-linear extrapolation blended to q = 1 at the terminal age
};

std::string to_string(ClosureMethod method);
ClosureMethod closure_method_from_string(const std::string& name);

/// Mortality surface extended to a terminal age where death is certain.
///
/// `table` holds the full grid (ages age_min..terminal_age); rates above
/// base_age_max come from the closure and are non-decreasing in age, with
/// q(terminal_age, .) == 1 exactly.
struct ClosedTable {
    MortalitySurface table;
    int base_age_max = 0;
    int terminal_age = 0;
    ClosureMethod method = ClosureMethod::kLogisticBlend;

    double at(int age, int year) const { return table.at(age, year); }
};

/// Column names of a mortality CSV header.
struct MortalityCsvFormat {
    std::string age_column = "age";
    std::string year_column = "year";
    std::string q_column = "qx";
};

/// Load and validate a dense (age, year, q) table. Lines starting with '#'
/// are skipped. Throws StructuralError (missing/duplicate cells, parse
/// failures), DomainError (q outside (0,1)), IoError (unreadable file).
MortalitySurface load_mortality_csv(const std::filesystem::path& path,
                                    const MortalityCsvFormat& format = {});

/// Hazard rate under a constant hazard on each Lexis square: mu = -ln(1 - q).
double q_to_mu(double q);

/// Annual death probability from a hazard rate: q = 1 - exp(-mu).
double mu_to_q(double mu);

/// Extend `surface` to `terminal_age` with the selected closure.
ClosedTable close_table(const MortalitySurface& surface, int terminal_age,
                        ClosureMethod method = ClosureMethod::kLogisticBlend);

/// Restrict a surface to [age_min, age_max] (inclusive). Throws ArgumentError
/// if the requested range is not contained in the surface.
MortalitySurface restrict_ages(const MortalitySurface& surface, int age_min, int age_max);

} // namespace longrisk
