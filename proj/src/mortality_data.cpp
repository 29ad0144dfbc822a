#include "longrisk/mortality_data.hpp"

#include "longrisk/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace longrisk {

namespace {

std::string cell_name(int age, int year) {
    return "(age " + std::to_string(age) + ", year " + std::to_string(year) + ")";
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) {
        // trim surrounding whitespace
        const auto begin = field.find_first_not_of(" \t\r");
        const auto end = field.find_last_not_of(" \t\r");
        fields.push_back(begin == std::string::npos ? "" : field.substr(begin, end - begin + 1));
    }
    if (!line.empty() && line.back() == ',') {
        fields.emplace_back("");
    }
    return fields;
}

double logit(double q) {
    return std::log(q / (1.0 - q));
}

double sigmoid(double z) {
    return 1.0 / (1.0 + std::exp(-z));
}

} // namespace

double MortalitySurface::at(int age, int year) const {
    if (!contains(age, year)) {
        throw ArgumentError("surface access outside grid at " + cell_name(age, year));
    }
    return q(age - age_min, year - year_min);
}

void validate_surface(const MortalitySurface& surface) {
    if (surface.age_min > surface.age_max || surface.year_min > surface.year_max) {
        throw ArgumentError("surface ranges are inverted");
    }
    if (surface.q.rows() != surface.n_ages() || surface.q.cols() != surface.n_years()) {
        throw ArgumentError("surface matrix shape does not match declared ranges");
    }
    for (int i = 0; i < surface.q.rows(); ++i) {
        for (int j = 0; j < surface.q.cols(); ++j) {
            const double v = surface.q(i, j);
            if (!(v > 0.0) || !(v < 1.0)) {
                throw DomainError("q outside (0,1) at " +
                                  cell_name(surface.age_min + i, surface.year_min + j) +
                                  ": " + std::to_string(v));
            }
        }
    }
}

std::string to_string(ClosureMethod method) {
    switch (method) {
    case ClosureMethod::kLogisticBlend:
        return "logistic_blend";
    }
    throw ArgumentError("unknown closure method");
}

ClosureMethod closure_method_from_string(const std::string& name) {
    if (name == "logistic_blend") {
        return ClosureMethod::kLogisticBlend;
    }
    throw ArgumentError("unknown closure method: " + name);
}

MortalitySurface load_mortality_csv(const std::filesystem::path& path,
                                    const MortalityCsvFormat& format) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open mortality file: " + path.string());
    }

    std::string line;
    std::size_t line_no = 0;

    // header (skipping comment lines)
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
        throw StructuralError("mortality file has no header row: " + path.string());
    }
    auto column_index = [&](const std::string& name) {
        const auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) {
            throw StructuralError("missing column '" + name + "' in " + path.string());
        }
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t age_col = column_index(format.age_column);
    const std::size_t year_col = column_index(format.year_column);
    const std::size_t q_col = column_index(format.q_column);

    std::map<std::pair<int, int>, double> cells;
    int age_min = 0, age_max = 0, year_min = 0, year_max = 0;
    bool first = true;

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') {
            continue;
        }
        const auto fields = split_csv_line(line);
        const std::size_t needed = std::max({age_col, year_col, q_col}) + 1;
        if (fields.size() < needed) {
            throw StructuralError("line " + std::to_string(line_no) + ": expected at least " +
                                  std::to_string(needed) + " fields");
        }
        int age = 0, year = 0;
        double q = 0.0;
        try {
            std::size_t pos = 0;
            age = std::stoi(fields[age_col], &pos);
            if (pos != fields[age_col].size()) throw std::invalid_argument("age");
            year = std::stoi(fields[year_col], &pos);
            if (pos != fields[year_col].size()) throw std::invalid_argument("year");
            q = std::stod(fields[q_col], &pos);
            if (pos != fields[q_col].size()) throw std::invalid_argument("q");
        } catch (const std::exception&) {
            throw StructuralError("line " + std::to_string(line_no) + ": unparsable row '" +
                                  line + "'");
        }
        if (!(q > 0.0) || !(q < 1.0)) {
            throw DomainError("q outside (0,1) at " + cell_name(age, year) + " (line " +
                              std::to_string(line_no) + ")");
        }
        if (!cells.emplace(std::make_pair(age, year), q).second) {
            throw StructuralError("duplicate cell at " + cell_name(age, year) + " (line " +
                                  std::to_string(line_no) + ")");
        }
        if (first) {
            age_min = age_max = age;
            year_min = year_max = year;
            first = false;
        } else {
            age_min = std::min(age_min, age);
            age_max = std::max(age_max, age);
            year_min = std::min(year_min, year);
            year_max = std::max(year_max, year);
        }
    }
    if (first) {
        throw StructuralError("mortality file has no data rows: " + path.string());
    }

    MortalitySurface surface;
    surface.age_min = age_min;
    surface.age_max = age_max;
    surface.year_min = year_min;
    surface.year_max = year_max;
    surface.q.resize(surface.n_ages(), surface.n_years());

    std::vector<std::string> missing;
    for (int age = age_min; age <= age_max; ++age) {
        for (int year = year_min; year <= year_max; ++year) {
            const auto it = cells.find({age, year});
            if (it == cells.end()) {
                if (missing.size() < 20) {
                    missing.push_back(cell_name(age, year));
                }
                continue;
            }
            surface.q(age - age_min, year - year_min) = it->second;
        }
    }
    if (!missing.empty()) {
        std::string msg = "grid is not rectangular; missing cells:";
        for (const auto& m : missing) {
            msg += " " + m;
        }
        const std::size_t total =
            static_cast<std::size_t>(surface.n_ages()) * static_cast<std::size_t>(surface.n_years()) -
            cells.size();
        if (total > missing.size()) {
            msg += " (and " + std::to_string(total - missing.size()) + " more)";
        }
        throw StructuralError(msg);
    }
    return surface;
}

double q_to_mu(double q) {
    if (!(q >= 0.0) || q >= 1.0) {
        throw DomainError("q_to_mu requires 0 <= q < 1, got " + std::to_string(q));
    }
    return -std::log1p(-q);
}

double mu_to_q(double mu) {
    if (!(mu >= 0.0)) {
        throw DomainError("mu_to_q requires mu >= 0, got " + std::to_string(mu));
    }
    return -std::expm1(-mu);
}

ClosedTable close_table(const MortalitySurface& surface, int terminal_age,
                        ClosureMethod method) {
    validate_surface(surface);
    if (terminal_age <= surface.age_max) {
        throw ArgumentError("terminal_age must exceed the last observed age (" +
                            std::to_string(surface.age_max) + ")");
    }
    if (method != ClosureMethod::kLogisticBlend) {
        throw ArgumentError("unsupported closure method");
    }

    const int n_extra = terminal_age - surface.age_max;
    const int n_years = surface.n_years();

    ClosedTable closed;
    closed.base_age_max = surface.age_max;
    closed.terminal_age = terminal_age;
    closed.method = method;
    closed.table.age_min = surface.age_min;
    closed.table.age_max = terminal_age;
    closed.table.year_min = surface.year_min;
    closed.table.year_max = surface.year_max;
    closed.table.q.resize(surface.n_ages() + n_extra, n_years);
    closed.table.q.topRows(surface.n_ages()) = surface.q;

    const int window = std::min(10, surface.n_ages());
    for (int j = 0; j < n_years; ++j) {
        // logit-linear trend over the last observed ages of this year
        double slope = 0.0, intercept = 0.0;
        if (window >= 2) {
            double sx = 0, sy = 0, sxx = 0, sxy = 0;
            for (int w = 0; w < window; ++w) {
                const int age = surface.age_max - window + 1 + w;
                const double x = static_cast<double>(age);
                const double y = logit(surface.q(age - surface.age_min, j));
                sx += x;
                sy += y;
                sxx += x * x;
                sxy += x * y;
            }
            const double n = static_cast<double>(window);
            const double denom = n * sxx - sx * sx;
            slope = (n * sxy - sx * sy) / denom;
            intercept = (sy - slope * sx) / n;
        } else {
            intercept = logit(surface.q(surface.n_ages() - 1, j));
        }

        double prev = surface.q(surface.n_ages() - 1, j);
        for (int step = 1; step <= n_extra; ++step) {
            const int age = surface.age_max + step;
            double value;
            if (age == terminal_age) {
                value = 1.0;
            } else {
                const double extrapolated = sigmoid(intercept + slope * age);
                const double w = static_cast<double>(step) / static_cast<double>(n_extra);
                value = (1.0 - w) * extrapolated + w;
                value = std::max(value, prev); // keep the closure monotone
            }
            closed.table.q(surface.n_ages() + step - 1, j) = value;
            prev = value;
        }
    }
    return closed;
}

MortalitySurface restrict_ages(const MortalitySurface& surface, int age_min, int age_max) {
    if (age_min < surface.age_min || age_max > surface.age_max || age_min > age_max) {
        throw ArgumentError("requested age range [" + std::to_string(age_min) + ", " +
                            std::to_string(age_max) + "] not contained in surface");
    }
    MortalitySurface out;
    out.age_min = age_min;
    out.age_max = age_max;
    out.year_min = surface.year_min;
    out.year_max = surface.year_max;
    out.q = surface.q.middleRows(age_min - surface.age_min, age_max - age_min + 1);
    return out;
}

} // namespace longrisk
