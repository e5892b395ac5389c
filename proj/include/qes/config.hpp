#pragma once
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qes/errors.hpp"
#include "qes/models.hpp"
#include "qes/numeric.hpp"

namespace qes::cli {

//! One job description, read from a sectioned key = value file.
struct JobConfig {
    models::Family family = models::Family::InverseQuartic;
    models::CaseTag case_tag = models::CaseTag::Plain;
    std::map<char, double> coefficients; // keys restricted to the family schema
    double M = 1.0;
    int m = 0;

    std::vector<int> levels;
    std::optional<char> free_coefficient;
    std::optional<std::pair<double, double>> window;
    int samples = 80;
    std::string out_dir = ".";
    std::vector<std::string> verify_checks; // residual, fd, norm, degeneration

    numeric::RadialGrid grid = numeric::RadialGrid::defaults();

    std::vector<double> degeneration_scales;
    std::vector<int> degeneration_levels;

    models::PotentialModel model() const;
};

JobConfig parse_config(const std::string& path);

//! Command-line overrides shared by the subcommands.
struct CliOptions {
    std::optional<std::string> out_dir;
    int jobs = 1;
    std::optional<numeric::RadialGrid> grid;
    bool plot_data = false;
};

} // namespace qes::cli
