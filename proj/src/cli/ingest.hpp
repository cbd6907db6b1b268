#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cli/csv.hpp"

namespace ltest::cli {

struct GroupSpec {
    std::string name;
    std::vector<std::string> columns;
};

struct DatasetSpec {
    std::string path;
    std::string response;
    std::vector<GroupSpec> groups;
    bool standardize = false;
    bool intercept = false;
    /// Covariates to use; empty means every non-response column.
    std::vector<std::string> covariates;
};

/// Design for one tested group: the group's columns first, then the other
/// covariates, then the optional intercept.
struct GroupDesign {
    std::string name;
    Eigen::MatrixXd X;
    Eigen::Index k = 0;
    std::vector<std::string> column_names;
};

struct Dataset {
    Eigen::VectorXd y;
    std::vector<GroupDesign> designs;
};

/// Parses "name=col1,col2" (name optional: "col1,col2" is named after its columns).
GroupSpec parse_group(const std::string& text);

Dataset ingest(const DatasetSpec& spec);
Dataset ingest(const DatasetSpec& spec, const CsvTable& table);

}  // namespace ltest::cli
