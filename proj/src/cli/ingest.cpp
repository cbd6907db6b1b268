#include "cli/ingest.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "ltest/error.hpp"
#include "ltest/simlab.hpp"

namespace ltest::cli {

GroupSpec parse_group(const std::string& text) {
    GroupSpec g;
    std::string cols = text;
    const auto eq = text.find('=');
    if (eq != std::string::npos) {
        g.name = text.substr(0, eq);
        cols = text.substr(eq + 1);
    }
    std::size_t start = 0;
    while (start <= cols.size()) {
        const auto comma = cols.find(',', start);
        const std::string c = cols.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        if (c.empty()) throw Error(ErrorCode::ParseError, "empty column name in group '" + text + "'");
        g.columns.push_back(c);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    if (g.name.empty()) {
        for (std::size_t i = 0; i < g.columns.size(); ++i) g.name += (i ? "," : "") + g.columns[i];
    }
    return g;
}

Dataset ingest(const DatasetSpec& spec) { return ingest(spec, read_csv(spec.path)); }

Dataset ingest(const DatasetSpec& spec, const CsvTable& table) {
    std::map<std::string, std::size_t> index;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (!index.emplace(table.header[j], j).second)
            throw Error(ErrorCode::ColumnConflict, "duplicate header column '" + table.header[j] + "'");
    }
    auto locate = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end()) throw Error(ErrorCode::MissingColumn, "no column named '" + name + "'");
        return it->second;
    };
    const std::size_t response_col = locate(spec.response);

    std::vector<std::string> covariates = spec.covariates;
    if (covariates.empty()) {
        for (const auto& h : table.header)
            if (h != spec.response) covariates.push_back(h);
    }
    std::set<std::string> seen;
    for (const auto& c : covariates) {
        locate(c);
        if (c == spec.response) throw Error(ErrorCode::ColumnConflict, "response '" + c + "' listed as a covariate");
        if (!seen.insert(c).second) throw Error(ErrorCode::ColumnConflict, "covariate '" + c + "' listed twice");
    }

    const Eigen::Index n = static_cast<Eigen::Index>(table.rows.size());
    auto column = [&](std::size_t j) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i)
            v[i] = parse_number(table.rows[static_cast<std::size_t>(i)][j],
                                "row " + std::to_string(i + 1) + ", column '" + table.header[j] + "'");
        return v;
    };

    Dataset data;
    data.y = column(response_col);
    std::map<std::string, Eigen::VectorXd> values;
    for (const auto& c : covariates) values.emplace(c, column(locate(c)));
    if (spec.standardize) {
        for (auto& [name, v] : values) {
            Eigen::MatrixXd m = v;
            sim::standardize_columns(m, sim::ColumnNorm::Unit);
            v = m.col(0);
        }
    }

    for (const GroupSpec& g : spec.groups) {
        if (g.columns.empty()) throw Error(ErrorCode::ColumnConflict, "group '" + g.name + "' is empty");
        std::set<std::string> in_group;
        for (const auto& c : g.columns) {
            if (c == spec.response)
                throw Error(ErrorCode::ColumnConflict, "group '" + g.name + "' contains the response '" + c + "'");
            locate(c);
            if (!values.count(c))
                throw Error(ErrorCode::MissingColumn, "group '" + g.name + "' column '" + c + "' is not a covariate");
            if (!in_group.insert(c).second)
                throw Error(ErrorCode::ColumnConflict, "group '" + g.name + "' lists '" + c + "' twice");
        }
        GroupDesign design;
        design.name = g.name;
        design.k = static_cast<Eigen::Index>(g.columns.size());
        design.column_names = g.columns;
        for (const auto& c : covariates)
            if (!in_group.count(c)) design.column_names.push_back(c);
        if (spec.intercept) design.column_names.push_back("(intercept)");
        const Eigen::Index d = static_cast<Eigen::Index>(design.column_names.size());
        if (n <= d)
            throw Error(ErrorCode::TooFewRows, "group '" + g.name + "': " + std::to_string(n) + " rows for " +
                                                   std::to_string(d) + " columns (need n > d)");
        design.X.resize(n, d);
        for (Eigen::Index j = 0; j < d; ++j) {
            const auto& name = design.column_names[static_cast<std::size_t>(j)];
            if (spec.intercept && j == d - 1)
                design.X.col(j).setOnes();
            else
                design.X.col(j) = values.at(name);
        }
        data.designs.push_back(std::move(design));
    }
    return data;
}

}  // namespace ltest::cli
