#pragma once

#include <string>
#include <vector>

namespace ltest::cli {

/// Header plus rows of raw fields. Quoted fields may contain commas and
/// doubled quotes; line breaks inside quotes are not supported.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);
CsvTable parse_csv(const std::string& text);

/// Strict decimal parse (leading/trailing blanks allowed); throws NonNumeric.
double parse_number(const std::string& field, const std::string& context);

/// Shortest text that round-trips the double.
std::string format_double(double v);

/// Quotes a field when it contains a comma, quote or line break.
std::string csv_escape(const std::string& field);

}  // namespace ltest::cli
