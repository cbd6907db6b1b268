#pragma once

#include <string_view>
#include <optional>
#include <vector>

namespace ltest {

enum class Procedure { Holm, Bh };

std::string_view to_string(Procedure procedure) noexcept;
std::optional<Procedure> parse_procedure(std::string_view name) noexcept;

struct AdjustedResults {
    std::vector<double> raw;
    std::vector<bool> rejected;
    Procedure procedure = Procedure::Holm;
    double level = 0.05;
};

/// Holm step-down: with p sorted ascending (ties by index), reject while
/// p_(i) <= alpha / (m - i + 1).
AdjustedResults holm(const std::vector<double>& p, double alpha);

/// Benjamini-Hochberg step-up: reject the i* smallest, i* = max{i : p_(i) <= i q / m}.
AdjustedResults bh(const std::vector<double>& p, double q);

AdjustedResults adjust(const std::vector<double>& p, Procedure procedure, double level);

}  // namespace ltest
