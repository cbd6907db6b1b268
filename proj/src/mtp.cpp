#include "ltest/mtp.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltest/error.hpp"

namespace ltest {

namespace {

void validate(const std::vector<double>& p, double level) {
    if (!(level > 0.0 && level < 1.0)) throw Error(ErrorCode::BadLevel, "level must lie in (0, 1)");
    for (double v : p)
        if (!(v >= 0.0 && v <= 1.0)) throw Error(ErrorCode::BadArgument, "p-values must lie in [0, 1]");
}

std::vector<std::size_t> ascending_order(const std::vector<double>& p) {
    std::vector<std::size_t> order(p.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return p[a] < p[b]; });
    return order;
}

}  // namespace

std::string_view to_string(Procedure procedure) noexcept { return procedure == Procedure::Holm ? "holm" : "bh"; }

std::optional<Procedure> parse_procedure(std::string_view name) noexcept {
    if (name == "holm") return Procedure::Holm;
    if (name == "bh") return Procedure::Bh;
    return std::nullopt;
}

AdjustedResults holm(const std::vector<double>& p, double alpha) {
    validate(p, alpha);
    AdjustedResults out{p, std::vector<bool>(p.size(), false), Procedure::Holm, alpha};
    const auto order = ascending_order(p);
    const std::size_t m = p.size();
    for (std::size_t i = 0; i < m; ++i) {
        if (!(p[order[i]] <= alpha / static_cast<double>(m - i))) break;
        out.rejected[order[i]] = true;
    }
    return out;
}

AdjustedResults bh(const std::vector<double>& p, double q) {
    validate(p, q);
    AdjustedResults out{p, std::vector<bool>(p.size(), false), Procedure::Bh, q};
    const auto order = ascending_order(p);
    const std::size_t m = p.size();
    std::size_t cutoff = 0;
    for (std::size_t i = 0; i < m; ++i)
        if (p[order[i]] <= static_cast<double>(i + 1) * q / static_cast<double>(m)) cutoff = i + 1;
    for (std::size_t i = 0; i < cutoff; ++i) out.rejected[order[i]] = true;
    return out;
}

AdjustedResults adjust(const std::vector<double>& p, Procedure procedure, double level) {
    return procedure == Procedure::Holm ? holm(p, level) : bh(p, level);
}

}  // namespace ltest
