#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace ltest {

enum class Method { F, L, GlassoMc, McFree, Oracle, Pc, Phi };

std::string_view to_string(Method method) noexcept;
/// Accepts the CLI spellings: f, l, glasso-mc, mcfree, oracle, pc, phi.
std::optional<Method> parse_method(std::string_view name) noexcept;

struct OutcomeMeta {
    std::optional<double> lambda;
    std::optional<Eigen::VectorXd> b_star;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> tuning_seed;
    std::optional<std::size_t> ge_count;
    /// Monte Carlo samples whose solver hit the iteration cap; counted in ge_count.
    std::size_t nonconverged = 0;
    /// Which computational branch produced the p-value, e.g. "k1-closed-form".
    std::string branch;
};

struct TestOutcome {
    Method method = Method::F;
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<std::size_t> mc_samples;
    OutcomeMeta meta;
};

}  // namespace ltest
