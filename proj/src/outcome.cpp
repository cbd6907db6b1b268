#include "ltest/outcome.hpp"

namespace ltest {

std::string_view to_string(Method method) noexcept {
    switch (method) {
        case Method::F: return "f";
        case Method::L: return "l";
        case Method::GlassoMc: return "glasso-mc";
        case Method::McFree: return "mcfree";
        case Method::Oracle: return "oracle";
        case Method::Pc: return "pc";
        case Method::Phi: return "phi";
    }
    return "unknown";
}

std::optional<Method> parse_method(std::string_view name) noexcept {
    for (Method m : {Method::F, Method::L, Method::GlassoMc, Method::McFree, Method::Oracle, Method::Pc, Method::Phi})
        if (to_string(m) == name) return m;
    return std::nullopt;
}

}  // namespace ltest
