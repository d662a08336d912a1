#ifndef CALICO_SCRIPTS_HPP
#define CALICO_SCRIPTS_HPP

#include <optional>
#include <string>
#include <vector>

#include "calico/adl.hpp"
#include "calico/runtime.hpp"

namespace calico {

template <typename T>
struct ParsedFile {
    std::optional<T> value;
    std::vector<ParseError> errors;

    bool ok() const { return value.has_value(); }
};

/// Parses one behavior script file:
///   script <component> {
///     on <in-port> [when <pred>] [emit <out-port> key=<expr> ...]...
///     source <out-port> key=<expr> ...
///   }
ParsedFile<BehaviorScript> parse_script(const std::string& text);

/// Parses one scenario file:
///   scenario <name> {
///     at <tick> stim <component>.<port> key=<value> ...
///   }
/// Stimulus ticks must be non-decreasing.
ParsedFile<Scenario> parse_scenario(const std::string& text);

}  // namespace calico

#endif  // CALICO_SCRIPTS_HPP
