#ifndef CALICO_ADL_HPP
#define CALICO_ADL_HPP

#include <optional>
#include <string>
#include <vector>

#include "calico/model.hpp"

namespace calico {

struct ParseError {
    int line = 1;    // 1-based
    int column = 1;  // 1-based
    std::string message;
    std::optional<std::vector<std::string>> expected;

    std::string to_string() const;
};

struct ParseResult {
    std::optional<Architecture> architecture;  // canonical and validated when set
    std::vector<ParseError> errors;

    bool ok() const { return architecture.has_value(); }
};

/// Parses ADL source text. On success the result has been validated and
/// canonicalized; semantic problems (duplicate names, dangling references)
/// are reported as positioned errors just like syntax errors.
ParseResult parse(const std::string& text);

/// Renders a well-formed architecture as canonical ADL text, such that
/// parse(serialize(a)) equals canonicalize(a). Throws std::invalid_argument
/// on ill-formed input.
std::string serialize(const Architecture& arch);

/// Formats a byte count with the largest suffix that divides it evenly
/// (decimal steps: B, kB, MB, GB).
std::string format_size(Bytes value);

}  // namespace calico

#endif  // CALICO_ADL_HPP
