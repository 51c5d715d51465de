#pragma once

#include <iosfwd>
#include <span>
#include <string>

namespace zsl {

/// Entry point of the `zsl` tool. Returns 0 on success, 1 on validation
/// failures (including split violations) and 2 on usage errors.
int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace zsl
