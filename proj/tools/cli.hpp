#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace deocc::cli {

/// Depth of the mask network trained by `train-m` unless --levels says otherwise.
inline constexpr int kDefaultMaskLevels = 3;

/// Runs one command line (args exclude the program name). Returns 0 on
/// success, 1 on runtime failure (JSON error line on `err`), 2 on usage errors.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace deocc::cli
