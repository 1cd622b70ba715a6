#pragma once

namespace qmarg {

/// Entry point of the qmarg command line tool. Exit codes: 0 on success,
/// 1 on argument or I/O errors, 2 when a certification ends INCONCLUSIVE.
int run_cli(int argc, const char* const* argv);

}  // namespace qmarg
