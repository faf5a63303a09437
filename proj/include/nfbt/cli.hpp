// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nfbt::cli {

/// Entry point behind the `nfbt` binary. Subcommands:
///   run <scenario> [--out PATH] [--format csv|json] [--seed N] [--trials N] [--threads N]
///   optimal-u --antennas N --ranges V
///   pattern --range R --angle TH --interval U [--closed-form] [...]
///   overhead --antennas N --interval U --ranges V [--k K]
/// Returns the process exit code; usage errors print to `err` and return
/// non-zero.
int dispatch(const std::vector<std::string>& args, std::ostream& out,
             std::ostream& err);

} // namespace nfbt::cli
