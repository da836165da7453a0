// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace mxemu::cli {

/// Runs the command line. Exit codes: 0 success, 1 data error, 2 I/O error,
/// 3 configuration error.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

/// Shortest decimal that parses back to exactly `v`.
std::string format_shortest(double v);

}  // namespace mxemu::cli
