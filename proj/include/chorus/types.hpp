// Copyright (c) 2026 The chorus authors
// SPDX-License-Identifier: Apache-2.0

#ifndef CHORUS_TYPES_HPP
#define CHORUS_TYPES_HPP

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace chorus {

using Scalar = double;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Array = Eigen::ArrayXd;

using TokenId = std::int32_t;
using TokenIds = std::vector<TokenId>;
using Tokens = std::vector<std::string>;

}  // namespace chorus

#endif  // CHORUS_TYPES_HPP
