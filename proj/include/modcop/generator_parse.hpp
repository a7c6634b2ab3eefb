#pragma once

#include <string>
#include <string_view>

#include "modcop/generators.hpp"

namespace modcop {

/// Builds a generator from its textual form:
///
///   uniform
///   piecewise:N
///   triangular
///   beta:ALPHA,BETA
///   pair:Q                          (Q decimal or P/D)
///   pathology:N[,MODE[,SCHEME[,SEED]]]
///
/// MODE is `evenly` (default) or `diagonal`; SCHEME is `zeta`, `dyadic` or
/// `geomR` for weights R^-pi(k) under a permutation seeded by SEED
/// (default `geom1.1`, seed 42). Throws ParseError naming the bad field.
Generator parse_generator(std::string_view text);

}  // namespace modcop
