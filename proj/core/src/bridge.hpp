#pragma once

// Conversions between the public HomPoly and the internal packed ZPoly.

#include "qasdyn/polycore.hpp"
#include "zpoly.hpp"

namespace qasdyn::detail {

/// p == scale * z with z having integer coefficients.
struct ScaledZ {
  ZPoly z;
  Rational scale;
};

ScaledZ to_z(const HomPoly& p);
/// Same as to_z but with every poly sharing one denominator.
std::vector<ZPoly> to_z_common(std::span<const HomPoly> ps, Integer& denominator);
HomPoly from_z(const ZPoly& z, const Rational& scale = 1);

}  // namespace qasdyn::detail
