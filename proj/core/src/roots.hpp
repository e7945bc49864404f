#pragma once

// Univariate polynomial roots: exact squarefree decomposition over Q and
// simultaneous (Aberth) iteration with inclusion disks at adaptive precision.

#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "qasdyn/bigfloat.hpp"
#include "qasdyn/complex.hpp"
#include "qasdyn/polycore.hpp"

namespace qasdyn::detail {

using CxB = Cx<BigFloat>;

/// Dense univariate polynomial over Q, ascending coefficients, no trailing zeros.
using QPoly = std::vector<Rational>;

void qp_trim(QPoly& p);
int qp_degree(const QPoly& p);  ///< -1 for zero
QPoly qp_derivative(const QPoly& p);
QPoly qp_sub(const QPoly& a, const QPoly& b);
/// Quotient and remainder of a / b.
std::pair<QPoly, QPoly> qp_divmod(const QPoly& a, const QPoly& b);
/// Monic gcd.
QPoly qp_gcd(QPoly a, QPoly b);

/// Yun's algorithm: p = lc * prod factors[i].first ^ factors[i].second, each factor
/// monic, squarefree and pairwise coprime.
std::vector<std::pair<QPoly, unsigned>> squarefree_decomposition(const QPoly& p);

struct RootSet {
  std::vector<CxB> roots;
  std::vector<BigFloat> radii;  ///< each true root lies in some disk; disjoint disks hold one each
  long precision = 0;
};

/// Aberth-Ehrlich iteration at `prec` bits; `start` seeds the iteration when given.
RootSet aberth(std::span<const CxB> coeffs, long prec, const std::vector<CxB>* start = nullptr);

/// Doubles precision from `start_prec` until the inclusion disks are pairwise
/// disjoint with radii below 2^-target_bits. Throws PrecisionExhausted past `max_prec`.
RootSet certified_roots(const std::function<std::vector<CxB>(long)>& coeffs_at, long start_prec, long target_bits,
                        long max_prec);

std::vector<CxB> to_complex(const QPoly& p, long prec);

}  // namespace qasdyn::detail
