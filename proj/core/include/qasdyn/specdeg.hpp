#pragma once

// Degree recurrence, characteristic polynomial and dynamical degree.

#include <vector>

#include "qasdyn/bigfloat.hpp"
#include "qasdyn/complex.hpp"
#include "qasdyn/polycore.hpp"

namespace qasdyn {

/// d_n = d d_{n-1} - h d_{n-n0-1}; h = 0 is the algebraically stable case.
struct RecurrenceSpec {
  unsigned d = 2;
  unsigned h = 0;
  unsigned n0 = 1;

  void validate() const;
  friend bool operator==(const RecurrenceSpec&, const RecurrenceSpec&) = default;
};

/// d_0 ... d_N with d_n = 0 for n < 0. Throws NonPositiveDegree if a term is <= 0.
std::vector<Integer> extend_degrees(const RecurrenceSpec& spec, std::size_t n);

/// Coefficients of t^{n0+1} - d t^{n0} + h, ascending.
std::vector<Integer> char_poly(const RecurrenceSpec& spec);

struct SpectralReport {
  RecurrenceSpec spec;
  std::vector<Integer> charpoly;  ///< ascending
  BigFloat lambda;
  unsigned r = 1;
  BigFloat rho;                   ///< second-largest distinct modulus / lambda; 0 if none
  std::vector<BigFloat> q_fit;    ///< Q(n) = sum q_fit[j] n^j, degree r-1
  std::vector<Cx<BigFloat>> roots;
  std::vector<unsigned> multiplicities;  ///< per entry of `roots`
  BigFloat error_bound;           ///< every root is within this of its reported value
  long precision_bits = 0;
};

/// Throws DegenerateLambda when lambda <= 1, MultiplicityOutOfRange when the
/// dominant root has multiplicity above 2, PrecisionExhausted on failure to separate.
SpectralReport char_poly_roots(const RecurrenceSpec& spec, long precision_bits);

struct AsymptoticsReport {
  std::vector<BigFloat> residuals;  ///< |d_n lambda^-n - Q(n)| / Q(n) at index n
  BigFloat max_residual;
};

/// Residuals of d_n ~ lambda^n Q(n) over the whole sequence (length >= 10).
AsymptoticsReport check_asymptotics(const std::vector<Integer>& degrees, const SpectralReport& report);

struct GrowthBounds {
  BigFloat c1;  ///< max_n n^2 |d_{n+1} - lambda d_n| / d_n, n >= 1
  BigFloat c2;  ///< max_n sum_{j<=n} d_j / d_n
};

GrowthBounds check_growth_bounds(const std::vector<Integer>& degrees, const BigFloat& lambda);

/// max over 0 <= n <= n_max of |S_n| / lambda^n.
BigFloat check_sn_identity(const RecurrenceSpec& spec, const BigFloat& lambda, const std::vector<Integer>& degrees,
                           std::size_t n_max);

}  // namespace qasdyn
