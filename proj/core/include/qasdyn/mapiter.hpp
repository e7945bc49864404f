#pragma once

// Projective self-maps, iteration with common-factor extraction, and
// detection of algebraic / quasi-algebraic stability.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "qasdyn/polycore.hpp"

namespace qasdyn {

using Lifting = std::vector<HomPoly>;

/// A dominant rational self-map of P^k, stored as a primitive lifting.
struct ProjMap {
  Lifting components;
  std::vector<std::string> vars;
  /// Common factor removed by make_map (primitive; 1 when there was none).
  HomPoly removed_factor;
  /// input[i] == scale * removed_factor * components[i].
  Rational scale;

  std::size_t nvars() const { return components.size(); }
  std::size_t k() const { return components.size() - 1; }
  std::uint32_t degree() const;
};

/// Rescales a tuple so that all coefficients are integers with no common
/// divisor and the first nonzero component has a positive leading coefficient.
/// Returns c with original == c * normalized.
Rational normalize_tuple(Lifting& tuple);

Lifting identity_lifting(std::size_t nvars);

/// Symbolic Jacobian determinant by fraction-free elimination.
HomPoly jacobian_determinant(std::span<const HomPoly> comps);

/// Divides out the common factor, normalizes scalars and checks dominance.
ProjMap make_map(Lifting components, std::vector<std::string> vars = {});

struct Extraction {
  HomPoly factor;   ///< gcd of the composed components, primitive
  Lifting lifting;  ///< composed components / factor, tuple-normalized
  Rational scale;   ///< f(G) == scale * factor * lifting, componentwise
};

/// f(G) with its common factor divided out.
Extraction compose_extract(const ProjMap& f, std::span<const HomPoly> g);

struct IterationTrace {
  std::vector<Lifting> liftings;    ///< F_0 (identity) ... F_N
  std::vector<Integer> degrees;     ///< d(f^0) ... d(f^N)
  std::vector<HomPoly> extracted;   ///< E_n at index n; index 0 holds 1
  std::vector<Rational> scales;     ///< c_n with f(F_{n-1}) = c_n E_n F_n; index 0 holds 1
  std::uint32_t d = 0;

  std::size_t depth() const { return liftings.size() - 1; }
};

IterationTrace iterate_degrees(const ProjMap& f, std::size_t n);

struct QASCertificate {
  unsigned n0 = 1;
  HomPoly H;
  unsigned h = 0;
  unsigned d = 0;
  std::size_t verified_to = 0;
  std::vector<Integer> degrees;
};

enum class Stability { AS, QAS, NotQAS, Inconclusive };
std::string_view stability_name(Stability s);

struct QASVerdict {
  Stability kind = Stability::Inconclusive;
  std::optional<QASCertificate> certificate;  ///< set for QAS
  std::size_t witness = 0;                    ///< first failing n for NotQAS
  std::optional<unsigned> n0;                 ///< candidate lag for QAS / NotQAS / Inconclusive
  std::optional<HomPoly> H;                   ///< candidate divisor for QAS / NotQAS / Inconclusive
};

QASVerdict infer_qas(const IterationTrace& trace);

/// 16 hex digits of FNV-1a 64 over the printed map components and, when
/// given, the certificate's n0, d, h and H.
std::string certificate_digest(const ProjMap& f, const QASCertificate* cert);

/// Checks F_{n-1}(F) == c * H^{d(f^{n-n0-1})} * F_n for one scalar c.
bool verify_lifting_recurrence(const ProjMap& f, const QASCertificate& cert, const IterationTrace& trace,
                               std::size_t n);

struct PointClass {
  bool indeterminate = false;
  std::vector<Rational> image;  ///< first nonzero coordinate is 1
};

PointClass point_class(const ProjMap& f, std::span<const Rational> point);

/// Map file: one `vars` line, then k+1 `map` lines; `#` starts a comment.
ProjMap parse_map_file(std::string_view text);
std::string format_map_file(const ProjMap& f);

}  // namespace qasdyn
