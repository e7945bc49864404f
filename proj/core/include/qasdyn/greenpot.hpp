#pragma once

// Green potential u = lim log|F_n| / d_n through a normalized log-height
// recursion, its functional equation, and sampling over real 2-parameter slices.

#include <complex>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "qasdyn/mapiter.hpp"
#include "qasdyn/specdeg.hpp"

namespace qasdyn {

namespace detail {
struct GreenTables;
}

/// A map together with the recurrence that drives the evaluator: algebraically
/// stable (d_n = d^n, lambda = d) or quasi-algebraically stable with a certificate.
class GreenModel {
 public:
  static GreenModel algebraically_stable(const ProjMap& f);
  /// `report` must be char_poly_roots of (cert.d, cert.h, cert.n0).
  static GreenModel quasi_stable(const ProjMap& f, const QASCertificate& cert, const SpectralReport& report);

  bool is_qas() const { return cert_.has_value(); }
  const ProjMap& map() const { return map_; }
  const std::optional<QASCertificate>& certificate() const { return cert_; }
  const RecurrenceSpec& spec() const { return spec_; }
  const BigFloat& lambda() const { return lambda_; }
  /// d_0 ... d_n, bit-identical to extend_degrees.
  std::vector<Integer> degrees(std::size_t n) const;
  std::string digest() const;

  const detail::GreenTables& tables() const { return *tables_; }

 private:
  GreenModel() = default;
  ProjMap map_;
  std::optional<QASCertificate> cert_;
  RecurrenceSpec spec_;
  BigFloat lambda_;
  std::shared_ptr<const detail::GreenTables> tables_;
};

struct GreenOptions {
  std::size_t n_iters = 40;
  /// 53 selects hardware doubles; larger values use MPFR at that precision.
  long precision = 53;
  /// NotConverged is raised when the last increment exceeds tol; 0 disables the check.
  double tol = 0.0;
};

struct GreenResult {
  double u = 0.0;
  std::vector<double> history;  ///< |gamma_n - gamma_{n-1}| for n = 1 .. n_iters
};

using CVec = std::vector<std::complex<double>>;

/// Throws ZeroVector, OrbitHitIndeterminacy, OrbitHitDivisor, NotConverged.
GreenResult green_eval(const GreenModel& m, const CVec& z, const GreenOptions& opt = {});

/// |u(F(z~)) - lambda u(z~) - ((d - lambda) / h) log|H(z~)||, z~ = z / |z|;
/// |u(F(z~)) - d u(z~)| in the algebraically stable case.
double functional_eq_residual(const GreenModel& m, const CVec& z, const GreenOptions& opt = {});

constexpr std::size_t kMaxTelescopeDepth = 12;

/// lambda^-n |u(F^n(z~)) - lambda^n u(z~) - ((d - lambda) / h) sum_{j=1}^n lambda^{j-1} log|H(F^{n-j}(z~))||
/// with F^j the j-fold composite of the lifting. Throws AmplificationOverflow for n > kMaxTelescopeDepth.
double telescope_residual(const GreenModel& m, const CVec& z, std::size_t n, const GreenOptions& opt = {});

enum class NodeStatus { OK, HitIndeterminacy, HitDivisor, NotConverged };
std::string_view node_status_name(NodeStatus s);

/// Nodes base + x e1 + y e2 for real x, y on a regular grid.
struct Slice {
  CVec base, e1, e2;
  double x_min = -1, x_max = 1, y_min = -1, y_max = 1;
};

struct GreenGrid {
  Slice slice;
  std::size_t resolution = 0;        ///< nodes per axis
  std::vector<double> values;        ///< row-major, row j is y_j; NaN unless OK
  std::vector<NodeStatus> status;
  std::size_t n_iters = 0;
  long precision = 0;
  std::string certificate;           ///< digest of the model used

  double x_at(std::size_t i) const;
  double y_at(std::size_t j) const;
  double value(std::size_t i, std::size_t j) const { return values[j * resolution + i]; }
  NodeStatus status_at(std::size_t i, std::size_t j) const { return status[j * resolution + i]; }
};

/// Worker count: `workers` if nonzero, else QASDYN_WORKERS, else hardware concurrency.
/// Output does not depend on the worker count. Throws InvalidArgument for resolution < 2
/// or directions that are dependent over R.
GreenGrid grid_sample(const GreenModel& m, const Slice& slice, std::size_t resolution, const GreenOptions& opt = {},
                      unsigned workers = 0);

struct LaplacianField {
  std::size_t resolution = 0;
  std::vector<double> values;  ///< |discrete Laplacian|, NaN where the 5-point stencil leaves the OK region
};

/// 5-point Laplacian with the grid spacings. Throws InsufficientOKRegion when
/// no node has an OK 3x3 neighbourhood.
LaplacianField laplacian_diagnostic(const GreenGrid& grid);

/// `x,y,u,status` with shortest round-trip decimals; u is empty unless OK.
void write_csv(const GreenGrid& grid, std::ostream& out);
/// Plain P2, maxval 65535, OK values mapped linearly onto [1, 65535], 0 elsewhere; first row is y_min.
void write_pgm(const GreenGrid& grid, std::ostream& out);
/// JSON with min, max, slice, depth, precision and certificate digest.
std::string grid_sidecar_json(const GreenGrid& grid);

}  // namespace qasdyn
