#pragma once

#include <gmpxx.h>

#include <cmath>
#include <utility>

#include "qasdyn/bigfloat.hpp"

namespace qasdyn {

/// Scalar construction helpers so numeric kernels can be written once for
/// double and for BigFloat. `prec` is ignored for double.
template <class Real>
struct RealOps;

template <>
struct RealOps<double> {
  static double from(double v, long) { return v; }
  static double from(const mpq_class& v, long) { return v.get_d(); }
  static double from(const mpz_class& v, long) { return v.get_d(); }
  static double to_double(double v) { return v; }
  static long precision(double) { return 53; }
};

template <>
struct RealOps<BigFloat> {
  static BigFloat from(double v, long prec) { return BigFloat(v, prec); }
  static BigFloat from(const mpq_class& v, long prec) { return BigFloat(v, prec); }
  static BigFloat from(const mpz_class& v, long prec) { return BigFloat(v, prec); }
  static double to_double(const BigFloat& v) { return v.to_double(); }
  static long precision(const BigFloat& v) { return v.precision(); }
};

/// Minimal complex number over an arbitrary real type. std::complex is only
/// specified for the built-in floating types, so multiprecision kernels use this.
template <class Real>
struct Cx {
  Real re;
  Real im;

  Cx(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

  static Cx real(Real r) {
    Real zero = r;
    zero = zero - r;
    return Cx(std::move(r), std::move(zero));
  }

  Cx& operator+=(const Cx& o) {
    re += o.re;
    im += o.im;
    return *this;
  }
  Cx& operator-=(const Cx& o) {
    re -= o.re;
    im -= o.im;
    return *this;
  }
  Cx& operator*=(const Cx& o) {
    Real r = re * o.re - im * o.im;
    im = re * o.im + im * o.re;
    re = std::move(r);
    return *this;
  }

  friend Cx operator+(Cx a, const Cx& b) { return a += b; }
  friend Cx operator-(Cx a, const Cx& b) { return a -= b; }
  friend Cx operator*(Cx a, const Cx& b) { return a *= b; }
  friend Cx operator-(const Cx& a) { return Cx(-a.re, -a.im); }
  friend Cx operator*(const Real& s, const Cx& a) { return Cx(s * a.re, s * a.im); }

  friend Cx operator/(const Cx& a, const Cx& b) {
    Real den = b.re * b.re + b.im * b.im;
    return Cx((a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den);
  }

  /// |z|^2
  Real norm() const { return re * re + im * im; }
  Real modulus() const {
    using std::sqrt;
    return sqrt(norm());
  }
  Cx conj() const { return Cx(re, -im); }
};

template <class Real>
Cx<Real> make_cx(double re, double im, long prec) {
  return Cx<Real>(RealOps<Real>::from(re, prec), RealOps<Real>::from(im, prec));
}

}  // namespace qasdyn
