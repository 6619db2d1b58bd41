#pragma once

// Dense linear algebra helpers over real or complex scalars, plus the
// deterministic random source used by generators and tests.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <type_traits>

#include <Eigen/Dense>

namespace cocycle_lab {

template <class S>
using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
template <class S>
using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;

template <class S>
inline constexpr bool is_complex_v = false;
template <class T>
inline constexpr bool is_complex_v<std::complex<T>> = true;

template <class S>
concept Scalar = std::is_same_v<S, double> || std::is_same_v<S, std::complex<double>>;

enum class Field { real, complex };

template <Scalar S>
constexpr Field field_of() {
  return is_complex_v<S> ? Field::complex : Field::real;
}

/// Coordinates of v in the underlying real space (re, im interleaved for
/// complex scalars). Preserves norms and real inner products.
template <Scalar S>
Eigen::VectorXd to_real(const Vec<S>& v) {
  if constexpr (is_complex_v<S>) {
    Eigen::VectorXd out(2 * v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      out(2 * i) = v(i).real();
      out(2 * i + 1) = v(i).imag();
    }
    return out;
  } else {
    return v;
  }
}

template <Scalar S>
Vec<S> from_real(const Eigen::VectorXd& r) {
  if constexpr (is_complex_v<S>) {
    Vec<S> out(r.size() / 2);
    for (Eigen::Index i = 0; i < out.size(); ++i) out(i) = S(r(2 * i), r(2 * i + 1));
    return out;
  } else {
    return r;
  }
}

template <class Derived>
double operator_norm(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>> svd(m);
  return svd.singularValues()(0);
}

/// mt19937_64 with hand-rolled uniform/normal draws, so generated data is
/// identical across standard library implementations.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t bits() { return eng_(); }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u = 0.0;
    while (u <= 0.0) u = uniform();
    const double v = uniform();
    const double rad = std::sqrt(-2.0 * std::log(u));
    spare_ = rad * std::sin(2.0 * std::numbers::pi * v);
    has_spare_ = true;
    return rad * std::cos(2.0 * std::numbers::pi * v);
  }

  template <Scalar S>
  S scalar() {
    if constexpr (is_complex_v<S>) {
      const double re = normal();
      return S(re, normal());
    } else {
      return normal();
    }
  }

  template <Scalar S>
  Vec<S> vector(Eigen::Index n) {
    Vec<S> v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = scalar<S>();
    return v;
  }

  template <Scalar S>
  Mat<S> gaussian(Eigen::Index rows, Eigen::Index cols) {
    Mat<S> m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
      for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = scalar<S>();
    return m;
  }

private:
  std::mt19937_64 eng_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Haar-distributed orthogonal/unitary matrix: QR of a Gaussian matrix with
/// the phases of R's diagonal folded back into Q.
template <Scalar S>
Mat<S> random_isometry(Rng& rng, Eigen::Index n) {
  if (n == 0) return Mat<S>(0, 0);
  Mat<S> a = rng.gaussian<S>(n, n);
  Eigen::HouseholderQR<Mat<S>> qr(a);
  Mat<S> q = qr.householderQ();
  const Mat<S> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < n; ++j) {
    const S d = r(j, j);
    const double mag = std::abs(d);
    if (mag > 0.0) q.col(j) *= d / mag;
  }
  return q;
}

/// Random isometry R with R^order = I: a conjugated block-diagonal of
/// rotations by multiples of 2π/order (phases for complex scalars).
template <Scalar S>
Mat<S> random_isometry_of_order(Rng& rng, Eigen::Index n, std::size_t order) {
  if (n == 0) return Mat<S>(0, 0);
  Mat<S> d = Mat<S>::Zero(n, n);
  const double unit = 2.0 * std::numbers::pi / static_cast<double>(order);
  if constexpr (is_complex_v<S>) {
    for (Eigen::Index i = 0; i < n; ++i) d(i, i) = std::polar(1.0, unit * static_cast<double>(rng.below(order)));
  } else {
    Eigen::Index i = 0;
    for (; i + 1 < n; i += 2) {
      const double ang = unit * static_cast<double>(rng.below(order));
      d(i, i) = std::cos(ang);
      d(i, i + 1) = -std::sin(ang);
      d(i + 1, i) = std::sin(ang);
      d(i + 1, i + 1) = std::cos(ang);
    }
    if (i < n) d(i, i) = (order % 2 == 0 && rng.below(2) == 1) ? -1.0 : 1.0;
  }
  const Mat<S> q = random_isometry<S>(rng, n);
  return q * d * q.adjoint();
}

}  // namespace cocycle_lab
