#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace nerforge {

using Real = double;
template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using Matrix = MatrixX<Real>;
using Vector = VectorX<Real>;

/// Row-wise softmax, numerically stabilized by the row max.
template <typename Derived>
MatrixX<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> out = logits;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    out.row(i).array() -= out.row(i).maxCoeff();
    out.row(i) = out.row(i).array().exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

template <typename Derived>
VectorX<typename Derived::Scalar> softmax(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  VectorX<Scalar> out = (logits.array() - logits.maxCoeff()).exp().matrix();
  return out / out.sum();
}

template <typename Derived>
typename Derived::Scalar log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  const auto m = v.maxCoeff();
  return m + std::log((v.array() - m).exp().sum());
}

template <typename Derived>
auto sigmoid(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  return (Scalar(1) / (Scalar(1) + (-x.array()).exp())).matrix();
}

/// Index of the first maximal entry.
template <typename Derived>
Eigen::Index argmax(const Eigen::MatrixBase<Derived>& v) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

/// Visits named tensors of a parameter struct. Structs expose
/// `template <class Self, class F> static void visit(Self&, F&&)` calling f(name, Matrix&).
template <typename Params>
std::vector<std::pair<std::string, Matrix*>> tensors(Params& p) {
  std::vector<std::pair<std::string, Matrix*>> out;
  Params::visit(p, [&](std::string_view name, Matrix& m) { out.emplace_back(std::string(name), &m); });
  return out;
}

template <typename Params>
std::vector<std::pair<std::string, const Matrix*>> tensors(const Params& p) {
  std::vector<std::pair<std::string, const Matrix*>> out;
  Params::visit(p, [&](std::string_view name, const Matrix& m) { out.emplace_back(std::string(name), &m); });
  return out;
}

/// Same shapes as `p`, all zeros (non-tensor fields copied).
template <typename Params>
Params zeros_like(const Params& p) {
  Params z = p;
  Params::visit(z, [](std::string_view, Matrix& m) { m.setZero(); });
  return z;
}

template <typename Params>
void fill_uniform(Params& p, std::mt19937_64& rng, Real scale) {
  std::uniform_real_distribution<Real> dist(-scale, scale);
  Params::visit(p, [&](std::string_view, Matrix& m) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) = dist(rng);
  });
}

/// acc += scale * g, tensor by tensor.
template <typename Params>
void accumulate(Params& acc, const Params& g, Real scale = 1) {
  auto a = tensors(acc);
  auto b = tensors(g);
  for (std::size_t i = 0; i < a.size(); ++i) *a[i].second += scale * *b[i].second;
}

template <typename Params>
Real squared_norm(const Params& p) {
  Real total = 0;
  Params::visit(p, [&](std::string_view, const Matrix& m) { total += m.squaredNorm(); });
  return total;
}

template <typename Params>
bool all_finite(const Params& p) {
  bool ok = true;
  Params::visit(p, [&](std::string_view, const Matrix& m) { ok = ok && m.allFinite(); });
  return ok;
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace nerforge
