#include "layerlq/kron.hpp"

#include <string>
#include <vector>

#include "layerlq/error.hpp"

namespace layerlq {

Matrix kron(const Matrix& a, const Matrix& b) {
  const Index br = b.rows();
  const Index bc = b.cols();
  Matrix out(a.rows() * br, a.cols() * bc);
  for (Index j = 0; j < a.cols(); ++j) {
    for (Index i = 0; i < a.rows(); ++i) {
      out.block(i * br, j * bc, br, bc).noalias() = a(i, j) * b;
    }
  }
  return out;
}

Matrix kron_sum(const Matrix& a, const Matrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols()) {
    throw DimensionError("kron_sum needs square factors, got " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " and " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
  }
  const Index n = a.rows();
  const Index m = b.rows();
  Matrix out = kron(a, Matrix::Identity(m, m));
  for (Index k = 0; k < n; ++k) out.block(k * m, k * m, m, m) += b;
  return out;
}

Matrix kron_many(std::span<const Matrix> factors) {
  if (factors.empty()) throw DimensionError("kron_many of an empty list");
  Matrix acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = kron(acc, factors[i]);
  return acc;
}

Matrix kron_sum_many(std::span<const Matrix> factors) {
  if (factors.empty()) throw DimensionError("kron_sum_many of an empty list");
  if (factors.front().rows() != factors.front().cols()) {
    throw DimensionError("kron_sum_many needs square factors");
  }
  Matrix acc = factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = kron_sum(acc, factors[i]);
  return acc;
}

Matrix slot_product(std::span<const Matrix> factors, std::size_t slot, const Matrix& replacement) {
  if (slot >= factors.size()) {
    throw DimensionError("slot " + std::to_string(slot) + " out of range for " +
                         std::to_string(factors.size()) + " factors");
  }
  Matrix acc = slot == 0 ? replacement : factors.front();
  for (std::size_t i = 1; i < factors.size(); ++i) {
    acc = kron(acc, i == slot ? replacement : factors[i]);
  }
  return acc;
}

std::vector<Matrix> identities(std::span<const Index> dims) {
  std::vector<Matrix> out;
  out.reserve(dims.size());
  for (Index n : dims) out.push_back(Matrix::Identity(n, n));
  return out;
}

}  // namespace layerlq
