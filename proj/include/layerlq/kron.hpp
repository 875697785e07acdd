#pragma once

#include <span>
#include <vector>

#include "layerlq/types.hpp"

namespace layerlq {

/// Kronecker product. Block (i, j) of the result is a(i, j) * b.
Matrix kron(const Matrix& a, const Matrix& b);

/// a ⊗ I_m + I_n ⊗ b for square a (n×n) and b (m×m).
Matrix kron_sum(const Matrix& a, const Matrix& b);

/// Left-associated folds ((f0 ⊗ f1) ⊗ f2) ⊗ ... and the same for ⊕.
/// Both reject an empty list; kron_sum_many also rejects non-square factors.
Matrix kron_many(std::span<const Matrix> factors);
Matrix kron_sum_many(std::span<const Matrix> factors);

/// Kronecker product of `factors` with the factor at zero-based `slot` replaced by
/// `replacement`: f0 ⊗ ... ⊗ f(slot-1) ⊗ replacement ⊗ f(slot+1) ⊗ ...
Matrix slot_product(std::span<const Matrix> factors, std::size_t slot, const Matrix& replacement);

/// Identity factors I_{n0}, I_{n1}, ... for the given dimensions.
std::vector<Matrix> identities(std::span<const Index> dims);

}  // namespace layerlq
