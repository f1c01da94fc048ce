#pragma once

#include <span>

#include "recnet/tensor.hpp"

// Differentiable primitives. Vectors are rank-1, matrices rank-2 row-major,
// scalars have shape [1].
namespace recnet::ad {

// [m x k] * [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);
// [m x k] * [k] -> [m]
Tensor matvec(const Tensor& a, const Tensor& x);
Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double s);
// Elementwise sum of any number of same-shape tensors.
Tensor add_n(std::span<const Tensor> xs);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);

// Max-subtracted softmax over a vector.
Tensor softmax(const Tensor& x);
Tensor log_softmax(const Tensor& x);

// Scalar element of a vector.
Tensor pick(const Tensor& x, std::size_t index);
Tensor sum(const Tensor& x);

Tensor concat(std::span<const Tensor> parts);
Tensor slice(const Tensor& x, std::size_t offset, std::size_t length);
// Row `r` of a matrix as a vector (embedding lookup).
Tensor row(const Tensor& m, std::size_t r);
// Stack equal-length vectors into an [n x d] matrix.
Tensor stack_rows(std::span<const Tensor> rows);
// m[r, :] + v for every row.
Tensor add_row_broadcast(const Tensor& m, const Tensor& v);

Tensor mean_pool(std::span<const Tensor> xs);
// Squared Euclidean distance averaged over the dimension: sum_k (a_k - b_k)^2 / d.
Tensor sq_euclidean(const Tensor& a, const Tensor& b);

}  // namespace recnet::ad
