#ifndef TDLM_OPS_HPP_
#define TDLM_OPS_HPP_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "tdlm/random.hpp"
#include "tdlm/tensor.hpp"

// Differentiable operations. Each op records a backward rule on the active
// tape when one exists and at least one input requires a gradient.
// Matrix arguments are row-major [rows x cols]; rank-1 tensors act as a
// single row.

TDLM_NAMESPACE_BEGIN

Tensor matmul(const Tensor& a, const Tensor& b);
// a [m x k] times the transpose of b [n x k].
Tensor matmul_bt(const Tensor& a, const Tensor& b);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
// Adds a length-n bias to every row of x [m x n].
Tensor add_bias(const Tensor& x, const Tensor& bias);
Tensor scale(const Tensor& x, Real factor);
Tensor one_minus(const Tensor& x);

Tensor sigmoid(const Tensor& x);
Tensor tanh(const Tensor& x);

// Row-wise softmax with max subtraction. Throws NumericError on non-finite input.
Tensor softmax(const Tensor& x);

Tensor sum(const Tensor& x);

Tensor concat_cols(std::span<const Tensor> parts);
Tensor concat_rows(std::span<const Tensor> parts);

// Rows [begin, begin + count) of x.
Tensor slice_rows(const Tensor& x, std::size_t begin, std::size_t count);

// Embedding lookup: row ids[i] of table [V x e] becomes row i of the result.
// Gradient is never scattered into row `frozen_id` (pass -1 for none).
Tensor gather_rows(const Tensor& table, std::span<const TokenId> ids, TokenId frozen_id = -1);

// x holds `sequences` consecutive blocks of `length` rows. Produces, per
// block, every window of `width` consecutive rows flattened into one row.
Tensor unfold_windows(const Tensor& x, std::size_t sequences, std::size_t length, std::size_t width);

// Max-over-time pooling per block of `length` rows, column-wise. Ties go to
// the lowest row index; the gradient reaches only the selected row.
Tensor max_pool_time(const Tensor& x, std::size_t sequences, std::size_t length);

struct MaxOverTime {
  Tensor value;       // shape [1]
  std::size_t index;  // argmax position
};
// Single feature map c [n]; precondition n >= 1.
MaxOverTime max_over_time(const Tensor& feature_map);

// Inverted dropout. Eval mode and keep_prob == 1 return x itself.
Tensor dropout(const Tensor& x, double keep_prob, bool training, Rng& rng);

// Sum of -log softmax(logits[i])[targets[i * per_row + j]] over every (i, j)
// whose mask entry is non-zero. logits is [n x V]; targets and mask hold
// n * per_row entries. An empty mask counts every target. Returns shape [1].
Tensor cross_entropy_sum(const Tensor& logits, std::span<const TokenId> targets, std::span<const std::uint8_t> mask,
                         std::size_t per_row);

// -log softmax(logits)[target] for a single logits vector.
Tensor cross_entropy_from_logits(const Tensor& logits, TokenId target);

TDLM_NAMESPACE_END

#endif  // TDLM_OPS_HPP_
