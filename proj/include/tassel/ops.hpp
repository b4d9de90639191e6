#pragma once

#include <span>
#include <vector>

#include "tassel/autograd.hpp"
#include "tassel/rng.hpp"

namespace tassel {

enum class Mode { train, infer };
enum class Padding { same, valid };

/// Affine batch normalization over the last axis, with running statistics
/// for inference. `momentum` weights the old running value:
/// running = momentum * running + (1 - momentum) * batch.
template <typename Real>
struct BatchNorm {
    Var<Real> gamma;
    Var<Real> beta;
    Tensor<Real> running_mean;
    Tensor<Real> running_var;
    double eps = 1e-5;
    double momentum = 0.9;

    static BatchNorm create(std::int64_t features, double eps = 1e-5, double momentum = 0.9) {
        BatchNorm bn;
        bn.gamma = parameter(Tensor<Real>::full({features}, Real(1)));
        bn.beta = parameter(Tensor<Real>::zeros({features}));
        bn.running_mean = Tensor<Real>::zeros({features});
        bn.running_var = Tensor<Real>::full({features}, Real(1));
        bn.eps = eps;
        bn.momentum = momentum;
        return bn;
    }

    std::int64_t features() const { return gamma.value().numel(); }
};

/// Output length of a 1D convolution.
std::int64_t conv_output_length(std::int64_t length, std::int64_t kernel, std::int64_t stride, Padding padding);

namespace ops {

template <typename Real> Var<Real> matmul(const Var<Real>& a, const Var<Real>& b);
/// x[N x in] * W[in x out] + b[out]
template <typename Real> Var<Real> dense(const Var<Real>& x, const Var<Real>& w, const Var<Real>& b);
template <typename Real> Var<Real> add(const Var<Real>& a, const Var<Real>& b);
template <typename Real> Var<Real> scale(const Var<Real>& a, Real s);
template <typename Real> Var<Real> sum(const Var<Real>& a);
template <typename Real> Var<Real> mean(const Var<Real>& a);
template <typename Real> Var<Real> relu(const Var<Real>& a);
template <typename Real> Var<Real> tanh(const Var<Real>& a);
template <typename Real> Var<Real> reshape(const Var<Real>& a, Shape shape);

/// Row-wise softmax of a [N x C] matrix.
template <typename Real> Var<Real> softmax_rows(const Var<Real>& a);

/// Temporal cross-correlation. x is [N x T x Cin] (or [T x Cin]), kernels
/// are [k x Cin x Cout]. Same padding pads symmetrically with zeros, the
/// odd extra element going to the right. No activation is applied.
template <typename Real>
Var<Real> conv1d(const Var<Real>& x, const Var<Real>& kernels, const Var<Real>& bias, std::int64_t stride,
                 Padding padding);

template <typename Real> Var<Real> batchnorm(const Var<Real>& x, BatchNorm<Real>& state, Mode mode);
/// Inference-mode batch normalization; never touches the running statistics.
template <typename Real> Var<Real> batchnorm(const Var<Real>& x, const BatchNorm<Real>& state);

/// Inverted dropout: kept units are scaled by 1/(1-rate) during training.
/// Returns `x` itself in inference mode or when rate is 0.
template <typename Real> Var<Real> dropout(const Var<Real>& x, double rate, Mode mode, Rng& rng);

/// Mean over the temporal axis: [N x T x C] -> [N x C].
template <typename Real> Var<Real> global_avg_pool(const Var<Real>& x);

/// Concatenation along the last (channel) axis.
template <typename Real> Var<Real> concat_channels(const Var<Real>& a, const Var<Real>& b);

/// Mean categorical cross-entropy of softmax(logits) against integer labels,
/// via log-sum-exp.
template <typename Real> Var<Real> cross_entropy(const Var<Real>& logits, std::span<const int> labels);

/// out[b] = sum_l alpha[b, l] * h[b * L + l] for alpha [B x L], h [(B*L) x d].
template <typename Real> Var<Real> attention_pool(const Var<Real>& alpha, const Var<Real>& h);

}  // namespace ops

/// Inference-only helper: row-wise softmax of plain values, in double.
std::vector<double> softmax(std::span<const double> logits);

}  // namespace tassel
