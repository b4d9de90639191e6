#include "tassel/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>

namespace tassel {

namespace {

template <typename Real>
using Mat = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MapM = Eigen::Map<Mat<Real>>;
template <typename Real>
using CMapM = Eigen::Map<const Mat<Real>>;
template <typename Real>
using Row = Eigen::Matrix<Real, 1, Eigen::Dynamic>;

template <typename Real>
CMapM<Real> as_matrix(const Tensor<Real>& t, std::int64_t rows, std::int64_t cols) {
    return CMapM<Real>(t.ptr(), rows, cols);
}

template <typename Real>
MapM<Real> as_matrix(Tensor<Real>& t, std::int64_t rows, std::int64_t cols) {
    return MapM<Real>(t.ptr(), rows, cols);
}

template <typename Real>
void ensure_finite(const Tensor<Real>& t, const char* op) {
    if (!t.all_finite()) throw NumericError(std::string("non-finite value produced by ") + op);
}

void require(bool cond, const std::string& what) {
    if (!cond) throw ShapeError(what);
}

}  // namespace

std::int64_t conv_output_length(std::int64_t length, std::int64_t kernel, std::int64_t stride, Padding padding) {
    if (kernel < 1 || stride < 1 || length < 1) throw ShapeError("conv1d requires k >= 1, stride >= 1, T >= 1");
    if (padding == Padding::same) return (length + stride - 1) / stride;
    if (kernel > length)
        throw ShapeError("conv1d valid padding with kernel " + std::to_string(kernel) + " longer than input " +
                         std::to_string(length) + " yields an empty output");
    return (length - kernel) / stride + 1;
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out(logits.size());
    if (logits.empty()) return out;
    const double m = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) z += (out[i] = std::exp(logits[i] - m));
    for (auto& v : out) v /= z;
    return out;
}

namespace ops {

template <typename Real>
Var<Real> matmul(const Var<Real>& a, const Var<Real>& b) {
    require(a.value().rank() == 2 && b.value().rank() == 2, "matmul expects rank-2 operands");
    const auto m = a.dim(0), k = a.dim(1), n = b.dim(1);
    require(b.dim(0) == k, "matmul inner dimensions disagree: " + shape_str(a.shape()) + " x " + shape_str(b.shape()));
    Tensor<Real> out({m, n});
    as_matrix(out, m, n).noalias() = as_matrix(a.value(), m, k) * as_matrix(b.value(), k, n);
    ensure_finite(out, "matmul");
    return make_result<Real>(std::move(out), {a, b}, [m, k, n](Node<Real>& self) {
        auto g = as_matrix(static_cast<const Tensor<Real>&>(self.grad), m, n);
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        if (pa.requires_grad) as_matrix(pa.grad_ref(), m, k).noalias() += g * as_matrix(pb.value, k, n).transpose();
        if (pb.requires_grad) as_matrix(pb.grad_ref(), k, n).noalias() += as_matrix(pa.value, m, k).transpose() * g;
    });
}

template <typename Real>
Var<Real> dense(const Var<Real>& x, const Var<Real>& w, const Var<Real>& b) {
    require(x.value().rank() == 2 && w.value().rank() == 2, "dense expects x[N x in] and W[in x out]");
    const auto n = x.dim(0), in = x.dim(1), out_dim = w.dim(1);
    require(w.dim(0) == in, "dense weight rows " + std::to_string(w.dim(0)) + " != input width " + std::to_string(in));
    require(b.value().numel() == out_dim, "dense bias length mismatch");
    Tensor<Real> out({n, out_dim});
    auto y = as_matrix(out, n, out_dim);
    y.noalias() = as_matrix(x.value(), n, in) * as_matrix(w.value(), in, out_dim);
    y.rowwise() += Eigen::Map<const Row<Real>>(b.value().ptr(), out_dim);
    ensure_finite(out, "dense");
    return make_result<Real>(std::move(out), {x, w, b}, [n, in, out_dim](Node<Real>& self) {
        auto g = as_matrix(static_cast<const Tensor<Real>&>(self.grad), n, out_dim);
        auto& px = *self.parents[0];
        auto& pw = *self.parents[1];
        auto& pb = *self.parents[2];
        if (px.requires_grad) as_matrix(px.grad_ref(), n, in).noalias() += g * as_matrix(pw.value, in, out_dim).transpose();
        if (pw.requires_grad) as_matrix(pw.grad_ref(), in, out_dim).noalias() += as_matrix(px.value, n, in).transpose() * g;
        if (pb.requires_grad) {
            Eigen::Map<Row<Real>>(pb.grad_ref().ptr(), out_dim) += g.colwise().sum();
        }
    });
}

template <typename Real>
Var<Real> add(const Var<Real>& a, const Var<Real>& b) {
    require(a.shape() == b.shape(), "add shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
    Tensor<Real> out = a.value();
    auto o = out.data();
    auto bv = b.value().data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] += bv[i];
    ensure_finite(out, "add");
    return make_result<Real>(std::move(out), {a, b}, [](Node<Real>& self) {
        for (auto& p : self.parents)
            if (p->requires_grad) p->accumulate(self.grad.data());
    });
}

template <typename Real>
Var<Real> scale(const Var<Real>& a, Real s) {
    Tensor<Real> out = a.value();
    for (auto& v : out.data()) v *= s;
    ensure_finite(out, "scale");
    return make_result<Real>(std::move(out), {a}, [s](Node<Real>& self) {
        auto& p = *self.parents[0];
        auto dst = p.grad_ref().data();
        auto g = self.grad.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s * g[i];
    });
}

template <typename Real>
Var<Real> sum(const Var<Real>& a) {
    Real total = 0;
    for (Real v : a.value().data()) total += v;
    Tensor<Real> out = Tensor<Real>::scalar(total);
    ensure_finite(out, "sum");
    return make_result<Real>(std::move(out), {a}, [](Node<Real>& self) {
        auto& p = *self.parents[0];
        const Real g = self.grad[0];
        for (auto& d : p.grad_ref().data()) d += g;
    });
}

template <typename Real>
Var<Real> mean(const Var<Real>& a) {
    return scale(sum(a), Real(1) / static_cast<Real>(a.value().numel()));
}

template <typename Real>
Var<Real> relu(const Var<Real>& a) {
    Tensor<Real> out = a.value();
    for (auto& v : out.data()) v = v > Real(0) ? v : Real(0);
    return make_result<Real>(std::move(out), {a}, [](Node<Real>& self) {
        auto& p = *self.parents[0];
        auto dst = p.grad_ref().data();
        auto g = self.grad.data();
        auto x = p.value.data();
        for (std::size_t i = 0; i < dst.size(); ++i)
            if (x[i] > Real(0)) dst[i] += g[i];
    });
}

template <typename Real>
Var<Real> tanh(const Var<Real>& a) {
    Tensor<Real> out = a.value();
    for (auto& v : out.data()) v = std::tanh(v);
    ensure_finite(out, "tanh");
    return make_result<Real>(std::move(out), {a}, [](Node<Real>& self) {
        auto& p = *self.parents[0];
        auto dst = p.grad_ref().data();
        auto g = self.grad.data();
        auto y = self.value.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * (Real(1) - y[i] * y[i]);
    });
}

template <typename Real>
Var<Real> reshape(const Var<Real>& a, Shape shape) {
    Tensor<Real> out = a.value().reshaped(std::move(shape));
    return make_result<Real>(std::move(out), {a}, [](Node<Real>& self) {
        self.parents[0]->accumulate(self.grad.data());
    });
}

template <typename Real>
Var<Real> softmax_rows(const Var<Real>& a) {
    require(a.value().rank() == 2, "softmax_rows expects [N x C]");
    const auto n = a.dim(0), c = a.dim(1);
    Tensor<Real> out({n, c});
    for (std::int64_t r = 0; r < n; ++r) {
        Real m = -std::numeric_limits<Real>::infinity();
        for (std::int64_t j = 0; j < c; ++j) m = std::max(m, a.value().at(r, j));
        Real z = 0;
        for (std::int64_t j = 0; j < c; ++j) z += (out.at(r, j) = std::exp(a.value().at(r, j) - m));
        for (std::int64_t j = 0; j < c; ++j) out.at(r, j) /= z;
    }
    ensure_finite(out, "softmax");
    return make_result<Real>(std::move(out), {a}, [n, c](Node<Real>& self) {
        auto& p = *self.parents[0];
        auto& dst = p.grad_ref();
        for (std::int64_t r = 0; r < n; ++r) {
            Real dot = 0;
            for (std::int64_t j = 0; j < c; ++j) dot += self.grad.at(r, j) * self.value.at(r, j);
            for (std::int64_t j = 0; j < c; ++j) dst.at(r, j) += self.value.at(r, j) * (self.grad.at(r, j) - dot);
        }
    });
}

template <typename Real>
Var<Real> conv1d(const Var<Real>& x, const Var<Real>& kernels, const Var<Real>& bias, std::int64_t stride,
                 Padding padding) {
    const auto& xv = x.value();
    require(xv.rank() == 2 || xv.rank() == 3, "conv1d expects x [N x T x Cin] or [T x Cin]");
    require(kernels.value().rank() == 3, "conv1d expects kernels [k x Cin x Cout]");
    const bool batched = xv.rank() == 3;
    const std::int64_t n = batched ? xv.dim(0) : 1;
    const std::int64_t t_in = xv.dim(batched ? 1 : 0);
    const std::int64_t c_in = xv.dim(batched ? 2 : 1);
    const std::int64_t k = kernels.dim(0), c_out = kernels.dim(2);
    require(kernels.dim(1) == c_in, "conv1d kernel input channels " + std::to_string(kernels.dim(1)) +
                                        " != input channels " + std::to_string(c_in));
    require(bias.value().numel() == c_out, "conv1d bias length mismatch");
    const std::int64_t t_out = conv_output_length(t_in, k, stride, padding);
    std::int64_t pad_left = 0;
    if (padding == Padding::same) {
        const std::int64_t total = std::max<std::int64_t>((t_out - 1) * stride + k - t_in, 0);
        pad_left = total / 2;
    }

    const std::int64_t rows = n * t_out, width = k * c_in;
    const bool direct = (k == 1 && stride == 1 && pad_left == 0);
    // Unfolded input: row (b, t') holds the k input frames feeding output t'.
    auto cols = std::make_shared<Tensor<Real>>();
    if (!direct) {
        *cols = Tensor<Real>::zeros({rows, width});
        for (std::int64_t b = 0; b < n; ++b)
            for (std::int64_t t = 0; t < t_out; ++t) {
                Real* dst = cols->ptr() + (b * t_out + t) * width;
                for (std::int64_t j = 0; j < k; ++j) {
                    const std::int64_t src_t = t * stride + j - pad_left;
                    if (src_t < 0 || src_t >= t_in) continue;
                    const Real* src = xv.ptr() + (b * t_in + src_t) * c_in;
                    std::copy(src, src + c_in, dst + j * c_in);
                }
            }
    }
    const Real* col_ptr = direct ? xv.ptr() : cols->ptr();

    Tensor<Real> out(batched ? Shape{n, t_out, c_out} : Shape{t_out, c_out});
    auto y = as_matrix(out, rows, c_out);
    y.noalias() = CMapM<Real>(col_ptr, rows, width) * as_matrix(kernels.value(), width, c_out);
    y.rowwise() += Eigen::Map<const Row<Real>>(bias.value().ptr(), c_out);
    ensure_finite(out, "conv1d");

    return make_result<Real>(
        std::move(out), {x, kernels, bias},
        [=](Node<Real>& self) {
            auto& px = *self.parents[0];
            auto& pk = *self.parents[1];
            auto& pb = *self.parents[2];
            auto g = as_matrix(static_cast<const Tensor<Real>&>(self.grad), rows, c_out);
            const Real* cptr = direct ? px.value.ptr() : cols->ptr();
            if (pk.requires_grad)
                as_matrix(pk.grad_ref(), width, c_out).noalias() += CMapM<Real>(cptr, rows, width).transpose() * g;
            if (pb.requires_grad) Eigen::Map<Row<Real>>(pb.grad_ref().ptr(), c_out) += g.colwise().sum();
            if (!px.requires_grad) return;
            if (direct) {
                as_matrix(px.grad_ref(), rows, width).noalias() += g * as_matrix(pk.value, width, c_out).transpose();
                return;
            }
            Mat<Real> dcols = g * as_matrix(pk.value, width, c_out).transpose();
            Real* dx = px.grad_ref().ptr();
            for (std::int64_t b = 0; b < n; ++b)
                for (std::int64_t t = 0; t < t_out; ++t) {
                    const Real* src = dcols.data() + (b * t_out + t) * width;
                    for (std::int64_t j = 0; j < k; ++j) {
                        const std::int64_t dst_t = t * stride + j - pad_left;
                        if (dst_t < 0 || dst_t >= t_in) continue;
                        Real* dst = dx + (b * t_in + dst_t) * c_in;
                        for (std::int64_t c = 0; c < c_in; ++c) dst[c] += src[j * c_in + c];
                    }
                }
        });
}

template <typename Real>
Var<Real> batchnorm(const Var<Real>& x, const BatchNorm<Real>& state) {
    const auto& xv = x.value();
    require(xv.rank() >= 1, "batchnorm expects at least one axis");
    const std::int64_t f = xv.shape().back();
    require(state.features() == f, "batchnorm feature count " + std::to_string(state.features()) +
                                       " != input channels " + std::to_string(f));
    const std::int64_t m = xv.numel() / f;
    const Real* gamma = state.gamma.value().ptr();
    const Real* beta = state.beta.value().ptr();
    Tensor<Real> out(xv.shape());
    std::vector<Real> inv_std(static_cast<std::size_t>(f));
    for (std::int64_t j = 0; j < f; ++j)
        inv_std[j] = Real(1) / std::sqrt(state.running_var[j] + static_cast<Real>(state.eps));
    for (std::int64_t r = 0; r < m; ++r)
        for (std::int64_t j = 0; j < f; ++j) {
            const auto i = r * f + j;
            out[i] = gamma[j] * (xv[i] - state.running_mean[j]) * inv_std[j] + beta[j];
        }
    ensure_finite(out, "batchnorm");
    Tensor<Real> rm = state.running_mean;
    return make_result<Real>(std::move(out), {x, state.gamma, state.beta},
                             [m, f, rm = std::move(rm), inv_std = std::move(inv_std)](Node<Real>& self) {
                                 auto& px = *self.parents[0];
                                 auto& pg = *self.parents[1];
                                 auto& pb = *self.parents[2];
                                 const Real* g = self.grad.ptr();
                                 const Real* gam = pg.value.ptr();
                                 for (std::int64_t r = 0; r < m; ++r)
                                     for (std::int64_t j = 0; j < f; ++j) {
                                         const auto i = r * f + j;
                                         const Real xhat = (px.value[i] - rm[j]) * inv_std[j];
                                         if (px.requires_grad) px.grad_ref()[i] += g[i] * gam[j] * inv_std[j];
                                         if (pg.requires_grad) pg.grad_ref()[j] += g[i] * xhat;
                                         if (pb.requires_grad) pb.grad_ref()[j] += g[i];
                                     }
                             });
}

template <typename Real>
Var<Real> batchnorm(const Var<Real>& x, BatchNorm<Real>& state, Mode mode) {
    const auto& xv = x.value();
    require(xv.rank() >= 1, "batchnorm expects at least one axis");
    const std::int64_t f = xv.shape().back();
    require(state.features() == f, "batchnorm feature count " + std::to_string(state.features()) +
                                       " != input channels " + std::to_string(f));
    const std::int64_t m = xv.numel() / f;
    const Real* gamma = state.gamma.value().ptr();
    const Real* beta = state.beta.value().ptr();
    Tensor<Real> out(xv.shape());

    if (mode == Mode::infer) return batchnorm(x, static_cast<const BatchNorm<Real>&>(state));

    std::vector<double> mu(static_cast<std::size_t>(f), 0.0), var(static_cast<std::size_t>(f), 0.0);
    for (std::int64_t r = 0; r < m; ++r)
        for (std::int64_t j = 0; j < f; ++j) mu[j] += xv[r * f + j];
    for (auto& v : mu) v /= static_cast<double>(m);
    for (std::int64_t r = 0; r < m; ++r)
        for (std::int64_t j = 0; j < f; ++j) {
            const double d = xv[r * f + j] - mu[j];
            var[j] += d * d;
        }
    for (auto& v : var) v /= static_cast<double>(m);
    for (std::int64_t j = 0; j < f; ++j)
        if (!std::isfinite(mu[j]) || !std::isfinite(var[j]))
            throw NumericError("batchnorm produced non-finite batch statistics");

    auto xhat = std::make_shared<Tensor<Real>>(xv.shape());
    std::vector<Real> inv_std(static_cast<std::size_t>(f));
    for (std::int64_t j = 0; j < f; ++j) inv_std[j] = static_cast<Real>(1.0 / std::sqrt(var[j] + state.eps));
    for (std::int64_t r = 0; r < m; ++r)
        for (std::int64_t j = 0; j < f; ++j) {
            const auto i = r * f + j;
            (*xhat)[i] = static_cast<Real>((xv[i] - mu[j])) * inv_std[j];
            out[i] = gamma[j] * (*xhat)[i] + beta[j];
        }
    ensure_finite(out, "batchnorm");

    const double keep = state.momentum;
    const double unbias = m > 1 ? static_cast<double>(m) / static_cast<double>(m - 1) : 1.0;
    for (std::int64_t j = 0; j < f; ++j) {
        state.running_mean[j] = static_cast<Real>(keep * state.running_mean[j] + (1.0 - keep) * mu[j]);
        state.running_var[j] = static_cast<Real>(keep * state.running_var[j] + (1.0 - keep) * var[j] * unbias);
    }

    return make_result<Real>(
        std::move(out), {x, state.gamma, state.beta},
        [m, f, xhat, inv_std = std::move(inv_std)](Node<Real>& self) {
            auto& px = *self.parents[0];
            auto& pg = *self.parents[1];
            auto& pb = *self.parents[2];
            const Real* g = self.grad.ptr();
            std::vector<double> sum_g(static_cast<std::size_t>(f), 0.0), sum_gx(static_cast<std::size_t>(f), 0.0);
            for (std::int64_t r = 0; r < m; ++r)
                for (std::int64_t j = 0; j < f; ++j) {
                    const auto i = r * f + j;
                    sum_g[j] += g[i];
                    sum_gx[j] += static_cast<double>(g[i]) * (*xhat)[i];
                }
            if (pg.requires_grad)
                for (std::int64_t j = 0; j < f; ++j) pg.grad_ref()[j] += static_cast<Real>(sum_gx[j]);
            if (pb.requires_grad)
                for (std::int64_t j = 0; j < f; ++j) pb.grad_ref()[j] += static_cast<Real>(sum_g[j]);
            if (!px.requires_grad) return;
            const Real* gam = pg.value.ptr();
            auto& dx = px.grad_ref();
            const double inv_m = 1.0 / static_cast<double>(m);
            for (std::int64_t r = 0; r < m; ++r)
                for (std::int64_t j = 0; j < f; ++j) {
                    const auto i = r * f + j;
                    const double v = static_cast<double>(gam[j]) * inv_std[j] *
                                     (g[i] - inv_m * sum_g[j] - (*xhat)[i] * inv_m * sum_gx[j]);
                    dx[i] += static_cast<Real>(v);
                }
        });
}

template <typename Real>
Var<Real> dropout(const Var<Real>& x, double rate, Mode mode, Rng& rng) {
    if (rate < 0.0 || rate >= 1.0) throw ConfigError("dropout rate must lie in [0, 1)");
    if (mode == Mode::infer || rate == 0.0) return x;
    const Real keep_scale = static_cast<Real>(1.0 / (1.0 - rate));
    auto mask = std::make_shared<std::vector<Real>>(static_cast<std::size_t>(x.value().numel()));
    for (auto& v : *mask) v = rng.uniform() >= rate ? keep_scale : Real(0);
    Tensor<Real> out = x.value();
    auto o = out.data();
    for (std::size_t i = 0; i < o.size(); ++i) o[i] *= (*mask)[i];
    return make_result<Real>(std::move(out), {x}, [mask](Node<Real>& self) {
        auto& p = *self.parents[0];
        auto dst = p.grad_ref().data();
        auto g = self.grad.data();
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += g[i] * (*mask)[i];
    });
}

template <typename Real>
Var<Real> global_avg_pool(const Var<Real>& x) {
    const auto& xv = x.value();
    require(xv.rank() == 2 || xv.rank() == 3, "global_avg_pool expects [N x T x C] or [T x C]");
    const bool batched = xv.rank() == 3;
    const std::int64_t n = batched ? xv.dim(0) : 1;
    const std::int64_t t = xv.dim(batched ? 1 : 0);
    const std::int64_t c = xv.dim(batched ? 2 : 1);
    Tensor<Real> out({n, c});
    const Real inv_t = Real(1) / static_cast<Real>(t);
    for (std::int64_t b = 0; b < n; ++b) {
        Eigen::Map<Row<Real>> dst(out.ptr() + b * c, c);
        dst = CMapM<Real>(xv.ptr() + b * t * c, t, c).colwise().sum() * inv_t;
    }
    return make_result<Real>(std::move(out), {x}, [n, t, c, inv_t](Node<Real>& self) {
        auto& p = *self.parents[0];
        Real* dst = p.grad_ref().ptr();
        for (std::int64_t b = 0; b < n; ++b)
            for (std::int64_t s = 0; s < t; ++s)
                for (std::int64_t j = 0; j < c; ++j) dst[(b * t + s) * c + j] += self.grad[b * c + j] * inv_t;
    });
}

template <typename Real>
Var<Real> concat_channels(const Var<Real>& a, const Var<Real>& b) {
    const auto& av = a.value();
    const auto& bv = b.value();
    require(av.rank() == bv.rank() && av.rank() >= 1, "concat_channels rank mismatch");
    for (std::size_t i = 0; i + 1 < av.rank(); ++i)
        require(av.dim(i) == bv.dim(i), "concat_channels leading dimensions disagree");
    const std::int64_t ca = av.shape().back(), cb = bv.shape().back();
    const std::int64_t rows = av.numel() / ca;
    Shape shape = av.shape();
    shape.back() = ca + cb;
    Tensor<Real> out(shape);
    for (std::int64_t r = 0; r < rows; ++r) {
        std::copy_n(av.ptr() + r * ca, ca, out.ptr() + r * (ca + cb));
        std::copy_n(bv.ptr() + r * cb, cb, out.ptr() + r * (ca + cb) + ca);
    }
    return make_result<Real>(std::move(out), {a, b}, [rows, ca, cb](Node<Real>& self) {
        auto& pa = *self.parents[0];
        auto& pb = *self.parents[1];
        for (std::int64_t r = 0; r < rows; ++r) {
            const Real* g = self.grad.ptr() + r * (ca + cb);
            if (pa.requires_grad) {
                Real* d = pa.grad_ref().ptr() + r * ca;
                for (std::int64_t j = 0; j < ca; ++j) d[j] += g[j];
            }
            if (pb.requires_grad) {
                Real* d = pb.grad_ref().ptr() + r * cb;
                for (std::int64_t j = 0; j < cb; ++j) d[j] += g[ca + j];
            }
        }
    });
}

template <typename Real>
Var<Real> cross_entropy(const Var<Real>& logits, std::span<const int> labels) {
    require(logits.value().rank() == 2, "cross_entropy expects logits [N x C]");
    const auto n = logits.dim(0), c = logits.dim(1);
    require(static_cast<std::int64_t>(labels.size()) == n, "cross_entropy label count mismatch");
    auto probs = std::make_shared<Tensor<Real>>(Shape{n, c});
    std::vector<int> lab(labels.begin(), labels.end());
    double total = 0.0;
    for (std::int64_t r = 0; r < n; ++r) {
        const int y = lab[r];
        if (y < 0 || y >= c) throw IndexError("label " + std::to_string(y) + " outside [0, " + std::to_string(c) + ")");
        double m = -std::numeric_limits<double>::infinity();
        for (std::int64_t j = 0; j < c; ++j) m = std::max<double>(m, logits.value().at(r, j));
        double z = 0.0;
        for (std::int64_t j = 0; j < c; ++j) z += std::exp(static_cast<double>(logits.value().at(r, j)) - m);
        const double lse = m + std::log(z);
        total += lse - logits.value().at(r, y);
        for (std::int64_t j = 0; j < c; ++j)
            probs->at(r, j) = static_cast<Real>(std::exp(static_cast<double>(logits.value().at(r, j)) - lse));
    }
    Tensor<Real> out = Tensor<Real>::scalar(static_cast<Real>(total / static_cast<double>(n)));
    ensure_finite(out, "cross_entropy");
    return make_result<Real>(std::move(out), {logits}, [n, c, probs, lab = std::move(lab)](Node<Real>& self) {
        auto& p = *self.parents[0];
        auto& dst = p.grad_ref();
        const Real g = self.grad[0] / static_cast<Real>(n);
        for (std::int64_t r = 0; r < n; ++r)
            for (std::int64_t j = 0; j < c; ++j)
                dst.at(r, j) += g * (probs->at(r, j) - (j == lab[r] ? Real(1) : Real(0)));
    });
}

template <typename Real>
Var<Real> attention_pool(const Var<Real>& alpha, const Var<Real>& h) {
    require(alpha.value().rank() == 2 && h.value().rank() == 2, "attention_pool expects alpha [B x L], h [(B*L) x d]");
    const auto batch = alpha.dim(0), l = alpha.dim(1), d = h.dim(1);
    require(h.dim(0) == batch * l, "attention_pool: h rows " + std::to_string(h.dim(0)) + " != B*L");
    Tensor<Real> out({batch, d});
    for (std::int64_t b = 0; b < batch; ++b) {
        Eigen::Map<Row<Real>> dst(out.ptr() + b * d, d);
        dst = Eigen::Map<const Row<Real>>(alpha.value().ptr() + b * l, l) *
              CMapM<Real>(h.value().ptr() + b * l * d, l, d);
    }
    ensure_finite(out, "attention_pool");
    return make_result<Real>(std::move(out), {alpha, h}, [batch, l, d](Node<Real>& self) {
        auto& pa = *self.parents[0];
        auto& ph = *self.parents[1];
        for (std::int64_t b = 0; b < batch; ++b) {
            Eigen::Map<const Row<Real>> g(self.grad.ptr() + b * d, d);
            if (pa.requires_grad) {
                Eigen::Map<Row<Real>> da(pa.grad_ref().ptr() + b * l, l);
                da += (CMapM<Real>(ph.value.ptr() + b * l * d, l, d) * g.transpose()).transpose();
            }
            if (ph.requires_grad) {
                MapM<Real> dh(ph.grad_ref().ptr() + b * l * d, l, d);
                dh.noalias() += Eigen::Map<const Row<Real>>(pa.value.ptr() + b * l, l).transpose() * g;
            }
        }
    });
}

#define TASSEL_INSTANTIATE(R)                                                                        \
    template Var<R> matmul<R>(const Var<R>&, const Var<R>&);                                         \
    template Var<R> dense<R>(const Var<R>&, const Var<R>&, const Var<R>&);                           \
    template Var<R> add<R>(const Var<R>&, const Var<R>&);                                            \
    template Var<R> scale<R>(const Var<R>&, R);                                                      \
    template Var<R> sum<R>(const Var<R>&);                                                           \
    template Var<R> mean<R>(const Var<R>&);                                                          \
    template Var<R> relu<R>(const Var<R>&);                                                          \
    template Var<R> tanh<R>(const Var<R>&);                                                          \
    template Var<R> reshape<R>(const Var<R>&, Shape);                                                \
    template Var<R> softmax_rows<R>(const Var<R>&);                                                  \
    template Var<R> conv1d<R>(const Var<R>&, const Var<R>&, const Var<R>&, std::int64_t, Padding);   \
    template Var<R> batchnorm<R>(const Var<R>&, BatchNorm<R>&, Mode);                                \
    template Var<R> batchnorm<R>(const Var<R>&, const BatchNorm<R>&);                                \
    template Var<R> dropout<R>(const Var<R>&, double, Mode, Rng&);                                   \
    template Var<R> global_avg_pool<R>(const Var<R>&);                                               \
    template Var<R> concat_channels<R>(const Var<R>&, const Var<R>&);                                \
    template Var<R> cross_entropy<R>(const Var<R>&, std::span<const int>);                           \
    template Var<R> attention_pool<R>(const Var<R>&, const Var<R>&);

TASSEL_INSTANTIATE(float)
TASSEL_INSTANTIATE(double)

#undef TASSEL_INSTANTIATE

}  // namespace ops
}  // namespace tassel
