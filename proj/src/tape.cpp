#include "focal/tape.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

namespace focal::nd {

Tape::NodeId Tape::push(Tensor value, std::function<void(Tape&)> back) {
    nodes_.push_back(Node{std::move(value), Tensor(), std::move(back)});
    Node& n = nodes_.back();
    n.grad = Tensor(n.value.shape);
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::NodeId Tape::leaf(Tensor value) { return push(std::move(value), nullptr); }

void Tape::backward(NodeId root) {
    Node& r = nodes_[static_cast<std::size_t>(root)];
    if (r.value.numel() != 1) throw ShapeError("backward root must be scalar");
    for (Node& n : nodes_) std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    r.grad.data[0] = 1.0;
    for (std::size_t i = nodes_.size(); i-- > 0;) {
        if (nodes_[i].back) nodes_[i].back(*this);
    }
}

Tape::NodeId Tape::matmul(NodeId a, NodeId b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (A.ndim() != 2 || B.ndim() != 2 || A.shape[1] != B.shape[0])
        throw ShapeError("matmul: inner extents disagree");
    const std::size_t m = A.shape[0], k = A.shape[1], n = B.shape[1];
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i) {
        const double* arow = &A.data[i * k];
        double* orow = &out.data[i * n];
        for (std::size_t p = 0; p < k; ++p) {
            const double av = arow[p];
            const double* brow = &B.data[p * n];
            for (std::size_t j = 0; j < n; ++j) orow[j] += av * brow[j];
        }
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a, b, m, k, n](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& A2 = t.value(a);
        const Tensor& B2 = t.value(b);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        // ga += g . B^T
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t p = 0; p < k; ++p) {
                double s = 0.0;
                const double* grow = &g.data[i * n];
                const double* brow = &B2.data[p * n];
                for (std::size_t j = 0; j < n; ++j) s += grow[j] * brow[j];
                ga.data[i * k + p] += s;
            }
        // gb += A^T . g
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t i = 0; i < m; ++i) {
                const double av = A2.data[i * k + p];
                const double* grow = &g.data[i * n];
                double* gbrow = &gb.data[p * n];
                for (std::size_t j = 0; j < n; ++j) gbrow[j] += av * grow[j];
            }
    };
    return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw ShapeError("add: shape mismatch");
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = A.data[i] + B.data[i];
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a, b](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] += g.data[i];
        }
    };
    return id;
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw ShapeError("sub: shape mismatch");
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = A.data[i] - B.data[i];
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a, b](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i];
            gb.data[i] -= g.data[i];
        }
    };
    return id;
}

Tape::NodeId Tape::mul(NodeId a, NodeId b) {
    const Tensor& A = value(a);
    const Tensor& B = value(b);
    if (!A.same_shape(B)) throw ShapeError("mul: shape mismatch");
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = A.data[i] * B.data[i];
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a, b](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& A2 = t.value(a);
        const Tensor& B2 = t.value(b);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            ga.data[i] += g.data[i] * B2.data[i];
            gb.data[i] += g.data[i] * A2.data[i];
        }
    };
    return id;
}

Tape::NodeId Tape::scale(NodeId a, double c) {
    const Tensor& A = value(a);
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] = c * A.data[i];
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a, c](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i] += c * g.data[i];
    };
    return id;
}

Tape::NodeId Tape::add_rowvec(NodeId a, NodeId bias) {
    const Tensor& A = value(a);
    const Tensor& B = value(bias);
    if (A.ndim() != 2 || B.ndim() != 1 || B.shape[0] != A.shape[1])
        throw ShapeError("add_rowvec: bias extent must match columns");
    const std::size_t m = A.shape[0], n = A.shape[1];
    Tensor out({m, n});
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            out.data[i * n + j] = A.data[i * n + j] + B.data[j];
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a, bias, m, n](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        Tensor& gb = t.grad_mut(bias);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                ga.data[i * n + j] += g.data[i * n + j];
                gb.data[j] += g.data[i * n + j];
            }
    };
    return id;
}

Tape::NodeId Tape::relu(NodeId a) {
    const Tensor& A = value(a);
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.numel(); ++i)
        out.data[i] = A.data[i] > 0.0 ? A.data[i] : 0.0;
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& A2 = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.numel(); ++i)
            if (A2.data[i] > 0.0) ga.data[i] += g.data[i];
    };
    return id;
}

Tape::NodeId Tape::softplus(NodeId a) {
    const Tensor& A = value(a);
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        const double x = A.data[i];
        out.data[i] = std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& A2 = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.numel(); ++i) {
            const double x = A2.data[i];
            const double sig = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                        : std::exp(x) / (1.0 + std::exp(x));
            ga.data[i] += g.data[i] * sig;
        }
    };
    return id;
}

Tape::NodeId Tape::log(NodeId a) {
    const Tensor& A = value(a);
    Tensor out(A.shape);
    for (std::size_t i = 0; i < out.numel(); ++i) {
        if (!(A.data[i] > 0.0)) throw ParamError("log: entries must be positive");
        out.data[i] = std::log(A.data[i]);
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& A2 = t.value(a);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i] += g.data[i] / A2.data[i];
    };
    return id;
}

Tape::NodeId Tape::softmax(NodeId a) {
    const Tensor& A = value(a);
    std::size_t rows, cols;
    if (A.ndim() == 1) {
        rows = 1;
        cols = A.shape[0];
    } else if (A.ndim() == 2) {
        rows = A.shape[0];
        cols = A.shape[1];
    } else {
        throw ShapeError("softmax: expects {C} or {m,C}");
    }
    Tensor out(A.shape);
    for (std::size_t i = 0; i < rows; ++i) {
        const double* in = &A.data[i * cols];
        double* o = &out.data[i * cols];
        double mx = in[0];
        for (std::size_t j = 1; j < cols; ++j) mx = std::max(mx, in[j]);
        double z = 0.0;
        for (std::size_t j = 0; j < cols; ++j) {
            o[j] = std::exp(in[j] - mx);
            z += o[j];
        }
        for (std::size_t j = 0; j < cols; ++j) o[j] /= z;
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a, rows, cols](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& P = t.value(id);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < rows; ++i) {
            const double* p = &P.data[i * cols];
            const double* gr = &g.data[i * cols];
            double dot = 0.0;
            for (std::size_t j = 0; j < cols; ++j) dot += gr[j] * p[j];
            for (std::size_t j = 0; j < cols; ++j)
                ga.data[i * cols + j] += p[j] * (gr[j] - dot);
        }
    };
    return id;
}

Tape::NodeId Tape::cross_entropy(NodeId p, NodeId y) {
    const Tensor& P = value(p);
    const Tensor& Y = value(y);
    if (!P.same_shape(Y)) throw ShapeError("cross_entropy: shape mismatch");
    double loss = 0.0;
    for (std::size_t i = 0; i < P.numel(); ++i)
        loss -= Y.data[i] * std::log(std::max(P.data[i], kCrossEntropyEps));
    NodeId id = push(Tensor::scalar(loss), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, p, y](Tape& t) {
        const double g = t.grad(id).data[0];
        const Tensor& P2 = t.value(p);
        const Tensor& Y2 = t.value(y);
        Tensor& gp = t.grad_mut(p);
        for (std::size_t i = 0; i < P2.numel(); ++i) {
            // below the eps floor the clamped loss is locally constant
            if (P2.data[i] > kCrossEntropyEps)
                gp.data[i] -= g * Y2.data[i] / P2.data[i];
        }
    };
    return id;
}

Tape::NodeId Tape::sum(NodeId a) {
    const Tensor& A = value(a);
    double s = 0.0;
    for (double v : A.data) s += v;
    NodeId id = push(Tensor::scalar(s), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a](Tape& t) {
        const double g = t.grad(id).data[0];
        Tensor& ga = t.grad_mut(a);
        for (double& v : ga.data) v += g;
    };
    return id;
}

Tape::NodeId Tape::mean(NodeId a) {
    const std::size_t n = value(a).numel();
    return scale(sum(a), 1.0 / static_cast<double>(n));
}

Tape::NodeId Tape::row(NodeId a, std::size_t i) {
    const Tensor& A = value(a);
    if (A.ndim() != 2 || i >= A.shape[0]) throw ShapeError("row: index out of range");
    const std::size_t n = A.shape[1];
    Tensor out({1, n});
    std::copy_n(&A.data[i * n], n, out.data.begin());
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a, i, n](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t j = 0; j < n; ++j) ga.data[i * n + j] += g.data[j];
    };
    return id;
}

Tape::NodeId Tape::reshape(NodeId a, std::vector<std::size_t> shape) {
    const Tensor& A = value(a);
    if (Tensor::count(shape) != A.numel()) throw ShapeError("reshape: element count differs");
    Tensor out(std::move(shape), A.data);
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, a](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& ga = t.grad_mut(a);
        for (std::size_t i = 0; i < g.numel(); ++i) ga.data[i] += g.data[i];
    };
    return id;
}

Tape::NodeId Tape::conv2d(NodeId x, NodeId w, NodeId b) {
    const Tensor& X = value(x);
    const Tensor& W = value(w);
    const Tensor& B = value(b);
    if (X.ndim() != 3 || W.ndim() != 3 || B.ndim() != 1 || B.shape[0] != W.shape[0])
        throw ShapeError("conv2d: expects x {N,H,W}, w {F,kh,kw}, b {F}");
    const std::size_t N = X.shape[0], H = X.shape[1], Wd = X.shape[2];
    const std::size_t F = W.shape[0], kh = W.shape[1], kw = W.shape[2];
    if (H < kh || Wd < kw) throw ShapeError("conv2d: kernel larger than input");
    const std::size_t OH = H - kh + 1, OW = Wd - kw + 1;
    Tensor out({N, F, OH, OW});
    for (std::size_t n = 0; n < N; ++n) {
        const double* xp = &X.data[n * H * Wd];
        for (std::size_t f = 0; f < F; ++f) {
            const double* wp = &W.data[f * kh * kw];
            double* op = &out.data[(n * F + f) * OH * OW];
            const double bias = B.data[f];
            for (std::size_t i = 0; i < OH; ++i)
                for (std::size_t j = 0; j < OW; ++j) {
                    double s = bias;
                    for (std::size_t u = 0; u < kh; ++u) {
                        const double* xr = &xp[(i + u) * Wd + j];
                        const double* wr = &wp[u * kw];
                        for (std::size_t v = 0; v < kw; ++v) s += xr[v] * wr[v];
                    }
                    op[i * OW + j] = s;
                }
        }
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, x, w, b, N, H, Wd, F, kh, kw, OH,
                                                 OW](Tape& t) {
        const Tensor& g = t.grad(id);
        const Tensor& X2 = t.value(x);
        const Tensor& W2 = t.value(w);
        Tensor& gx = t.grad_mut(x);
        Tensor& gw = t.grad_mut(w);
        Tensor& gb = t.grad_mut(b);
        for (std::size_t n = 0; n < N; ++n) {
            const double* xp = &X2.data[n * H * Wd];
            double* gxp = &gx.data[n * H * Wd];
            for (std::size_t f = 0; f < F; ++f) {
                const double* wp = &W2.data[f * kh * kw];
                double* gwp = &gw.data[f * kh * kw];
                const double* gp = &g.data[(n * F + f) * OH * OW];
                double gbacc = 0.0;
                for (std::size_t i = 0; i < OH; ++i)
                    for (std::size_t j = 0; j < OW; ++j) {
                        const double gv = gp[i * OW + j];
                        gbacc += gv;
                        for (std::size_t u = 0; u < kh; ++u) {
                            const double* xr = &xp[(i + u) * Wd + j];
                            double* gxr = &gxp[(i + u) * Wd + j];
                            const double* wr = &wp[u * kw];
                            double* gwr = &gwp[u * kw];
                            for (std::size_t v = 0; v < kw; ++v) {
                                gxr[v] += gv * wr[v];
                                gwr[v] += gv * xr[v];
                            }
                        }
                    }
                gb.data[f] += gbacc;
            }
        }
    };
    return id;
}

Tape::NodeId Tape::maxpool2(NodeId x) {
    const Tensor& X = value(x);
    if (X.ndim() != 4) throw ShapeError("maxpool2: expects {N,F,H,W}");
    const std::size_t N = X.shape[0], F = X.shape[1], H = X.shape[2], W = X.shape[3];
    if (H % 2 != 0 || W % 2 != 0) throw ShapeError("maxpool2: extents must be even");
    const std::size_t OH = H / 2, OW = W / 2;
    Tensor out({N, F, OH, OW});
    auto argmax = std::make_shared<std::vector<std::uint32_t>>(out.numel());
    std::size_t o = 0;
    for (std::size_t nf = 0; nf < N * F; ++nf) {
        const double* xp = &X.data[nf * H * W];
        for (std::size_t i = 0; i < OH; ++i)
            for (std::size_t j = 0; j < OW; ++j, ++o) {
                std::size_t base = (2 * i) * W + 2 * j;
                std::size_t best = base;
                double bv = xp[base];
                const std::size_t cand[3] = {base + 1, base + W, base + W + 1};
                for (std::size_t c : cand)
                    if (xp[c] > bv) {
                        bv = xp[c];
                        best = c;
                    }
                out.data[o] = bv;
                (*argmax)[o] = static_cast<std::uint32_t>(nf * H * W + best);
            }
    }
    NodeId id = push(std::move(out), nullptr);
    nodes_[static_cast<std::size_t>(id)].back = [id, x, argmax](Tape& t) {
        const Tensor& g = t.grad(id);
        Tensor& gx = t.grad_mut(x);
        for (std::size_t i = 0; i < g.numel(); ++i) gx.data[(*argmax)[i]] += g.data[i];
    };
    return id;
}

double grad_check(const std::function<Tape::NodeId(Tape&, Tape::NodeId)>& f,
                  const Tensor& theta, double h) {
    Tensor analytic;
    {
        Tape tape;
        Tape::NodeId leaf = tape.leaf(theta);
        Tape::NodeId out = f(tape, leaf);
        if (tape.value(out).numel() != 1) throw ShapeError("grad_check: f must be scalar");
        if (!std::isfinite(tape.value(out).item()))
            throw EvalError("grad_check: f not finite at theta");
        tape.backward(out);
        analytic = tape.grad(leaf);
    }
    auto eval = [&](const Tensor& t) {
        Tape tape;
        double v = tape.value(f(tape, tape.leaf(t))).item();
        if (!std::isfinite(v)) throw EvalError("grad_check: f not finite near theta");
        return v;
    };
    double worst = 0.0;
    Tensor probe = theta;
    for (std::size_t i = 0; i < theta.numel(); ++i) {
        const double orig = probe.data[i];
        probe.data[i] = orig + h;
        const double fp = eval(probe);
        probe.data[i] = orig - h;
        const double fm = eval(probe);
        probe.data[i] = orig;
        const double numeric = (fp - fm) / (2.0 * h);
        const double a = analytic.data[i];
        const double denom = std::max({std::abs(a), std::abs(numeric), 1.0});
        worst = std::max(worst, std::abs(a - numeric) / denom);
    }
    return worst;
}

} // namespace focal::nd
