#pragma once

#include <functional>
#include <initializer_list>
#include <memory>
#include <utility>
#include <vector>

#include "avse/numerics/activation.hpp"
#include "avse/numerics/conv.hpp"
#include "avse/numerics/group_norm.hpp"
#include "avse/numerics/layout.hpp"
#include "avse/numerics/linear.hpp"
#include "avse/numerics/lstm.hpp"
#include "avse/numerics/resize.hpp"
#include "avse/tensor.hpp"

// Reverse-mode differentiation over the fixed set of operations the network
// uses. A Graph records, in evaluation order, every node that depends on a
// trainable input; `backward` then replays the recorded vector-Jacobian
// products in reverse. With recording disabled the same code path computes
// values only and intermediates are released as soon as they go out of
// scope.

namespace avse::ad {

template <typename Real>
struct Node {
  Tensor<Real> value;
  Tensor<Real> grad;
  bool requires_grad = false;
  std::function<void(const Tensor<Real>&)> backward;
};

template <typename Real>
using Var = std::shared_ptr<Node<Real>>;

template <typename Real>
class Graph {
 public:
  explicit Graph(bool record = true) : record_(record) {}

  bool recording() const noexcept { return record_; }

  /// Input that never receives a gradient.
  Var<Real> constant(Tensor<Real> value) {
    auto n = std::make_shared<Node<Real>>();
    n->value = std::move(value);
    return n;
  }

  /// Trainable leaf; its `grad` is filled by `backward`.
  Var<Real> parameter(Tensor<Real> value) {
    auto n = constant(std::move(value));
    n->requires_grad = record_;
    return n;
  }

  bool tracks(std::initializer_list<const Var<Real>*> inputs) const {
    if (!record_) return false;
    for (const auto* v : inputs)
      if (*v && (*v)->requires_grad) return true;
    return false;
  }

  /// Wraps an op result. `vjp` receives the output cotangent and must
  /// accumulate into its inputs through `push`.
  template <typename Fn>
  Var<Real> record(Tensor<Real> value, bool tracked, Fn&& vjp) {
    auto n = std::make_shared<Node<Real>>();
    n->value = std::move(value);
    if (tracked) {
      n->requires_grad = true;
      n->backward = std::forward<Fn>(vjp);
      tape_.push_back(n);
    }
    return n;
  }

  static void push(const Var<Real>& target, const Tensor<Real>& g) {
    if (target && target->requires_grad) accumulate(target->grad, g);
  }

  /// Seeds `root` with `seed` and propagates to every recorded node.
  void backward(const Var<Real>& root, const Tensor<Real>& seed) {
    require_shape(seed, root->value.dims(), "backward seed");
    accumulate(root->grad, seed);
    for (auto it = tape_.rbegin(); it != tape_.rend(); ++it) {
      Node<Real>& n = **it;
      if (n.grad.empty() || !n.backward) continue;
      n.backward(n.grad);
    }
  }

  std::size_t tape_size() const { return tape_.size(); }

 private:
  bool record_;
  std::vector<Var<Real>> tape_;
};

// ---------------------------------------------------------------------------
// Differentiable wrappers. Each forwards to the numerics kernel and, when
// tracked, registers the matching vector-Jacobian product.

template <typename Real>
Var<Real> conv1d(Graph<Real>& g, const Var<Real>& x, const Var<Real>& w, const Var<Real>& b,
                 const numerics::ConvSpec& spec) {
  static const Tensor<Real> kNone;
  auto y = numerics::conv1d(x->value, w->value, b ? b->value : kNone, spec);
  const bool tracked = g.tracks({&x, &w, &b});
  return g.record(std::move(y), tracked, [x, w, b, spec](const Tensor<Real>& gy) {
    auto gr = numerics::conv1d_vjp(x->value, w->value, spec, gy);
    Graph<Real>::push(x, gr.input);
    Graph<Real>::push(w, gr.weight);
    if (b) Graph<Real>::push(b, gr.bias);
  });
}

template <typename Real>
Var<Real> conv_transpose1d(Graph<Real>& g, const Var<Real>& x, const Var<Real>& w,
                           const Var<Real>& b, const numerics::ConvSpec& spec) {
  static const Tensor<Real> kNone;
  auto y = numerics::conv_transpose1d(x->value, w->value, b ? b->value : kNone, spec);
  const bool tracked = g.tracks({&x, &w, &b});
  return g.record(std::move(y), tracked, [x, w, b, spec](const Tensor<Real>& gy) {
    auto gr = numerics::conv_transpose1d_vjp(x->value, w->value, spec, gy);
    Graph<Real>::push(x, gr.input);
    Graph<Real>::push(w, gr.weight);
    if (b) Graph<Real>::push(b, gr.bias);
  });
}

template <typename Real>
Var<Real> conv3d(Graph<Real>& g, const Var<Real>& x, const Var<Real>& w, const Var<Real>& b,
                 const numerics::ConvSpec& spec) {
  static const Tensor<Real> kNone;
  auto y = numerics::conv3d(x->value, w->value, b ? b->value : kNone, spec);
  const bool tracked = g.tracks({&x, &w, &b});
  return g.record(std::move(y), tracked, [x, w, b, spec](const Tensor<Real>& gy) {
    auto gr = numerics::conv3d_vjp(x->value, w->value, spec, gy);
    Graph<Real>::push(x, gr.input);
    Graph<Real>::push(w, gr.weight);
    if (b) Graph<Real>::push(b, gr.bias);
  });
}

template <typename Real>
Var<Real> linear(Graph<Real>& g, const Var<Real>& x, const Var<Real>& w, const Var<Real>& b) {
  static const Tensor<Real> kNone;
  auto y = numerics::linear(x->value, w->value, b ? b->value : kNone);
  const bool tracked = g.tracks({&x, &w, &b});
  return g.record(std::move(y), tracked, [x, w, b](const Tensor<Real>& gy) {
    auto gr = numerics::linear_vjp(x->value, w->value, bool(b), gy);
    Graph<Real>::push(x, gr.input);
    Graph<Real>::push(w, gr.weight);
    if (b) Graph<Real>::push(b, gr.bias);
  });
}

template <typename Real>
Var<Real> activation(Graph<Real>& g, numerics::Activation kind, const Var<Real>& x) {
  auto y = numerics::activation(kind, x->value);
  const bool tracked = g.tracks({&x});
  auto node = g.record(std::move(y), tracked, nullptr);
  if (tracked) {
    Node<Real>* self = node.get();
    node->backward = [x, kind, self](const Tensor<Real>& gy) {
      Graph<Real>::push(x, numerics::activation_vjp(kind, self->value, gy));
    };
  }
  return node;
}

/// Bidirectional LSTM over [B, T, D]. Parameters are passed as the four
/// leaves (forward weight/bias, backward weight/bias).
template <typename Real>
Var<Real> bilstm(Graph<Real>& g, const Var<Real>& x, const Var<Real>& wf, const Var<Real>& bf,
                 const Var<Real>& wb, const Var<Real>& bb) {
  numerics::LstmParams<Real> p{{wf->value, bf->value}, {wb->value, bb->value}};
  const bool tracked = g.tracks({&x, &wf, &bf, &wb, &bb});
  if (!tracked) return g.record(numerics::bilstm(x->value, p), false, nullptr);
  auto cache = std::make_shared<numerics::BiLstmCache<Real>>();
  auto node = g.record(numerics::bilstm(x->value, p, cache.get()), true, nullptr);
  Node<Real>* self = node.get();
  node->backward = [x, wf, bf, wb, bb, cache, self](const Tensor<Real>& gy) {
    numerics::LstmParams<Real> pp{{wf->value, bf->value}, {wb->value, bb->value}};
    auto gr = numerics::bilstm_vjp(x->value, pp, *cache, self->value, gy);
    Graph<Real>::push(x, gr.input);
    Graph<Real>::push(wf, gr.params.forward.weight);
    Graph<Real>::push(bf, gr.params.forward.bias);
    Graph<Real>::push(wb, gr.params.backward.weight);
    Graph<Real>::push(bb, gr.params.backward.bias);
  };
  return node;
}

template <typename Real>
Var<Real> group_norm(Graph<Real>& g, const Var<Real>& x, const Var<Real>& gamma,
                     const Var<Real>& beta, std::size_t groups, double eps,
                     numerics::ChannelAxis axis) {
  numerics::GroupNormParams<Real> p{groups, gamma->value, beta->value, eps};
  const bool tracked = g.tracks({&x, &gamma, &beta});
  if (!tracked) return g.record(numerics::group_norm(x->value, p, axis), false, nullptr);
  auto cache = std::make_shared<numerics::GroupNormCache<Real>>();
  auto y = numerics::group_norm(x->value, p, axis, cache.get());
  return g.record(std::move(y), true,
                  [x, gamma, beta, groups, eps, axis, cache](const Tensor<Real>& gy) {
                    numerics::GroupNormParams<Real> pp{groups, gamma->value, beta->value, eps};
                    auto gr = numerics::group_norm_vjp(pp, *cache, gy, axis);
                    Graph<Real>::push(x, gr.input);
                    Graph<Real>::push(gamma, gr.gamma);
                    Graph<Real>::push(beta, gr.beta);
                  });
}

template <typename Real>
Var<Real> resize_linear_time(Graph<Real>& g, const Var<Real>& x, std::size_t target) {
  const bool tracked = g.tracks({&x});
  return g.record(numerics::resize_linear_time(x->value, target), tracked,
                  [x](const Tensor<Real>& gy) {
                    Graph<Real>::push(x, numerics::resize_linear_time_vjp(x->value.dims(), gy));
                  });
}

template <typename Real>
Var<Real> add(Graph<Real>& g, const Var<Real>& a, const Var<Real>& b) {
  require_shape(b->value, a->value.dims(), "add");
  Tensor<Real> y = a->value;
  accumulate(y, b->value);
  const bool tracked = g.tracks({&a, &b});
  return g.record(std::move(y), tracked, [a, b](const Tensor<Real>& gy) {
    Graph<Real>::push(a, gy);
    Graph<Real>::push(b, gy);
  });
}

template <typename Real>
Var<Real> mul(Graph<Real>& g, const Var<Real>& a, const Var<Real>& b) {
  require_shape(b->value, a->value.dims(), "mul");
  Tensor<Real> y = a->value;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= b->value[i];
  const bool tracked = g.tracks({&a, &b});
  return g.record(std::move(y), tracked, [a, b](const Tensor<Real>& gy) {
    if (a->requires_grad) {
      Tensor<Real> ga = gy;
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] *= b->value[i];
      Graph<Real>::push(a, ga);
    }
    if (b->requires_grad) {
      Tensor<Real> gb = gy;
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] *= a->value[i];
      Graph<Real>::push(b, gb);
    }
  });
}

template <typename Real>
Var<Real> reshape(Graph<Real>& g, const Var<Real>& x, Shape dims) {
  const bool tracked = g.tracks({&x});
  return g.record(x->value.reshaped(std::move(dims)), tracked, [x](const Tensor<Real>& gy) {
    Graph<Real>::push(x, gy.reshaped(x->value.dims()));
  });
}

template <typename Real>
Var<Real> transpose2d(Graph<Real>& g, const Var<Real>& x) {
  const bool tracked = g.tracks({&x});
  return g.record(numerics::transpose2d(x->value), tracked, [x](const Tensor<Real>& gy) {
    Graph<Real>::push(x, numerics::transpose2d(gy));
  });
}

template <typename Real>
Var<Real> swap_leading(Graph<Real>& g, const Var<Real>& x) {
  const bool tracked = g.tracks({&x});
  return g.record(numerics::swap_leading(x->value), tracked, [x](const Tensor<Real>& gy) {
    Graph<Real>::push(x, numerics::swap_leading(gy));
  });
}

template <typename Real>
Var<Real> concat_rows(Graph<Real>& g, const Var<Real>& top, const Var<Real>& bottom) {
  const bool tracked = g.tracks({&top, &bottom});
  const std::size_t top_rows = top->value.dim(0);
  return g.record(numerics::concat_rows(top->value, bottom->value), tracked,
                  [top, bottom, top_rows](const Tensor<Real>& gy) {
                    auto [ga, gb] = numerics::split_rows(gy, top_rows);
                    Graph<Real>::push(top, ga);
                    Graph<Real>::push(bottom, gb);
                  });
}

template <typename Real>
Var<Real> segment(Graph<Real>& g, const Var<Real>& x, const numerics::ChunkPlan& plan) {
  const bool tracked = g.tracks({&x});
  return g.record(numerics::segment(x->value, plan), tracked, [x, plan](const Tensor<Real>& gy) {
    Graph<Real>::push(x, numerics::segment_vjp(gy, plan));
  });
}

template <typename Real>
Var<Real> overlap_add(Graph<Real>& g, const Var<Real>& x, const numerics::ChunkPlan& plan) {
  const bool tracked = g.tracks({&x});
  return g.record(numerics::overlap_add(x->value, plan), tracked,
                  [x, plan](const Tensor<Real>& gy) {
                    Graph<Real>::push(x, numerics::overlap_add_vjp(gy, plan));
                  });
}

template <typename Real>
Var<Real> spatial_mean(Graph<Real>& g, const Var<Real>& x) {
  const bool tracked = g.tracks({&x});
  return g.record(numerics::spatial_mean(x->value), tracked, [x](const Tensor<Real>& gy) {
    Graph<Real>::push(x, numerics::spatial_mean_vjp(x->value.dims(), gy));
  });
}

/// 1-D pad/trim. The adjoint keeps the overlapping prefix.
template <typename Real>
Var<Real> fit_length(Graph<Real>& g, const Var<Real>& x, std::size_t length) {
  const bool tracked = g.tracks({&x});
  return g.record(numerics::fit_length(x->value, length), tracked, [x](const Tensor<Real>& gy) {
    Graph<Real>::push(x, numerics::fit_length(gy, x->value.size()));
  });
}

}  // namespace avse::ad
