// Copyright 2026 The facetex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "facetex/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "facetex/error.hpp"
#include "facetex/parallel.hpp"

namespace facetex {

namespace {

constexpr std::size_t kParallelGrain = 1 << 15;
constexpr double kMaskEps = 1e-12;

const char* KindName(Elementwise kind) {
  switch (kind) {
    case Elementwise::kAdd: return "add";
    case Elementwise::kSub: return "sub";
    case Elementwise::kMul: return "mul";
    case Elementwise::kDiv: return "div";
    case Elementwise::kPow2: return "pow2";
    case Elementwise::kAbs: return "abs";
    case Elementwise::kExp: return "exp";
    case Elementwise::kSqrt: return "sqrt";
    case Elementwise::kNeg: return "neg";
    case Elementwise::kMax0: return "max0";
  }
  return "?";
}

bool IsBinary(Elementwise kind) {
  return kind == Elementwise::kAdd || kind == Elementwise::kSub ||
         kind == Elementwise::kMul || kind == Elementwise::kDiv;
}

template <class F>
void ForEach(std::size_t n, F&& f) {
  parallel_for(0, n, kParallelGrain, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t i = lo; i < hi; ++i) f(i);
  });
}

Tensor Binary(Elementwise kind, const Tensor& a, const Tensor& b) {
  const bool same = a.shape() == b.shape();
  const bool b_scalar = b.size() == 1;
  const bool a_scalar = a.size() == 1;
  if (!same && !b_scalar && !a_scalar) {
    throw ShapeError(std::string(KindName(kind)) + ": shapes " + shape_string(a.shape()) +
                     " and " + shape_string(b.shape()) + " do not conform");
  }
  const Shape shape = same || b_scalar ? a.shape() : b.shape();
  const std::size_t n = shape_size(shape);
  const std::size_t sa = a.size() == n ? 1 : 0;
  const std::size_t sb = b.size() == n ? 1 : 0;
  auto av = a.values();
  auto bv = b.values();
  if (kind == Elementwise::kDiv) {
    for (double d : bv) {
      if (d == 0.0) throw DomainError("div: division by exact zero");
    }
  }
  std::vector<double> out(n);
  ForEach(n, [&](std::size_t i) {
    const double x = av[i * sa], y = bv[i * sb];
    switch (kind) {
      case Elementwise::kAdd: out[i] = x + y; break;
      case Elementwise::kSub: out[i] = x - y; break;
      case Elementwise::kMul: out[i] = x * y; break;
      default: out[i] = x / y; break;
    }
  });
  Tensor ad = a.detach(), bd = b.detach();
  return make_result(shape, std::move(out), {&a, &b},
                     [kind, ad, bd, sa, sb](std::span<const double> up, GradSink& sink) {
                       auto av = ad.values();
                       auto bv = bd.values();
                       const std::size_t n = up.size();
                       if (sink.wants(0)) {
                         auto g = sink.input(0);
                         for (std::size_t i = 0; i < n; ++i) {
                           double d;
                           switch (kind) {
                             case Elementwise::kAdd:
                             case Elementwise::kSub: d = up[i]; break;
                             case Elementwise::kMul: d = up[i] * bv[i * sb]; break;
                             default: d = up[i] / bv[i * sb]; break;
                           }
                           g[i * sa] += d;
                         }
                       }
                       if (sink.wants(1)) {
                         auto g = sink.input(1);
                         for (std::size_t i = 0; i < n; ++i) {
                           double d;
                           const double y = bv[i * sb];
                           switch (kind) {
                             case Elementwise::kAdd: d = up[i]; break;
                             case Elementwise::kSub: d = -up[i]; break;
                             case Elementwise::kMul: d = up[i] * av[i * sa]; break;
                             default: d = -up[i] * av[i * sa] / (y * y); break;
                           }
                           g[i * sb] += d;
                         }
                       }
                     });
}

Tensor Unary(Elementwise kind, const Tensor& a) {
  auto av = a.values();
  const std::size_t n = av.size();
  if (kind == Elementwise::kSqrt) {
    for (double x : av) {
      if (x < 0.0) throw DomainError("sqrt of negative value " + std::to_string(x));
    }
  }
  std::vector<double> out(n);
  ForEach(n, [&](std::size_t i) {
    const double x = av[i];
    switch (kind) {
      case Elementwise::kPow2: out[i] = x * x; break;
      case Elementwise::kAbs: out[i] = std::abs(x); break;
      case Elementwise::kExp: out[i] = std::exp(x); break;
      case Elementwise::kSqrt: out[i] = std::sqrt(x); break;
      case Elementwise::kNeg: out[i] = -x; break;
      default: out[i] = x > 0.0 ? x : 0.0; break;
    }
  });
  Tensor ad = a.detach();
  const bool keep_output = kind == Elementwise::kExp || kind == Elementwise::kSqrt;
  auto yd = keep_output ? std::make_shared<const std::vector<double>>(out) : nullptr;
  return make_result(a.shape(), std::move(out), {&a},
                     [kind, ad, yd](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       auto xv = ad.values();
                       const double* yv = yd ? yd->data() : nullptr;
                       for (std::size_t i = 0; i < up.size(); ++i) {
                         const double x = xv[i];
                         double d;
                         switch (kind) {
                           case Elementwise::kPow2: d = 2.0 * x; break;
                           case Elementwise::kAbs: d = x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); break;
                           case Elementwise::kExp: d = yv[i]; break;
                           case Elementwise::kSqrt: d = yv[i] > 0.0 ? 0.5 / yv[i] : 0.0; break;
                           case Elementwise::kNeg: d = -1.0; break;
                           default: d = x > 0.0 ? 1.0 : 0.0; break;
                         }
                         g[i] += up[i] * d;
                       }
                     });
}

// Stride of the mask relative to `a`: mask value for element i is
// mask[i % mask.size()].
void CheckMask(const char* op, const Tensor& a, const Tensor& mask) {
  if (!mask_broadcastable(a.shape(), mask.shape())) {
    throw ShapeError(std::string(op) + ": mask " + shape_string(mask.shape()) +
                     " is not broadcastable to " + shape_string(a.shape()));
  }
}

std::size_t Width(const Tensor& a) { return a.shape().back(); }
std::size_t Height(const Tensor& a) { return a.shape()[a.rank() - 2]; }

}  // namespace

Tensor elementwise(Elementwise kind, const Tensor& a, const Tensor& b) {
  if (!IsBinary(kind)) return Unary(kind, a);
  return Binary(kind, a, b);
}

Tensor elementwise(Elementwise kind, const Tensor& a) {
  if (IsBinary(kind)) {
    throw ShapeError(std::string(KindName(kind)) + " needs two operands");
  }
  return Unary(kind, a);
}

Tensor add(const Tensor& a, const Tensor& b) { return Binary(Elementwise::kAdd, a, b); }
Tensor sub(const Tensor& a, const Tensor& b) { return Binary(Elementwise::kSub, a, b); }
Tensor mul(const Tensor& a, const Tensor& b) { return Binary(Elementwise::kMul, a, b); }
Tensor div(const Tensor& a, const Tensor& b) { return Binary(Elementwise::kDiv, a, b); }
Tensor add(const Tensor& a, double b) { return add(a, Tensor::scalar(b)); }
Tensor mul(const Tensor& a, double b) { return mul(a, Tensor::scalar(b)); }
Tensor pow2(const Tensor& a) { return Unary(Elementwise::kPow2, a); }
Tensor abs(const Tensor& a) { return Unary(Elementwise::kAbs, a); }
Tensor exp(const Tensor& a) { return Unary(Elementwise::kExp, a); }
Tensor sqrt(const Tensor& a) { return Unary(Elementwise::kSqrt, a); }
Tensor neg(const Tensor& a) { return Unary(Elementwise::kNeg, a); }
Tensor max0(const Tensor& a) { return Unary(Elementwise::kMax0, a); }

bool mask_broadcastable(const Shape& a, const Shape& mask) {
  if (shape_size(mask) == 1) return true;
  if (mask == a) return true;
  if (mask.size() != a.size() || a.empty()) return false;
  if (mask[0] != 1) return false;
  return std::equal(mask.begin() + 1, mask.end(), a.begin() + 1);
}

Tensor reduce(Reduction kind, const Tensor& a, const Tensor* mask) {
  switch (kind) {
    case Reduction::kSum: return sum(a);
    case Reduction::kMean: return mean(a);
    case Reduction::kMaskedMean:
      if (mask == nullptr) throw ShapeError("masked_mean needs a mask");
      return masked_mean(a, *mask);
  }
  return sum(a);
}

Tensor sum(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  return make_result({}, {s}, {&a}, [](std::span<const double> up, GradSink& sink) {
    for (double& g : sink.input(0)) g += up[0];
  });
}

Tensor mean(const Tensor& a) {
  double s = 0.0;
  for (double x : a.values()) s += x;
  const double n = static_cast<double>(a.size());
  return make_result({}, {s / n}, {&a}, [n](std::span<const double> up, GradSink& sink) {
    for (double& g : sink.input(0)) g += up[0] / n;
  });
}

Tensor masked_mean(const Tensor& a, const Tensor& mask) {
  CheckMask("masked_mean", a, mask);
  if (mask.requires_grad()) throw TapeError("masked_mean: mask must be constant");
  auto av = a.values();
  auto mv = mask.values();
  const std::size_t m = mv.size();
  double mass = 0.0;
  for (double w : mv) {
    if (w < 0.0 || w > 1.0) throw DomainError("masked_mean: mask values must lie in [0,1]");
    mass += w;
  }
  if (mass == 0.0) {
    Tensor r = make_result({}, {0.0}, {&a}, [](std::span<const double>, GradSink&) {});
    return with_warning(std::move(r), "masked_mean: empty mask");
  }
  const double denom = std::max(mass * static_cast<double>(av.size() / m), kMaskEps);
  double s = 0.0;
  for (std::size_t i = 0; i < av.size(); ++i) s += mv[i % m] * av[i];
  Tensor md = mask.detach();
  return make_result({}, {s / denom}, {&a},
                     [md, denom](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       auto mv = md.values();
                       const std::size_t m = mv.size();
                       const double scale = up[0] / denom;
                       for (std::size_t i = 0; i < g.size(); ++i) g[i] += scale * mv[i % m];
                     });
}

Tensor mul_mask(const Tensor& a, const Tensor& mask) {
  CheckMask("mul_mask", a, mask);
  if (mask.requires_grad()) throw TapeError("mul_mask: mask must be constant");
  auto av = a.values();
  auto mv = mask.values();
  const std::size_t m = mv.size();
  std::vector<double> out(av.size());
  ForEach(av.size(), [&](std::size_t i) { out[i] = av[i] * mv[i % m]; });
  Tensor md = mask.detach();
  return make_result(a.shape(), std::move(out), {&a},
                     [md](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       auto mv = md.values();
                       const std::size_t m = mv.size();
                       for (std::size_t i = 0; i < g.size(); ++i) g[i] += up[i] * mv[i % m];
                     });
}

Tensor channel_mix(const Tensor& a, std::span<const double> weights) {
  if (a.rank() < 1 || a.dim(0) != weights.size()) {
    throw ShapeError("channel_mix: " + std::to_string(weights.size()) +
                     " weights for shape " + shape_string(a.shape()));
  }
  const std::size_t c = a.dim(0);
  const std::size_t plane = a.size() / c;
  Shape shape = a.shape();
  shape[0] = 1;
  auto av = a.values();
  std::vector<double> out(plane, 0.0);
  for (std::size_t k = 0; k < c; ++k) {
    for (std::size_t p = 0; p < plane; ++p) out[p] += weights[k] * av[k * plane + p];
  }
  std::vector<double> w(weights.begin(), weights.end());
  return make_result(shape, std::move(out), {&a},
                     [w, plane](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t k = 0; k < w.size(); ++k) {
                         for (std::size_t p = 0; p < plane; ++p) g[k * plane + p] += w[k] * up[p];
                       }
                     });
}

Tensor sum_channels(const Tensor& a) {
  if (a.rank() < 1) throw ShapeError("sum_channels needs rank >= 1");
  std::vector<double> ones(a.dim(0), 1.0);
  return channel_mix(a, ones);
}

Tensor flip_horizontal(const Tensor& a) {
  if (a.rank() < 2) {
    throw ShapeError("flip_horizontal needs rank >= 2, got " + shape_string(a.shape()));
  }
  const std::size_t w = Width(a);
  const std::size_t rows = a.size() / w;
  auto av = a.values();
  std::vector<double> out(a.size());
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t x = 0; x < w; ++x) out[r * w + x] = av[r * w + (w - 1 - x)];
  }
  return make_result(a.shape(), std::move(out), {&a},
                     [w, rows](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t r = 0; r < rows; ++r) {
                         for (std::size_t x = 0; x < w; ++x) g[r * w + (w - 1 - x)] += up[r * w + x];
                       }
                     });
}

Tensor shift(const Tensor& a, int dx, int dy) {
  if (dx < -1 || dx > 1 || dy < -1 || dy > 1) {
    throw DomainError("shift: |dx| and |dy| must be at most 1");
  }
  if (a.rank() < 2) throw ShapeError("shift needs rank >= 2, got " + shape_string(a.shape()));
  const long w = static_cast<long>(Width(a));
  const long h = static_cast<long>(Height(a));
  const std::size_t planes = a.size() / static_cast<std::size_t>(w * h);
  auto av = a.values();
  std::vector<double> out(a.size(), 0.0);
  for (std::size_t p = 0; p < planes; ++p) {
    const std::size_t base = p * static_cast<std::size_t>(w * h);
    for (long y = 0; y < h; ++y) {
      const long sy = y - dy;
      if (sy < 0 || sy >= h) continue;
      for (long x = 0; x < w; ++x) {
        const long sx = x - dx;
        if (sx < 0 || sx >= w) continue;
        out[base + static_cast<std::size_t>(y * w + x)] = av[base + static_cast<std::size_t>(sy * w + sx)];
      }
    }
  }
  return make_result(a.shape(), std::move(out), {&a},
                     [w, h, planes, dx, dy](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t p = 0; p < planes; ++p) {
                         const std::size_t base = p * static_cast<std::size_t>(w * h);
                         for (long y = 0; y < h; ++y) {
                           const long sy = y - dy;
                           if (sy < 0 || sy >= h) continue;
                           for (long x = 0; x < w; ++x) {
                             const long sx = x - dx;
                             if (sx < 0 || sx >= w) continue;
                             g[base + static_cast<std::size_t>(sy * w + sx)] +=
                                 up[base + static_cast<std::size_t>(y * w + x)];
                           }
                         }
                       }
                     });
}

namespace {

struct BilinearTap {
  std::size_t i00, i01, i10, i11;
  double w00, w01, w10, w11;
};

BilinearTap MakeTap(double x, double y, std::size_t h, std::size_t w) {
  x = std::clamp(x, 0.0, static_cast<double>(w - 1));
  y = std::clamp(y, 0.0, static_cast<double>(h - 1));
  std::size_t x0 = static_cast<std::size_t>(std::floor(x));
  std::size_t y0 = static_cast<std::size_t>(std::floor(y));
  x0 = std::min(x0, w - 1);
  y0 = std::min(y0, h - 1);
  const std::size_t x1 = std::min(x0 + 1, w - 1);
  const std::size_t y1 = std::min(y0 + 1, h - 1);
  const double fx = x - static_cast<double>(x0);
  const double fy = y - static_cast<double>(y0);
  BilinearTap t;
  t.i00 = y0 * w + x0;
  t.i01 = y0 * w + x1;
  t.i10 = y1 * w + x0;
  t.i11 = y1 * w + x1;
  t.w00 = (1 - fx) * (1 - fy);
  t.w01 = fx * (1 - fy);
  t.w10 = (1 - fx) * fy;
  t.w11 = fx * fy;
  return t;
}

}  // namespace

Tensor bilinear_sample(const Tensor& map, const Tensor& coords) {
  if (map.rank() != 3) throw ShapeError("bilinear_sample: map must be C x H x W");
  if (coords.rank() != 2 || coords.dim(1) != 2) {
    throw ShapeError("bilinear_sample: coords must be K x 2, got " + shape_string(coords.shape()));
  }
  const std::size_t c = map.dim(0), h = map.dim(1), w = map.dim(2);
  const std::size_t k = coords.dim(0);
  auto cv = coords.values();
  for (double v : cv) {
    if (!std::isfinite(v)) throw DomainError("bilinear_sample: non-finite coordinate");
  }
  auto taps = std::make_shared<std::vector<BilinearTap>>(k);
  for (std::size_t i = 0; i < k; ++i) (*taps)[i] = MakeTap(cv[2 * i], cv[2 * i + 1], h, w);
  auto mv = map.values();
  const std::size_t plane = h * w;
  std::vector<double> out(c * k);
  parallel_for(0, k, 4096, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t ch = 0; ch < c; ++ch) {
      const double* m = mv.data() + ch * plane;
      for (std::size_t i = lo; i < hi; ++i) {
        const BilinearTap& t = (*taps)[i];
        out[ch * k + i] = t.w00 * m[t.i00] + t.w01 * m[t.i01] + t.w10 * m[t.i10] + t.w11 * m[t.i11];
      }
    }
  });
  return make_result({c, k}, std::move(out), {&map},
                     [taps, c, k, plane](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t ch = 0; ch < c; ++ch) {
                         double* m = g.data() + ch * plane;
                         const double* u = up.data() + ch * k;
                         for (std::size_t i = 0; i < k; ++i) {
                           const BilinearTap& t = (*taps)[i];
                           m[t.i00] += t.w00 * u[i];
                           m[t.i01] += t.w01 * u[i];
                           m[t.i10] += t.w10 * u[i];
                           m[t.i11] += t.w11 * u[i];
                         }
                       }
                     });
}

Tensor linear_map(const Tensor& basis, const Tensor& coeff, const Tensor& offset) {
  if (basis.rank() != 2) throw ShapeError("linear_map: basis must be M x K");
  const std::size_t m = basis.dim(0), k = basis.dim(1);
  if (coeff.size() != k || offset.size() != m) {
    throw ShapeError("linear_map: basis " + shape_string(basis.shape()) + ", coeff " +
                     shape_string(coeff.shape()) + ", offset " + shape_string(offset.shape()));
  }
  auto bv = basis.values();
  auto cv = coeff.values();
  auto ov = offset.values();
  std::vector<double> out(m);
  parallel_for(0, m, 2048, [&](std::size_t lo, std::size_t hi) {
    for (std::size_t r = lo; r < hi; ++r) {
      const double* row = bv.data() + r * k;
      double s = ov[r];
      for (std::size_t j = 0; j < k; ++j) s += row[j] * cv[j];
      out[r] = s;
    }
  });
  Tensor bd = basis.detach(), cd = coeff.detach();
  return make_result({m}, std::move(out), {&basis, &coeff, &offset},
                     [bd, cd, m, k](std::span<const double> up, GradSink& sink) {
                       auto bv = bd.values();
                       if (sink.wants(0)) {
                         auto g = sink.input(0);
                         auto cv = cd.values();
                         for (std::size_t r = 0; r < m; ++r) {
                           for (std::size_t j = 0; j < k; ++j) g[r * k + j] += up[r] * cv[j];
                         }
                       }
                       if (sink.wants(1)) {
                         auto g = sink.input(1);
                         for (std::size_t r = 0; r < m; ++r) {
                           const double* row = bv.data() + r * k;
                           const double u = up[r];
                           for (std::size_t j = 0; j < k; ++j) g[j] += row[j] * u;
                         }
                       }
                       if (sink.wants(2)) {
                         auto g = sink.input(2);
                         for (std::size_t r = 0; r < m; ++r) g[r] += up[r];
                       }
                     });
}

Tensor transpose(const Tensor& a) {
  if (a.rank() != 2) throw ShapeError("transpose needs a 2-D tensor");
  const std::size_t r = a.dim(0), c = a.dim(1);
  auto av = a.values();
  std::vector<double> out(a.size());
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = av[i * c + j];
  }
  return make_result({c, r}, std::move(out), {&a},
                     [r, c](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < c; ++j) g[i * c + j] += up[j * r + i];
                       }
                     });
}

Tensor avg_pool(const Tensor& a, std::size_t out_h, std::size_t out_w) {
  if (a.rank() != 3) throw ShapeError("avg_pool: input must be C x H x W");
  const std::size_t c = a.dim(0), h = a.dim(1), w = a.dim(2);
  if (out_h == 0 || out_w == 0 || out_h > h || out_w > w) {
    throw ShapeError("avg_pool: cannot pool " + shape_string(a.shape()) + " to " +
                     std::to_string(out_h) + "x" + std::to_string(out_w));
  }
  // bin[i] owns source rows/cols [edge(i), edge(i+1)).
  auto edges = [](std::size_t n, std::size_t bins) {
    std::vector<std::size_t> e(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) e[i] = i * n / bins;
    return e;
  };
  const auto ey = edges(h, out_h), ex = edges(w, out_w);
  auto av = a.values();
  std::vector<double> out(c * out_h * out_w, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t by = 0; by < out_h; ++by) {
      for (std::size_t bx = 0; bx < out_w; ++bx) {
        double s = 0.0;
        for (std::size_t y = ey[by]; y < ey[by + 1]; ++y) {
          for (std::size_t x = ex[bx]; x < ex[bx + 1]; ++x) s += av[(ch * h + y) * w + x];
        }
        const double n = static_cast<double>((ey[by + 1] - ey[by]) * (ex[bx + 1] - ex[bx]));
        out[(ch * out_h + by) * out_w + bx] = s / n;
      }
    }
  }
  return make_result({c, out_h, out_w}, std::move(out), {&a},
                     [c, h, w, out_h, out_w, ey, ex](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t ch = 0; ch < c; ++ch) {
                         for (std::size_t by = 0; by < out_h; ++by) {
                           for (std::size_t bx = 0; bx < out_w; ++bx) {
                             const double n = static_cast<double>((ey[by + 1] - ey[by]) *
                                                                  (ex[bx + 1] - ex[bx]));
                             const double d = up[(ch * out_h + by) * out_w + bx] / n;
                             for (std::size_t y = ey[by]; y < ey[by + 1]; ++y) {
                               for (std::size_t x = ex[bx]; x < ex[bx + 1]; ++x) g[(ch * h + y) * w + x] += d;
                             }
                           }
                         }
                       }
                     });
}

Tensor scatter_columns(const Tensor& values, std::span<const std::size_t> index,
                       std::size_t columns) {
  if (values.rank() != 2 || values.dim(1) != index.size()) {
    throw ShapeError("scatter_columns: values " + shape_string(values.shape()) + " for " +
                     std::to_string(index.size()) + " indices");
  }
  const std::size_t c = values.dim(0), k = index.size();
  for (std::size_t i : index) {
    if (i >= columns) throw ShapeError("scatter_columns: index out of range");
  }
  auto vv = values.values();
  std::vector<double> out(c * columns, 0.0);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < k; ++i) out[ch * columns + index[i]] = vv[ch * k + i];
  }
  auto idx = std::make_shared<std::vector<std::size_t>>(index.begin(), index.end());
  return make_result({c, columns}, std::move(out), {&values},
                     [idx, c, k, columns](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t ch = 0; ch < c; ++ch) {
                         for (std::size_t i = 0; i < k; ++i) g[ch * k + i] += up[ch * columns + (*idx)[i]];
                       }
                     });
}

Tensor gather_columns(const Tensor& a, std::span<const std::size_t> index) {
  if (a.rank() != 2) throw ShapeError("gather_columns needs a 2-D tensor");
  const std::size_t c = a.dim(0), p = a.dim(1), k = index.size();
  for (std::size_t i : index) {
    if (i >= p) throw ShapeError("gather_columns: index out of range");
  }
  auto av = a.values();
  std::vector<double> out(c * k);
  for (std::size_t ch = 0; ch < c; ++ch) {
    for (std::size_t i = 0; i < k; ++i) out[ch * k + i] = av[ch * p + index[i]];
  }
  auto idx = std::make_shared<std::vector<std::size_t>>(index.begin(), index.end());
  return make_result({c, k}, std::move(out), {&a},
                     [idx, c, k, p](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t ch = 0; ch < c; ++ch) {
                         for (std::size_t i = 0; i < k; ++i) g[ch * p + (*idx)[i]] += up[ch * k + i];
                       }
                     });
}

Tensor gather_rows(const Tensor& a, std::span<const std::size_t> index) {
  if (a.rank() != 2) throw ShapeError("gather_rows needs a 2-D tensor");
  const std::size_t n = a.dim(0), c = a.dim(1), k = index.size();
  for (std::size_t i : index) {
    if (i >= n) throw ShapeError("gather_rows: index out of range");
  }
  auto av = a.values();
  std::vector<double> out(k * c);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t ch = 0; ch < c; ++ch) out[i * c + ch] = av[index[i] * c + ch];
  }
  auto idx = std::make_shared<std::vector<std::size_t>>(index.begin(), index.end());
  return make_result({k, c}, std::move(out), {&a},
                     [idx, c, k](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t i = 0; i < k; ++i) {
                         for (std::size_t ch = 0; ch < c; ++ch) g[(*idx)[i] * c + ch] += up[i * c + ch];
                       }
                     });
}

}  // namespace facetex
