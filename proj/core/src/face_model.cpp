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

#include "facetex/face_model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "facetex/error.hpp"
#include "facetex/ops.hpp"

namespace facetex {

namespace {

bool SameTensor(const Tensor& a, const Tensor& b) {
  return a.shape() == b.shape() && std::equal(a.values().begin(), a.values().end(),
                                              b.values().begin(), b.values().end());
}

double Edge(double ax, double ay, double bx, double by, double px, double py) {
  return (bx - ax) * (py - ay) - (by - ay) * (px - ax);
}

}  // namespace

bool operator==(const MorphableModel& a, const MorphableModel& b) {
  return a.vertex_count == b.vertex_count && a.triangles == b.triangles &&
         SameTensor(a.mean_shape, b.mean_shape) && SameTensor(a.mean_albedo, b.mean_albedo) &&
         SameTensor(a.id_basis, b.id_basis) && SameTensor(a.exp_basis, b.exp_basis) &&
         SameTensor(a.alb_basis, b.alb_basis) && a.uv == b.uv;
}

void validate(const MorphableModel& model) {
  const std::size_t n = model.vertex_count;
  const std::size_t m = 3 * n;
  auto need = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
  };
  need(n > 0, "model has no vertices");
  need(model.mean_shape.shape() == Shape{m}, "mean_shape must have 3N entries");
  need(model.mean_albedo.shape() == Shape{m}, "mean_albedo must have 3N entries");
  need(model.id_basis.rank() == 2 && model.id_basis.dim(0) == m, "identity basis must be 3N x k");
  need(model.exp_basis.rank() == 2 && model.exp_basis.dim(0) == m, "expression basis must be 3N x k");
  need(model.alb_basis.rank() == 2 && model.alb_basis.dim(0) == m, "albedo basis must be 3N x k");
  need(model.uv.size() == 2 * n, "uv must have 2N entries");
  for (std::size_t t = 0; t < model.triangles.size(); ++t) {
    for (std::uint32_t idx : model.triangles[t]) {
      if (idx >= n) {
        throw ValidationError("triangle " + std::to_string(t) + " references vertex " +
                              std::to_string(idx) + " but the model has " +
                              std::to_string(n) + " vertices");
      }
    }
  }
  for (std::size_t i = 0; i < m; ++i) {
    const double a = model.mean_albedo[i];
    if (!(a >= 0.0 && a <= 1.0)) {
      throw ValidationError("mean_albedo entry " + std::to_string(i) + " = " +
                            std::to_string(a) + " is outside [0,1]");
    }
  }
  for (std::size_t i = 0; i < model.uv.size(); ++i) {
    const double u = model.uv[i];
    if (!(u >= 0.0 && u <= 1.0)) {
      throw ValidationError("uv entry " + std::to_string(i) + " is outside [0,1]");
    }
  }
}

FaceParams FaceParams::neutral(const MorphableModel& model, double depth) {
  FaceParams p;
  p.theta_id.assign(model.id_dims(), 0.0);
  p.theta_exp.assign(model.exp_dims(), 0.0);
  p.theta_alb.assign(model.alb_dims(), 0.0);
  p.theta_light.assign(kLightDims, 0.0);
  p.pose = {0.0, 0.0, 0.0, 0.0, 0.0, depth};
  return p;
}

Tensor decode_shape(const MorphableModel& model, const Tensor& theta_id,
                    const Tensor& theta_exp) {
  if (theta_id.size() != model.id_dims() || theta_exp.size() != model.exp_dims()) {
    throw ShapeError("decode_shape: expected " + std::to_string(model.id_dims()) + "+" +
                     std::to_string(model.exp_dims()) + " coefficients, got " +
                     std::to_string(theta_id.size()) + "+" + std::to_string(theta_exp.size()));
  }
  Tensor with_id = linear_map(model.id_basis, theta_id, model.mean_shape);
  return linear_map(model.exp_basis, theta_exp, with_id).reshape({model.vertex_count, 3});
}

Tensor decode_albedo(const MorphableModel& model, const Tensor& theta_alb) {
  if (theta_alb.size() != model.alb_dims()) {
    throw ShapeError("decode_albedo: expected " + std::to_string(model.alb_dims()) +
                     " coefficients, got " + std::to_string(theta_alb.size()));
  }
  return linear_map(model.alb_basis, theta_alb, model.mean_albedo)
      .reshape({model.vertex_count, 3});
}

Tensor UvRaster::mask() const {
  std::vector<double> m(height * width, 0.0);
  for (std::size_t p : covered) m[p] = 1.0;
  return Tensor::constant({1, height, width}, std::move(m));
}

UvRaster rasterize_uv(const MorphableModel& model, std::size_t height, std::size_t width) {
  if (height < 8 || width < 8) throw ShapeError("uv maps must be at least 8 x 8");
  UvRaster r;
  r.height = height;
  r.width = width;
  r.triangle.assign(height * width, -1);
  r.bary.assign(height * width, {0.0, 0.0, 0.0});
  const double fw = static_cast<double>(width), fh = static_cast<double>(height);
  for (std::size_t t = 0; t < model.triangles.size(); ++t) {
    const Triangle& tri = model.triangles[t];
    // Texel coordinates: x = u W - 0.5, y = v H - 0.5, centers on integers.
    double px[3], py[3];
    for (int k = 0; k < 3; ++k) {
      px[k] = model.uv[2 * tri[k]] * fw - 0.5;
      py[k] = model.uv[2 * tri[k] + 1] * fh - 0.5;
    }
    const double area_uv = Edge(px[0], py[0], px[1], py[1], px[2], py[2]) / (fw * fh);
    if (std::abs(area_uv) < 1e-12) {
      r.degenerate.push_back(t);
      continue;
    }
    const double area = Edge(px[0], py[0], px[1], py[1], px[2], py[2]);
    const double sign = area > 0.0 ? 1.0 : -1.0;
    const long x0 = std::max(0L, static_cast<long>(std::ceil(std::min({px[0], px[1], px[2]}))));
    const long x1 = std::min(static_cast<long>(width) - 1,
                             static_cast<long>(std::floor(std::max({px[0], px[1], px[2]}))));
    const long y0 = std::max(0L, static_cast<long>(std::ceil(std::min({py[0], py[1], py[2]}))));
    const long y1 = std::min(static_cast<long>(height) - 1,
                             static_cast<long>(std::floor(std::max({py[0], py[1], py[2]}))));
    for (long y = y0; y <= y1; ++y) {
      for (long x = x0; x <= x1; ++x) {
        const double cx = static_cast<double>(x), cy = static_cast<double>(y);
        const double w0 = Edge(px[1], py[1], px[2], py[2], cx, cy);
        const double w1 = Edge(px[2], py[2], px[0], py[0], cx, cy);
        const double w2 = Edge(px[0], py[0], px[1], py[1], cx, cy);
        if (w0 * sign < 0.0 || w1 * sign < 0.0 || w2 * sign < 0.0) continue;
        const std::size_t p = static_cast<std::size_t>(y) * width + static_cast<std::size_t>(x);
        if (r.triangle[p] >= 0) continue;  // lower triangle index wins
        r.triangle[p] = static_cast<std::int32_t>(t);
        r.bary[p] = {w0 / area, w1 / area, w2 / area};
      }
    }
  }
  for (std::size_t p = 0; p < r.triangle.size(); ++p) {
    if (r.triangle[p] >= 0) r.covered.push_back(p);
  }
  return r;
}

Tensor bake_vertex_attribute(const UvRaster& raster, const MorphableModel& model,
                             const Tensor& attribute) {
  if (attribute.rank() != 2 || attribute.dim(0) != model.vertex_count) {
    throw ShapeError("bake_vertex_attribute: attribute must be N x C, got " +
                     shape_string(attribute.shape()));
  }
  const std::size_t c = attribute.dim(1);
  const std::size_t plane = raster.height * raster.width;
  auto av = attribute.values();
  std::vector<double> out(c * plane, 0.0);
  for (std::size_t p : raster.covered) {
    const Triangle& tri = model.triangles[static_cast<std::size_t>(raster.triangle[p])];
    const auto& b = raster.bary[p];
    for (std::size_t ch = 0; ch < c; ++ch) {
      out[ch * plane + p] = b[0] * av[tri[0] * c + ch] + b[1] * av[tri[1] * c + ch] +
                            b[2] * av[tri[2] * c + ch];
    }
  }
  // The raster and triangles are captured by value; both are small next to
  // the maps they produce.
  auto tris = std::make_shared<std::vector<Triangle>>(model.triangles);
  auto ras = std::make_shared<UvRaster>(raster);
  return make_result({c, raster.height, raster.width}, std::move(out), {&attribute},
                     [tris, ras, c, plane](std::span<const double> up, GradSink& sink) {
                       auto g = sink.input(0);
                       for (std::size_t p : ras->covered) {
                         const Triangle& tri = (*tris)[static_cast<std::size_t>(ras->triangle[p])];
                         const auto& b = ras->bary[p];
                         for (std::size_t ch = 0; ch < c; ++ch) {
                           const double u = up[ch * plane + p];
                           g[tri[0] * c + ch] += b[0] * u;
                           g[tri[1] * c + ch] += b[1] * u;
                           g[tri[2] * c + ch] += b[2] * u;
                         }
                       }
                     });
}

PriorAlbedoMap bake_prior_albedo_map(const MorphableModel& model, const Tensor& theta_alb,
                                     std::size_t height, std::size_t width) {
  UvRaster raster = rasterize_uv(model, height, width);
  PriorAlbedoMap out;
  out.albedo = bake_vertex_attribute(raster, model, decode_albedo(model, theta_alb));
  out.mask = raster.mask();
  for (std::size_t t : raster.degenerate) {
    out.warnings.push_back("degenerate uv triangle " + std::to_string(t) + " skipped");
  }
  return out;
}

std::vector<double> mirror_albedo_coefficients(const std::vector<double>& theta_alb) {
  std::vector<double> out = theta_alb;
  for (std::size_t k = 1; k < out.size(); k += 2) out[k] = -out[k];
  return out;
}

std::vector<std::size_t> mirror_vertices(const MorphableModel& model) {
  // Quantize (u, v) so that mirrored coordinates hash identically.
  auto key = [](double u, double v) {
    return std::make_pair(std::llround(u * 1e8), std::llround(v * 1e8));
  };
  std::map<std::pair<long long, long long>, std::size_t> index;
  for (std::size_t i = 0; i < model.vertex_count; ++i) {
    index.emplace(key(model.uv[2 * i], model.uv[2 * i + 1]), i);
  }
  std::vector<std::size_t> mirror(model.vertex_count);
  for (std::size_t i = 0; i < model.vertex_count; ++i) {
    auto it = index.find(key(1.0 - model.uv[2 * i], model.uv[2 * i + 1]));
    if (it == index.end()) {
      throw ValidationError("vertex " + std::to_string(i) + " has no mirrored uv partner");
    }
    mirror[i] = it->second;
  }
  return mirror;
}

namespace {

constexpr char kModelMagic[4] = {'F', 'M', 'M', '1'};

class ByteWriter {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void raw(const char* p, std::size_t n) { bytes_.insert(bytes_.end(), p, p + n); }
  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class ByteReader {
 public:
  explicit ByteReader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}
  std::size_t offset() const { return pos_; }
  void need(std::size_t n, const char* what) {
    if (bytes_.size() - pos_ < n) {
      throw ParseError(std::string("truncated file while reading ") + what, pos_);
    }
  }
  std::uint32_t u32(const char* what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64(const char* what) {
    need(8, what);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(v);
  }
  std::vector<double> f64s(std::size_t n, const char* what) {
    if (n > (bytes_.size() - pos_) / 8) {
      throw ParseError(std::string("truncated file while reading ") + what, pos_);
    }
    std::vector<double> out(n);
    for (auto& d : out) d = f64(what);
    return out;
  }
  const std::uint8_t* here() const { return bytes_.data() + pos_; }
  void skip(std::size_t n) { pos_ += n; }
  bool done() const { return pos_ == bytes_.size(); }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

void WriteBasis(ByteWriter& w, const Tensor& basis) {
  const std::size_t m = basis.dim(0), k = basis.dim(1);
  auto v = basis.values();
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t r = 0; r < m; ++r) w.f64(v[r * k + j]);
  }
}

Tensor ReadBasis(ByteReader& r, std::size_t m, std::size_t k, const char* what) {
  std::vector<double> cols = r.f64s(m * k, what);
  std::vector<double> rows(m * k);
  for (std::size_t j = 0; j < k; ++j) {
    for (std::size_t i = 0; i < m; ++i) rows[i * k + j] = cols[j * m + i];
  }
  return Tensor::constant({m, k}, std::move(rows));
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const MorphableModel& model) {
  validate(model);
  ByteWriter w;
  w.raw(kModelMagic, 4);
  w.u32(static_cast<std::uint32_t>(model.vertex_count));
  w.u32(static_cast<std::uint32_t>(model.triangles.size()));
  w.u32(static_cast<std::uint32_t>(model.id_dims()));
  w.u32(static_cast<std::uint32_t>(model.exp_dims()));
  w.u32(static_cast<std::uint32_t>(model.alb_dims()));
  for (double d : model.mean_shape.values()) w.f64(d);
  for (double d : model.mean_albedo.values()) w.f64(d);
  WriteBasis(w, model.id_basis);
  WriteBasis(w, model.exp_basis);
  WriteBasis(w, model.alb_basis);
  for (double d : model.uv) w.f64(d);
  for (const Triangle& t : model.triangles) {
    for (std::uint32_t i : t) w.u32(i);
  }
  return w.take();
}

MorphableModel parse_model(const std::vector<std::uint8_t>& bytes) {
  ByteReader r(bytes);
  r.need(4, "magic");
  if (std::memcmp(r.here(), kModelMagic, 4) != 0) throw ParseError("bad magic, expected FMM1", 0);
  r.skip(4);
  MorphableModel m;
  m.vertex_count = r.u32("vertex count");
  const std::size_t tris = r.u32("triangle count");
  const std::size_t kid = r.u32("identity width");
  const std::size_t kexp = r.u32("expression width");
  const std::size_t kalb = r.u32("albedo width");
  if (m.vertex_count == 0) throw ParseError("vertex count must be positive", 4);
  if (kid == 0 || kexp == 0 || kalb == 0) throw ParseError("basis widths must be positive", 12);
  const std::size_t n3 = 3 * m.vertex_count;
  m.mean_shape = Tensor::constant({n3}, r.f64s(n3, "mean shape"));
  m.mean_albedo = Tensor::constant({n3}, r.f64s(n3, "mean albedo"));
  m.id_basis = ReadBasis(r, n3, kid, "identity basis");
  m.exp_basis = ReadBasis(r, n3, kexp, "expression basis");
  m.alb_basis = ReadBasis(r, n3, kalb, "albedo basis");
  m.uv = r.f64s(2 * m.vertex_count, "uv coordinates");
  m.triangles.resize(tris);
  for (auto& t : m.triangles) {
    for (auto& i : t) i = r.u32("triangles");
  }
  if (!r.done()) throw ParseError("trailing bytes after triangle list", r.offset());
  validate(m);
  return m;
}

void save_model(const MorphableModel& model, const std::filesystem::path& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

MorphableModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_model(bytes);
}

void write_obj(const std::filesystem::path& path, const Tensor& positions,
               const MorphableModel& model) {
  if (positions.rank() != 2 || positions.dim(0) != model.vertex_count || positions.dim(1) != 3) {
    throw ShapeError("write_obj: positions must be N x 3");
  }
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << std::setprecision(9);
  auto p = positions.values();
  for (std::size_t i = 0; i < model.vertex_count; ++i) {
    out << "v " << p[3 * i] << ' ' << p[3 * i + 1] << ' ' << p[3 * i + 2] << '\n';
  }
  // OBJ texture space has v pointing up.
  for (std::size_t i = 0; i < model.vertex_count; ++i) {
    out << "vt " << model.uv[2 * i] << ' ' << 1.0 - model.uv[2 * i + 1] << '\n';
  }
  for (const Triangle& t : model.triangles) {
    out << "f";
    for (std::uint32_t i : t) out << ' ' << i + 1 << '/' << i + 1;
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Tensor dilate_uv_map(const Tensor& map, const Tensor& mask, std::size_t iterations) {
  if (map.rank() != 3 || mask.shape() != Shape{1, map.dim(1), map.dim(2)}) {
    throw ShapeError("dilate_uv_map: expected C x H x W map and 1 x H x W mask");
  }
  const std::size_t c = map.dim(0), h = map.dim(1), w = map.dim(2), plane = h * w;
  std::vector<double> out = map.to_vector();
  std::vector<std::uint8_t> filled(plane);
  for (std::size_t p = 0; p < plane; ++p) filled[p] = mask[p] > 0.5 ? 1 : 0;
  for (std::size_t it = 0; it < iterations; ++it) {
    std::vector<std::uint8_t> next = filled;
    std::vector<double> grown = out;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const std::size_t p = y * w + x;
        if (filled[p]) continue;
        std::size_t nbr[4];
        std::size_t n = 0;
        if (x > 0 && filled[p - 1]) nbr[n++] = p - 1;
        if (x + 1 < w && filled[p + 1]) nbr[n++] = p + 1;
        if (y > 0 && filled[p - w]) nbr[n++] = p - w;
        if (y + 1 < h && filled[p + w]) nbr[n++] = p + w;
        if (n == 0) continue;
        for (std::size_t ch = 0; ch < c; ++ch) {
          double s = 0.0;
          for (std::size_t k = 0; k < n; ++k) s += out[ch * plane + nbr[k]];
          grown[ch * plane + p] = s / static_cast<double>(n);
        }
        next[p] = 1;
      }
    }
    out.swap(grown);
    filled.swap(next);
  }
  return Tensor::constant(map.shape(), std::move(out));
}

}  // namespace facetex
