#include "gptpinn/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "gptpinn/error.hpp"
#include "vecmath.hpp"

namespace gptpinn {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kCos:
      return "cos";
  }
  return "unknown";
}

Activation activation_from_string(std::string_view name) {
  if (name == "tanh") return Activation::kTanh;
  if (name == "cos") return Activation::kCos;
  throw Error("unknown activation '" + std::string(name) + "'");
}

double ExtendedState::operator[](int channel) const {
  switch (channel) {
    case kU:
      return u;
    case kUx:
      return u_x;
    case kUt:
      return u_t;
    case kUxx:
      return u_xx;
    case kUtt:
      return u_tt;
  }
  throw Error("channel index out of range");
}

PointBatch PointBatch::single(double x, double t) {
  PointBatch p;
  p.x = Vector::Constant(1, x);
  p.t = Vector::Constant(1, t);
  return p;
}

ExtendedState ExtendedBatch::at(Eigen::Index p) const {
  auto get = [&](int ch) {
    return fields[ch].size() > 0 ? fields[ch](p) : 0.0;
  };
  return {get(kU), get(kUx), get(kUt), get(kUxx), get(kUtt)};
}

// ---------------------------------------------------------------------------
// MlpParams

MlpParams::MlpParams(std::vector<int> dims, Activation activation)
    : dims_(std::move(dims)), activation_(activation) {
  validate_and_index();
  theta_ = Vector::Zero(static_cast<Eigen::Index>(parameter_count(dims_)));
}

MlpParams::MlpParams(std::vector<int> dims, Activation activation,
                     Vector theta)
    : dims_(std::move(dims)), activation_(activation), theta_(std::move(theta)) {
  validate_and_index();
  if (static_cast<std::size_t>(theta_.size()) != parameter_count(dims_)) {
    throw Error("parameter vector length does not match architecture");
  }
}

void MlpParams::validate_and_index() {
  if (dims_.size() < 2) throw Error("network needs at least two layers");
  if (dims_.front() != 2) throw Error("network input width must be 2 (x, t)");
  if (dims_.back() != 1) throw Error("network output width must be 1");
  for (int d : dims_) {
    if (d <= 0) throw Error("layer widths must be positive");
  }
  offsets_.clear();
  std::size_t offset = 0;
  for (std::size_t k = 0; k + 1 < dims_.size(); ++k) {
    offsets_.push_back(offset);
    offset += static_cast<std::size_t>(dims_[k] + 1) * dims_[k + 1];
  }
}

std::size_t MlpParams::parameter_count(std::span<const int> dims) {
  std::size_t m = 0;
  for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
    m += static_cast<std::size_t>(dims[k] + 1) * dims[k + 1];
  }
  return m;
}

MlpParams MlpParams::glorot(std::vector<int> dims, Activation activation,
                            std::uint64_t seed) {
  MlpParams p(std::move(dims), activation);
  std::mt19937_64 rng(seed);
  for (std::size_t k = 0; k < p.layer_count(); ++k) {
    const double limit =
        std::sqrt(6.0 / static_cast<double>(p.dims_[k] + p.dims_[k + 1]));
    std::uniform_real_distribution<double> dist(-limit, limit);
    auto w = p.weight(k);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = dist(rng);
    }
  }
  return p;
}

Eigen::Map<const RowMatrix> MlpParams::weight(std::size_t layer) const {
  return {theta_.data() + weight_offset(layer), dims_[layer + 1], dims_[layer]};
}
Eigen::Map<RowMatrix> MlpParams::weight(std::size_t layer) {
  return {theta_.data() + weight_offset(layer), dims_[layer + 1], dims_[layer]};
}
Eigen::Map<const Vector> MlpParams::bias(std::size_t layer) const {
  return {theta_.data() + bias_offset(layer), dims_[layer + 1]};
}
Eigen::Map<Vector> MlpParams::bias(std::size_t layer) {
  return {theta_.data() + bias_offset(layer), dims_[layer + 1]};
}

bool operator==(const MlpParams& a, const MlpParams& b) {
  if (a.dims_ != b.dims_ || a.activation_ != b.activation_) return false;
  if (a.theta_.size() != b.theta_.size()) return false;
  for (Eigen::Index i = 0; i < a.theta_.size(); ++i) {
    // bitwise comparison; NaN never appears in valid params
    if (a.theta_(i) != b.theta_(i)) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Extended forward / reverse pass

namespace {

struct ActiveChannels {
  std::array<bool, kNumChannels> on{};
};

ActiveChannels resolve(Channels requested) {
  if (requested & kDxt) throw Error("unsupported derivative order");
  if (requested & ~(kAllSupported | kDxt)) {
    throw Error("unsupported derivative order");
  }
  ActiveChannels a;
  a.on[kU] = true;
  a.on[kUxx] = (requested & kDxx) != 0;
  a.on[kUtt] = (requested & kDtt) != 0;
  a.on[kUx] = (requested & kDx) != 0 || a.on[kUxx];
  a.on[kUt] = (requested & kDt) != 0 || a.on[kUtt];
  return a;
}

// out = W z (+ b). Each entry accumulates j = 0..d-1 in order, starting from
// the bias, so the result for one point does not depend on the batch.
void affine(const Eigen::Map<const RowMatrix>& w, const Vector* b,
            const RowMatrix& z, RowMatrix& out) {
  constexpr Eigen::Index kBlock = 32;
  const Eigen::Index n = z.cols();
  const Eigen::Index rows = w.rows();
  const Eigen::Index cols = w.cols();
  out.resize(rows, n);
  const double* zd = z.data();
  Eigen::Index p0 = 0;
  for (; p0 + kBlock <= n; p0 += kBlock) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      double acc[kBlock];
      const double init = b != nullptr ? (*b)(i) : 0.0;
      for (Eigen::Index k = 0; k < kBlock; ++k) acc[k] = init;
      for (Eigen::Index j = 0; j < cols; ++j) {
        const double wij = w(i, j);
        const double* zr = zd + j * n + p0;
        for (Eigen::Index k = 0; k < kBlock; ++k) acc[k] += wij * zr[k];
      }
      double* o = out.data() + i * n + p0;
      for (Eigen::Index k = 0; k < kBlock; ++k) o[k] = acc[k];
    }
  }
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index p = p0; p < n; ++p) {
      double acc = b != nullptr ? (*b)(i) : 0.0;
      for (Eigen::Index j = 0; j < cols; ++j) acc += w(i, j) * zd[j * n + p];
      out(i, p) = acc;
    }
  }
}

struct Derivs {
  RowMatrix s0, s1, s2, s3;
};

void activate(Activation act, const RowMatrix& a, Derivs& d, bool third) {
  d.s0.resize(a.rows(), a.cols());
  d.s1.resize(a.rows(), a.cols());
  d.s2.resize(a.rows(), a.cols());
  if (third) d.s3.resize(a.rows(), a.cols());
  const Eigen::Index n = a.size();
  const double* in = a.data();
  double* s0 = d.s0.data();
  double* s1 = d.s1.data();
  double* s2 = d.s2.data();
  double* s3 = third ? d.s3.data() : nullptr;
  switch (act) {
    case Activation::kTanh:
      detail::vec_tanh(in, s0, n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const double s = s0[k];
        const double d1 = 1.0 - s * s;
        const double d2 = -2.0 * s * d1;
        s1[k] = d1;
        s2[k] = d2;
        if (s3) s3[k] = -2.0 * d1 * d1 - 2.0 * s * d2;
      }
      break;
    case Activation::kCos:
      detail::vec_cos(in, s0, n);
      detail::vec_sin(in, s1, n);
      for (Eigen::Index k = 0; k < n; ++k) {
        if (s3) s3[k] = s1[k];
        s1[k] = -s1[k];
        s2[k] = -s0[k];
      }
      break;
  }
}

struct LayerTape {
  std::array<RowMatrix, kNumChannels> input;
  std::array<RowMatrix, kNumChannels> pre;
  Derivs derivs;
};

struct Tape {
  ActiveChannels active;
  std::vector<LayerTape> layers;
};

// Runs the extended forward pass into `tape`, which keeps everything the
// reverse pass needs. Buffers are reused when the tape is reused.
ExtendedBatch forward_impl(const MlpParams& params, const PointBatch& points,
                           Channels channels, Tape& tape, bool keep_third) {
  const ActiveChannels active = resolve(channels);
  const auto& on = active.on;
  const Eigen::Index n = points.size();
  const std::size_t layers = params.layer_count();
  tape.active = active;
  tape.layers.resize(layers);

  auto& z0 = tape.layers[0].input;
  z0[kU].resize(2, n);
  z0[kU].row(0) = points.x.transpose();
  z0[kU].row(1) = points.t.transpose();
  if (on[kUx]) {
    z0[kUx].resize(2, n);
    z0[kUx].row(0).setOnes();
    z0[kUx].row(1).setZero();
  }
  if (on[kUt]) {
    z0[kUt].resize(2, n);
    z0[kUt].row(0).setZero();
    z0[kUt].row(1).setOnes();
  }
  if (on[kUxx]) z0[kUxx].setZero(2, n);
  if (on[kUtt]) z0[kUtt].setZero(2, n);

  for (std::size_t l = 0; l < layers; ++l) {
    auto& lt = tape.layers[l];
    const auto w = params.weight(l);
    const Vector b = params.bias(l);
    affine(w, &b, lt.input[kU], lt.pre[kU]);
    for (int ch = 1; ch < kNumChannels; ++ch) {
      if (on[ch]) affine(w, nullptr, lt.input[ch], lt.pre[ch]);
    }
    if (l + 1 == layers) break;

    auto& d = lt.derivs;
    const auto& a = lt.pre;
    activate(params.activation(), a[kU], d, keep_third);
    auto& next = tape.layers[l + 1].input;
    next[kU] = d.s0;
    if (on[kUx]) next[kUx] = d.s1.cwiseProduct(a[kUx]);
    if (on[kUt]) next[kUt] = d.s1.cwiseProduct(a[kUt]);
    if (on[kUxx]) {
      next[kUxx] = d.s2.cwiseProduct(a[kUx].cwiseAbs2()) +
                   d.s1.cwiseProduct(a[kUxx]);
    }
    if (on[kUtt]) {
      next[kUtt] = d.s2.cwiseProduct(a[kUt].cwiseAbs2()) +
                   d.s1.cwiseProduct(a[kUtt]);
    }
  }

  const auto& last = tape.layers.back().pre;
  ExtendedBatch out;
  for (int ch = 0; ch < kNumChannels; ++ch) {
    if (on[ch]) out.fields[ch] = last[ch].row(0).transpose();
  }
  return out;
}

ExtendedBatch forward_once(const MlpParams& params, const PointBatch& points,
                           Channels channels) {
  Tape tape;
  return forward_impl(params, points, channels, tape, false);
}

// gw += g z^T, one dot product per weight.
void outer_accumulate(const RowMatrix& g, const RowMatrix& z,
                      Eigen::Map<RowMatrix>& gw) {
  const Eigen::Index n = g.cols();
  for (Eigen::Index i = 0; i < g.rows(); ++i) {
    const double* gi = g.data() + i * n;
    for (Eigen::Index j = 0; j < z.rows(); ++j) {
      const double* zj = z.data() + j * n;
      double lane[8] = {};
      Eigen::Index p = 0;
      for (; p + 8 <= n; p += 8) {
        for (int k = 0; k < 8; ++k) lane[k] += gi[p + k] * zj[p + k];
      }
      double acc = 0.0;
      for (; p < n; ++p) acc += gi[p] * zj[p];
      for (int k = 0; k < 8; ++k) acc += lane[k];
      gw(i, j) += acc;
    }
  }
}

// out = W^T g.
void transpose_apply(const Eigen::Map<const RowMatrix>& w, const RowMatrix& g,
                     RowMatrix& out) {
  constexpr Eigen::Index kBlock = 32;
  const Eigen::Index n = g.cols();
  const Eigen::Index rows = w.rows();
  const Eigen::Index cols = w.cols();
  out.resize(cols, n);
  const double* gd = g.data();
  Eigen::Index p0 = 0;
  for (; p0 + kBlock <= n; p0 += kBlock) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      double acc[kBlock] = {};
      for (Eigen::Index i = 0; i < rows; ++i) {
        const double wij = w(i, j);
        const double* gr = gd + i * n + p0;
        for (Eigen::Index k = 0; k < kBlock; ++k) acc[k] += wij * gr[k];
      }
      double* o = out.data() + j * n + p0;
      for (Eigen::Index k = 0; k < kBlock; ++k) o[k] = acc[k];
    }
  }
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index p = p0; p < n; ++p) {
      double acc = 0.0;
      for (Eigen::Index i = 0; i < rows; ++i) acc += w(i, j) * gd[i * n + p];
      out(j, p) = acc;
    }
  }
}

struct BackwardScratch {
  std::array<RowMatrix, kNumChannels> g_pre;
  std::array<RowMatrix, kNumChannels> g_z;
};

// Reverse accumulation. `g_out` holds the adjoints of the five output
// channels (empty = zero). The gradient is added into `grad`.
void backward_impl(const MlpParams& params, const Tape& tape,
                   const std::array<Vector, kNumChannels>& g_out,
                   BackwardScratch& scratch, Vector& grad) {
  const std::size_t layers = params.layer_count();
  const auto& on = tape.active.on;
  const Eigen::Index n = g_out[kU].size();
  auto& g_pre = scratch.g_pre;
  auto& g_z = scratch.g_z;
  for (int ch = 0; ch < kNumChannels; ++ch) {
    if (!on[ch]) continue;
    if (g_out[ch].size() > 0) {
      g_pre[ch] = g_out[ch].transpose();
    } else {
      g_pre[ch].setZero(1, n);
    }
  }

  std::vector<std::size_t> offsets(layers);
  {
    std::size_t off = 0;
    const auto& dims = params.dims();
    for (std::size_t k = 0; k < layers; ++k) {
      offsets[k] = off;
      off += static_cast<std::size_t>(dims[k] + 1) * dims[k + 1];
    }
  }

  for (std::size_t l = layers; l-- > 0;) {
    const auto& lt = tape.layers[l];
    const auto w = params.weight(l);
    const Eigen::Index rows = w.rows();
    const Eigen::Index cols = w.cols();
    Eigen::Map<RowMatrix> gw(grad.data() + offsets[l], rows, cols);
    Eigen::Map<Vector> gb(grad.data() + offsets[l] + rows * cols, rows);

    for (int ch = 0; ch < kNumChannels; ++ch) {
      if (on[ch]) outer_accumulate(g_pre[ch], lt.input[ch], gw);
    }
    gb += g_pre[kU].rowwise().sum();
    if (l == 0) break;

    // Adjoints of the previous layer's post-activation channels.
    for (int ch = 0; ch < kNumChannels; ++ch) {
      if (on[ch]) transpose_apply(w, g_pre[ch], g_z[ch]);
    }

    // Through the activation of layer l-1:
    //   z   = s(a)             z'  = s'(a) a'
    //   z'' = s''(a) a'^2 + s'(a) a''
    const auto& prev = tape.layers[l - 1];
    const auto& d = prev.derivs;
    const auto& a = prev.pre;
    g_pre[kU] = g_z[kU].cwiseProduct(d.s1);
    if (on[kUx]) {
      g_pre[kU] += g_z[kUx].cwiseProduct(d.s2).cwiseProduct(a[kUx]);
      g_pre[kUx] = g_z[kUx].cwiseProduct(d.s1);
    }
    if (on[kUt]) {
      g_pre[kU] += g_z[kUt].cwiseProduct(d.s2).cwiseProduct(a[kUt]);
      g_pre[kUt] = g_z[kUt].cwiseProduct(d.s1);
    }
    if (on[kUxx]) {
      g_pre[kU] += g_z[kUxx].cwiseProduct(
          d.s3.cwiseProduct(a[kUx].cwiseAbs2()) + d.s2.cwiseProduct(a[kUxx]));
      g_pre[kUx] += 2.0 * g_z[kUxx].cwiseProduct(d.s2).cwiseProduct(a[kUx]);
      g_pre[kUxx] = g_z[kUxx].cwiseProduct(d.s1);
    }
    if (on[kUtt]) {
      g_pre[kU] += g_z[kUtt].cwiseProduct(
          d.s3.cwiseProduct(a[kUt].cwiseAbs2()) + d.s2.cwiseProduct(a[kUtt]));
      g_pre[kUt] += 2.0 * g_z[kUtt].cwiseProduct(d.s2).cwiseProduct(a[kUt]);
      g_pre[kUtt] = g_z[kUtt].cwiseProduct(d.s1);
    }
  }
}

}  // namespace

struct LossWorkspace::Impl {
  Tape tape;
  BackwardScratch scratch;
};

LossWorkspace::LossWorkspace() : impl_(std::make_unique<Impl>()) {}
LossWorkspace::~LossWorkspace() = default;
LossWorkspace::LossWorkspace(LossWorkspace&&) noexcept = default;
LossWorkspace& LossWorkspace::operator=(LossWorkspace&&) noexcept = default;

double mlp_forward(const MlpParams& params, double x, double t) {
  if (!std::isfinite(x) || !std::isfinite(t) || !params.all_finite()) {
    throw Error("non-finite input");
  }
  return forward_once(params, PointBatch::single(x, t), kValue).u()(0);
}

ExtendedState extended_forward(const MlpParams& params, double x, double t) {
  return forward_once(params, PointBatch::single(x, t), kAllSupported).at(0);
}

ExtendedBatch extended_forward(const MlpParams& params,
                               const PointBatch& points, Channels channels) {
  return forward_once(params, points, channels);
}

double accumulate_term(const LossTerm& term, const ResidualBatch& residual) {
  const Vector& r = residual.r;
  double sum = 0.0;
  if (term.weights) {
    const Vector& w = *term.weights;
    for (Eigen::Index p = 0; p < r.size(); ++p) sum += w(p) * r(p) * r(p);
  } else {
    for (Eigen::Index p = 0; p < r.size(); ++p) sum += r(p) * r(p);
  }
  return term.scale * sum;
}

LossEvaluation evaluate_loss(const MlpParams& params,
                             std::span<const LossTerm> terms,
                             bool with_gradient, LossWorkspace* workspace) {
  // Points are pushed through in fixed-size chunks so the tape stays in
  // cache. The loss itself is summed once over the whole term.
  constexpr Eigen::Index kChunk = 128;
  LossWorkspace local;
  LossWorkspace::Impl& ws = workspace ? *workspace->impl_ : *local.impl_;

  LossEvaluation out;
  if (with_gradient) out.grad = Vector::Zero(params.theta().size());
  out.residuals.reserve(terms.size());
  PointBatch chunk;
  for (const LossTerm& term : terms) {
    const Eigen::Index n = term.points.size();
    ResidualBatch res;
    res.r.resize(n);
    for (Eigen::Index p0 = 0; p0 < n; p0 += kChunk) {
      const Eigen::Index len = std::min(kChunk, n - p0);
      chunk.x = term.points.x.segment(p0, len);
      chunk.t = term.points.t.segment(p0, len);
      const ExtendedBatch ext =
          forward_impl(params, chunk, term.channels, ws.tape, with_gradient);
      const ResidualBatch part = term.residual(ext, chunk);
      res.r.segment(p0, len) = part.r;
      if (!with_gradient) continue;

      // dL/dr_p = 2 * scale * w_p * r_p, then chain through the partials.
      Vector dr = 2.0 * term.scale * part.r;
      if (term.weights) dr = dr.cwiseProduct(term.weights->segment(p0, len));
      std::array<Vector, kNumChannels> g;
      for (int ch = 0; ch < kNumChannels; ++ch) {
        if (part.partial[ch].size() == 0) continue;
        if (!ws.tape.active.on[ch]) {
          throw Error("unsupported derivative order");
        }
        g[ch] = dr.cwiseProduct(part.partial[ch]);
      }
      if (g[kU].size() == 0) g[kU] = Vector::Zero(len);
      backward_impl(params, ws.tape, g, ws.scratch, out.grad);
    }
    out.loss += accumulate_term(term, res);
    out.residuals.push_back(std::move(res.r));
  }
  return out;
}

Vector loss_grad_params(const MlpParams& params,
                        std::span<const LossTerm> terms) {
  return evaluate_loss(params, terms, true).grad;
}

}  // namespace gptpinn
