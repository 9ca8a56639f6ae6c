// FFT-based causal 2-D convolution and the full layer forward pass.
//
// Convolution is one-sided exactly as the recurrence implies:
//   y[i,j] = sum_{p<=i, q<=j} K[i-p, j-q] u[p,q]
// computed by zero-padding both operands to an FFT-friendly size of at least
// (2*L1-1, 2*L2-1), multiplying spectra and truncating. conv2d_direct is the
// quadratic-time reference for the same contract.
#pragma once

#include <unsupported/Eigen/FFT>

#include <map>
#include <optional>
#include <tuple>
#include <vector>

#include "ssm2d/kernel.hpp"
#include "ssm2d/recurrence.hpp"

namespace ssm2d {

// Dense batch x rows x cols x channels signal, stored in that order (channel
// fastest), matching the on-disk tensor layout.
struct ImageTensor {
  Index batch = 0, rows = 0, cols = 0, channels = 0;
  std::vector<double> data;

  static ImageTensor zeros(Index batch, Index rows, Index cols, Index channels) {
    ImageTensor t;
    t.batch = batch;
    t.rows = rows;
    t.cols = cols;
    t.channels = channels;
    t.data.assign(static_cast<std::size_t>(batch * rows * cols * channels), 0.0);
    return t;
  }

  double& operator()(Index b, Index i, Index j, Index c) {
    return data[((b * rows + i) * cols + j) * channels + c];
  }
  double operator()(Index b, Index i, Index j, Index c) const {
    return data[((b * rows + i) * cols + j) * channels + c];
  }

  using PlaneStride = Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>;
  using ConstPlane = Eigen::Map<const Eigen::MatrixXd, 0, PlaneStride>;
  using Plane = Eigen::Map<Eigen::MatrixXd, 0, PlaneStride>;

  ConstPlane plane(Index b, Index c) const {
    return ConstPlane(data.data() + (b * rows * cols * channels + c), rows, cols,
                      PlaneStride(channels, cols * channels));
  }
  Plane plane(Index b, Index c) {
    return Plane(data.data() + (b * rows * cols * channels + c), rows, cols,
                 PlaneStride(channels, cols * channels));
  }

  void validate() const {
    require(batch >= 1 && rows >= 1 && cols >= 1 && channels >= 1,
            "ImageTensor: all extents must be >= 1");
    require(data.size() == static_cast<std::size_t>(batch * rows * cols * channels),
            "ImageTensor: storage size does not match extents");
    for (double v : data)
      if (!std::isfinite(v)) throw std::invalid_argument("ImageTensor: non-finite entry");
  }
};

// Smallest 5-smooth number >= n; transform sizes with only 2/3/5 factors keep
// every FFT backend on its fast paths.
inline Index fft_friendly_size(Index n) {
  for (Index candidate = n;; ++candidate) {
    Index m = candidate;
    for (Index f : {2, 3, 5})
      while (m % f == 0) m /= f;
    if (m == 1) return candidate;
  }
}

// In-place 2-D complex transforms on column-major matrices; the inverse is
// normalized (inv(fwd(m)) == m). With the FFTW backend, native 2-D plans are
// cached per (buffer, shape); planning is not thread-safe, so each thread
// needs its own Fft2.
//
// Complex-to-complex only: Eigen's plan cache keys by size alone, so mixing
// real and complex transforms of one size through one FFT object would
// retrieve the wrong FFTW plan.
class Fft2 {
 public:
  Fft2() = default;
  Fft2(const Fft2&) = delete;
  Fft2& operator=(const Fft2&) = delete;

  void fwd(Eigen::MatrixXcd& m) { transform(m, false); }
  void inv(Eigen::MatrixXcd& m) {
    transform(m, true);
    m *= 1.0 / static_cast<double>(m.size());
  }

#ifdef EIGEN_FFTW_DEFAULT
  ~Fft2() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  void transform(Eigen::MatrixXcd& m, bool inverse) {
    // column-major (rows, cols) is row-major (cols, rows) to FFTW; the 2-D
    // transform is axis-symmetric so the result layout is unchanged
    auto* data = reinterpret_cast<fftw_complex*>(m.data());
    const auto key = std::make_tuple(static_cast<void*>(data), m.rows(), m.cols(), inverse);
    auto it = plans_.find(key);
    if (it == plans_.end()) {
      fftw_plan plan = fftw_plan_dft_2d(static_cast<int>(m.cols()), static_cast<int>(m.rows()),
                                        data, data, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                        FFTW_ESTIMATE);
      it = plans_.emplace(key, plan).first;
    }
    fftw_execute(it->second);
  }

  std::map<std::tuple<void*, Index, Index, bool>, fftw_plan> plans_;
#else
 private:
  void transform(Eigen::MatrixXcd& m, bool inverse) {
    Eigen::VectorXcd in(m.rows()), out(m.rows());
    for (Index j = 0; j < m.cols(); ++j) {
      in = m.col(j);
      if (inverse)
        fft_.fwd(out, Eigen::VectorXcd(in.conjugate()));  // inv via conjugate fwd
      else
        fft_.fwd(out, in);
      m.col(j) = inverse ? out.conjugate() : out;
    }
    in.resize(m.cols());
    out.resize(m.cols());
    for (Index i = 0; i < m.rows(); ++i) {
      in = m.row(i).transpose();
      if (inverse)
        fft_.fwd(out, Eigen::VectorXcd(in.conjugate()));
      else
        fft_.fwd(out, in);
      if (inverse) out = out.conjugate();
      m.row(i) = out.transpose();
    }
  }

  Eigen::FFT<double> fft_;
#endif
};

namespace detail {

inline Eigen::MatrixXd real_grid(const Eigen::MatrixXd& m) { return m; }
inline Eigen::MatrixXd real_grid(const Eigen::MatrixXcd& m) { return m.real(); }

}  // namespace detail

// Direct double-sum oracle for the causal convolution; same contract as
// conv2d_fft, O(L_tot^2) time.
template <class KScalar>
Eigen::MatrixXd conv2d_direct(const Eigen::Ref<const Eigen::MatrixXd>& u,
                              const Eigen::MatrixX<KScalar>& k) {
  require(u.rows() == k.rows() && u.cols() == k.cols(),
          "conv2d_direct: input and kernel extents differ");
  const Index rows = u.rows(), cols = u.cols();
  Eigen::MatrixX<KScalar> y = Eigen::MatrixX<KScalar>::Zero(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) {
      KScalar acc{};
      for (Index p = 0; p <= i; ++p)
        for (Index q = 0; q <= j; ++q) acc += k(i - p, j - q) * u(p, q);
      y(i, j) = acc;
    }
  return detail::real_grid(y);
}

template <class KScalar>
Eigen::MatrixXd conv2d_fft(const Eigen::Ref<const Eigen::MatrixXd>& u,
                           const Eigen::MatrixX<KScalar>& k) {
  require(u.rows() == k.rows() && u.cols() == k.cols(),
          "conv2d_fft: input and kernel extents differ");
  const Index rows = u.rows(), cols = u.cols();
  const Index pr = fft_friendly_size(2 * rows - 1);
  const Index pc = fft_friendly_size(2 * cols - 1);

  Fft2 fft;
  Eigen::MatrixXcd fu = Eigen::MatrixXcd::Zero(pr, pc);
  fu.topLeftCorner(rows, cols) = u.cast<std::complex<double>>();
  fft.fwd(fu);
  Eigen::MatrixXcd fk = Eigen::MatrixXcd::Zero(pr, pc);
  fk.topLeftCorner(rows, cols) = k.template cast<std::complex<double>>();
  fft.fwd(fk);
  fu.array() *= fk.array();
  fft.inv(fu);
  // truncate to the causal window, then project
  return fu.topLeftCorner(rows, cols).real();
}

// The full spatial layer. Kernels are compiled on first use and reused across
// every forward pass and batch element; builds() counts how often that
// compilation actually ran.
//
// Per-direction kernels of one group collapse into a single summed spectrum,
// exact by linearity of convolution. Within one batch element, consecutive
// channels of a group ride the same transform in pairs (one in the real lane,
// one in the imaginary lane), which is exact for real inputs and keeps the
// pairing identical for single-sample batches.
template <class Scalar>
class Layer {
 public:
  Layer(LayerConfig cfg, std::vector<SsmParams<Scalar>> group_params)
      : cfg_(cfg), params_(std::move(group_params)) {
    cfg_.validate();
    require(ScalarTraits<Scalar>::field == cfg_.field,
            "Layer: parameter scalar does not match cfg.field");
    const auto count = static_cast<Index>(params_.size());
    require(count == cfg_.n_ssm || count == cfg_.n_ssm * cfg_.directions,
            "Layer: expected one parameter set per group or per (group, direction)");
    for (const auto& p : params_)
      require(p.state_dim() == cfg_.state_dim, "Layer: parameter state_dim mismatch");
  }

  const LayerConfig& config() const { return cfg_; }
  int builds() const { return builds_; }

  const KernelStack<Scalar>& kernels() {
    ensure_built();
    return stack_;
  }

  ImageTensor forward(const ImageTensor& x) {
    x.validate();
    require(x.rows == cfg_.rows && x.cols == cfg_.cols && x.channels == cfg_.channels,
            "Layer: tensor extents do not match the layer configuration");
    ensure_built();

    const Index rows = cfg_.rows, cols = cfg_.cols, stride = cfg_.channels;
    ImageTensor y = ImageTensor::zeros(x.batch, rows, cols, x.channels);
    const Index cpg = cfg_.channels_per_group();
    for (Index b = 0; b < x.batch; ++b) {
      const Index plane_base = b * rows * cols * stride;
      for (Index g = 0; g < cfg_.n_ssm; ++g) {
        const auto& p = params_[param_index(g)];
        for (Index slot = 0; slot < cpg; slot += 2) {
          const Index c0 = g * cpg + slot;
          const bool paired = slot + 1 < cpg;
          // two adjacent channels of one group ride one transform: one in the
          // real lane, one in the imaginary lane
          scratch_.setZero();
          for (Index i = 0; i < rows; ++i) {
            const double* row = x.data.data() + plane_base + i * cols * stride + c0;
            std::complex<double>* cell = scratch_.data() + i;
            if (paired)
              for (Index j = 0; j < cols; ++j)
                cell[j * pad_rows_] = {row[j * stride], row[j * stride + 1]};
            else
              for (Index j = 0; j < cols; ++j) cell[j * pad_rows_] = {row[j * stride], 0.0};
          }
          fft_.fwd(scratch_);
          scratch_.array() *= group_spectra_[g].array();
          fft_.inv(scratch_);
          const double skip0 = p.skip(slot);
          const double skip1 = paired ? p.skip(slot + 1) : 0.0;
          for (Index i = 0; i < rows; ++i) {
            const double* row = x.data.data() + plane_base + i * cols * stride + c0;
            double* out = y.data.data() + plane_base + i * cols * stride + c0;
            const std::complex<double>* cell = scratch_.data() + i;
            for (Index j = 0; j < cols; ++j) {
              const std::complex<double> v = cell[j * pad_rows_];
              out[j * stride] = v.real() + skip0 * row[j * stride];
              if (paired) out[j * stride + 1] = v.imag() + skip1 * row[j * stride + 1];
            }
          }
        }
      }
    }
    return y;
  }

 private:
  Index param_index(Index group) const {
    return static_cast<Index>(params_.size()) == cfg_.n_ssm ? group : group * cfg_.directions;
  }

  void ensure_built() {
    if (built_) return;
    cache_ = build_cache(cfg_.rows, cfg_.cols, cfg_.mode);
    stack_ = compile_kernel_stack(params_, cfg_, *cache_);
    pad_rows_ = fft_friendly_size(2 * cfg_.rows - 1);
    pad_cols_ = fft_friendly_size(2 * cfg_.cols - 1);
    scratch_.resize(pad_rows_, pad_cols_);
    group_spectra_.clear();
    group_spectra_.reserve(cfg_.n_ssm);
    for (Index g = 0; g < cfg_.n_ssm; ++g) {
      Eigen::MatrixXd combined = Eigen::MatrixXd::Zero(cfg_.rows, cfg_.cols);
      for (int d = 0; d < cfg_.directions; ++d)
        combined += detail::real_grid(stack_.at(g, d));
      Eigen::MatrixXcd padded = Eigen::MatrixXcd::Zero(pad_rows_, pad_cols_);
      padded.topLeftCorner(cfg_.rows, cfg_.cols) = combined.cast<std::complex<double>>();
      fft_.fwd(padded);
      group_spectra_.push_back(std::move(padded));
    }
    built_ = true;
    ++builds_;
  }

  LayerConfig cfg_;
  std::vector<SsmParams<Scalar>> params_;
  std::optional<CoeffCache> cache_;
  KernelStack<Scalar> stack_;
  std::vector<Eigen::MatrixXcd> group_spectra_;
  Eigen::MatrixXcd scratch_;
  Index pad_rows_ = 0, pad_cols_ = 0;
  Fft2 fft_;
  bool built_ = false;
  int builds_ = 0;
};

template <class Scalar>
ImageTensor apply_layer(const ImageTensor& x, const std::vector<SsmParams<Scalar>>& params,
                        const LayerConfig& cfg) {
  Layer<Scalar> layer(cfg, params);
  return layer.forward(x);
}

}  // namespace ssm2d
