#pragma once

// Averaging filters on Z^d and the dense box-supported fields they act on.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "error.hpp"

#if defined(__SSE2__)
#include <xmmintrin.h>
#endif

namespace epd_gossip {

using Offset = std::vector<int>;

struct FilterEntry {
  Offset offset;
  double weight;
};

inline constexpr double kNormalizationTol = 1e-12;
inline constexpr double kMeanTol = 1e-12;
inline constexpr double kRankTol = 1e-10;

/// Finitely supported, centered, nondegenerate averaging kernel on Z^d.
/// Construct with new_filter() or one of the built-in factories.
class LatticeFilter {
 public:
  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] const std::vector<FilterEntry>& entries() const noexcept { return entries_; }
  [[nodiscard]] int radius() const noexcept { return radius_; }
  [[nodiscard]] const Eigen::VectorXd& mean() const noexcept { return mean_; }
  [[nodiscard]] const Eigen::MatrixXd& covariance() const noexcept { return covariance_; }
  [[nodiscard]] bool is_symmetric() const noexcept { return symmetric_; }
  [[nodiscard]] std::optional<double> aperiodicity_margin() const noexcept { return margin_; }
  [[nodiscard]] const std::string& name() const noexcept { return name_; }

  /// Weight at an offset, 0 when not in the support.
  [[nodiscard]] double weight_at(const Offset& v) const {
    for (const auto& e : entries_) {
      if (e.offset == v) return e.weight;
    }
    return 0.0;
  }

  [[nodiscard]] LatticeFilter with_margin(double margin) const {
    LatticeFilter copy = *this;
    copy.margin_ = margin;
    return copy;
  }

  [[nodiscard]] LatticeFilter with_name(std::string name) const {
    LatticeFilter copy = *this;
    copy.name_ = std::move(name);
    return copy;
  }

 private:
  friend LatticeFilter new_filter(int dim, std::vector<FilterEntry> entries, std::string name);

  LatticeFilter() = default;

  int dim_ = 0;
  std::vector<FilterEntry> entries_;
  int radius_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd covariance_;
  bool symmetric_ = false;
  std::optional<double> margin_;
  std::string name_ = "custom";
};

/// Validates entries and derives mean, covariance, radius and symmetry.
inline LatticeFilter new_filter(int dim, std::vector<FilterEntry> entries, std::string name = "custom") {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "filter dimension must be >= 1");
  if (entries.empty()) throw Error(ErrorKind::RejectEmpty, "filter has no entries");
  for (const auto& e : entries) {
    if (static_cast<int>(e.offset.size()) != dim) {
      throw Error(ErrorKind::DimensionMismatch, "offset length differs from filter dimension");
    }
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorKind::InvalidArgument, "filter weights must be finite and > 0");
    }
  }
  std::sort(entries.begin(), entries.end(),
            [](const FilterEntry& a, const FilterEntry& b) { return a.offset < b.offset; });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].offset == entries[i - 1].offset) {
      throw Error(ErrorKind::InvalidArgument, "duplicate filter offset");
    }
  }

  double total = 0.0;
  for (const auto& e : entries) total += e.weight;
  if (std::abs(total - 1.0) > kNormalizationTol) {
    throw Error(ErrorKind::RejectNotNormalized, "weights sum to " + std::to_string(total));
  }

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(dim, dim);
  int radius = 0;
  for (const auto& e : entries) {
    for (int i = 0; i < dim; ++i) {
      mean(i) += e.weight * e.offset[i];
      radius = std::max(radius, std::abs(e.offset[i]));
      for (int j = 0; j < dim; ++j) cov(i, j) += e.weight * e.offset[i] * e.offset[j];
    }
  }
  if (mean.cwiseAbs().maxCoeff() > kMeanTol) {
    throw Error(ErrorKind::RejectDrift, "filter mean is not zero");
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
  if (eig.eigenvalues().minCoeff() <= kRankTol) {
    throw Error(ErrorKind::RejectDegenerate, "covariance is rank deficient");
  }

  bool symmetric = true;
  for (const auto& e : entries) {
    Offset neg = e.offset;
    for (auto& c : neg) c = -c;
    const auto it = std::lower_bound(entries.begin(), entries.end(), neg,
                                     [](const FilterEntry& a, const Offset& v) { return a.offset < v; });
    if (it == entries.end() || it->offset != neg || it->weight != e.weight) {
      symmetric = false;
      break;
    }
  }

  LatticeFilter f;
  f.dim_ = dim;
  f.entries_ = std::move(entries);
  f.radius_ = radius;
  f.mean_ = std::move(mean);
  f.covariance_ = std::move(cov);
  f.symmetric_ = symmetric;
  f.name_ = std::move(name);
  return f;
}

/// Nearest-neighbour filter, weight 1/(2d) on each of +-e_i. Periodic.
inline LatticeFilter standard_filter(int dim) {
  if (dim < 1) throw Error(ErrorKind::InvalidArgument, "filter dimension must be >= 1");
  std::vector<FilterEntry> entries;
  const double w = 1.0 / (2.0 * dim);
  for (int i = 0; i < dim; ++i) {
    for (int s : {-1, 1}) {
      Offset v(dim, 0);
      v[i] = s;
      entries.push_back({v, w});
    }
  }
  return new_filter(dim, std::move(entries), "standard" + std::to_string(dim));
}

/// Triangular lattice in the plane: 1/6 on (+-1,0), (0,+-1), (1,1), (-1,-1).
inline LatticeFilter triangular_filter() {
  const double w = 1.0 / 6.0;
  return new_filter(2,
                    {{{1, 0}, w}, {{-1, 0}, w}, {{0, 1}, w}, {{0, -1}, w}, {{1, 1}, w}, {{-1, -1}, w}},
                    "triangular");
}

/// 1-d lazy walk {0: 1/2, +-1: 1/4}.
inline LatticeFilter lazy_filter_1d() {
  return new_filter(1, {{{-1}, 0.25}, {{0}, 0.5}, {{1}, 0.25}}, "lazy1d");
}

/// omega_hat(xi) = sum_v omega(v) exp(i <xi, v>).
inline std::complex<double> filter_fourier(const LatticeFilter& f, std::span<const double> xi) {
  if (static_cast<int>(xi.size()) != f.dim()) {
    throw Error(ErrorKind::DimensionMismatch, "frequency vector length differs from filter dimension");
  }
  double re = 0.0;
  double im = 0.0;
  for (const auto& e : f.entries()) {
    double phase = 0.0;
    for (int i = 0; i < f.dim(); ++i) phase += xi[i] * e.offset[i];
    re += e.weight * std::cos(phase);
    im += e.weight * std::sin(phase);
  }
  return {re, im};
}

struct AperiodicityReport {
  bool aperiodic = false;
  double margin = 0.0;          ///< min over the grid of (1 - |omega_hat|) / |xi|^2
  std::vector<double> worst_xi;  ///< argmin of the ratio above
  double worst_abs = 0.0;        ///< |omega_hat| at worst_xi
};

inline int default_aperiodicity_grid(int dim) { return dim <= 2 ? 256 : (dim == 3 ? 64 : 16); }

/// Uniform scan of [-pi, pi)^d (origin excluded) for the bound
/// |omega_hat(xi)| <= 1 - lambda |xi|^2.
inline AperiodicityReport verify_aperiodicity(const LatticeFilter& f, int grid_points_per_dim) {
  if (grid_points_per_dim < 16) {
    throw Error(ErrorKind::InvalidArgument, "aperiodicity scan needs >= 16 points per dimension");
  }
  const int d = f.dim();
  const int g = grid_points_per_dim;
  std::vector<int> idx(d, 0);
  std::vector<double> xi(d);
  AperiodicityReport rep;
  rep.margin = std::numeric_limits<double>::infinity();
  double peak = 0.0;
  std::vector<double> peak_xi;
  std::int64_t total = 1;
  for (int i = 0; i < d; ++i) total *= g;
  for (std::int64_t k = 0; k < total; ++k) {
    std::int64_t r = k;
    double norm2 = 0.0;
    for (int i = d - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(r % g);
      r /= g;
      xi[i] = -std::numbers::pi + 2.0 * std::numbers::pi * idx[i] / g;
      norm2 += xi[i] * xi[i];
    }
    if (norm2 == 0.0) continue;
    const double a = std::abs(filter_fourier(f, xi));
    const double ratio = (1.0 - a) / norm2;
    if (ratio < rep.margin) {
      rep.margin = ratio;
      rep.worst_xi = xi;
      rep.worst_abs = a;
    }
    if (a > peak) {
      peak = a;
      peak_xi = xi;
    }
  }
  if (peak >= 1.0 - 1e-12) {
    // a unimodular frequency away from the origin: report it rather than the ratio argmin
    rep.worst_xi = peak_xi;
    rep.worst_abs = peak;
  }
  rep.aperiodic = peak < 1.0 - 1e-12 && rep.margin > 1e-6;
  return rep;
}

/// Returns a copy carrying the estimated margin, or throws PeriodicityDetected
/// naming the worst frequency.
inline LatticeFilter certify_aperiodic(const LatticeFilter& f, int grid_points_per_dim = 0) {
  if (f.aperiodicity_margin()) return f;
  const int g = grid_points_per_dim > 0 ? grid_points_per_dim : default_aperiodicity_grid(f.dim());
  const AperiodicityReport rep = verify_aperiodicity(f, g);
  if (!rep.aperiodic) {
    std::string where = "(";
    for (std::size_t i = 0; i < rep.worst_xi.size(); ++i) {
      where += (i ? ", " : "") + std::to_string(rep.worst_xi[i]);
    }
    where += ")";
    throw Error(ErrorKind::PeriodicityDetected, "filter '" + f.name() + "' has |omega_hat| = " +
                                                    std::to_string(rep.worst_abs) + " at xi = " + where);
  }
  return f.with_margin(rep.margin);
}

/// Real field on Z^d, stored densely on the box [-m, m]^d (row-major, last
/// coordinate fastest). Values outside the box are zero.
class ScalarField {
 public:
  ScalarField(int dim, int box_radius)
      : dim_(dim), radius_(box_radius), side_(2 * static_cast<std::size_t>(box_radius) + 1) {
    if (dim < 1) throw Error(ErrorKind::InvalidArgument, "field dimension must be >= 1");
    if (box_radius < 0) throw Error(ErrorKind::InvalidArgument, "box radius must be >= 0");
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= side_;
    values_.assign(n, 0.0);
  }

  /// Adopts `storage` as the backing buffer. Contents are unspecified until
  /// written; used to recycle buffers between rounds.
  ScalarField(int dim, int box_radius, std::vector<double>&& storage)
      : dim_(dim), radius_(box_radius), side_(2 * static_cast<std::size_t>(box_radius) + 1),
        values_(std::move(storage)) {
    if (dim < 1) throw Error(ErrorKind::InvalidArgument, "field dimension must be >= 1");
    if (box_radius < 0) throw Error(ErrorKind::InvalidArgument, "box radius must be >= 0");
    std::size_t n = 1;
    for (int i = 0; i < dim; ++i) n *= side_;
    if (values_.capacity() < n) {
      // headroom so a growing run does not reallocate every round
      values_.clear();
      values_.reserve(n + n / 4);
    }
    values_.resize(n);
  }

  /// Hands the buffer back for reuse; the field is left empty.
  [[nodiscard]] std::vector<double> release_storage() && {
    side_ = 0;
    return std::move(values_);
  }

  [[nodiscard]] int dim() const noexcept { return dim_; }
  [[nodiscard]] int box_radius() const noexcept { return radius_; }
  [[nodiscard]] std::size_t side() const noexcept { return side_; }
  [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
  [[nodiscard]] std::span<double> values() noexcept { return values_; }
  [[nodiscard]] std::span<const double> values() const noexcept { return values_; }

  [[nodiscard]] bool contains(std::span<const int> v) const {
    for (int c : v) {
      if (c < -radius_ || c > radius_) return false;
    }
    return true;
  }

  [[nodiscard]] std::size_t flat_index(std::span<const int> v) const {
    std::size_t k = 0;
    for (int i = 0; i < dim_; ++i) k = k * side_ + static_cast<std::size_t>(v[i] + radius_);
    return k;
  }

  [[nodiscard]] Offset coords(std::size_t flat) const {
    Offset v(dim_);
    for (int i = dim_ - 1; i >= 0; --i) {
      v[i] = static_cast<int>(flat % side_) - radius_;
      flat /= side_;
    }
    return v;
  }

  [[nodiscard]] double at(std::span<const int> v) const {
    if (static_cast<int>(v.size()) != dim_) throw Error(ErrorKind::DimensionMismatch, "vertex length");
    return contains(v) ? values_[flat_index(v)] : 0.0;
  }

  double& operator[](std::span<const int> v) { return values_[flat_index(v)]; }
  double& operator[](std::size_t flat) { return values_[flat]; }
  double operator[](std::size_t flat) const { return values_[flat]; }

  [[nodiscard]] double mass() const {
    double s = 0.0;
    for (double x : values_) s += x;
    return s;
  }

  [[nodiscard]] double sum_squares() const {
    double s = 0.0;
    for (double x : values_) s += x * x;
    return s;
  }

  [[nodiscard]] double sup_norm() const {
    double s = 0.0;
    for (double x : values_) s = std::max(s, std::abs(x));
    return s;
  }

  /// Copy onto a larger centered box.
  [[nodiscard]] ScalarField embedded(int new_radius) const {
    if (new_radius < radius_) throw Error(ErrorKind::InvalidArgument, "cannot shrink a field box");
    ScalarField out(dim_, new_radius);
    const int pad = new_radius - radius_;
    const std::size_t rows = values_.size() / side_;
    for (std::size_t r = 0; r < rows; ++r) {
      // coordinates of the row start in the old box, shifted into the new box
      std::size_t rem = r;
      std::size_t k = 0;
      std::size_t mul = 1;
      for (int i = dim_ - 2; i >= 0; --i) {
        const std::size_t c = rem % side_ + static_cast<std::size_t>(pad);
        rem /= side_;
        k += c * mul;
        mul *= out.side_;
      }
      const std::size_t dst = k * out.side_ + static_cast<std::size_t>(pad);
      std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(r * side_), side_,
                  out.values_.begin() + static_cast<std::ptrdiff_t>(dst));
    }
    return out;
  }

 private:
  int dim_;
  int radius_;
  std::size_t side_;
  std::vector<double> values_;
};

/// dst += scale * src, where src's box is contained in dst's box.
inline void add_scaled(ScalarField& dst, double scale, const ScalarField& src) {
  if (dst.dim() != src.dim()) throw Error(ErrorKind::DimensionMismatch, "field dimensions differ");
  if (src.box_radius() > dst.box_radius()) {
    throw Error(ErrorKind::InvalidArgument, "source box exceeds destination box");
  }
  const int pad = dst.box_radius() - src.box_radius();
  const std::size_t ss = src.side();
  const std::size_t ds = dst.side();
  const std::size_t rows = src.size() / ss;
  const std::span<const double> in = src.values();
  const std::span<double> out = dst.values();
  for (std::size_t r = 0; r < rows; ++r) {
    std::size_t rem = r;
    std::size_t k = 0;
    std::size_t mul = 1;
    for (int i = src.dim() - 2; i >= 0; --i) {
      k += (rem % ss + static_cast<std::size_t>(pad)) * mul;
      rem /= ss;
      mul *= ds;
    }
    double* o = out.data() + k * ds + static_cast<std::size_t>(pad);
    const double* x = in.data() + r * ss;
    for (std::size_t c = 0; c < ss; ++c) o[c] += scale * x[c];
  }
}

/// Unit mass at the origin.
namespace detail {

// Far tails of a long run decay through the subnormal range, where x86
// arithmetic is very slow. Flush them to zero for the duration of a step;
// the previous mode is restored on exit.
class FlushDenormals {
 public:
#if defined(__SSE2__)
  FlushDenormals() : saved_(_mm_getcsr()) { _mm_setcsr(saved_ | 0x8040u); }
  ~FlushDenormals() { _mm_setcsr(saved_); }

 private:
  unsigned saved_;
#endif
 public:
  FlushDenormals(const FlushDenormals&) = delete;
  FlushDenormals& operator=(const FlushDenormals&) = delete;
};

}  // namespace detail

inline ScalarField dirac_field(int dim) {
  ScalarField f(dim, 0);
  f.values()[0] = 1.0;
  return f;
}

struct FieldStats {
  double mass = 0.0;
  double l2_sq = 0.0;
  double sup = 0.0;
};

inline FieldStats field_stats(std::span<const double> v) {
  FieldStats st;
  for (double x : v) {
    st.mass += x;
    st.l2_sq += x * x;
    st.sup = std::max(st.sup, std::abs(x));
  }
  return st;
}

/// One fused round: a (omega * cur) + b cur - c prev, on the box of radius
/// cur.box_radius() + R. `prev` may be null (treated as zero) and must have a
/// box no larger than cur's. Each output row is an independent ordered sum, so
/// results do not depend on the thread count. Optionally reuses a buffer and
/// reports mass, l2 and sup of the result.
inline ScalarField gossip_step(const LatticeFilter& f, const ScalarField& cur, double a, double b,
                               const ScalarField* prev, double c, int threads = 1,
                               std::vector<double>&& recycled = {}, FieldStats* stats = nullptr) {
  if (f.dim() != cur.dim() || (prev && prev->dim() != cur.dim())) {
    throw Error(ErrorKind::DimensionMismatch, "filter and field dimensions differ");
  }
  if (prev && prev->box_radius() > cur.box_radius()) {
    throw Error(ErrorKind::InvalidArgument, "previous iterate has the larger box");
  }
  const int d = cur.dim();
  const int r = f.radius();
  const int m = cur.box_radius();
  const int om = m + r;
  const int pm = prev ? prev->box_radius() : 0;
  ScalarField out(d, om, std::move(recycled));
  const std::ptrdiff_t is = static_cast<std::ptrdiff_t>(cur.side());
  const std::ptrdiff_t os = static_cast<std::ptrdiff_t>(out.side());
  const std::ptrdiff_t ps = prev ? static_cast<std::ptrdiff_t>(prev->side()) : 0;
  const std::size_t rows = out.size() / static_cast<std::size_t>(os);
  const double* src = cur.values().data();
  const double* psrc = prev ? prev->values().data() : nullptr;
  double* dst = out.values().data();
  const auto& entries = f.entries();

  // flat row index of a leading-coordinate vector in a box of radius `rad`, or -1
  auto row_in = [d](const std::vector<int>& lead, int rad, std::ptrdiff_t side) -> std::ptrdiff_t {
    std::ptrdiff_t k = 0;
    for (int i = 0; i + 1 < d; ++i) {
      const int c = lead[static_cast<std::size_t>(i)];
      if (c < -rad || c > rad) return -1;
      k = k * side + (c + rad);
    }
    return k;
  };

  // A stream adds w * src[u - shift] to out[u] for u in [lo, hi).
  struct Stream {
    const double* src;
    double w;
    std::ptrdiff_t shift;
    std::ptrdiff_t lo;
    std::ptrdiff_t hi;
  };

  std::vector<FieldStats> row_stats(stats ? rows : 0);

  auto work = [&](std::size_t row_begin, std::size_t row_end) {
    const detail::FlushDenormals ftz;
    std::vector<int> lead(static_cast<std::size_t>(d > 1 ? d - 1 : 0));
    std::vector<int> moved(lead.size());
    std::vector<Stream> streams;
    streams.reserve(entries.size() + 2);
    for (std::size_t row = row_begin; row < row_end; ++row) {
      std::size_t rem = row;
      for (int i = d - 2; i >= 0; --i) {
        lead[static_cast<std::size_t>(i)] = static_cast<int>(rem % static_cast<std::size_t>(os)) - om;
        rem /= static_cast<std::size_t>(os);
      }
      streams.clear();
      for (const auto& e : entries) {
        for (std::size_t i = 0; i < lead.size(); ++i) moved[i] = lead[i] - e.offset[i];
        const std::ptrdiff_t sr = row_in(moved, m, is);
        if (sr < 0) continue;
        const std::ptrdiff_t sh = r + e.offset[static_cast<std::size_t>(d - 1)];
        streams.push_back({src + sr * is, a * e.weight, sh, sh, sh + is});
      }
      if (b != 0.0) {
        const std::ptrdiff_t sr = row_in(lead, m, is);
        if (sr >= 0) streams.push_back({src + sr * is, b, r, r, r + is});
      }
      if (psrc && c != 0.0) {
        const std::ptrdiff_t sr = row_in(lead, pm, ps);
        const std::ptrdiff_t sh = om - pm;
        if (sr >= 0) streams.push_back({psrc + sr * ps, -c, sh, sh, sh + ps});
      }

      double* __restrict o = dst + static_cast<std::ptrdiff_t>(row) * os;
      if (streams.empty()) std::fill(o, o + os, 0.0);
      for (std::size_t first = 0; first < streams.size(); first += 4) {
        const std::size_t count = std::min<std::size_t>(4, streams.size() - first);
        const Stream* st = streams.data() + first;
        std::ptrdiff_t lo = st[0].lo;
        std::ptrdiff_t hi = st[0].hi;
        for (std::size_t k = 1; k < count; ++k) {
          lo = std::max(lo, st[k].lo);
          hi = std::min(hi, st[k].hi);
        }
        if (lo >= hi) {
          lo = hi = 0;  // no common range: every stream takes the scalar path
        }
        // the first chunk assigns on [lo, hi); everything else starts from zero
        const bool assign = first == 0 && lo < hi;
        if (first == 0) {
          std::fill(o, o + lo, 0.0);
          std::fill(o + (lo < hi ? hi : 0), o + os, 0.0);
        }
        for (std::size_t k = 0; k < count; ++k) {
          const Stream& q = st[k];
          const std::ptrdiff_t left_end = lo < hi ? std::min(q.hi, lo) : q.hi;
          for (std::ptrdiff_t u = q.lo; u < left_end; ++u) o[u] += q.w * q.src[u - q.shift];
          if (lo < hi) {
            for (std::ptrdiff_t u = std::max(q.lo, hi); u < q.hi; ++u) o[u] += q.w * q.src[u - q.shift];
          }
        }
        if (lo >= hi) continue;
        switch (count) {
          case 1: {
            const double w0 = st[0].w;
            const double* __restrict p0 = st[0].src - st[0].shift;
            if (assign) {
              for (std::ptrdiff_t u = lo; u < hi; ++u) o[u] = w0 * p0[u];
            } else {
              for (std::ptrdiff_t u = lo; u < hi; ++u) o[u] += w0 * p0[u];
            }
            break;
          }
          case 2: {
            const double w0 = st[0].w, w1 = st[1].w;
            const double* __restrict p0 = st[0].src - st[0].shift;
            const double* __restrict p1 = st[1].src - st[1].shift;
            if (assign) {
              for (std::ptrdiff_t u = lo; u < hi; ++u) o[u] = w0 * p0[u] + w1 * p1[u];
            } else {
              for (std::ptrdiff_t u = lo; u < hi; ++u) o[u] += w0 * p0[u] + w1 * p1[u];
            }
            break;
          }
          case 3: {
            const double w0 = st[0].w, w1 = st[1].w, w2 = st[2].w;
            const double* __restrict p0 = st[0].src - st[0].shift;
            const double* __restrict p1 = st[1].src - st[1].shift;
            const double* __restrict p2 = st[2].src - st[2].shift;
            if (assign) {
              for (std::ptrdiff_t u = lo; u < hi; ++u) o[u] = w0 * p0[u] + w1 * p1[u] + w2 * p2[u];
            } else {
              for (std::ptrdiff_t u = lo; u < hi; ++u) o[u] += w0 * p0[u] + w1 * p1[u] + w2 * p2[u];
            }
            break;
          }
          default: {
            const double w0 = st[0].w, w1 = st[1].w, w2 = st[2].w, w3 = st[3].w;
            const double* __restrict p0 = st[0].src - st[0].shift;
            const double* __restrict p1 = st[1].src - st[1].shift;
            const double* __restrict p2 = st[2].src - st[2].shift;
            const double* __restrict p3 = st[3].src - st[3].shift;
            if (assign) {
              for (std::ptrdiff_t u = lo; u < hi; ++u) o[u] = w0 * p0[u] + w1 * p1[u] + w2 * p2[u] + w3 * p3[u];
            } else {
              for (std::ptrdiff_t u = lo; u < hi; ++u) o[u] += w0 * p0[u] + w1 * p1[u] + w2 * p2[u] + w3 * p3[u];
            }
            break;
          }
        }
      }
      if (stats) row_stats[row] = field_stats(std::span<const double>(o, static_cast<std::size_t>(os)));
    }
  };

  if (threads <= 1 || rows < 2) {
    work(0, rows);
  } else {
    const std::size_t nt = std::min<std::size_t>(static_cast<std::size_t>(threads), rows);
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < nt; ++t) {
      pool.emplace_back(work, rows * t / nt, rows * (t + 1) / nt);
    }
  }
  if (stats) {
    *stats = FieldStats{};
    for (const auto& rs : row_stats) {
      stats->mass += rs.mass;
      stats->l2_sq += rs.l2_sq;
      stats->sup = std::max(stats->sup, rs.sup);
    }
  }
  return out;
}

/// (omega * x)(v) = sum_eta omega(eta) x(v - eta). The output box grows by the
/// filter radius.
inline ScalarField convolve(const LatticeFilter& f, const ScalarField& x, int threads = 1) {
  return gossip_step(f, x, 1.0, 0.0, nullptr, 0.0, threads);
}

}  // namespace epd_gossip
