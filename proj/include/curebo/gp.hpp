#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include "curebo/design_space.hpp"
#include "curebo/error.hpp"
#include "curebo/nelder_mead.hpp"

namespace curebo {

/// ARD Matern-5/2 hyperparameters. `scale` is the output-variance
/// initialization sd(Y)/sqrt(2); the correlation itself is scale free because
/// the process variance is profiled out in closed form.
struct KernelParams {
  std::vector<double> length_scales;
  double scale = 1.0;
};

/// Matern-5/2 correlation with one length scale per input dimension.
inline double matern52(std::span<const double> a, std::span<const double> b,
                       std::span<const double> length_scales) {
  if (a.size() != b.size() || a.size() != length_scales.size()) {
    throw DomainError("matern52: dimension mismatch");
  }
  double r2 = 0.0;
  for (std::size_t h = 0; h < a.size(); ++h) {
    const double t = (a[h] - b[h]) / length_scales[h];
    r2 += t * t;
  }
  const double sr = std::sqrt(5.0 * r2);
  return (1.0 + sr + 5.0 * r2 / 3.0) * std::exp(-sr);
}

inline double matern52(const DesignPoint& a, const DesignPoint& b, const KernelParams& params) {
  return matern52(a.coords(), b.coords(), params.length_scales);
}

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;

  [[nodiscard]] double stddev() const { return std::sqrt(variance); }
};

struct FitSettings {
  double initial_jitter = 1e-10;
  double max_jitter = 1e-4;
  double jitter_growth = 10.0;
  double min_length_scale = 1e-3;
  double max_length_scale = 1e3;
  std::size_t starts = 3;  // default init plus copies scaled by e and 1/e
  std::size_t max_evaluations_per_start = 300;
  bool optimize = true;
  int refine_iterations = 200;
};

namespace detail {

// Scaled inputs: column h divided by length scale h.
inline Eigen::MatrixXd scale_inputs(const Eigen::MatrixXd& x, std::span<const double> lengths) {
  Eigen::MatrixXd s = x;
  for (Eigen::Index h = 0; h < x.cols(); ++h) s.col(h) /= lengths[static_cast<std::size_t>(h)];
  return s;
}

inline double matern52_from_sq(double r2) {
  const double sr = std::sqrt(5.0 * r2);
  return (1.0 + sr + 5.0 * r2 / 3.0) * std::exp(-sr);
}

inline Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& scaled) {
  const Eigen::Index n = scaled.rows();
  Eigen::MatrixXd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    r(i, i) = 1.0;
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = matern52_from_sq((scaled.row(i) - scaled.row(j)).squaredNorm());
      r(i, j) = v;
      r(j, i) = v;
    }
  }
  return r;
}

struct Factor {
  Eigen::MatrixXd lower;  // L with L L^T = R + jitter I
  double jitter = 0.0;
  bool ok = false;
};

inline Factor factorize(const Eigen::MatrixXd& r, const FitSettings& s) {
  Factor f;
  for (double jitter = s.initial_jitter; jitter <= s.max_jitter * (1.0 + 1e-12); jitter *= s.jitter_growth) {
    Eigen::MatrixXd a = r;
    a.diagonal().array() += jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success) {
      Eigen::MatrixXd l = llt.matrixL();
      if (l.diagonal().allFinite() && (l.diagonal().array() > 0.0).all()) {
        f.lower = std::move(l);
        f.jitter = jitter;
        f.ok = true;
        return f;
      }
    }
  }
  return f;
}

struct Profile {
  double mu = 0.0;
  double sigma2 = 0.0;
  double log_likelihood = -std::numeric_limits<double>::infinity();
  Eigen::VectorXd ones_solved;  // L^{-1} 1
  Eigen::VectorXd weights;      // R^{-1} (Y - 1 mu)
};

inline Profile profile(const Eigen::MatrixXd& lower, const Eigen::VectorXd& y) {
  const auto tri = lower.triangularView<Eigen::Lower>();
  const Eigen::Index n = y.size();
  Profile p;
  p.ones_solved = tri.solve(Eigen::VectorXd::Ones(n));
  const Eigen::VectorXd zy = tri.solve(y);
  p.mu = p.ones_solved.dot(zy) / p.ones_solved.squaredNorm();
  const Eigen::VectorXd resid = zy - p.mu * p.ones_solved;
  p.sigma2 = resid.squaredNorm() / static_cast<double>(n);
  p.weights = lower.transpose().triangularView<Eigen::Upper>().solve(resid);
  const double log_det = 2.0 * lower.diagonal().array().log().sum();
  const double s2 = std::max(p.sigma2, std::numeric_limits<double>::min());
  p.log_likelihood = -0.5 * static_cast<double>(n) * std::log(s2) - 0.5 * log_det;
  return p;
}

}  // namespace detail

/// Concentrated (profile) log likelihood of length scales, constants dropped:
/// -n/2 log(sigma2_hat) - 1/2 log|R|. Returns -inf when R cannot be factored.
inline double profile_log_likelihood(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                     std::span<const double> lengths, const FitSettings& s = {}) {
  const auto f = detail::factorize(detail::correlation_matrix(detail::scale_inputs(x, lengths)), s);
  if (!f.ok) return -std::numeric_limits<double>::infinity();
  return detail::profile(f.lower, y).log_likelihood;
}

/// Ordinary-kriging Gaussian-process surrogate with profiled mean and variance.
///
/// Training pairs are stored in lexicographic order of the inputs, so the
/// fitted model does not depend on the order in which data were supplied.
class GpSurrogate {
 public:
  static GpSurrogate fit(std::span<const DesignPoint> train_x, std::span<const double> train_y,
                         const FitSettings& settings = {}) {
    const std::size_t n = train_x.size();
    if (n < 2) throw DomainError("gp fit needs at least 2 training points");
    if (train_y.size() != n) throw DomainError("gp fit: x and y sizes differ");
    const std::size_t d = train_x.front().dims();
    for (const auto& p : train_x) {
      if (p.dims() != d) throw DomainError("gp fit: inconsistent input dimensions");
    }
    for (double v : train_y) {
      if (!std::isfinite(v)) throw DomainError("gp fit: non-finite training output");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto ca = train_x[a].coords(), cb = train_x[b].coords();
      if (std::lexicographical_compare(ca.begin(), ca.end(), cb.begin(), cb.end())) return true;
      if (std::lexicographical_compare(cb.begin(), cb.end(), ca.begin(), ca.end())) return false;
      return train_y[a] < train_y[b];
    });

    GpSurrogate m;
    m.settings_ = settings;
    m.x_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    m.y_.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = train_x[order[i]];
      m.train_x_.push_back(p);
      for (std::size_t h = 0; h < d; ++h) m.x_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)) = p[h];
      m.y_(static_cast<Eigen::Index>(i)) = train_y[order[i]];
    }

    // initial length scales: per-dimension standard deviation of the inputs
    std::vector<double> init(d);
    for (std::size_t h = 0; h < d; ++h) {
      const auto col = m.x_.col(static_cast<Eigen::Index>(h));
      const double mean = col.mean();
      const double sd = std::sqrt((col.array() - mean).square().sum() / static_cast<double>(n - 1));
      init[h] = std::clamp(sd > 0.0 ? sd : 1.0, settings.min_length_scale, settings.max_length_scale);
    }
    const double ysd = std::sqrt((m.y_.array() - m.y_.mean()).square().sum() / static_cast<double>(n - 1));
    m.kernel_.scale = ysd > 0.0 ? ysd / std::sqrt(2.0) : 1.0;
    m.initial_log_likelihood_ = profile_log_likelihood(m.x_, m.y_, init, settings);

    std::vector<double> best = init;
    double best_ll = m.initial_log_likelihood_;
    const bool constant = m.y_.maxCoeff() == m.y_.minCoeff();
    if (settings.optimize && !constant) {
      NelderMeadSettings nm;
      nm.lower = std::log(settings.min_length_scale);
      nm.upper = std::log(settings.max_length_scale);
      nm.max_evaluations = settings.max_evaluations_per_start;
      auto objective = [&](const std::vector<double>& log_l) {
        std::vector<double> l(log_l.size());
        for (std::size_t h = 0; h < l.size(); ++h) l[h] = std::exp(log_l[h]);
        return -profile_log_likelihood(m.x_, m.y_, l, settings);
      };
      for (std::size_t s = 0; s < settings.starts; ++s) {
        // start 0 is the plain initialization, then x e, x 1/e, x e^2, ...
        const double shift = s == 0 ? 0.0 : (s % 2 == 1 ? 1.0 : -1.0) * static_cast<double>((s + 1) / 2);
        std::vector<double> start(d);
        for (std::size_t h = 0; h < d; ++h) start[h] = std::log(init[h]) + shift;
        const auto r = nelder_mead(objective, start, nm);
        m.likelihood_evaluations_ += r.evaluations;
        if (-r.value > best_ll) {
          best_ll = -r.value;
          for (std::size_t h = 0; h < d; ++h) best[h] = std::exp(r.x[h]);
        }
      }
    }
    m.kernel_.length_scales = best;
    m.refactor();
    return m;
  }

  [[nodiscard]] Posterior predict(const DesignPoint& q) const {
    return predict(std::span<const DesignPoint>(&q, 1)).front();
  }

  /// Batch prediction; equal to calling predict on each query.
  [[nodiscard]] std::vector<Posterior> predict(std::span<const DesignPoint> queries) const {
    const Eigen::Index n = x_.rows();
    const auto m = static_cast<Eigen::Index>(queries.size());
    std::vector<Posterior> out;
    out.reserve(queries.size());
    constexpr Eigen::Index kBlock = 1024;
    const Eigen::MatrixXd xs = detail::scale_inputs(x_, kernel_.length_scales);
    for (Eigen::Index start = 0; start < m; start += kBlock) {
      const Eigen::Index len = std::min(kBlock, m - start);
      Eigen::MatrixXd rq(n, len);
      Eigen::VectorXd q(dims());
      for (Eigen::Index c = 0; c < len; ++c) {
        const auto& p = queries[static_cast<std::size_t>(start + c)];
        if (p.dims() != dims()) throw DomainError("gp predict: query dimension mismatch");
        for (Eigen::Index h = 0; h < q.size(); ++h) q(h) = p[static_cast<std::size_t>(h)] / kernel_.length_scales[static_cast<std::size_t>(h)];
        for (Eigen::Index i = 0; i < n; ++i) rq(i, c) = detail::matern52_from_sq((xs.row(i).transpose() - q).squaredNorm());
      }
      const Eigen::MatrixXd v = factor_.triangularView<Eigen::Lower>().solve(rq);
      for (Eigen::Index c = 0; c < len; ++c) out.push_back(posterior_from(rq.col(c), v.col(c)));
    }
    return out;
  }

  [[nodiscard]] std::size_t dims() const noexcept { return static_cast<std::size_t>(x_.cols()); }
  [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(x_.rows()); }
  [[nodiscard]] const KernelParams& kernel() const noexcept { return kernel_; }
  [[nodiscard]] double mu_hat() const noexcept { return mu_hat_; }
  [[nodiscard]] double sigma2_hat() const noexcept { return sigma2_hat_; }
  [[nodiscard]] double jitter() const noexcept { return jitter_; }
  [[nodiscard]] double log_likelihood() const noexcept { return log_likelihood_; }
  [[nodiscard]] double initial_log_likelihood() const noexcept { return initial_log_likelihood_; }
  [[nodiscard]] std::size_t likelihood_evaluations() const noexcept { return likelihood_evaluations_; }
  [[nodiscard]] const std::vector<DesignPoint>& train_x() const noexcept { return train_x_; }
  [[nodiscard]] const Eigen::VectorXd& train_y() const noexcept { return y_; }
  [[nodiscard]] const Eigen::MatrixXd& inputs() const noexcept { return x_; }
  [[nodiscard]] const Eigen::MatrixXd& factor() const noexcept { return factor_; }

  /// Correlation matrix of the training inputs, without jitter.
  [[nodiscard]] Eigen::MatrixXd correlation() const {
    return detail::correlation_matrix(detail::scale_inputs(x_, kernel_.length_scales));
  }

  /// Hyperparameters and likelihood as a one-line JSON object.
  [[nodiscard]] std::string describe() const {
    std::ostringstream os;
    os.precision(17);
    os << "{\"n\":" << size() << ",\"length_scales\":[";
    for (std::size_t h = 0; h < kernel_.length_scales.size(); ++h) os << (h ? "," : "") << kernel_.length_scales[h];
    os << "],\"scale_init\":" << kernel_.scale << ",\"mu_hat\":" << mu_hat_ << ",\"sigma2_hat\":" << sigma2_hat_
       << ",\"jitter\":" << jitter_ << ",\"log_likelihood\":" << log_likelihood_
       << ",\"initial_log_likelihood\":" << initial_log_likelihood_ << "}";
    return os.str();
  }

 private:
  GpSurrogate() = default;

  void refactor() {
    const Eigen::MatrixXd r = correlation();
    auto f = detail::factorize(r, settings_);
    if (!f.ok) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(r, Eigen::EigenvaluesOnly);
      const auto& ev = eig.eigenvalues();
      std::ostringstream os;
      os << "gp fit: correlation matrix not positive definite after jitter " << settings_.max_jitter
         << " (n=" << r.rows() << ", min eigenvalue " << ev.minCoeff() << ", max eigenvalue " << ev.maxCoeff()
         << ", condition estimate " << ev.maxCoeff() / std::max(std::abs(ev.minCoeff()), 1e-300) << ")";
      throw NumericalError(os.str());
    }
    factor_ = std::move(f.lower);
    jitter_ = f.jitter;
    auto p = detail::profile(factor_, y_);
    if (y_.maxCoeff() == y_.minCoeff()) {
      // exact closed form for constant data; avoids round-off residuals
      p.mu = y_(0);
      p.sigma2 = 0.0;
      p.weights.setZero();
    }
    refine_weights(r, p);
    mu_hat_ = p.mu;
    sigma2_hat_ = p.sigma2;
    log_likelihood_ = p.log_likelihood;
    ones_solved_ = std::move(p.ones_solved);
    ones_quad_ = ones_solved_.squaredNorm();
    weights_ = std::move(p.weights);
  }

  // The jittered factor perturbs R^{-1}(Y - 1 mu) enough to spoil exact
  // interpolation when R is badly conditioned. Iterative refinement against
  // the unjittered R removes that error; steps that do not help are dropped.
  void refine_weights(const Eigen::MatrixXd& r, detail::Profile& p) const {
    if (jitter_ == 0.0 || !p.weights.allFinite()) return;
    const auto tri = factor_.triangularView<Eigen::Lower>();
    const Eigen::VectorXd target = y_ - Eigen::VectorXd::Constant(y_.size(), p.mu);
    Eigen::VectorXd res = target - r * p.weights;
    double best = res.lpNorm<Eigen::Infinity>();
    for (int it = 0; it < settings_.refine_iterations && best > 1e-15 * target.lpNorm<Eigen::Infinity>(); ++it) {
      const Eigen::VectorXd step = tri.transpose().solve(tri.solve(res));
      const Eigen::VectorXd next = p.weights + step;
      const Eigen::VectorXd next_res = target - r * next;
      const double norm = next_res.lpNorm<Eigen::Infinity>();
      if (!(norm < best)) break;
      p.weights = next;
      res = next_res;
      best = norm;
    }
  }

  [[nodiscard]] Posterior posterior_from(const Eigen::Ref<const Eigen::VectorXd>& r,
                                         const Eigen::Ref<const Eigen::VectorXd>& v) const {
    Posterior post;
    post.mean = mu_hat_ + r.dot(weights_);
    const double trend = 1.0 - ones_solved_.dot(v);
    const double var = sigma2_hat_ * (1.0 - v.squaredNorm() + trend * trend / ones_quad_);
    post.variance = std::max(var, 0.0);
    return post;
  }

  FitSettings settings_;
  std::vector<DesignPoint> train_x_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd y_;
  KernelParams kernel_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd ones_solved_;
  Eigen::VectorXd weights_;
  double ones_quad_ = 1.0;
  double mu_hat_ = 0.0;
  double sigma2_hat_ = 0.0;
  double jitter_ = 0.0;
  double log_likelihood_ = 0.0;
  double initial_log_likelihood_ = 0.0;
  std::size_t likelihood_evaluations_ = 0;
};

}  // namespace curebo
