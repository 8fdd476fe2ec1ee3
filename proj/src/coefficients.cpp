#include "sdeflow/coefficients.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "sdeflow/errors.hpp"
#include "sdeflow/rng.hpp"

namespace sdeflow {

CoefficientField CoefficientField::constant(Mat sigma, Drift drift) {
  CoefficientField f;
  f.dim_ = static_cast<int>(sigma.rows());
  f.family_ = CoefficientFamily::Constant;
  f.const_sigma_ = std::move(sigma);
  f.drift_ = std::move(drift);
  return f;
}

CoefficientField CoefficientField::diagonal_affine(Vec offset, Vec gain, Drift drift) {
  CoefficientField f;
  f.dim_ = static_cast<int>(offset.size());
  f.family_ = CoefficientFamily::DiagonalAffine;
  f.affine_offset_ = std::move(offset);
  f.affine_gain_ = std::move(gain);
  f.drift_ = std::move(drift);
  return f;
}

CoefficientField CoefficientField::trigonometric(int dim, double amplitude, double frequency,
                                                 double offset, Drift drift) {
  CoefficientField f;
  f.dim_ = dim;
  f.family_ = CoefficientFamily::Trigonometric;
  f.trig_amplitude_ = amplitude;
  f.trig_frequency_ = frequency;
  f.trig_offset_ = offset;
  f.drift_ = std::move(drift);
  return f;
}

CoefficientField CoefficientField::custom(int dim, SigmaFn sigma, GradFn grad, HessFn hess,
                                          Drift drift) {
  CoefficientField f;
  f.dim_ = dim;
  f.family_ = CoefficientFamily::Custom;
  f.custom_sigma_ = std::move(sigma);
  f.custom_grad_ = std::move(grad);
  f.custom_hess_ = std::move(hess);
  f.drift_ = std::move(drift);
  return f;
}

void CoefficientField::sigma_into(const Vec& x, Mat& out) const {
  switch (family_) {
    case CoefficientFamily::Constant:
      out = const_sigma_;
      return;
    case CoefficientFamily::DiagonalAffine:
      out.fill(0.0);
      for (int i = 0; i < dim_; ++i) out(i, i) = affine_offset_[i] + affine_gain_[i] * x[i];
      return;
    case CoefficientFamily::Trigonometric:
      out.fill(0.0);
      for (int i = 0; i < dim_; ++i) {
        const double a = trig_frequency_ * x[i];
        const double t = (i % 2 == 0) ? std::sin(a) : std::cos(a);
        out(i, i) = trig_amplitude_ * (t + trig_offset_);
      }
      return;
    case CoefficientFamily::Custom:
      out = custom_sigma_(x);
      return;
  }
}

Mat CoefficientField::sigma(const Vec& x) const {
  Mat m(dim_, dim_);
  sigma_into(x, m);
  return m;
}

Vec CoefficientField::b(const Vec& x) const {
  switch (drift_.kind) {
    case Drift::Kind::Zero:
      return Vec(dim_);
    case Drift::Kind::Constant:
      return drift_.constant;
    case Drift::Kind::Linear:
      return drift_.scale * x;
  }
  return Vec(dim_);
}

Tensor3 CoefficientField::grad_sigma(const Vec& x) const {
  Tensor3 g(dim_);
  switch (family_) {
    case CoefficientFamily::Constant:
      break;
    case CoefficientFamily::DiagonalAffine:
      for (int i = 0; i < dim_; ++i) g(i, i, i) = affine_gain_[i];
      break;
    case CoefficientFamily::Trigonometric:
      for (int i = 0; i < dim_; ++i) {
        const double a = trig_frequency_ * x[i];
        const double dt = (i % 2 == 0) ? std::cos(a) : -std::sin(a);
        g(i, i, i) = trig_amplitude_ * trig_frequency_ * dt;
      }
      break;
    case CoefficientFamily::Custom:
      return custom_grad_(x);
  }
  return g;
}

Tensor4 CoefficientField::hess_sigma(const Vec& x) const {
  Tensor4 h(dim_);
  switch (family_) {
    case CoefficientFamily::Constant:
    case CoefficientFamily::DiagonalAffine:
      break;
    case CoefficientFamily::Trigonometric:
      for (int i = 0; i < dim_; ++i) {
        const double a = trig_frequency_ * x[i];
        const double d2 = (i % 2 == 0) ? -std::sin(a) : -std::cos(a);
        h(i, i, i, i) = trig_amplitude_ * trig_frequency_ * trig_frequency_ * d2;
      }
      break;
    case CoefficientFamily::Custom:
      if (!custom_hess_)
        throw Error(Errc::MissingDerivative, "custom field has no hess_sigma callback");
      return custom_hess_(x);
  }
  return h;
}

void CoefficientField::grad_sigma_sigma_into(const Vec& x, Vec& out) const {
  // v_i = sum_{k,j} grad(i,j,k) sigma_kj. The built-in families are diagonal,
  // where the sum collapses to grad(i,i,i) sigma_ii.
  switch (family_) {
    case CoefficientFamily::Constant:
      out.fill(0.0);
      return;
    case CoefficientFamily::DiagonalAffine:
      for (int i = 0; i < dim_; ++i)
        out[i] = affine_gain_[i] * (affine_offset_[i] + affine_gain_[i] * x[i]);
      return;
    case CoefficientFamily::Trigonometric:
      for (int i = 0; i < dim_; ++i) {
        const double a = trig_frequency_ * x[i];
        const double t = (i % 2 == 0) ? std::sin(a) : std::cos(a);
        const double dt = (i % 2 == 0) ? std::cos(a) : -std::sin(a);
        out[i] = trig_amplitude_ * trig_frequency_ * dt * trig_amplitude_ * (t + trig_offset_);
      }
      return;
    case CoefficientFamily::Custom: {
      const Tensor3 g = custom_grad_(x);
      const Mat s = custom_sigma_(x);
      for (int i = 0; i < dim_; ++i) {
        double v = 0.0;
        for (int k = 0; k < dim_; ++k)
          for (int j = 0; j < dim_; ++j) v += g(i, j, k) * s(k, j);
        out[i] = v;
      }
      return;
    }
  }
}

void CoefficientField::ito_drift_into(const Vec& x, Vec& out) const {
  grad_sigma_sigma_into(x, out);
  out *= 0.5;
  switch (drift_.kind) {
    case Drift::Kind::Zero:
      break;
    case Drift::Kind::Constant:
      out += drift_.constant;
      break;
    case Drift::Kind::Linear:
      axpy(drift_.scale, x, out);
      break;
  }
}

Vec CoefficientField::ito_drift(const Vec& x) const {
  Vec v(dim_);
  ito_drift_into(x, v);
  return v;
}

Mat CoefficientField::composite(CompositeKind kind, const Vec& x) const {
  switch (kind) {
    case CompositeKind::GradSigmaSigma: {
      Vec v(dim_);
      grad_sigma_sigma_into(x, v);
      Mat m(dim_, 1);
      for (int i = 0; i < dim_; ++i) m(i, 0) = v[i];
      return m;
    }
    case CompositeKind::GradSigmaGradSigmaSigma: {
      Vec v(dim_);
      grad_sigma_sigma_into(x, v);
      const Tensor3 g = grad_sigma(x);
      Mat m(dim_, dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
          double s = 0.0;
          for (int k = 0; k < dim_; ++k) s += g(i, j, k) * v[k];
          m(i, j) = s;
        }
      return m;
    }
    case CompositeKind::GradSigmaItoDrift: {
      const Vec bt = ito_drift(x);
      const Tensor3 g = grad_sigma(x);
      Mat m(dim_, dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
          double s = 0.0;
          for (int k = 0; k < dim_; ++k) s += g(i, j, k) * bt[k];
          m(i, j) = s;
        }
      return m;
    }
    case CompositeKind::SigmaHessSigmaSigma: {
      const Tensor4 h = hess_sigma(x);
      const Mat ss = aat(sigma(x));
      Mat m(dim_, dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j) {
          double s = 0.0;
          for (int k = 0; k < dim_; ++k)
            for (int l = 0; l < dim_; ++l) s += h(i, j, k, l) * ss(k, l);
          m(i, j) = s;
        }
      return m;
    }
  }
  return Mat(dim_, dim_);
}

double CoefficientField::sigma_sup_norm_hint() const {
  switch (family_) {
    case CoefficientFamily::Constant:
      return const_sigma_.frobenius();
    case CoefficientFamily::DiagonalAffine: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i)
        s += std::abs(affine_offset_[i]) + std::abs(affine_gain_[i]) * 10.0;
      return s;
    }
    case CoefficientFamily::Trigonometric:
      return std::abs(trig_amplitude_) * (1.0 + std::abs(trig_offset_)) * std::sqrt(double(dim_));
    case CoefficientFamily::Custom:
      return 1.0;
  }
  return 1.0;
}

namespace {

Vec sample_in_closure(const Domain& domain, SequentialRng& rng) {
  const auto [lo, hi] = domain.bounding_box();
  for (;;) {
    Vec x(lo.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
    if (domain.contains(x) != Classification::Exterior) return x;
  }
}

}  // namespace

LipschitzReport audit_lipschitz(const CoefficientField& field, const Domain& domain, int samples,
                                std::uint64_t seed) {
  if (samples < 2) throw Error(Errc::InsufficientSamples, "audit needs at least 2 samples");
  SequentialRng rng(mix64(seed));
  std::vector<Vec> pts;
  pts.reserve(samples);
  for (int i = 0; i < samples; ++i) pts.push_back(sample_in_closure(domain, rng));

  struct Fn {
    std::string name;
    std::function<Mat(const Vec&)> eval;
  };
  std::vector<Fn> fns;
  fns.push_back({"sigma", [&](const Vec& x) { return field.sigma(x); }});
  fns.push_back({"ito_drift", [&](const Vec& x) {
                   Vec v = field.ito_drift(x);
                   Mat m(v.size(), 1);
                   for (std::size_t i = 0; i < v.size(); ++i) m(i, 0) = v[i];
                   return m;
                 }});
  fns.push_back({"grad_sigma.sigma",
                 [&](const Vec& x) { return field.composite(CompositeKind::GradSigmaSigma, x); }});
  fns.push_back({"grad_sigma.grad_sigma.sigma", [&](const Vec& x) {
                   return field.composite(CompositeKind::GradSigmaGradSigmaSigma, x);
                 }});
  fns.push_back({"grad_sigma.ito_drift", [&](const Vec& x) {
                   return field.composite(CompositeKind::GradSigmaItoDrift, x);
                 }});
  fns.push_back({"sigmaT.hess_sigma.sigma", [&](const Vec& x) {
                   return field.composite(CompositeKind::SigmaHessSigmaSigma, x);
                 }});

  LipschitzReport report;
  report.samples = samples;
  for (const auto& fn : fns) {
    std::vector<Mat> vals;
    vals.reserve(samples);
    bool available = true;
    for (const Vec& p : pts) {
      try {
        vals.push_back(fn.eval(p));
      } catch (const Error& e) {
        if (e.code() == Errc::MissingDerivative) {
          available = false;
          break;
        }
        throw;
      }
    }
    if (!available) continue;
    auto max_ratio_over_prefix = [&](int n) {
      double best = 0.0;
      for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
          const double dx = norm(pts[i] - pts[j]);
          if (dx == 0.0) continue;
          Mat diff = vals[i];
          diff -= vals[j];
          best = std::max(best, diff.frobenius() / dx);
        }
      return best;
    };
    LipschitzReport::Entry e;
    e.name = fn.name;
    e.estimate = max_ratio_over_prefix(samples);
    e.estimate_half = max_ratio_over_prefix(samples / 2);
    if (e.estimate_half > 0.0)
      e.growth_ratio = e.estimate / e.estimate_half;
    else
      e.growth_ratio = e.estimate > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    e.stable = e.growth_ratio <= 1.25;
    report.k = std::max(report.k, e.estimate);
    report.entries.push_back(std::move(e));
  }
  return report;
}

}  // namespace sdeflow
