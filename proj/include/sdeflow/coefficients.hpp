#pragma once

// Diffusion sigma and drift b with analytic derivatives, the Ito-corrected
// drift, and the composite fields whose Lipschitz continuity the solver's
// well-posedness rests on, plus a sampling-based Lipschitz auditor.
//
// Index conventions (sigma is d x d, grad_sigma(i,j,k) = d sigma_ij / d x_k,
// hess_sigma(i,j,k,l) = d^2 sigma_ij / d x_k d x_l):
//   grad_sigma . sigma       (vector)  v_i  = sum_{k,j} grad(i,j,k) sigma_kj
//   grad_sigma . grad_sigma . sigma    M_ij = sum_k grad(i,j,k) v_k
//   grad_sigma . ito_drift             M_ij = sum_k grad(i,j,k) bt_k
//   sigma^T . hess_sigma . sigma       M_ij = sum_{k,l} hess(i,j,k,l) (sigma sigma^T)_kl
// The first contraction is the one entering the Ito drift; the same rank-3
// grad_sigma also admits the matrix contraction sum_k grad(i,j,k) sigma_kl
// (the integrand acting on dB), which callers form on demand.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sdeflow/geometry.hpp"
#include "sdeflow/linalg.hpp"

namespace sdeflow {

enum class CoefficientFamily { Constant, DiagonalAffine, Trigonometric, Custom };

enum class CompositeKind {
  GradSigmaSigma,           // vector, returned as a d x 1 matrix
  GradSigmaGradSigmaSigma,  // d x d
  GradSigmaItoDrift,        // d x d
  SigmaHessSigmaSigma,      // d x d
};

struct Drift {
  enum class Kind { Zero, Constant, Linear } kind = Kind::Zero;
  Vec constant;        // Kind::Constant
  double scale = 0.0;  // Kind::Linear: b(x) = scale * x

  static Drift zero() { return {}; }
  static Drift constant_vec(Vec v) { return {Kind::Constant, std::move(v), 0.0}; }
  static Drift linear(double scale) { return {Kind::Linear, {}, scale}; }
};

class CoefficientField {
 public:
  using SigmaFn = std::function<Mat(const Vec&)>;
  using GradFn = std::function<Tensor3(const Vec&)>;
  using HessFn = std::function<Tensor4(const Vec&)>;

  static CoefficientField constant(Mat sigma, Drift drift);
  // sigma_ii(x) = offset_i + gain_i * x_i, off-diagonal zero
  static CoefficientField diagonal_affine(Vec offset, Vec gain, Drift drift);
  // sigma_ii(x) = amplitude * (sin(frequency x_i) + offset) for even i,
  //               amplitude * (cos(frequency x_i) + offset) for odd i
  static CoefficientField trigonometric(int dim, double amplitude, double frequency,
                                        double offset, Drift drift);
  static CoefficientField custom(int dim, SigmaFn sigma, GradFn grad, HessFn hess, Drift drift);

  int dim() const { return dim_; }
  CoefficientFamily family() const { return family_; }

  Mat sigma(const Vec& x) const;
  Vec b(const Vec& x) const;
  Tensor3 grad_sigma(const Vec& x) const;
  Tensor4 hess_sigma(const Vec& x) const;  // MissingDerivative for Custom without hess

  // bt = b + 1/2 (grad_sigma . sigma)
  Vec ito_drift(const Vec& x) const;

  Mat composite(CompositeKind kind, const Vec& x) const;

  // In-place variants for the stepping loops (no allocation when the outputs
  // are already sized d).
  void sigma_into(const Vec& x, Mat& out) const;
  void ito_drift_into(const Vec& x, Vec& out) const;
  void grad_sigma_sigma_into(const Vec& x, Vec& out) const;

  double sigma_sup_norm_hint() const;  // coarse bound used for the boundary band

 private:
  CoefficientField() = default;

  int dim_ = 0;
  CoefficientFamily family_ = CoefficientFamily::Constant;
  Drift drift_;
  Mat const_sigma_;
  Vec affine_offset_, affine_gain_;
  double trig_amplitude_ = 0.0, trig_frequency_ = 0.0, trig_offset_ = 0.0;
  SigmaFn custom_sigma_;
  GradFn custom_grad_;
  HessFn custom_hess_;
};

struct LipschitzReport {
  struct Entry {
    std::string name;
    double estimate = 0.0;       // max ||f(x)-f(y)|| / |x-y| over sampled pairs
    double estimate_half = 0.0;  // same over the first half of the samples
    double growth_ratio = 1.0;   // estimate / estimate_half (1 when both 0)
    bool stable = true;          // growth under sample doubling below 1.25
  };
  std::vector<Entry> entries;
  double k = 0.0;  // max of all estimates
  int samples = 0;
};

// Empirical Lipschitz constants of sigma, bt and the composites over pairs of
// points sampled in the closed domain. Estimates are computed over prefixes
// of one seeded point sequence, so they are nondecreasing in `samples`.
LipschitzReport audit_lipschitz(const CoefficientField& field, const Domain& domain, int samples,
                                std::uint64_t seed = 0x11u);

}  // namespace sdeflow
