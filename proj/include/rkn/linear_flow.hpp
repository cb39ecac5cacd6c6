#pragma once

// Exact flow of the linear drift  y' = v,  v' = alpha v + beta y  via a
// cached matrix exponential of the 2d x 2d generator M = [[0, I], [beta, alpha]].

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <cstdint>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <unordered_map>

#include "rkn/errors.hpp"

namespace rkn {

// exp(A) by scaling and squaring around the degree-13 diagonal Pade
// approximant (Higham's theta_13 bound). Intended for small dense matrices.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw InvalidArgument("expm: matrix must be square");
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0,
                                 7771770303897600.0,  1187353796428800.0,
                                 129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,
                                 1323241920.0,        40840800.0,
                                 960960.0,            16380.0,
                                 182.0,               1.0};
  constexpr double theta13 = 5.371920351148152;
  const Eigen::Index n = A.rows();
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const double norm1 = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm1 > theta13)
    squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
  const Eigen::MatrixXd X = A / std::ldexp(1.0, squarings);

  const Eigen::MatrixXd X2 = X * X;
  const Eigen::MatrixXd X4 = X2 * X2;
  const Eigen::MatrixXd X6 = X4 * X2;
  const Eigen::MatrixXd U =
      X * (X6 * (b[13] * X6 + b[11] * X4 + b[9] * X2) + b[7] * X6 + b[5] * X4 +
           b[3] * X2 + b[1] * I);
  const Eigen::MatrixXd V = X6 * (b[12] * X6 + b[10] * X4 + b[8] * X2) +
                            b[6] * X6 + b[4] * X4 + b[2] * X2 + b[0] * I;
  Eigen::MatrixXd R = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) R = R * R;
  return R;
}

class LinearDrift {
 public:
  LinearDrift(Eigen::MatrixXd alpha, Eigen::MatrixXd beta, bool use_cache = true)
      : alpha_(std::move(alpha)),
        beta_(std::move(beta)),
        use_cache_(use_cache),
        cache_(std::make_shared<Cache>()) {
    const Eigen::Index d = alpha_.rows();
    if (alpha_.cols() != d || beta_.rows() != d || beta_.cols() != d)
      throw InvalidArgument("LinearDrift: alpha and beta must be d x d");
    generator_ = Eigen::MatrixXd::Zero(2 * d, 2 * d);
    generator_.topRightCorner(d, d).setIdentity();
    generator_.bottomLeftCorner(d, d) = beta_;
    generator_.bottomRightCorner(d, d) = alpha_;
  }

  Eigen::Index dimension() const { return alpha_.rows(); }
  const Eigen::MatrixXd& alpha() const { return alpha_; }
  const Eigen::MatrixXd& beta() const { return beta_; }
  const Eigen::MatrixXd& generator() const { return generator_; }

  // exp(tau M), memoised on the bit pattern of tau.
  Eigen::MatrixXd propagator(double tau) const {
    if (!use_cache_) return expm(tau * generator_);
    const auto key = std::bit_cast<std::uint64_t>(tau);
    {
      std::shared_lock lock(cache_->mutex);
      if (auto it = cache_->entries.find(key); it != cache_->entries.end())
        return it->second;
    }
    Eigen::MatrixXd P = expm(tau * generator_);
    std::unique_lock lock(cache_->mutex);
    return cache_->entries.try_emplace(key, std::move(P)).first->second;
  }

  std::size_t cached_entries() const {
    std::shared_lock lock(cache_->mutex);
    return cache_->entries.size();
  }

  // (y', v') = exp(tau M) (y, v).
  void propagate(double tau, Eigen::Ref<Eigen::VectorXd> y,
                 Eigen::Ref<Eigen::VectorXd> v) const {
    Eigen::VectorXd dy, dv;
    increment(tau, y, v, dy, dv);
    y += dy;
    v += dv;
  }

  // Increment form (exp(tau M) - I)(y, v), used by compensated stepping.
  void increment(double tau, const Eigen::Ref<const Eigen::VectorXd>& y,
                 const Eigen::Ref<const Eigen::VectorXd>& v, Eigen::VectorXd& dy,
                 Eigen::VectorXd& dv) const {
    const Eigen::Index d = dimension();
    const Eigen::MatrixXd P = propagator(tau);
    dy = (P.topLeftCorner(d, d) - Eigen::MatrixXd::Identity(d, d)) * y +
         P.topRightCorner(d, d) * v;
    dv = P.bottomLeftCorner(d, d) * y +
         (P.bottomRightCorner(d, d) - Eigen::MatrixXd::Identity(d, d)) * v;
  }

 private:
  struct Cache {
    mutable std::shared_mutex mutex;
    std::unordered_map<std::uint64_t, Eigen::MatrixXd> entries;
  };

  Eigen::MatrixXd alpha_;
  Eigen::MatrixXd beta_;
  Eigen::MatrixXd generator_;
  bool use_cache_;
  std::shared_ptr<Cache> cache_;
};

}  // namespace rkn
