#pragma once

#include <Eigen/Dense>

#include "tracklearn/errors.hpp"

namespace tracklearn::kalman {

/// x <- F x,  P <- F P F' + Q  (P re-symmetrized).
template <int N>
void predict(Eigen::Matrix<double, N, 1>& x, Eigen::Matrix<double, N, N>& P,
             const Eigen::Matrix<double, N, N>& F,
             const Eigen::Matrix<double, N, N>& Q) {
  x = F * x;
  P = F * P * F.transpose() + Q;
  P = ((P + P.transpose()) * 0.5).eval();
}

template <int N, int M>
Eigen::Matrix<double, M, M> innovation_covariance(
    const Eigen::Matrix<double, N, N>& P, const Eigen::Matrix<double, M, N>& H,
    const Eigen::Matrix<double, M, M>& R) {
  return H * P * H.transpose() + R;
}

/// Squared Mahalanobis distance of measurement z under (x, P, H, R).
/// Throws NumericalError if the innovation covariance is singular.
template <int N, int M>
double mahalanobis2(const Eigen::Matrix<double, N, 1>& x,
                    const Eigen::Matrix<double, N, N>& P,
                    const Eigen::Matrix<double, M, 1>& z,
                    const Eigen::Matrix<double, M, N>& H,
                    const Eigen::Matrix<double, M, M>& R) {
  const Eigen::Matrix<double, M, M> S = innovation_covariance(P, H, R);
  Eigen::FullPivLU<Eigen::Matrix<double, M, M>> lu(S);
  if (!lu.isInvertible()) {
    throw NumericalError("singular innovation covariance");
  }
  const Eigen::Matrix<double, M, 1> nu = z - H * x;
  return nu.dot(lu.solve(nu));
}

/// Standard correction step in Joseph form, which preserves symmetry and
/// positive definiteness under roundoff. Throws NumericalError if the
/// innovation covariance is singular.
template <int N, int M>
void update(Eigen::Matrix<double, N, 1>& x, Eigen::Matrix<double, N, N>& P,
            const Eigen::Matrix<double, M, 1>& z,
            const Eigen::Matrix<double, M, N>& H,
            const Eigen::Matrix<double, M, M>& R) {
  const Eigen::Matrix<double, M, M> S = innovation_covariance(P, H, R);
  Eigen::FullPivLU<Eigen::Matrix<double, M, M>> lu(S);
  if (!lu.isInvertible()) {
    throw NumericalError("singular innovation covariance");
  }
  const Eigen::Matrix<double, N, M> K = P * H.transpose() * lu.inverse();
  x += K * (z - H * x);
  const Eigen::Matrix<double, N, N> IKH =
      Eigen::Matrix<double, N, N>::Identity() - K * H;
  P = IKH * P * IKH.transpose() + K * R * K.transpose();
  P = ((P + P.transpose()) * 0.5).eval();
}

}  // namespace tracklearn::kalman
