#pragma once

// Quaternion attitude losses.
//
// Every kernel takes (q_true, q_est) and is written in terms of the
// multiplicative error e = q_true (x) q_est*. Note that scalar(e) equals the
// 4-vector inner product q_true . q_est, which is what makes QIP, QMEA_NT and
// QSGD coincide on unit inputs.
//
// Batch losses are the arithmetic mean over pairs, summed left to right.

#include "attikit/quat.hpp"

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

namespace attikit::loss {

enum class LossKind {
  QIP,
  QIPA,
  QIP_MSE,
  QME,
  QMEA,
  QMEA_NT,
  E_I,
  E_I_NT,
  QSGD,
  QSGD2,
  QSGD3_RESIDUAL,
};

inline constexpr LossKind kAllKinds[] = {
    LossKind::QIP,     LossKind::QIPA, LossKind::QIP_MSE, LossKind::QME,  LossKind::QMEA,          LossKind::QMEA_NT,
    LossKind::E_I,     LossKind::E_I_NT, LossKind::QSGD,  LossKind::QSGD2, LossKind::QSGD3_RESIDUAL,
};

std::string_view kind_name(LossKind kind);
/// Accepts the enumerator names case-insensitively, with '-' or '_'.
std::optional<LossKind> parse_kind(std::string_view name);

inline bool is_scalar(LossKind kind) { return kind != LossKind::QSGD3_RESIDUAL; }

using QuatPair = std::pair<Quaterniond, Quaterniond>;  // (q_true, q_est)

class unsupported_kind : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// ---------------------------------------------------------------------------
// Per-pair kernels

template <typename Scalar>
Quaternion<Scalar> mult_error(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  return hamilton_product(q, conjugate(p));
}

template <typename Scalar>
Scalar qip(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  using std::abs;
  return Scalar(1) - abs(q.dot(p));
}

/// Half-angle between the 4-vectors, no absolute value: q vs -q gives pi.
template <typename Scalar>
Scalar qipa(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  using std::acos;
  using std::clamp;
  return acos(clamp(q.dot(p), Scalar(-1), Scalar(1)));
}

/// Inner product of (q - p) and (p - q), i.e. -|q - p|^2. Never positive.
template <typename Scalar>
Scalar qip_mse(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  return (q - p).dot(p - q);
}

template <typename Scalar>
Scalar qme(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  return Scalar(2) * mult_error(q, p).template tail<3>().template lpNorm<1>();
}

template <typename Scalar>
Scalar qmea(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  return quat_angle(mult_error(q, p));
}

template <typename Scalar>
Scalar qmea_nt(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  using std::abs;
  return Scalar(1) - abs(mult_error(q, p)[0]);
}

template <typename Scalar>
Scalar inclination(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p, bool trig) {
  using std::acos;
  using std::clamp;
  using std::sqrt;
  const Quaternion<Scalar> e = mult_error(q, p);
  const Scalar r = sqrt(e[0] * e[0] + e[3] * e[3]);
  if (trig) return Scalar(2) * acos(clamp(r, Scalar(0), Scalar(1)));
  return Scalar(1) - r;
}

template <typename Scalar>
Scalar qsgd(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  using std::abs;
  return abs(Scalar(1) - abs(mult_error(q, p)[0]));
}

template <typename Scalar>
Scalar qsgd2(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  using std::abs;
  using std::max;
  using std::sqrt;
  // 1 - |s| can round to -eps.
  return sqrt(max(Scalar(1) - abs(mult_error(q, p)[0]), Scalar(0)));
}

/// [w_err - 1, x_err, y_err, z_err]; meant to sit under an outer MSE.
template <typename Scalar>
Quaternion<Scalar> qsgd3_residual(const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  Quaternion<Scalar> e = mult_error(q, p);
  e[0] -= Scalar(1);
  return e;
}

/// Scalar per-pair loss of any scalar kind. Throws unsupported_kind for QSGD3_RESIDUAL.
template <typename Scalar>
Scalar pair_loss(LossKind kind, const Quaternion<Scalar>& q, const Quaternion<Scalar>& p) {
  switch (kind) {
    case LossKind::QIP: return qip(q, p);
    case LossKind::QIPA: return qipa(q, p);
    case LossKind::QIP_MSE: return qip_mse(q, p);
    case LossKind::QME: return qme(q, p);
    case LossKind::QMEA: return qmea(q, p);
    case LossKind::QMEA_NT: return qmea_nt(q, p);
    case LossKind::E_I: return inclination(q, p, true);
    case LossKind::E_I_NT: return inclination(q, p, false);
    case LossKind::QSGD: return qsgd(q, p);
    case LossKind::QSGD2: return qsgd2(q, p);
    case LossKind::QSGD3_RESIDUAL: break;
  }
  throw unsupported_kind("pair_loss: QSGD3_RESIDUAL is vector-valued");
}

// ---------------------------------------------------------------------------
// Batch losses (validated: non-empty, unit entries within 1e-6)

double qip_loss(std::span<const QuatPair> batch);
double qipa_loss(std::span<const QuatPair> batch);
double qip_mse_loss(std::span<const QuatPair> batch);
double qme_loss(std::span<const QuatPair> batch);
double qmea_loss(std::span<const QuatPair> batch);
double qmea_nt_loss(std::span<const QuatPair> batch);
double inclination_loss(std::span<const QuatPair> batch, bool trig);
/// variant 1 -> L_QSGD, variant 2 -> L_QSGD2.
double qsgd_loss(std::span<const QuatPair> batch, int variant);
/// Mean of the squared QSGD3 residual norm.
double qsgd3_mse_loss(std::span<const QuatPair> batch);

/// Dispatches to the batch loss of `kind` (QSGD3_RESIDUAL -> qsgd3_mse_loss).
double batch_loss(LossKind kind, std::span<const QuatPair> batch);

/// Gradient of the per-pair loss with respect to the raw q_est components
/// (no normalization inside). Subgradient 0 at every kink: |dot| = 1 under
/// acos, the zero crossing of an absolute value, and r in {0, 1} for E_I.
Quaterniond loss_gradient(LossKind kind, const Quaterniond& q_true, const Quaterniond& q_est);

struct LandscapePoint {
  double angle;
  double loss;
};

/// Sweeps the rotation angle from pi down to 0 in `steps` points, scoring
/// identity against axis_angle(axis, angle).
std::vector<LandscapePoint> loss_landscape(LossKind kind, const Vector3d& axis, int steps);

}  // namespace attikit::loss
