#include "attikit/losses.hpp"

#include <cctype>
#include <numbers>
#include <string>

namespace attikit::loss {

namespace {

constexpr std::pair<LossKind, std::string_view> kNames[] = {
    {LossKind::QIP, "QIP"},         {LossKind::QIPA, "QIPA"},     {LossKind::QIP_MSE, "QIP_MSE"},
    {LossKind::QME, "QME"},         {LossKind::QMEA, "QMEA"},     {LossKind::QMEA_NT, "QMEA_NT"},
    {LossKind::E_I, "E_I"},         {LossKind::E_I_NT, "E_I_NT"}, {LossKind::QSGD, "QSGD"},
    {LossKind::QSGD2, "QSGD2"},     {LossKind::QSGD3_RESIDUAL, "QSGD3_RESIDUAL"},
};

void validate(std::span<const QuatPair> batch, const char* what) {
  if (batch.empty()) throw std::invalid_argument(std::string(what) + ": empty batch");
  for (const auto& [q, p] : batch) {
    if (!is_unit(q) || !is_unit(p)) {
      throw std::invalid_argument(std::string(what) + ": batch entry is not unit norm");
    }
  }
}

template <typename F>
double mean_over(std::span<const QuatPair> batch, const char* what, F&& f) {
  validate(batch, what);
  double sum = 0.0;
  for (const auto& [q, p] : batch) sum += f(q, p);
  return sum / static_cast<double>(batch.size());
}

double sgn(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

// d e / d p where e = q (x) p*.
Matrix4<double> mult_error_jacobian(const Quaterniond& q) {
  return left_product_matrix(q) * Eigen::Vector4d(1.0, -1.0, -1.0, -1.0).asDiagonal();
}

}  // namespace

std::string_view kind_name(LossKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "?";
}

std::optional<LossKind> parse_kind(std::string_view name) {
  std::string norm;
  for (char c : name) norm.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (norm == "QSGD3") norm = "QSGD3_RESIDUAL";
  if (norm == "QMEANT") norm = "QMEA_NT";
  for (const auto& [k, n] : kNames) {
    if (n == norm) return k;
  }
  return std::nullopt;
}

double qip_loss(std::span<const QuatPair> batch) {
  return mean_over(batch, "qip_loss", [](const auto& q, const auto& p) { return qip(q, p); });
}
double qipa_loss(std::span<const QuatPair> batch) {
  return mean_over(batch, "qipa_loss", [](const auto& q, const auto& p) { return qipa(q, p); });
}
double qip_mse_loss(std::span<const QuatPair> batch) {
  return mean_over(batch, "qip_mse_loss", [](const auto& q, const auto& p) { return qip_mse(q, p); });
}
double qme_loss(std::span<const QuatPair> batch) {
  return mean_over(batch, "qme_loss", [](const auto& q, const auto& p) { return qme(q, p); });
}
double qmea_loss(std::span<const QuatPair> batch) {
  return mean_over(batch, "qmea_loss", [](const auto& q, const auto& p) { return qmea(q, p); });
}
double qmea_nt_loss(std::span<const QuatPair> batch) {
  return mean_over(batch, "qmea_nt_loss", [](const auto& q, const auto& p) { return qmea_nt(q, p); });
}
double inclination_loss(std::span<const QuatPair> batch, bool trig) {
  return mean_over(batch, "inclination_loss",
                   [trig](const auto& q, const auto& p) { return inclination(q, p, trig); });
}
double qsgd_loss(std::span<const QuatPair> batch, int variant) {
  if (variant == 1) {
    return mean_over(batch, "qsgd_loss", [](const auto& q, const auto& p) { return qsgd(q, p); });
  }
  if (variant == 2) {
    return mean_over(batch, "qsgd_loss", [](const auto& q, const auto& p) { return qsgd2(q, p); });
  }
  throw std::invalid_argument("qsgd_loss: variant must be 1 or 2");
}
double qsgd3_mse_loss(std::span<const QuatPair> batch) {
  return mean_over(batch, "qsgd3_mse_loss",
                   [](const auto& q, const auto& p) { return qsgd3_residual(q, p).squaredNorm(); });
}

double batch_loss(LossKind kind, std::span<const QuatPair> batch) {
  switch (kind) {
    case LossKind::QIP: return qip_loss(batch);
    case LossKind::QIPA: return qipa_loss(batch);
    case LossKind::QIP_MSE: return qip_mse_loss(batch);
    case LossKind::QME: return qme_loss(batch);
    case LossKind::QMEA: return qmea_loss(batch);
    case LossKind::QMEA_NT: return qmea_nt_loss(batch);
    case LossKind::E_I: return inclination_loss(batch, true);
    case LossKind::E_I_NT: return inclination_loss(batch, false);
    case LossKind::QSGD: return qsgd_loss(batch, 1);
    case LossKind::QSGD2: return qsgd_loss(batch, 2);
    case LossKind::QSGD3_RESIDUAL: return qsgd3_mse_loss(batch);
  }
  throw std::invalid_argument("batch_loss: unknown kind");
}

Quaterniond loss_gradient(LossKind kind, const Quaterniond& q, const Quaterniond& p) {
  const double d = q.dot(p);
  const double one_minus_d2 = 1.0 - d * d;
  switch (kind) {
    case LossKind::QIP:
    case LossKind::QMEA_NT:
      return -sgn(d) * q;
    case LossKind::QIPA:
      if (one_minus_d2 <= 0.0) return Quaterniond::Zero();
      return -q / std::sqrt(one_minus_d2);
    case LossKind::QIP_MSE:
      return 2.0 * (q - p);
    case LossKind::QME: {
      const Matrix4<double> jac = mult_error_jacobian(q);
      const Vector3d v = mult_error(q, p).tail<3>();
      const Vector3d s(sgn(v[0]), sgn(v[1]), sgn(v[2]));
      return 2.0 * jac.bottomRows<3>().transpose() * s;
    }
    case LossKind::QMEA:
      if (one_minus_d2 <= 0.0) return Quaterniond::Zero();
      return -2.0 * sgn(d) * q / std::sqrt(one_minus_d2);
    case LossKind::E_I:
    case LossKind::E_I_NT: {
      const Matrix4<double> jac = mult_error_jacobian(q);
      const Quaterniond e = jac * p;
      const double r = std::sqrt(e[0] * e[0] + e[3] * e[3]);
      if (r <= 0.0) return Quaterniond::Zero();
      const Quaterniond dr = (e[0] * jac.row(0) + e[3] * jac.row(3)).transpose() / r;
      if (kind == LossKind::E_I_NT) return -dr;
      if (r >= 1.0) return Quaterniond::Zero();
      return -2.0 / std::sqrt(1.0 - r * r) * dr;
    }
    case LossKind::QSGD: {
      const double u = 1.0 - std::abs(d);
      return sgn(u) * -sgn(d) * q;
    }
    case LossKind::QSGD2: {
      const double u = 1.0 - std::abs(d);
      if (u <= 0.0) return Quaterniond::Zero();
      return -sgn(d) * q / (2.0 * std::sqrt(u));
    }
    case LossKind::QSGD3_RESIDUAL:
      break;
  }
  throw unsupported_kind("loss_gradient: QSGD3_RESIDUAL is vector-valued");
}

std::vector<LandscapePoint> loss_landscape(LossKind kind, const Vector3d& axis, int steps) {
  if (steps < 2) throw std::invalid_argument("loss_landscape: steps must be >= 2");
  const Quaterniond q_true = identity_quat();
  std::vector<LandscapePoint> out;
  out.reserve(static_cast<std::size_t>(steps));
  for (int k = 0; k < steps; ++k) {
    // Exact endpoints: pi first, 0 last.
    const double angle = std::numbers::pi * static_cast<double>(steps - 1 - k) / static_cast<double>(steps - 1);
    const Quaterniond q_est = axis_angle_to_quat(axis, angle);
    const double value = kind == LossKind::QSGD3_RESIDUAL ? qsgd3_residual(q_true, q_est).squaredNorm()
                                                          : pair_loss(kind, q_true, q_est);
    out.push_back({angle, value});
  }
  return out;
}

}  // namespace attikit::loss
