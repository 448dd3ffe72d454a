#include "pgarch/fgarch.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include <Eigen/LU>
#include <Eigen/SVD>

namespace pgarch {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Index a_index(int r, Index k, Index l) { return r + k + l * r; }
Index b_index(int r, Index k, Index l) { return r + r * r + k + l * r; }

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

Vector GarchParams::to_vec() const {
  const int r = rank();
  Vector theta(size_for_rank(r));
  theta.head(r) = omega;
  theta.segment(r, r * r) = A.reshaped();
  theta.tail(r * r) = B.reshaped();
  return theta;
}

GarchParams GarchParams::from_vec(const Vector& theta, int r) {
  if (r < 1 || theta.size() != size_for_rank(r)) {
    throw std::invalid_argument("GarchParams::from_vec: expected " +
                                std::to_string(size_for_rank(r)) + " entries for rank " +
                                std::to_string(r));
  }
  GarchParams out;
  out.omega = theta.head(r);
  out.A = theta.segment(r, r * r).reshaped(r, r);
  out.B = theta.tail(r * r).reshaped(r, r);
  return out;
}

GarchParams GarchParams::scalar(double omega, double a, double b) {
  GarchParams out;
  out.omega = Vector::Constant(1, omega);
  out.A = Matrix::Constant(1, 1, a);
  out.B = Matrix::Constant(1, 1, b);
  return out;
}

void validate(const GarchParams& theta) {
  const Index r = theta.omega.size();
  if (r < 1) throw std::invalid_argument("GarchParams: rank must be at least 1");
  if (theta.A.rows() != r || theta.A.cols() != r || theta.B.rows() != r || theta.B.cols() != r) {
    throw std::invalid_argument("GarchParams: A and B must be r x r");
  }
  if (!theta.omega.allFinite() || !theta.A.allFinite() || !theta.B.allFinite()) {
    throw std::invalid_argument("GarchParams: non-finite entry");
  }
  if ((theta.omega.array() <= 0.0).any()) throw std::invalid_argument("GarchParams: omega must be positive");
  if ((theta.A.array() < 0.0).any() || (theta.B.array() < 0.0).any()) {
    throw std::invalid_argument("GarchParams: A and B must be nonnegative");
  }
}

Vector h_init(const GarchParams& theta) {
  validate(theta);
  const Index r = theta.rank();
  const Matrix m = Matrix::Identity(r, r) - theta.A - theta.B;
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) throw NumericalError("h_init: I - A - B is singular");
  Vector h = lu.solve(theta.omega);
  if (!h.allFinite() || (h.array() <= 0.0).any()) {
    throw NumericalError("h_init: unconditional variance is not positive (A + B not stationary)");
  }
  return h;
}

Vector advance_h(const GarchParams& theta, const Vector& fsq, const Vector& h) {
  return theta.omega + theta.A * fsq + theta.B * h;
}

VolPath recurse_h(const GarchParams& theta, const Matrix& fsq) {
  validate(theta);
  if (fsq.cols() != theta.rank()) throw std::invalid_argument("recurse_h: fsq has wrong width");
  if ((fsq.array() < 0.0).any()) throw std::invalid_argument("recurse_h: fsq must be nonnegative");
  VolPath path{Matrix(fsq.rows(), theta.rank()), theta};
  if (fsq.rows() == 0) return path;
  Vector h = h_init(theta);
  path.h.row(0) = h.transpose();
  for (Index t = 1; t < fsq.rows(); ++t) {
    h = advance_h(theta, fsq.row(t - 1).transpose(), h);
    path.h.row(t) = h.transpose();
  }
  return path;
}

double qmle_objective(const GarchParams& theta, const Matrix& fsq, Vector* grad, double h_floor) {
  const int r = theta.rank();
  if (fsq.cols() != r) throw std::invalid_argument("qmle_objective: fsq has wrong width");
  const Index periods = fsq.rows();
  const Index n = GarchParams::size_for_rank(r);
  if (grad) grad->setZero(n);

  const Matrix m = Matrix::Identity(r, r) - theta.A - theta.B;
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible()) return kInf;
  Vector h = lu.solve(theta.omega);
  if (!h.allFinite() || (h.array() <= 0.0).any()) return kInf;

  Matrix jac, jac_next;
  if (grad) {
    // Sensitivities of h_1 = M^{-1} omega: d/d omega = M^{-1},
    // d/d A_kl = d/d B_kl = M^{-1} e_k h_l.
    const Matrix m_inv = lu.inverse();
    jac = Matrix::Zero(r, n);
    jac.leftCols(r) = m_inv;
    for (Index l = 0; l < r; ++l) {
      for (Index k = 0; k < r; ++k) {
        jac.col(a_index(r, k, l)) = m_inv.col(k) * h(l);
        jac.col(b_index(r, k, l)) = m_inv.col(k) * h(l);
      }
    }
    jac_next.resize(r, n);
  }

  Vector weight(r);
  double total = 0.0;
  for (Index t = 0; t < periods; ++t) {
    if (t > 0) {
      if (grad) {
        jac_next.noalias() = theta.B * jac;
        jac.swap(jac_next);
        for (Index k = 0; k < r; ++k) jac(k, k) += 1.0;
        for (Index l = 0; l < r; ++l) {
          for (Index k = 0; k < r; ++k) {
            jac(k, a_index(r, k, l)) += fsq(t - 1, l);
            jac(k, b_index(r, k, l)) += h(l);
          }
        }
      }
      h = theta.omega + theta.A * fsq.row(t - 1).transpose() + theta.B * h;
    }
    for (Index i = 0; i < r; ++i) {
      const double hi = h(i);
      if (!std::isfinite(hi)) return kInf;
      const double floored = std::max(hi, h_floor);
      total += std::log(floored) + fsq(t, i) / floored;
      weight(i) = hi > h_floor ? (1.0 - fsq(t, i) / hi) / hi : 0.0;
    }
    if (grad) grad->noalias() += jac.transpose() * weight;
  }
  if (!std::isfinite(total)) return kInf;
  return total;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

std::string FitConfig::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "max_iter = " << max_iter << '\n'
      << "grad_tol = " << grad_tol << '\n'
      << "a0 = " << a0 << '\n'
      << "b0 = " << b0 << '\n'
      << "offdiag0 = " << offdiag0 << '\n'
      << "omega_init_scale = " << omega_init_scale << '\n'
      << "param_max = " << param_max << '\n'
      << "omega_min = " << omega_min << '\n'
      << "omega_max_factor = " << omega_max_factor << '\n'
      << "h_floor = " << h_floor << '\n'
      << "norm_margin = " << norm_margin << '\n';
  if (initial) {
    out << "initial_rank = " << initial->rank() << '\n' << "initial_theta = ";
    const Vector v = initial->to_vec();
    for (Index i = 0; i < v.size(); ++i) out << (i ? "," : "") << v(i);
    out << '\n';
  }
  return out.str();
}

FitConfig FitConfig::from_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    auto strip = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    kv[strip(line.substr(0, eq))] = strip(line.substr(eq + 1));
  }

  FitConfig cfg;
  auto take = [&](const char* key, auto& field) {
    auto it = kv.find(key);
    if (it == kv.end()) return;
    std::istringstream value(it->second);
    value >> field;
    if (value.fail()) throw std::invalid_argument(std::string("FitConfig: bad value for ") + key);
    kv.erase(it);
  };
  take("max_iter", cfg.max_iter);
  take("grad_tol", cfg.grad_tol);
  take("a0", cfg.a0);
  take("b0", cfg.b0);
  take("offdiag0", cfg.offdiag0);
  take("omega_init_scale", cfg.omega_init_scale);
  take("param_max", cfg.param_max);
  take("omega_min", cfg.omega_min);
  take("omega_max_factor", cfg.omega_max_factor);
  take("h_floor", cfg.h_floor);
  take("norm_margin", cfg.norm_margin);
  int initial_rank = 0;
  take("initial_rank", initial_rank);
  if (auto it = kv.find("initial_theta"); it != kv.end()) {
    std::vector<double> values;
    std::istringstream list(it->second);
    std::string item;
    while (std::getline(list, item, ',')) values.push_back(std::stod(item));
    kv.erase(it);
    cfg.initial = GarchParams::from_vec(Eigen::Map<Vector>(values.data(), static_cast<Index>(values.size())),
                                        initial_rank);
  }
  if (!kv.empty()) throw std::invalid_argument("FitConfig: unknown key '" + kv.begin()->first + "'");
  return cfg;
}

FitResult qmle_fit(const Matrix& fsq, const FitConfig& config) {
  const int r = static_cast<int>(fsq.cols());
  const Index periods = fsq.rows();
  if (r < 1) throw std::invalid_argument("qmle_fit: need at least one factor");
  if (periods < 2) throw std::invalid_argument("qmle_fit: need at least 2 observations");
  if (!fsq.allFinite() || (fsq.array() < 0.0).any()) {
    throw std::invalid_argument("qmle_fit: squared factors must be finite and nonnegative");
  }
  const Vector variance = fsq.colwise().mean();
  if ((variance.array() <= 0.0).any()) {
    throw std::invalid_argument("qmle_fit: a factor series is identically zero");
  }
  const double pmax = config.param_max;
  const Vector omega_lo = Vector::Constant(r, config.omega_min);
  const Vector omega_hi = (config.omega_max_factor * variance).cwiseMax(omega_lo * 10.0);

  GarchParams start;
  if (config.initial) {
    start = *config.initial;
    validate(start);
    if (start.rank() != r) throw std::invalid_argument("qmle_fit: initial theta has wrong rank");
  } else {
    const double off = config.offdiag0 < 0.0 ? 0.02 / r : config.offdiag0;
    start.A = Matrix::Constant(r, r, off);
    start.B = Matrix::Constant(r, r, off);
    start.A.diagonal().setConstant(config.a0);
    start.B.diagonal().setConstant(config.b0);
    start.omega = config.omega_init_scale * variance * (1.0 - config.a0 - config.b0);
  }

  const Index n = GarchParams::size_for_rank(r);
  auto encode = [&](const GarchParams& theta) {
    Vector x(n);
    for (Index i = 0; i < r; ++i) {
      x(i) = std::log(std::clamp(theta.omega(i), omega_lo(i) * (1 + 1e-6), omega_hi(i) * (1 - 1e-6)));
    }
    auto logit = [&](double v) {
      const double u = std::clamp(v / pmax, 1e-8, 1.0 - 1e-8);
      return std::log(u / (1.0 - u));
    };
    for (Index i = 0; i < r * r; ++i) {
      x(r + i) = logit(theta.A.reshaped()(i));
      x(r + r * r + i) = logit(theta.B.reshaped()(i));
    }
    return x;
  };
  auto decode = [&](const Vector& x) {
    Vector theta(n);
    for (Index i = 0; i < r; ++i) theta(i) = std::exp(x(i));
    for (Index i = r; i < n; ++i) theta(i) = pmax * logistic(x(i));
    return theta;
  };

  const double penalty_weight = 1e4 * static_cast<double>(periods);
  const double norm_cap = 1.0 - config.norm_margin;

  Objective objective = [&](const Vector& x, Vector* gx) -> double {
    const Vector tv = decode(x);
    for (Index i = 0; i < r; ++i) {
      if (!(tv(i) >= omega_lo(i) && tv(i) <= omega_hi(i))) return kInf;
    }
    const GarchParams theta = GarchParams::from_vec(tv, r);
    Vector gtheta;
    double value = qmle_objective(theta, fsq, gx ? &gtheta : nullptr, config.h_floor);
    if (!std::isfinite(value)) return kInf;

    Eigen::JacobiSVD<Matrix> svd(theta.B, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const double b_norm = svd.singularValues()(0);
    if (b_norm >= 1.0) return kInf;
    if (b_norm > norm_cap) {
      const double excess = b_norm - norm_cap;
      value += penalty_weight * excess * excess;
      if (gx) {
        const Matrix d_norm = svd.matrixU().col(0) * svd.matrixV().col(0).transpose();
        gtheta.tail(r * r) += 2.0 * penalty_weight * excess * d_norm.reshaped();
      }
    }
    if (gx) {
      gx->resize(n);
      for (Index i = 0; i < r; ++i) (*gx)(i) = gtheta(i) * tv(i);
      for (Index i = r; i < n; ++i) (*gx)(i) = gtheta(i) * tv(i) * (1.0 - tv(i) / pmax);
    }
    return value;
  };

  const Vector x0 = encode(start);
  MinimizeOptions options;
  options.max_iter = config.max_iter;
  options.grad_tol = config.grad_tol;
  MinimizeResult res = minimize_bfgs(objective, x0, options);

  FitResult out;
  out.theta = GarchParams::from_vec(decode(res.x), r);
  auto& diag = out.diagnostics;
  diag.iterations = res.iterations;
  diag.evaluations = res.evaluations;
  diag.grad_norm = res.grad_norm;
  diag.converged = res.converged;
  diag.stop_reason = res.reason;
  diag.initial_objective = qmle_objective(GarchParams::from_vec(decode(x0), r), fsq, nullptr, config.h_floor);
  diag.objective = qmle_objective(out.theta, fsq, nullptr, config.h_floor);
  diag.small_sample = periods < 20 * GarchParams::size_for_rank(r);
  diag.trajectory = std::move(res.trajectory);
  return out;
}

}  // namespace pgarch
