#include "mtfa/symplectic.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace mtfa {

Eigen::MatrixXd j_matrix(int n) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  j.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  j.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  return j;
}

double SpMat::sym_residual(const Eigen::MatrixXd& m) {
  int n = static_cast<int>(m.rows()) / 2;
  Eigen::MatrixXd j = j_matrix(n);
  return (m * j * m.transpose() - j).cwiseAbs().maxCoeff();
}

SpMat SpMat::from_matrix(const Eigen::MatrixXd& m, double tol) {
  if (m.rows() != m.cols()) throw validation_error("symplectic: matrix must be square");
  if (m.rows() % 2 != 0) throw validation_error("symplectic: odd dimension");
  if (m.rows() == 0) throw validation_error("symplectic: empty matrix");
  if (!m.allFinite()) throw validation_error("symplectic: nonfinite entries");
  double res = sym_residual(m);
  if (res > tol) {
    std::ostringstream msg;
    msg << "symplectic: M J M^T - J residual " << res << " exceeds tol " << tol;
    throw validation_error(msg.str());
  }
  return SpMat(static_cast<int>(m.rows()) / 2, m);
}

SpMat SpMat::compose(const SpMat& rhs) const {
  if (n_ != rhs.n_) throw validation_error("symplectic: dimension mismatch in compose");
  Eigen::MatrixXd p = m_ * rhs.m_;
  double scale = std::max(1.0, p.cwiseAbs().maxCoeff());
  return from_matrix(p, std::max(1e-10, scale * scale * 1e-13));
}

SpMat SpMat::inverse() const {
  Eigen::MatrixXd inv(2 * n_, 2 * n_);
  inv.topLeftCorner(n_, n_) = D().transpose();
  inv.topRightCorner(n_, n_) = -B().transpose();
  inv.bottomLeftCorner(n_, n_) = -C().transpose();
  inv.bottomRightCorner(n_, n_) = A().transpose();
  double scale = std::max(1.0, inv.cwiseAbs().maxCoeff());
  return from_matrix(inv, std::max(1e-10, scale * scale * 1e-13));
}

bool SpMat::is_identity(double tol) const {
  return (m_ - Eigen::MatrixXd::Identity(2 * n_, 2 * n_)).cwiseAbs().maxCoeff() <= tol;
}

SpMat sp_identity(int n) { return SpMat::from_matrix(Eigen::MatrixXd::Identity(2 * n, 2 * n)); }

SpMat sp_fourier(int n) { return SpMat::from_matrix(j_matrix(n)); }

SpMat sp_pi(int n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  m.topLeftCorner(n, n) = id;
  m.topRightCorner(n, n) = id;
  m.bottomLeftCorner(n, n) = -0.5 * id;
  m.bottomRightCorner(n, n) = 0.5 * id;
  return SpMat::from_matrix(m);
}

SpMat sp_tau_wigner(double tau, int n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  m.topLeftCorner(n, n) = id;
  m.topRightCorner(n, n) = id;
  m.bottomLeftCorner(n, n) = -(1.0 - tau) * id;
  m.bottomRightCorner(n, n) = tau * id;
  return SpMat::from_matrix(m);
}

SpMat sp_stft(int n) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  m.topLeftCorner(n, n) = id;
  m.bottomLeftCorner(n, n) = -id;
  m.bottomRightCorner(n, n) = id;
  return SpMat::from_matrix(m);
}

SpMat sp_by_name(const std::string& name, int n) {
  if (name == "identity") return sp_identity(n);
  if (name == "fourier" || name == "J") return sp_fourier(n);
  if (name == "pi") return sp_pi(n);
  if (name == "stft") return sp_stft(n);
  if (name.rfind("tau-wigner:", 0) == 0) {
    double tau = std::stod(name.substr(11));
    return sp_tau_wigner(tau, n);
  }
  throw validation_error("symplectic: unknown special matrix name: " + name);
}

SpMat sp2(double a, double b, double c, double d, double tol) {
  Eigen::MatrixXd m(2, 2);
  m << a, b, c, d;
  return SpMat::from_matrix(m, tol);
}

SpMat sp4(const double rows[4][4], double tol) {
  Eigen::MatrixXd m(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = rows[i][j];
  return SpMat::from_matrix(m, tol);
}

SpMat sp_from_quadratic(const Eigen::MatrixXd& F) {
  int n = static_cast<int>(F.rows());
  if (F.cols() != n) throw validation_error("sp_from_quadratic: F must be square");
  if ((F - F.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw validation_error("sp_from_quadratic: F must be symmetric");
  Eigen::MatrixXd m(2 * n, 2 * n);
  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  m.topLeftCorner(n, n) = F;
  m.topRightCorner(n, n) = id;
  m.bottomLeftCorner(n, n) = F - id;
  m.bottomRightCorner(n, n) = id;
  return SpMat::from_matrix(m);
}

int ham_param_count(int n) { return 2 * n * n + n; }

Eigen::MatrixXd ham_matrix(const std::vector<double>& params, int n) {
  if (static_cast<int>(params.size()) != ham_param_count(n))
    throw validation_error("ham_matrix: wrong parameter count");
  Eigen::MatrixXd P(n, n), Q = Eigen::MatrixXd::Zero(n, n), R = Eigen::MatrixXd::Zero(n, n);
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) P(i, j) = params[k++];
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      Q(i, j) = Q(j, i) = params[k++];
    }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      R(i, j) = R(j, i) = params[k++];
    }
  Eigen::MatrixXd H(2 * n, 2 * n);
  H.topLeftCorner(n, n) = P;
  H.topRightCorner(n, n) = Q;
  H.bottomLeftCorner(n, n) = R;
  H.bottomRightCorner(n, n) = -P.transpose();
  return H;
}

SpMat exp_param(const std::vector<double>& params, int n) {
  Eigen::MatrixXd H = ham_matrix(params, n);
  if (H.cwiseAbs().maxCoeff() > 60.0)
    throw numerical_error("exp_param: parameter overflow");
  Eigen::MatrixXd M = H.exp();
  if (!M.allFinite() || M.cwiseAbs().maxCoeff() > 1e12)
    throw numerical_error("exp_param: matrix exponential overflow");
  double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  return SpMat::from_matrix(M, std::max(1e-10, scale * scale * 1e-12));
}

namespace {

double parse_entry(const nlohmann::json& v) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    auto slash = s.find('/');
    try {
      if (slash == std::string::npos) return std::stod(s);
      double num = std::stod(s.substr(0, slash));
      double den = std::stod(s.substr(slash + 1));
      if (den == 0.0) throw validation_error("matrix json: division by zero in entry " + s);
      return num / den;
    } catch (const validation_error&) {
      throw;
    } catch (const std::exception&) {
      throw validation_error("matrix json: cannot parse entry " + s);
    }
  }
  throw validation_error("matrix json: entry must be a number or rational string");
}

}  // namespace

SpMat sp_from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const std::exception& e) {
    throw validation_error(std::string("matrix json: parse error: ") + e.what());
  }
  if (!j.contains("rows") || !j["rows"].is_array())
    throw validation_error("matrix json: missing rows array");
  auto rows = j["rows"];
  int dim = static_cast<int>(rows.size());
  Eigen::MatrixXd m(dim, dim);
  for (int i = 0; i < dim; ++i) {
    if (!rows[i].is_array() || static_cast<int>(rows[i].size()) != dim)
      throw validation_error("matrix json: rows must form a square matrix");
    for (int k = 0; k < dim; ++k) m(i, k) = parse_entry(rows[i][k]);
  }
  if (j.contains("n") && j["n"].get<int>() * 2 != dim)
    throw validation_error("matrix json: n field disagrees with row count");
  return SpMat::from_matrix(m);
}

std::string sp_to_json_text(const SpMat& m) {
  nlohmann::json j;
  j["n"] = m.n();
  auto rows = nlohmann::json::array();
  for (int i = 0; i < 2 * m.n(); ++i) {
    auto row = nlohmann::json::array();
    for (int k = 0; k < 2 * m.n(); ++k) row.push_back(m.matrix()(i, k));
    rows.push_back(row);
  }
  j["rows"] = rows;
  return j.dump(2);
}

SpMat load_matrix_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw validation_error("cannot open: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return sp_from_json_text(ss.str());
}

void save_matrix_json(const std::string& path, const SpMat& m) {
  std::ofstream out(path);
  if (!out) throw validation_error("cannot open for writing: " + path);
  out << sp_to_json_text(m) << "\n";
}

}  // namespace mtfa
