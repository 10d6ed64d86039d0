#pragma once
// Real symplectic matrices in the row-vector convention: M is symplectic
// when M J M^T = J with J = [[0, I], [-I, 0]]. Blocks are named
// M = [[A, B], [C, D]].

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "mtfa/common.hpp"

namespace mtfa {

class SpMat {
 public:
  // Validates shape, finiteness and the symplectic identity.
  static SpMat from_matrix(const Eigen::MatrixXd& m, double tol = 1e-10);

  int n() const { return n_; }
  const Eigen::MatrixXd& matrix() const { return m_; }

  Eigen::MatrixXd A() const { return m_.topLeftCorner(n_, n_); }
  Eigen::MatrixXd B() const { return m_.topRightCorner(n_, n_); }
  Eigen::MatrixXd C() const { return m_.bottomLeftCorner(n_, n_); }
  Eigen::MatrixXd D() const { return m_.bottomRightCorner(n_, n_); }

  double a() const { return m_(0, 0); }
  double b() const { return m_(0, 1); }
  double c() const { return m_(1, 0); }
  double d() const { return m_(1, 1); }

  SpMat compose(const SpMat& rhs) const;  // this * rhs
  SpMat inverse() const;                  // [[D^T, -B^T], [-C^T, A^T]]

  bool is_identity(double tol = 1e-12) const;

  // max-abs residual of M J M^T - J.
  static double sym_residual(const Eigen::MatrixXd& m);

 private:
  SpMat(int n, Eigen::MatrixXd m) : n_(n), m_(std::move(m)) {}
  int n_ = 0;
  Eigen::MatrixXd m_;
};

Eigen::MatrixXd j_matrix(int n);

SpMat sp_identity(int n);
SpMat sp_fourier(int n);                    // J
SpMat sp_pi(int n);                         // [[I, I], [-I/2, I/2]]
SpMat sp_tau_wigner(double tau, int n);     // [[I, I], [-(1-tau) I, tau I]]
SpMat sp_stft(int n);                       // [[I, 0], [-I, I]]
SpMat sp_by_name(const std::string& name, int n);

// 2x2 convenience constructor (validated).
SpMat sp2(double a, double b, double c, double d, double tol = 1e-10);
// 4x4 from row-major entries (validated).
SpMat sp4(const double rows[4][4], double tol = 1e-10);
// [[F, I], [F - I, I]] for symmetric F; gives B = I and B^{-1} A = F.
SpMat sp_from_quadratic(const Eigen::MatrixXd& F);

// Hamiltonian chart: params parameterize H = [[P, Q], [R, -P^T]] with
// Q, R symmetric (packed order: P row-major, then upper triangles of Q
// and R); exp(H) is symplectic. Param count is 2n^2 + n.
int ham_param_count(int n);
Eigen::MatrixXd ham_matrix(const std::vector<double>& params, int n);
SpMat exp_param(const std::vector<double>& params, int n);

// JSON persistence: {"n": n, "rows": [[...]]}; entries may be numbers
// or rational strings like "-1/5".
SpMat load_matrix_json(const std::string& path);
void save_matrix_json(const std::string& path, const SpMat& m);
SpMat sp_from_json_text(const std::string& text);
std::string sp_to_json_text(const SpMat& m);

}  // namespace mtfa
